#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace medrag {

// Dense text encoder. Implementations must return L2-normalized vectors
// (within 1e-6) and be deterministic for a fixed configuration. The
// preferred chunk/overlap sizes drive adaptive chunk sizing.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual int dim() const = 0;
    virtual int preferred_chunk_tokens() const = 0;
    virtual int preferred_overlap_tokens() const = 0;
    virtual std::vector<std::vector<float>> embed(
        const std::vector<std::string>& texts) const = 0;

    std::vector<float> embed_one(const std::string& text) const {
        return embed({text}).front();
    }
};

// Signed feature hashing over lowercased whitespace tokens: each token
// lands in bucket hash % dim with sign from the next hash bit, term
// frequencies accumulate, the result is L2-normalized. Texts with no
// tokens (or total cancellation) map to e_0. Stands in for trained
// encoders in tests and offline runs.
std::vector<float> hash_embed(const std::string& text, int dim, std::uint64_t seed);

enum class EmbedderFamily { bert, generic };

class HashEmbedder final : public Embedder {
public:
    HashEmbedder(int dim, std::uint64_t seed,
                 EmbedderFamily family = EmbedderFamily::bert);

    int dim() const override { return dim_; }
    int preferred_chunk_tokens() const override;
    int preferred_overlap_tokens() const override;
    std::vector<std::vector<float>> embed(
        const std::vector<std::string>& texts) const override;

    std::uint64_t seed() const { return seed_; }

private:
    int dim_;
    std::uint64_t seed_;
    EmbedderFamily family_;
};

// Calls an embedding service: POST {"texts": [...]} -> {"vectors": [[...]]}.
// The reported dimension is validated on first use; vectors are
// re-normalized on receipt.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(std::string endpoint, int dim,
                   EmbedderFamily family = EmbedderFamily::generic,
                   double timeout_seconds = 120.0);

    int dim() const override { return dim_; }
    int preferred_chunk_tokens() const override;
    int preferred_overlap_tokens() const override;
    std::vector<std::vector<float>> embed(
        const std::vector<std::string>& texts) const override;

private:
    std::string endpoint_;
    int dim_;
    EmbedderFamily family_;
    double timeout_seconds_;
};

double cosine(const std::vector<float>& a, const std::vector<float>& b);

}  // namespace medrag
