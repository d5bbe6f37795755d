#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace medrag {

struct SearchHit {
    std::string id;
    double score = 0.0;
};

// Immutable id-addressed matrix of unit-norm embeddings with exact
// top-k inner-product search. Rows are float32, row-major.
class VectorIndex {
public:
    VectorIndex() = default;

    // Takes ownership of ids and row-major vectors (n * dim floats).
    // Ids must be unique; rows must be unit-norm within 1e-5 unless
    // `renormalize` is set, in which case deviating rows are rescaled
    // (all-zero rows are always an error).
    static VectorIndex build(std::vector<std::string> ids, std::vector<float> vectors,
                             int dim, bool renormalize = false);

    int dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const float* row(std::size_t i) const { return vectors_.data() + i * dim_; }
    const std::vector<float>& raw() const { return vectors_; }

    bool operator==(const VectorIndex&) const = default;

private:
    int dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> vectors_;
};

// Exact inner-product top-k; scores non-increasing, ties broken by
// ascending id (lexicographic). Throws on dimension mismatch.
std::vector<SearchHit> search(const VectorIndex& index, const std::vector<float>& query,
                              int k);

// Binary format: magic "HVIX", version u16, dim u32, count u64, rows of
// little-endian float32, then ids as u32 length + UTF-8 bytes each.
std::string save_index(const VectorIndex& index);
VectorIndex load_index(std::string_view bytes);

void save_index_file(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index_file(const std::filesystem::path& path);

// Loads precomputed document embeddings. With an ids file, the
// embeddings file holds one JSON array per line and the ids file one id
// per line (row i belongs to id i); without it, each line is an object
// {"pmid": ..., "vector": [...]}. Rows deviating from unit norm by more
// than 1e-3 are re-normalized (logged to stderr); zero or non-finite
// rows are errors naming the row.
VectorIndex load_precomputed(const std::filesystem::path& embeddings_file,
                             const std::filesystem::path& ids_file = {});

}  // namespace medrag
