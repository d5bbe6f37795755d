#include "medrag/embedder.hpp"

#include <cmath>
#include <stdexcept>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "medrag/errors.hpp"
#include "medrag/hash.hpp"
#include "medrag/text.hpp"

namespace medrag {

namespace {
void l2_normalize(std::vector<float>& v) {
    double norm_sq = 0.0;
    for (float x : v) norm_sq += static_cast<double>(x) * x;
    if (norm_sq <= 0.0) {
        if (!v.empty()) v[0] = 1.0f;
        return;
    }
    float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
    for (float& x : v) x *= inv;
}

// bert-family models prefer 128-word chunks with 32-word overlaps,
// larger-context models 512/32.
int preferred_chunk(EmbedderFamily family) {
    return family == EmbedderFamily::bert ? 128 : 512;
}
}  // namespace

std::vector<float> hash_embed(const std::string& text, int dim, std::uint64_t seed) {
    if (dim < 8) throw std::invalid_argument("hash_embed: dim must be >= 8");
    std::vector<float> v(static_cast<std::size_t>(dim), 0.0f);
    bool any = false;
    for (const auto& token : lowercase_tokens(text)) {
        std::uint64_t h = fnv1a64_seeded(token, seed);
        auto bucket = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim));
        bool negative = ((h / static_cast<std::uint64_t>(dim)) & 1ULL) != 0;
        v[bucket] += negative ? -1.0f : 1.0f;
        any = true;
    }
    if (!any) {
        v[0] = 1.0f;
        return v;
    }
    l2_normalize(v);
    return v;
}

HashEmbedder::HashEmbedder(int dim, std::uint64_t seed, EmbedderFamily family)
    : dim_(dim), seed_(seed), family_(family) {
    if (dim < 8) throw std::invalid_argument("HashEmbedder: dim must be >= 8");
}

int HashEmbedder::preferred_chunk_tokens() const { return preferred_chunk(family_); }
int HashEmbedder::preferred_overlap_tokens() const { return 32; }

std::vector<std::vector<float>> HashEmbedder::embed(
    const std::vector<std::string>& texts) const {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embed(t, dim_, seed_));
    return out;
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint, int dim, EmbedderFamily family,
                               double timeout_seconds)
    : endpoint_(std::move(endpoint)),
      dim_(dim),
      family_(family),
      timeout_seconds_(timeout_seconds) {}

int RemoteEmbedder::preferred_chunk_tokens() const { return preferred_chunk(family_); }
int RemoteEmbedder::preferred_overlap_tokens() const { return 32; }

std::vector<std::vector<float>> RemoteEmbedder::embed(
    const std::vector<std::string>& texts) const {
    auto scheme_end = endpoint_.find("://");
    if (scheme_end == std::string::npos)
        throw TransportError("malformed endpoint: " + endpoint_, 1);
    auto path_start = endpoint_.find('/', scheme_end + 3);
    std::string host = endpoint_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : endpoint_.substr(path_start);

    nlohmann::json body;
    body["texts"] = texts;
    httplib::Client client(host);
    client.set_connection_timeout(std::chrono::duration<double>(timeout_seconds_));
    client.set_read_timeout(std::chrono::duration<double>(timeout_seconds_));
    auto result = client.Post(path, body.dump(), "application/json");
    if (!result) {
        throw TransportError("embedding request failed: " +
                                 httplib::to_string(result.error()),
                             1);
    }
    if (result->status < 200 || result->status >= 300) {
        throw TransportError("embedding HTTP " + std::to_string(result->status), 1);
    }
    nlohmann::json j = nlohmann::json::parse(result->body, nullptr, false);
    if (j.is_discarded() || !j.contains("vectors")) {
        throw TransportError("embedding response missing 'vectors'", 1);
    }
    std::vector<std::vector<float>> out;
    for (const auto& row : j["vectors"]) {
        std::vector<float> v = row.get<std::vector<float>>();
        if (static_cast<int>(v.size()) != dim_) {
            throw Error("embedding dimension mismatch: got " +
                        std::to_string(v.size()) + ", expected " + std::to_string(dim_));
        }
        l2_normalize(v);
        out.push_back(std::move(v));
    }
    if (out.size() != texts.size()) {
        throw Error("embedding count mismatch: got " + std::to_string(out.size()) +
                    " vectors for " + std::to_string(texts.size()) + " texts");
    }
    return out;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dim mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

}  // namespace medrag
