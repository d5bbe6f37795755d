#include "medrag/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "medrag/text.hpp"

namespace medrag {

namespace {
std::optional<EvidenceCategory> chunk_evidence_category(const Chunk& c) {
    auto it = c.metadata.find("evidence_category");
    if (it == c.metadata.end()) return std::nullopt;
    return evidence_category_from_string(it->second);
}

std::optional<SourceCategory> chunk_source_category(const Chunk& c) {
    auto it = c.metadata.find("source_category");
    if (it == c.metadata.end()) return std::nullopt;
    return source_category_from_string(it->second);
}
}  // namespace

std::vector<EvidenceItem> bm25_search(const std::string& query,
                                      const std::vector<Chunk>& chunks, int k,
                                      double k1, double b) {
    if (chunks.empty() || k <= 0) return {};

    const std::size_t n = chunks.size();
    std::vector<std::unordered_map<std::string, int>> term_freqs(n);
    std::unordered_map<std::string, int> doc_freq;
    double total_len = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& t : word_tokens(chunks[i].full_text())) ++term_freqs[i][t];
        for (const auto& [term, tf] : term_freqs[i]) ++doc_freq[term];
        total_len += chunks[i].token_count;
    }
    double avg_len = total_len / static_cast<double>(n);

    auto query_terms = word_tokens(query);
    std::vector<double> scores(n, 0.0);
    for (const auto& term : query_terms) {
        auto df_it = doc_freq.find(term);
        if (df_it == doc_freq.end()) continue;
        double df = df_it->second;
        double idf = std::log((static_cast<double>(n) - df + 0.5) / (df + 0.5) + 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto tf_it = term_freqs[i].find(term);
            if (tf_it == term_freqs[i].end()) continue;
            double tf = tf_it->second;
            double dl = chunks[i].token_count;
            double denom = tf + k1 * (1.0 - b + b * (avg_len > 0 ? dl / avg_len : 0.0));
            scores[i] += idf * tf * (k1 + 1.0) / denom;
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto better = [&](std::size_t a, std::size_t c) {
        if (scores[a] != scores[c]) return scores[a] > scores[c];
        if (chunks[a].doc_id != chunks[c].doc_id) return chunks[a].doc_id < chunks[c].doc_id;
        return chunks[a].chunk_index < chunks[c].chunk_index;
    };
    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), better);

    std::vector<EvidenceItem> out;
    out.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        const Chunk& c = chunks[order[r]];
        EvidenceItem item;
        item.doc_id = c.doc_id;
        item.chunk_index = c.chunk_index;
        item.score = scores[order[r]];
        item.rank = static_cast<int>(r) + 1;
        item.evidence_category = chunk_evidence_category(c);
        item.source_category = chunk_source_category(c);
        out.push_back(std::move(item));
    }
    return out;
}

}  // namespace medrag
