#pragma once

#include <string>
#include <vector>

#include "medrag/document.hpp"

namespace medrag {

// Okapi BM25 over chunks with IDF = ln((N - df + 0.5)/(df + 0.5) + 1),
// document length taken from the chunk's recorded token_count, scores
// summed over query term occurrences. Top-k with the global tie rule
// (doc_id, chunk_index ascending); zero-score chunks still rank.
std::vector<EvidenceItem> bm25_search(const std::string& query,
                                      const std::vector<Chunk>& chunks, int k,
                                      double k1 = 1.2, double b = 0.75);

}  // namespace medrag
