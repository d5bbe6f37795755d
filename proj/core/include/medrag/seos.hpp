#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medrag/document.hpp"
#include "medrag/embedder.hpp"
#include "medrag/text.hpp"

namespace medrag {

// Semantic-overlap segmentation parameters. Unset chunk/overlap sizes
// fall back to the embedder's preferred values, which is what makes the
// chunk sizing embedder-adaptive.
struct SeosConfig {
    int window_w = 3;          // sentences per side of a gap
    int smoothing_width = 3;   // centered moving average, odd
    double depth_coefficient = 0.5;
    std::optional<int> target_chunk_tokens;
    std::optional<int> overlap_tokens;
    TokenCounter token_counter;  // default: whitespace tokens

    int resolved_target(const Embedder& e) const;
    int resolved_overlap(const Embedder& e) const;
    TokenCounter counter() const;
};

// Cosine similarity across each inter-sentence gap, its smoothed form,
// and the valley-depth score at local minima (0 elsewhere).
struct GapSeries {
    std::vector<double> scores;
    std::vector<double> smoothed;
    std::vector<double> depths;
};

// Sentence boundaries fall after '.', '!' or '?' followed by whitespace
// and an uppercase letter or digit, unless the terminated token is a
// known abbreviation ("e.g.", "Fig.", single initials, ...). Spans are
// views into `text` covering all its non-whitespace content in order;
// text without a terminator is one span.
std::vector<std::string_view> split_sentences(std::string_view text);

// Similarity series over sentence gaps: for gap g the left window is
// sentences [max(0, g-w+1) .. g] and the right window [g+1 ..
// min(S-1, g+w)], joined by single spaces and embedded; the score is
// their cosine. Smoothing is a centered moving average that shrinks at
// the edges; depths follow the TextTiling construction (sum of climbs to
// the nearest peaks on both sides, local minima only).
// Throws std::invalid_argument for fewer than 2 sentences.
GapSeries compute_gap_series(const std::vector<std::string>& sentences,
                             const Embedder& embedder, const SeosConfig& cfg);

// Gaps whose depth is positive and at least mu - c*sigma over the
// positive depths. No positive depth means no boundary (one segment).
// Adjacent boundaries closer than 2 gaps are pruned keeping the deeper
// one (earlier on ties). Returned indices are ascending.
std::vector<int> detect_boundaries(const GapSeries& series, const SeosConfig& cfg);

// Full SEOS pass over a document: text choice by source category (D1 ->
// abstract, D2/D3 -> full text else abstract), topic segmentation,
// greedy sentence packing within the token target, and whole-sentence
// overlap within the overlap budget. A single sentence larger than the
// target becomes its own chunk with metadata oversized=true.
std::vector<Chunk> chunk_document(const Document& doc, const Embedder& embedder,
                                  const SeosConfig& cfg);

// SEOS over raw text with caller-supplied metadata.
std::vector<Chunk> chunk_text_seos(std::string_view text, const Embedder& embedder,
                                   const SeosConfig& cfg, const std::string& doc_id,
                                   std::map<std::string, std::string> base_metadata = {});

// Fixed-size baseline: complete sentences packed greedily up to
// chunk_tokens (oversized sentences split at token granularity) with a
// verbatim token-level overlap of exactly overlap_tokens where possible.
std::vector<Chunk> fixed_splitter(std::string_view text, int chunk_tokens,
                                  int overlap_tokens, const std::string& doc_id = "",
                                  std::map<std::string, std::string> base_metadata = {});

// fixed_splitter with document text selection and metadata, mirroring
// chunk_document.
std::vector<Chunk> chunk_document_fixed(const Document& doc, int chunk_tokens,
                                        int overlap_tokens);

// Text the chunkers operate on for a given document.
std::string_view chunking_text(const Document& doc);

std::map<std::string, std::string> document_metadata(const Document& doc);

}  // namespace medrag
