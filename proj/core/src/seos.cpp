#include "medrag/seos.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace medrag {

int SeosConfig::resolved_target(const Embedder& e) const {
    int target = target_chunk_tokens.value_or(e.preferred_chunk_tokens());
    if (target <= 0) throw std::invalid_argument("seos: target_chunk_tokens must be positive");
    return target;
}

int SeosConfig::resolved_overlap(const Embedder& e) const {
    int overlap = overlap_tokens.value_or(e.preferred_overlap_tokens());
    if (overlap < 0) throw std::invalid_argument("seos: overlap_tokens must be >= 0");
    return overlap;
}

TokenCounter SeosConfig::counter() const {
    return token_counter ? token_counter : default_token_counter();
}

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Token ending at text[i] (inclusive), lowercased.
std::string trailing_token(std::string_view text, std::size_t i) {
    std::size_t start = i;
    while (start > 0 && !std::isspace(static_cast<unsigned char>(text[start - 1])))
        --start;
    std::string token(text.substr(start, i - start + 1));
    for (auto& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return token;
}

bool boundary_after(std::string_view text, std::size_t i) {
    // text[i] is a terminator; require whitespace then uppercase/digit.
    std::size_t j = i + 1;
    if (j >= text.size() || !std::isspace(static_cast<unsigned char>(text[j]))) return false;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j >= text.size()) return false;
    unsigned char next = static_cast<unsigned char>(text[j]);
    if (!std::isupper(next) && !std::isdigit(next)) return false;
    if (text[i] == '.' && sentence_abbreviations().count(trailing_token(text, i)))
        return false;
    return true;
}

}  // namespace

std::vector<std::string_view> split_sentences(std::string_view text) {
    std::vector<std::string_view> spans;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        // trim whitespace off both ends of [start, end)
        std::size_t b = start;
        while (b < end && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
        std::size_t e = end;
        while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
        if (e > b) spans.push_back(text.substr(b, e - b));
        start = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (is_terminator(text[i]) && boundary_after(text, i)) {
            flush(i + 1);
        }
    }
    flush(text.size());
    return spans;
}

GapSeries compute_gap_series(const std::vector<std::string>& sentences,
                             const Embedder& embedder, const SeosConfig& cfg) {
    const std::size_t n = sentences.size();
    if (n < 2) throw std::invalid_argument("compute_gap_series: nothing to segment");
    if (cfg.window_w < 1) throw std::invalid_argument("seos: window_w must be >= 1");
    if (cfg.smoothing_width < 1 || cfg.smoothing_width % 2 == 0) {
        throw std::invalid_argument("seos: smoothing_width must be odd and positive");
    }
    const auto w = static_cast<std::size_t>(cfg.window_w);

    // One batched embed call per document: left then right windows.
    std::vector<std::string> windows;
    windows.reserve(2 * (n - 1));
    for (std::size_t g = 0; g + 1 < n; ++g) {
        std::size_t lo = g + 1 >= w ? g + 1 - w : 0;
        std::vector<std::string> left(sentences.begin() + static_cast<std::ptrdiff_t>(lo),
                                      sentences.begin() + static_cast<std::ptrdiff_t>(g + 1));
        windows.push_back(join(left, " "));
    }
    for (std::size_t g = 0; g + 1 < n; ++g) {
        std::size_t hi = std::min(n, g + 1 + w);
        std::vector<std::string> right(
            sentences.begin() + static_cast<std::ptrdiff_t>(g + 1),
            sentences.begin() + static_cast<std::ptrdiff_t>(hi));
        windows.push_back(join(right, " "));
    }
    auto vectors = embedder.embed(windows);

    GapSeries series;
    series.scores.resize(n - 1);
    for (std::size_t g = 0; g + 1 < n; ++g) {
        series.scores[g] = cosine(vectors[g], vectors[n - 1 + g]);
    }

    // centered moving average, shrinking at the edges
    const std::size_t half = static_cast<std::size_t>(cfg.smoothing_width) / 2;
    const std::size_t m = series.scores.size();
    series.smoothed.resize(m);
    for (std::size_t g = 0; g < m; ++g) {
        std::size_t lo = g >= half ? g - half : 0;
        std::size_t hi = std::min(m - 1, g + half);
        double sum = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) sum += series.scores[i];
        series.smoothed[g] = sum / static_cast<double>(hi - lo + 1);
    }

    // valley depth at local minima: climb to the nearest peak both ways
    series.depths.assign(m, 0.0);
    const auto& sm = series.smoothed;
    for (std::size_t g = 0; g < m; ++g) {
        bool left_ok = g == 0 || sm[g] <= sm[g - 1];
        bool right_ok = g + 1 == m || sm[g] <= sm[g + 1];
        if (!left_ok || !right_ok) continue;
        std::size_t i = g;
        while (i > 0 && sm[i - 1] >= sm[i]) --i;
        std::size_t j = g;
        while (j + 1 < m && sm[j + 1] >= sm[j]) ++j;
        series.depths[g] = (sm[i] - sm[g]) + (sm[j] - sm[g]);
    }
    return series;
}

std::vector<int> detect_boundaries(const GapSeries& series, const SeosConfig& cfg) {
    std::vector<double> positive;
    for (double d : series.depths) {
        if (d > 0.0) positive.push_back(d);
    }
    if (positive.empty()) return {};

    double mean = 0.0;
    for (double d : positive) mean += d;
    mean /= static_cast<double>(positive.size());
    double var = 0.0;
    for (double d : positive) var += (d - mean) * (d - mean);
    var /= static_cast<double>(positive.size());
    double threshold = mean - cfg.depth_coefficient * std::sqrt(var);

    std::vector<int> kept;
    for (std::size_t g = 0; g < series.depths.size(); ++g) {
        double d = series.depths[g];
        if (d > 0.0 && d >= threshold) {
            int gap = static_cast<int>(g);
            if (!kept.empty() && gap - kept.back() < 2) {
                // keep the deeper of the pair; earlier wins ties
                if (d > series.depths[static_cast<std::size_t>(kept.back())]) {
                    kept.back() = gap;
                }
            } else {
                kept.push_back(gap);
            }
        }
    }
    return kept;
}

namespace {

struct PackedChunk {
    std::vector<std::string> sentences;
    bool oversized = false;
};

// Greedy packing of each segment's sentences within the token target.
std::vector<PackedChunk> pack_segments(const std::vector<std::string>& sentences,
                                       const std::vector<int>& boundaries, int target,
                                       const TokenCounter& counter) {
    std::vector<int> token_counts(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i)
        token_counts[i] = counter(sentences[i]);

    std::vector<PackedChunk> chunks;
    std::size_t seg_start = 0;
    auto boundary_it = boundaries.begin();
    while (seg_start < sentences.size()) {
        std::size_t seg_end = sentences.size();  // exclusive
        if (boundary_it != boundaries.end()) {
            seg_end = static_cast<std::size_t>(*boundary_it) + 1;
            ++boundary_it;
        }
        PackedChunk current;
        int current_tokens = 0;
        for (std::size_t i = seg_start; i < seg_end; ++i) {
            if (token_counts[i] > target) {
                // a lone sentence over the target becomes its own chunk
                if (!current.sentences.empty()) {
                    chunks.push_back(std::move(current));
                    current = {};
                    current_tokens = 0;
                }
                chunks.push_back({{sentences[i]}, true});
                continue;
            }
            if (current_tokens + token_counts[i] > target && !current.sentences.empty()) {
                chunks.push_back(std::move(current));
                current = {};
                current_tokens = 0;
            }
            current.sentences.push_back(sentences[i]);
            current_tokens += token_counts[i];
        }
        if (!current.sentences.empty()) chunks.push_back(std::move(current));
        seg_start = seg_end;
    }
    return chunks;
}

std::vector<Chunk> assemble_chunks(const std::vector<PackedChunk>& packed, int overlap,
                                   const TokenCounter& counter, const std::string& doc_id,
                                   const std::map<std::string, std::string>& base_metadata) {
    std::vector<Chunk> chunks;
    chunks.reserve(packed.size());
    for (std::size_t i = 0; i < packed.size(); ++i) {
        Chunk chunk;
        chunk.doc_id = doc_id;
        chunk.chunk_index = static_cast<int>(i);
        chunk.core_text = join(packed[i].sentences, " ");
        if (i > 0 && overlap > 0) {
            // trailing whole sentences of the previous chunk within budget
            const auto& prev = packed[i - 1].sentences;
            std::vector<std::string> tail;
            int used = 0;
            for (auto it = prev.rbegin(); it != prev.rend(); ++it) {
                int t = counter(*it);
                if (used + t > overlap) break;
                tail.push_back(*it);
                used += t;
            }
            std::reverse(tail.begin(), tail.end());
            chunk.overlap_prefix = join(tail, " ");
        }
        chunk.metadata = base_metadata;
        if (packed[i].oversized) chunk.metadata["oversized"] = "true";
        chunk.token_count = counter(chunk.full_text());
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

}  // namespace

std::string_view chunking_text(const Document& doc) {
    if (doc.source_category == SourceCategory::D1) {
        return doc.abstract ? std::string_view(*doc.abstract) : std::string_view{};
    }
    if (doc.full_text && !doc.full_text->empty()) return *doc.full_text;
    return doc.abstract ? std::string_view(*doc.abstract) : std::string_view{};
}

std::map<std::string, std::string> document_metadata(const Document& doc) {
    std::map<std::string, std::string> m;
    m["title"] = doc.title;
    m["pub_year"] = doc.pub_date ? std::to_string(doc.pub_date->year) : "";
    m["source_category"] = to_string(doc.source_category);
    return m;
}

std::vector<Chunk> chunk_text_seos(std::string_view text, const Embedder& embedder,
                                   const SeosConfig& cfg, const std::string& doc_id,
                                   std::map<std::string, std::string> base_metadata) {
    auto spans = split_sentences(text);
    if (spans.empty()) return {};
    std::vector<std::string> sentences;
    sentences.reserve(spans.size());
    for (auto s : spans) sentences.emplace_back(s);

    std::vector<int> boundaries;
    if (sentences.size() >= 2) {
        boundaries = detect_boundaries(compute_gap_series(sentences, embedder, cfg), cfg);
    }

    int target = cfg.resolved_target(embedder);
    int overlap = cfg.resolved_overlap(embedder);
    if (overlap >= target) {
        throw std::invalid_argument("seos: overlap_tokens must be < target_chunk_tokens");
    }
    auto counter = cfg.counter();
    auto packed = pack_segments(sentences, boundaries, target, counter);
    return assemble_chunks(packed, overlap, counter, doc_id, base_metadata);
}

std::vector<Chunk> chunk_document(const Document& doc, const Embedder& embedder,
                                  const SeosConfig& cfg) {
    return chunk_text_seos(chunking_text(doc), embedder, cfg, doc.pmid,
                           document_metadata(doc));
}

std::vector<Chunk> fixed_splitter(std::string_view text, int chunk_tokens,
                                  int overlap_tokens, const std::string& doc_id,
                                  std::map<std::string, std::string> base_metadata) {
    if (chunk_tokens <= 0) throw std::invalid_argument("fixed_splitter: chunk_tokens must be positive");
    if (overlap_tokens < 0 || overlap_tokens >= chunk_tokens) {
        throw std::invalid_argument("fixed_splitter: need 0 <= overlap_tokens < chunk_tokens");
    }
    auto spans = split_sentences(text);
    if (spans.empty()) return {};

    // cores as token lists so oversized sentences can split mid-sentence
    std::vector<std::vector<std::string>> cores;
    std::vector<std::string> current;
    int current_tokens = 0;
    auto close = [&] {
        if (!current.empty()) {
            cores.push_back(std::move(current));
            current = {};
            current_tokens = 0;
        }
    };
    for (auto span : spans) {
        auto tokens = whitespace_tokens(span);
        if (static_cast<int>(tokens.size()) > chunk_tokens) {
            close();
            for (std::size_t off = 0; off < tokens.size();
                 off += static_cast<std::size_t>(chunk_tokens)) {
                std::size_t end =
                    std::min(tokens.size(), off + static_cast<std::size_t>(chunk_tokens));
                cores.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(off),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(end));
            }
            continue;
        }
        if (current_tokens + static_cast<int>(tokens.size()) > chunk_tokens) close();
        current.insert(current.end(), tokens.begin(), tokens.end());
        current_tokens += static_cast<int>(tokens.size());
    }
    close();

    std::vector<Chunk> chunks;
    chunks.reserve(cores.size());
    for (std::size_t i = 0; i < cores.size(); ++i) {
        Chunk chunk;
        chunk.doc_id = doc_id;
        chunk.chunk_index = static_cast<int>(i);
        chunk.core_text = join(cores[i], " ");
        if (i > 0 && overlap_tokens > 0) {
            const auto& prev = cores[i - 1];
            std::size_t take = std::min<std::size_t>(prev.size(),
                                                     static_cast<std::size_t>(overlap_tokens));
            std::vector<std::string> tail(prev.end() - static_cast<std::ptrdiff_t>(take),
                                          prev.end());
            chunk.overlap_prefix = join(tail, " ");
        }
        chunk.metadata = base_metadata;
        chunk.token_count = count_whitespace_tokens(chunk.full_text());
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

std::vector<Chunk> chunk_document_fixed(const Document& doc, int chunk_tokens,
                                        int overlap_tokens) {
    return fixed_splitter(chunking_text(doc), chunk_tokens, overlap_tokens, doc.pmid,
                          document_metadata(doc));
}

}  // namespace medrag
