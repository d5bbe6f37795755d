#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "medrag/document.hpp"
#include "medrag/embedder.hpp"
#include "medrag/eutils.hpp"
#include "medrag/generation.hpp"
#include "medrag/query_rewrite.hpp"
#include "medrag/reranker.hpp"
#include "medrag/seos.hpp"
#include "medrag/vector_index.hpp"

namespace medrag {

struct HsrdrConfig {
    std::set<SourceCategory> sources_enabled = {SourceCategory::D1, SourceCategory::D2,
                                                SourceCategory::D3};
    int min_docs = 5;
    int retmax_term = 20;
    int k_semantic = 20;
    std::optional<DateRange> date_range;
    bool fetch_full_text = true;  // pull PMC bodies for D2/D3 documents
};

struct Provenance {
    std::vector<std::string> semantic_pmids;  // semantic-path hits, rank order
    std::vector<std::string> term_pmids;      // term-path hits, server order
    std::optional<std::size_t> level_used;
};

// Retrieved documents with their evidence categorization. The category
// map covers the whole retrieved union, including ids later dropped by
// fetching or filtering: E3 = semantic ∩ term, E1 = semantic only,
// E2 = term only.
struct DocumentPool {
    std::vector<Document> documents;
    std::map<std::string, EvidenceCategory> evidence_category_by_pmid;
    Provenance provenance;
    bool term_path_failed = false;
};

using LadderGenerator = std::function<QueryLadder(const std::string&)>;

// Dual-path document retrieval: semantic top-k over the index plus the
// Boolean ladder through esearch, then efetch + parse + classify +
// temporal/abstract filtering + source selection. A term-path transport
// failure degrades to semantic-only (flagged); both paths empty yields an
// empty pool.
DocumentPool hsrdr_retrieve(const std::string& query, const VectorIndex& semantic_index,
                            const Embedder& query_embedder, EutilsClient& eutils,
                            const LadderGenerator& rewriter, const HsrdrConfig& cfg);

struct TwoStageOptions {
    bool embed_metadata_in_text = false;
};

// Stage 1: dense top-k_dense over the chunks by inner product. Stage 2:
// when a reranker is given, its scores fully re-sort those candidates
// (dense and reranker scores are never mixed). Equal scores are ordered
// by (doc_id, chunk_index) ascending. Requires k_final <= k_dense.
std::vector<EvidenceItem> two_stage_retrieve(const std::string& query,
                                             const std::vector<Chunk>& chunks,
                                             const Embedder& embedder,
                                             const Reranker* reranker, int k_dense,
                                             int k_final,
                                             const TwoStageOptions& options = {});

// Rank-ordered context blocks "[rank] (pmid, year, source) text" within
// the token budget; the rank-1 block is always present, truncated to
// whole sentences when it alone exceeds the budget.
std::string assemble_context(const std::vector<EvidenceItem>& evidence,
                             const std::vector<Chunk>& chunks, int budget_tokens,
                             const TokenCounter& counter = default_token_counter());

struct QuestionRecord {
    std::string id;
    std::string question;
    std::vector<std::string> options;    // empty for open questions
    std::optional<std::string> gold;     // answer letter
};

struct LadderTrace {
    std::vector<std::string> levels;  // rendered expressions
    LadderOrigin origin = LadderOrigin::rule_based;
    std::optional<std::string> fallback_reason;
    std::optional<std::size_t> level_used;
};

// Everything a run produced for one question, enough to re-derive any
// evaluation downstream.
struct AnswerRecord {
    std::string question_id;
    std::string question;
    std::vector<std::string> options;
    std::optional<std::string> gold;
    std::string mode;  // "rag" or "no_retrieval"
    LadderTrace ladder;
    std::map<std::string, int> evidence_counts;
    std::map<std::string, int> source_counts;
    bool term_path_failed = false;
    std::vector<EvidenceItem> evidence;
    std::string context;
    std::string raw_output;
    std::optional<std::string> parsed_answer;  // nullopt = abstain

    bool answered_correctly() const {
        return gold && parsed_answer && *parsed_answer == *gold;
    }
};

// Final answer extraction: the last "Answer:" marker wins; multiple
// choice accepts a single letter within the option range (any case),
// open questions take the rest of the line. No parseable answer ->
// nullopt (abstain).
std::optional<std::string> parse_final_answer(const std::string& raw_output,
                                              std::size_t n_options);

enum class ChunkMethod { seos, fixed };

struct PipelineConfig {
    HsrdrConfig hsrdr;
    SeosConfig seos;
    ChunkMethod chunk_method = ChunkMethod::seos;
    int fixed_chunk_tokens = 512;
    int fixed_overlap_tokens = 32;
    int k_dense = 20;
    int k_final = 5;
    int budget_tokens = 1024;
    TwoStageOptions two_stage;
    bool retrieval_enabled = true;  // false = bare CoT baseline
};

// One question end to end: retrieve, chunk, two-stage rerank, assemble
// context, generate, parse. All model access goes through the injected
// components so fixture-backed runs are fully deterministic.
class QaPipeline {
public:
    struct Components {
        const VectorIndex* semantic_index = nullptr;
        std::shared_ptr<Embedder> embedder;
        EutilsClient* eutils = nullptr;
        LadderGenerator rewriter;
        std::shared_ptr<Reranker> reranker;
        GenerationClient* generator = nullptr;
    };

    QaPipeline(Components components, PipelineConfig config);

    AnswerRecord answer(const QuestionRecord& question) const;

    const PipelineConfig& config() const { return config_; }

private:
    Components components_;
    PipelineConfig config_;
};

// Prompt assembly shared by the pipeline and the eval tooling.
std::string build_answer_prompt(const QuestionRecord& question, const std::string& context);

}  // namespace medrag
