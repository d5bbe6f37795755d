#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "medrag/document.hpp"
#include "medrag/generation.hpp"
#include "medrag/pipeline.hpp"

namespace medrag {

// A judged query: which (doc, chunk) pairs count as relevant, plus the
// ranked results once a retrieval run filled them in. A relevant id
// without a chunk index matches any chunk of that document.
struct RetrievalJudgment {
    std::string query_id;
    std::string query;
    std::set<std::pair<std::string, std::optional<int>>> relevant_ids;
    std::vector<EvidenceItem> results;
};

bool is_relevant(const RetrievalJudgment& judgment, const EvidenceItem& item);

// 1 iff any of the top-k results is relevant.
int hits_at_k(const RetrievalJudgment& judgment, int k);
double mean_hits_at_k(const std::vector<RetrievalJudgment>& judgments, int k);

// 1/rank of the first relevant result within the top k, else 0.
double mrr_at_k(const RetrievalJudgment& judgment, int k);
double mean_mrr_at_k(const std::vector<RetrievalJudgment>& judgments, int k);

enum class CategoryFamily { evidence, source };

// Category label ("E1".."E3" / "D1".."D3") of one result, when known.
std::optional<std::string> category_label(const EvidenceItem& item, CategoryFamily family);

// RRF_c = sum over queries and over top-window results of category c of
// 1/(kappa + rank).
std::map<std::string, double> rrf_by_category(
    const std::vector<std::vector<EvidenceItem>>& results_per_query,
    CategoryFamily family, double kappa = 60.0, int top_window = 5);

// Shannon entropy (natural log) of the rank-position histogram each
// category occupies within the top window, pooled over queries. An empty
// histogram scores 0.
std::map<std::string, double> entropy_by_category(
    const std::vector<std::vector<EvidenceItem>>& results_per_query,
    CategoryFamily family, int top_window = 5);

// Fraction of pooled top-window results per category.
std::map<std::string, double> proportion_top5(
    const std::vector<std::vector<EvidenceItem>>& results_per_query,
    CategoryFamily family, int top_window = 5);

struct CategoryReport {
    // category -> (rrf, entropy, proportion); families share the table shape
    std::map<std::string, double> rrf;
    std::map<std::string, double> entropy;
    std::map<std::string, double> proportion;
};

CategoryReport category_report(const std::vector<std::vector<EvidenceItem>>& results,
                               CategoryFamily family, double kappa = 60.0,
                               int top_window = 5);

struct ClassificationMetrics {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<std::string> classes_without_predictions;  // precision counted as 0
};

// Standard multi-class metrics, macro-averaged over `classes`. Throws on
// length mismatch or empty input.
ClassificationMetrics classification_metrics(const std::vector<std::string>& predictions,
                                             const std::vector<std::string>& gold,
                                             const std::vector<std::string>& classes);

// Keeps questions whose text or options contain any term from the list,
// matched case-insensitively on word boundaries. Multiword terms match
// as phrases. Throws on an empty term list.
std::vector<QuestionRecord> mesh_filter(const std::vector<QuestionRecord>& questions,
                                        const std::vector<std::string>& term_list);

// Term file: one term or phrase per line, '#' comments and blanks skipped.
std::vector<std::string> read_term_list(const std::filesystem::path& path);

// Question ids both runs answered incorrectly (abstain counts as wrong).
// Both runs must cover the same ids; records must carry gold answers.
std::vector<std::string> hard_negative_set(const std::vector<AnswerRecord>& run_a,
                                           const std::vector<AnswerRecord>& run_b);

struct SyntheticPairsResult {
    std::vector<RetrievalJudgment> judgments;
    std::size_t skipped = 0;  // generator failures / empty questions
};

// Samples n chunks (seeded, without replacement) and asks the generator
// for one question answerable from each; the sampled chunk is the sole
// relevant id of the resulting judgment.
SyntheticPairsResult synthetic_pairs(const std::vector<Chunk>& corpus,
                                     GenerationClient& generator, std::size_t n,
                                     std::uint64_t seed = 0);

}  // namespace medrag
