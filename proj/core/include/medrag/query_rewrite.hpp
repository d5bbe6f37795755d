#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "medrag/boolean_expr.hpp"
#include "medrag/eutils.hpp"
#include "medrag/generation.hpp"
#include "medrag/text.hpp"

namespace medrag {

struct NormalizedQuery {
    std::string original;
    std::string normalized;  // lowercase, punctuation stripped, stopwords removed
    std::vector<std::pair<std::string, double>> content_terms;  // (term, weight > 0)
};

// Correction hook applied to the raw question before normalization.
using CorrectionHook = std::function<std::string(const std::string&)>;

// Lowercases, strips punctuation except intra-word hyphens, drops
// stopwords. Terms absent from the general-medical word list weigh 1.2,
// others 1.0, so relaxation drops the least specific term first.
// Throws std::invalid_argument on blank input and NoContentTermsError
// when every token is a stopword.
NormalizedQuery normalize(const std::string& raw,
                          const std::unordered_set<std::string>& stopword_list =
                              english_stopwords(),
                          const CorrectionHook& correction = nullptr);

struct NoContentTermsError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class LadderOrigin { llm, rule_based };

// Boolean expressions ordered most specific -> most relaxed.
struct QueryLadder {
    std::vector<BooleanExpr> levels;
    LadderOrigin origin = LadderOrigin::rule_based;
    std::optional<std::string> fallback_reason;
};

// Level 0 is the AND of all content terms (tagged [Title/Abstract]); each
// later level applies one relaxation: drop the lowest-weight term while
// at least two would remain (earliest occurrence wins ties), then turn
// the top-level AND into OR.
QueryLadder generate_ladder_rule_based(const NormalizedQuery& q, int max_levels = 4);

// Two-step prompt against the generation client: analyze, then emit one
// Boolean expression per line. Unparseable lines are dropped; if nothing
// parses or the client fails, falls back to the rule-based ladder.
QueryLadder generate_ladder_llm(const std::string& raw, GenerationClient& llm,
                                int max_levels = 4);

struct LadderExecution {
    std::vector<std::string> pmids;  // deduplicated, first occurrence kept
    std::size_t level_used = 0;
    std::size_t levels_queried = 0;
};

using SearchFn = std::function<ESearchResult(const std::string& term, int retmax)>;

// Runs ladder levels in order and stops at the first one returning at
// least min_docs distinct ids; if none qualifies, the level with the most
// ids wins (earliest on ties). Levels that fail at transport count as
// empty; if every level fails, the errors are aggregated and rethrown.
LadderExecution execute_ladder(const QueryLadder& ladder, const SearchFn& search,
                               int min_docs, int retmax);

}  // namespace medrag
