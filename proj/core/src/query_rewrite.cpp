#include "medrag/query_rewrite.hpp"

#include <algorithm>
#include <sstream>

#include "medrag/errors.hpp"
#include "medrag/prompts.hpp"

namespace medrag {

namespace {
constexpr const char* kDefaultFieldTag = "[Title/Abstract]";

// Stopword entries normalized the same way query tokens are, so "you're"
// still matches once its apostrophe is stripped.
std::unordered_set<std::string> normalized_stopwords(
    const std::unordered_set<std::string>& raw) {
    std::unordered_set<std::string> out;
    out.reserve(raw.size() * 2);
    for (const auto& w : raw) {
        out.insert(w);
        for (const auto& t : word_tokens(w)) out.insert(t);
    }
    return out;
}
}  // namespace

NormalizedQuery normalize(const std::string& raw,
                          const std::unordered_set<std::string>& stopword_list,
                          const CorrectionHook& correction) {
    std::string input = correction ? correction(raw) : raw;
    if (input.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw std::invalid_argument("normalize: empty query");
    }
    const auto stop = normalized_stopwords(stopword_list);
    const auto& generic = general_medical_words();

    NormalizedQuery q;
    q.original = raw;
    std::vector<std::string> kept;
    for (const auto& tok : word_tokens(input)) {
        if (stop.count(tok)) continue;
        kept.push_back(tok);
        double weight = generic.count(tok) ? 1.0 : 1.2;
        q.content_terms.emplace_back(tok, weight);
    }
    if (q.content_terms.empty()) {
        throw NoContentTermsError("normalize: no content terms in '" + raw + "'");
    }
    q.normalized = join(kept, " ");
    return q;
}

QueryLadder generate_ladder_rule_based(const NormalizedQuery& q, int max_levels) {
    if (q.content_terms.empty()) {
        throw std::invalid_argument("generate_ladder_rule_based: no content terms");
    }
    auto as_expr = [](const std::vector<std::pair<std::string, double>>& terms,
                      bool use_or) {
        std::vector<BooleanExpr> children;
        children.reserve(terms.size());
        for (const auto& [text, weight] : terms) {
            children.push_back(BooleanExpr::make_term(text, kDefaultFieldTag));
        }
        if (children.size() == 1) return std::move(children[0]);
        return use_or ? BooleanExpr::make_or(std::move(children))
                      : BooleanExpr::make_and(std::move(children));
    };

    QueryLadder ladder;
    ladder.origin = LadderOrigin::rule_based;

    auto terms = q.content_terms;
    ladder.levels.push_back(as_expr(terms, false));
    while (static_cast<int>(ladder.levels.size()) < max_levels) {
        if (terms.size() >= 3) {
            auto lowest = std::min_element(
                terms.begin(), terms.end(),
                [](const auto& a, const auto& b) { return a.second < b.second; });
            terms.erase(lowest);
            ladder.levels.push_back(as_expr(terms, false));
        } else if (terms.size() == 2) {
            ladder.levels.push_back(as_expr(terms, true));
            break;
        } else {
            break;  // single term: nothing to relax
        }
    }
    return ladder;
}

QueryLadder generate_ladder_llm(const std::string& raw, GenerationClient& llm,
                                int max_levels) {
    auto fallback = [&](std::string reason) {
        QueryLadder ladder = generate_ladder_rule_based(normalize(raw), max_levels);
        ladder.fallback_reason = std::move(reason);
        return ladder;
    };

    std::string analysis;
    std::string lines;
    try {
        analysis = llm.complete(prompts::kRewriteAnalyzeV1, raw);
        lines = llm.complete(prompts::kRewriteBooleanV1,
                             "Question: " + raw + "\n" + analysis);
    } catch (const Error& e) {
        return fallback(std::string("llm unavailable: ") + e.what());
    }

    QueryLadder ladder;
    ladder.origin = LadderOrigin::llm;
    std::istringstream stream(lines);
    std::string line;
    while (std::getline(stream, line) &&
           static_cast<int>(ladder.levels.size()) < max_levels) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (auto expr = parse_boolean_expression(line)) {
            ladder.levels.push_back(std::move(*expr));
        }
        // unparseable lines are dropped
    }
    if (ladder.levels.empty()) {
        return fallback("llm produced no parseable Boolean lines");
    }
    return ladder;
}

LadderExecution execute_ladder(const QueryLadder& ladder, const SearchFn& search,
                               int min_docs, int retmax) {
    if (ladder.levels.empty()) {
        throw std::invalid_argument("execute_ladder: empty ladder");
    }
    std::vector<std::vector<std::string>> per_level;
    std::vector<std::string> errors;
    std::size_t attempted = 0;

    auto dedup = [](const std::vector<std::string>& ids) {
        std::vector<std::string> out;
        std::unordered_set<std::string> seen;
        for (const auto& id : ids) {
            if (seen.insert(id).second) out.push_back(id);
        }
        return out;
    };

    for (std::size_t level = 0; level < ladder.levels.size(); ++level) {
        ++attempted;
        std::vector<std::string> ids;
        try {
            ids = dedup(search(render(ladder.levels[level]), retmax).pmids);
        } catch (const Error& e) {
            errors.push_back("level " + std::to_string(level) + ": " + e.what());
        }
        per_level.push_back(ids);
        if (static_cast<int>(ids.size()) >= min_docs) {
            return LadderExecution{std::move(per_level[level]), level, attempted};
        }
    }
    if (errors.size() == ladder.levels.size()) {
        std::string joined;
        for (const auto& e : errors) {
            if (!joined.empty()) joined += "; ";
            joined += e;
        }
        throw TransportError("execute_ladder: all levels failed: " + joined,
                             static_cast<int>(errors.size()));
    }
    // no level reached min_docs: best effort, earliest max-count level
    std::size_t best = 0;
    for (std::size_t level = 1; level < per_level.size(); ++level) {
        if (per_level[level].size() > per_level[best].size()) best = level;
    }
    return LadderExecution{std::move(per_level[best]), best, attempted};
}

}  // namespace medrag
