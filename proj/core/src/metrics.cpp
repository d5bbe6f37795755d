#include "medrag/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "medrag/errors.hpp"
#include "medrag/prompts.hpp"
#include "medrag/text.hpp"

namespace medrag {

bool is_relevant(const RetrievalJudgment& judgment, const EvidenceItem& item) {
    if (judgment.relevant_ids.count({item.doc_id, item.chunk_index})) return true;
    // document-level judgment matches any chunk
    return judgment.relevant_ids.count({item.doc_id, std::nullopt}) &&
           item.chunk_index.has_value();
}

int hits_at_k(const RetrievalJudgment& judgment, int k) {
    if (k < 1) throw std::invalid_argument("hits_at_k: k must be >= 1");
    for (const auto& item : judgment.results) {
        if (item.rank > k) break;
        if (is_relevant(judgment, item)) return 1;
    }
    return 0;
}

double mean_hits_at_k(const std::vector<RetrievalJudgment>& judgments, int k) {
    if (judgments.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& j : judgments) sum += hits_at_k(j, k);
    return sum / static_cast<double>(judgments.size());
}

double mrr_at_k(const RetrievalJudgment& judgment, int k) {
    if (k < 1) throw std::invalid_argument("mrr_at_k: k must be >= 1");
    for (const auto& item : judgment.results) {
        if (item.rank > k) break;
        if (is_relevant(judgment, item)) return 1.0 / item.rank;
    }
    return 0.0;
}

double mean_mrr_at_k(const std::vector<RetrievalJudgment>& judgments, int k) {
    if (judgments.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& j : judgments) sum += mrr_at_k(j, k);
    return sum / static_cast<double>(judgments.size());
}

std::optional<std::string> category_label(const EvidenceItem& item,
                                          CategoryFamily family) {
    if (family == CategoryFamily::evidence) {
        if (!item.evidence_category) return std::nullopt;
        return to_string(*item.evidence_category);
    }
    if (!item.source_category) return std::nullopt;
    return to_string(*item.source_category);
}

namespace {
std::vector<std::string> family_labels(CategoryFamily family) {
    if (family == CategoryFamily::evidence) return {"E1", "E2", "E3"};
    return {"D1", "D2", "D3"};
}
}  // namespace

std::map<std::string, double> rrf_by_category(
    const std::vector<std::vector<EvidenceItem>>& results_per_query,
    CategoryFamily family, double kappa, int top_window) {
    std::map<std::string, double> out;
    for (const auto& label : family_labels(family)) out[label] = 0.0;
    for (const auto& results : results_per_query) {
        for (const auto& item : results) {
            if (item.rank > top_window) continue;
            if (auto label = category_label(item, family)) {
                out[*label] += 1.0 / (kappa + item.rank);
            }
        }
    }
    return out;
}

std::map<std::string, double> entropy_by_category(
    const std::vector<std::vector<EvidenceItem>>& results_per_query,
    CategoryFamily family, int top_window) {
    std::map<std::string, std::vector<long>> histograms;
    for (const auto& label : family_labels(family)) {
        histograms[label].assign(static_cast<std::size_t>(top_window), 0);
    }
    for (const auto& results : results_per_query) {
        for (const auto& item : results) {
            if (item.rank > top_window || item.rank < 1) continue;
            if (auto label = category_label(item, family)) {
                ++histograms[*label][static_cast<std::size_t>(item.rank - 1)];
            }
        }
    }
    std::map<std::string, double> out;
    for (const auto& [label, histogram] : histograms) {
        long total = 0;
        for (long c : histogram) total += c;
        double entropy = 0.0;
        if (total > 0) {
            for (long c : histogram) {
                if (c == 0) continue;
                double p = static_cast<double>(c) / static_cast<double>(total);
                entropy -= p * std::log(p);
            }
        }
        out[label] = entropy;
    }
    return out;
}

std::map<std::string, double> proportion_top5(
    const std::vector<std::vector<EvidenceItem>>& results_per_query,
    CategoryFamily family, int top_window) {
    std::map<std::string, long> counts;
    for (const auto& label : family_labels(family)) counts[label] = 0;
    long total = 0;
    for (const auto& results : results_per_query) {
        for (const auto& item : results) {
            if (item.rank > top_window) continue;
            if (auto label = category_label(item, family)) {
                ++counts[*label];
                ++total;
            }
        }
    }
    std::map<std::string, double> out;
    for (const auto& [label, count] : counts) {
        out[label] = total > 0 ? static_cast<double>(count) / static_cast<double>(total)
                               : 0.0;
    }
    return out;
}

CategoryReport category_report(const std::vector<std::vector<EvidenceItem>>& results,
                               CategoryFamily family, double kappa, int top_window) {
    CategoryReport report;
    report.rrf = rrf_by_category(results, family, kappa, top_window);
    report.entropy = entropy_by_category(results, family, top_window);
    report.proportion = proportion_top5(results, family, top_window);
    return report;
}

ClassificationMetrics classification_metrics(const std::vector<std::string>& predictions,
                                             const std::vector<std::string>& gold,
                                             const std::vector<std::string>& classes) {
    if (predictions.size() != gold.size()) {
        throw std::invalid_argument("classification_metrics: length mismatch (" +
                                    std::to_string(predictions.size()) + " vs " +
                                    std::to_string(gold.size()) + ")");
    }
    if (predictions.empty()) {
        throw std::invalid_argument("classification_metrics: empty input");
    }
    ClassificationMetrics m;
    long correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == gold[i]) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());

    double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
    for (const auto& cls : classes) {
        long tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            bool predicted = predictions[i] == cls;
            bool actual = gold[i] == cls;
            if (predicted && actual) ++tp;
            else if (predicted) ++fp;
            else if (actual) ++fn;
        }
        double precision;
        if (tp + fp == 0) {
            precision = 0.0;
            m.classes_without_predictions.push_back(cls);
        } else {
            precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        }
        double recall = tp + fn == 0 ? 0.0
                                     : static_cast<double>(tp) / static_cast<double>(tp + fn);
        double f1 = precision + recall == 0.0
                        ? 0.0
                        : 2.0 * precision * recall / (precision + recall);
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
    }
    auto n_classes = static_cast<double>(classes.size());
    m.macro_precision = precision_sum / n_classes;
    m.macro_recall = recall_sum / n_classes;
    m.macro_f1 = f1_sum / n_classes;
    return m;
}

namespace {
bool word_char(unsigned char c) { return std::isalnum(c) != 0; }

// case-insensitive whole-word/phrase containment
bool contains_term(const std::string& haystack_lower, const std::string& term_lower) {
    if (term_lower.empty()) return false;
    std::size_t pos = 0;
    while ((pos = haystack_lower.find(term_lower, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !word_char(static_cast<unsigned char>(
                                       haystack_lower[pos - 1]));
        std::size_t end = pos + term_lower.size();
        bool right_ok = end >= haystack_lower.size() ||
                        !word_char(static_cast<unsigned char>(haystack_lower[end]));
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}
}  // namespace

std::vector<QuestionRecord> mesh_filter(const std::vector<QuestionRecord>& questions,
                                        const std::vector<std::string>& term_list) {
    if (term_list.empty()) {
        throw std::invalid_argument("mesh_filter: empty term list");
    }
    std::vector<std::string> terms_lower;
    terms_lower.reserve(term_list.size());
    for (const auto& t : term_list) terms_lower.push_back(to_lower(t));

    std::vector<QuestionRecord> kept;
    for (const auto& q : questions) {
        std::string haystack = to_lower(q.question);
        for (const auto& opt : q.options) {
            haystack += "\n";
            haystack += to_lower(opt);
        }
        for (const auto& term : terms_lower) {
            if (contains_term(haystack, term)) {
                kept.push_back(q);
                break;
            }
        }
    }
    return kept;
}

std::vector<std::string> read_term_list(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open term list " + path.string());
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        std::size_t end = line.find_last_not_of(" \t");
        terms.push_back(line.substr(start, end - start + 1));
    }
    return terms;
}

std::vector<std::string> hard_negative_set(const std::vector<AnswerRecord>& run_a,
                                           const std::vector<AnswerRecord>& run_b) {
    std::unordered_map<std::string, const AnswerRecord*> by_id;
    for (const auto& r : run_b) by_id[r.question_id] = &r;

    std::vector<std::string> only_a, only_b;
    for (const auto& r : run_a) {
        if (!by_id.count(r.question_id)) only_a.push_back(r.question_id);
    }
    {
        std::unordered_map<std::string, const AnswerRecord*> a_ids;
        for (const auto& r : run_a) a_ids[r.question_id] = &r;
        for (const auto& r : run_b) {
            if (!a_ids.count(r.question_id)) only_b.push_back(r.question_id);
        }
    }
    if (!only_a.empty() || !only_b.empty()) {
        std::string msg = "hard_negative_set: run ids differ;";
        if (!only_a.empty()) msg += " only in a: " + join(only_a, ",");
        if (!only_b.empty()) msg += " only in b: " + join(only_b, ",");
        throw std::invalid_argument(msg);
    }

    std::vector<std::string> ids;
    for (const auto& a : run_a) {
        const AnswerRecord& b = *by_id.at(a.question_id);
        if (!a.gold || !b.gold) {
            throw std::invalid_argument("hard_negative_set: record " + a.question_id +
                                        " lacks a gold answer");
        }
        if (!a.answered_correctly() && !b.answered_correctly()) {
            ids.push_back(a.question_id);
        }
    }
    return ids;
}

SyntheticPairsResult synthetic_pairs(const std::vector<Chunk>& corpus,
                                     GenerationClient& generator, std::size_t n,
                                     std::uint64_t seed) {
    if (n > corpus.size()) {
        throw std::invalid_argument("synthetic_pairs: n (" + std::to_string(n) +
                                    ") exceeds corpus size (" +
                                    std::to_string(corpus.size()) + ")");
    }
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    SyntheticPairsResult result;
    for (std::size_t s = 0; s < n; ++s) {
        const Chunk& chunk = corpus[order[s]];
        std::string question;
        try {
            question = generator.complete(prompts::kSyntheticQuestionV1,
                                          "Passage:\n" + chunk.full_text());
        } catch (const std::exception&) {
            ++result.skipped;
            continue;
        }
        // single line, trimmed
        if (auto eol = question.find('\n'); eol != std::string::npos) {
            question.resize(eol);
        }
        while (!question.empty() && (question.back() == '\r' || question.back() == ' '))
            question.pop_back();
        if (question.empty()) {
            ++result.skipped;
            continue;
        }
        RetrievalJudgment judgment;
        judgment.query_id = chunk.doc_id + "#" + std::to_string(chunk.chunk_index);
        judgment.query = question;
        judgment.relevant_ids.insert({chunk.doc_id, chunk.chunk_index});
        result.judgments.push_back(std::move(judgment));
    }
    return result;
}

}  // namespace medrag
