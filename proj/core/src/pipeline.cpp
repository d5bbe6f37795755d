#include "medrag/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

#include "medrag/errors.hpp"
#include "medrag/prompts.hpp"
#include "medrag/pubmed_xml.hpp"

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

std::string metadata_value(const Chunk& c, const std::string& key) {
    auto it = c.metadata.find(key);
    return it == c.metadata.end() ? std::string{} : it->second;
}

std::string retrieval_text(const Chunk& c, bool embed_metadata) {
    if (!embed_metadata) return c.full_text();
    std::string head = metadata_value(c, "title");
    std::string year = metadata_value(c, "pub_year");
    std::string source = metadata_value(c, "source_category");
    std::string out;
    out.reserve(head.size() + c.core_text.size() + 32);
    out += head;
    if (!year.empty()) out += " (" + year + ")";
    if (!source.empty()) out += " [" + source + "]";
    out += "\n";
    out += c.full_text();
    return out;
}

}  // namespace

DocumentPool hsrdr_retrieve(const std::string& query, const VectorIndex& semantic_index,
                            const Embedder& query_embedder, EutilsClient& eutils,
                            const LadderGenerator& rewriter, const HsrdrConfig& cfg) {
    if (cfg.sources_enabled.empty()) {
        throw std::invalid_argument("hsrdr_retrieve: sources_enabled must be non-empty");
    }
    DocumentPool pool;

    // semantic path
    if (semantic_index.size() > 0) {
        auto hits = search(semantic_index, query_embedder.embed_one(query), cfg.k_semantic);
        for (auto& hit : hits) pool.provenance.semantic_pmids.push_back(std::move(hit.id));
    }

    // term path with ladder fallback
    try {
        QueryLadder ladder = rewriter(query);
        auto execution = execute_ladder(
            ladder,
            [&](const std::string& term, int retmax) {
                return eutils.esearch(EutilsDb::pubmed, term, retmax, cfg.date_range);
            },
            cfg.min_docs, cfg.retmax_term);
        pool.provenance.term_pmids = std::move(execution.pmids);
        pool.provenance.level_used = execution.level_used;
    } catch (const Error& e) {
        if (pool.provenance.semantic_pmids.empty()) throw;
        pool.term_path_failed = true;
    }

    // evidence partition over the union
    std::unordered_set<std::string> semantic_set(pool.provenance.semantic_pmids.begin(),
                                                 pool.provenance.semantic_pmids.end());
    std::unordered_set<std::string> term_set(pool.provenance.term_pmids.begin(),
                                             pool.provenance.term_pmids.end());
    std::vector<std::string> union_ids;
    for (const auto& id : pool.provenance.semantic_pmids) union_ids.push_back(id);
    for (const auto& id : pool.provenance.term_pmids) {
        if (!semantic_set.count(id)) union_ids.push_back(id);
    }
    for (const auto& id : union_ids) {
        bool in_semantic = semantic_set.count(id) > 0;
        bool in_term = term_set.count(id) > 0;
        pool.evidence_category_by_pmid[id] = in_semantic && in_term
                                                 ? EvidenceCategory::E3
                                                 : (in_semantic ? EvidenceCategory::E1
                                                                : EvidenceCategory::E2);
    }
    if (union_ids.empty()) return pool;  // "no candidates", not an error

    // fetch, parse, classify
    auto fetched = eutils.efetch(EutilsDb::pubmed, union_ids);
    auto parsed = parse_pubmed_xml(fetched.xml);
    std::vector<Document> classified;
    classified.reserve(parsed.documents.size());
    for (auto& doc : parsed.documents) {
        auto category = classify_source(doc);
        if (!category) continue;  // unretrievable
        doc.source_category = *category;
        classified.push_back(std::move(doc));
    }

    // temporal + abstract validity
    std::optional<Date> min_date, max_date;
    if (cfg.date_range) {
        min_date = cfg.date_range->min;
        max_date = cfg.date_range->max;
    }
    auto filtered = filter_documents(classified, min_date, max_date, true);

    for (auto& doc : filtered) {
        if (cfg.sources_enabled.count(doc.source_category)) {
            pool.documents.push_back(std::move(doc));
        }
    }

    // attach PMC full text where available
    if (cfg.fetch_full_text) {
        std::vector<std::string> pmc_ids;
        for (const auto& doc : pool.documents) {
            if (doc.source_category != SourceCategory::D1 && doc.pmcid) {
                std::string digits;
                for (char c : *doc.pmcid) {
                    if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
                }
                if (!digits.empty()) pmc_ids.push_back(digits);
            }
        }
        if (!pmc_ids.empty()) {
            try {
                auto pmc = eutils.efetch(EutilsDb::pmc, pmc_ids);
                std::unordered_map<std::string, PmcArticle> by_pmcid;
                for (auto& art : parse_pmc_xml(pmc.xml)) {
                    by_pmcid.emplace(art.pmcid, std::move(art));
                }
                for (auto& doc : pool.documents) {
                    if (!doc.pmcid) continue;
                    std::string key = doc.pmcid->starts_with("PMC") ? *doc.pmcid
                                                                    : "PMC" + *doc.pmcid;
                    auto it = by_pmcid.find(key);
                    if (it != by_pmcid.end() && !it->second.full_text.empty()) {
                        doc.full_text = it->second.full_text;
                    }
                }
            } catch (const Error&) {
                // full text is an enrichment; abstracts still serve
            }
        }
    }
    return pool;
}

std::vector<EvidenceItem> two_stage_retrieve(const std::string& query,
                                             const std::vector<Chunk>& chunks,
                                             const Embedder& embedder,
                                             const Reranker* reranker, int k_dense,
                                             int k_final, const TwoStageOptions& options) {
    if (k_final > k_dense) {
        throw std::invalid_argument("two_stage_retrieve: k_final must be <= k_dense");
    }
    if (chunks.empty() || k_final <= 0) return {};

    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(retrieval_text(c, options.embed_metadata_in_text));
    auto vectors = embedder.embed(texts);
    auto query_vec = embedder.embed_one(query);

    std::vector<std::pair<double, std::size_t>> scored(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        double dot = 0.0;
        for (std::size_t d = 0; d < query_vec.size(); ++d)
            dot += static_cast<double>(vectors[i][d]) * query_vec[d];
        scored[i] = {dot, i};
    }
    auto by_chunk_order = [&](std::size_t a, std::size_t b) {
        if (chunks[a].doc_id != chunks[b].doc_id) return chunks[a].doc_id < chunks[b].doc_id;
        return chunks[a].chunk_index < chunks[b].chunk_index;
    };
    auto dense_better = [&](const std::pair<double, std::size_t>& a,
                            const std::pair<double, std::size_t>& b) {
        if (a.first != b.first) return a.first > b.first;
        return by_chunk_order(a.second, b.second);
    };
    std::size_t stage1 = std::min<std::size_t>(static_cast<std::size_t>(k_dense),
                                               chunks.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(stage1),
                      scored.end(), dense_better);
    scored.resize(stage1);

    if (reranker) {
        for (auto& [score, i] : scored) {
            score = reranker->score(query, retrieval_text(chunks[i],
                                                          options.embed_metadata_in_text));
        }
        std::sort(scored.begin(), scored.end(), dense_better);
    }

    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k_final),
                                             scored.size());
    std::vector<EvidenceItem> out;
    out.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        const Chunk& c = chunks[scored[r].second];
        EvidenceItem item;
        item.doc_id = c.doc_id;
        item.chunk_index = c.chunk_index;
        item.score = scored[r].first;
        item.rank = static_cast<int>(r) + 1;
        item.evidence_category = chunk_evidence_category(c);
        item.source_category = chunk_source_category(c);
        out.push_back(std::move(item));
    }
    return out;
}

namespace {
const Chunk* find_chunk(const std::vector<Chunk>& chunks, const EvidenceItem& item) {
    for (const auto& c : chunks) {
        if (c.doc_id == item.doc_id &&
            (!item.chunk_index || c.chunk_index == *item.chunk_index)) {
            return &c;
        }
    }
    return nullptr;
}

std::string block_header(int rank, const Chunk& c) {
    std::string year = c.metadata.count("pub_year") ? c.metadata.at("pub_year") : "";
    std::string source =
        c.metadata.count("source_category") ? c.metadata.at("source_category") : "";
    return "[" + std::to_string(rank) + "] (" + c.doc_id + ", " +
           (year.empty() ? "?" : year) + ", " + (source.empty() ? "?" : source) + ")";
}
}  // namespace

std::string assemble_context(const std::vector<EvidenceItem>& evidence,
                             const std::vector<Chunk>& chunks, int budget_tokens,
                             const TokenCounter& counter) {
    if (evidence.empty()) return "";
    std::string context;
    int used = 0;
    for (const auto& item : evidence) {
        const Chunk* chunk = find_chunk(chunks, item);
        if (!chunk) continue;
        std::string text = chunk->full_text();
        std::string block = block_header(item.rank, *chunk) + " " + text;
        int block_tokens = counter(block);
        if (context.empty()) {
            if (block_tokens > budget_tokens) {
                // truncate the mandatory first block at sentence granularity
                std::string head = block_header(item.rank, *chunk);
                int head_tokens = counter(head);
                std::string body;
                int body_tokens = 0;
                for (auto sentence : split_sentences(text)) {
                    int t = counter(std::string(sentence));
                    if (!body.empty() && head_tokens + body_tokens + t > budget_tokens)
                        break;
                    if (!body.empty()) body += " ";
                    body += std::string(sentence);
                    body_tokens += t;
                    if (head_tokens + body_tokens > budget_tokens) break;
                }
                context = head + " " + body;
                return context;
            }
            context = block;
            used = block_tokens;
        } else {
            if (used + block_tokens > budget_tokens) break;
            context += "\n\n" + block;
            used += block_tokens;
        }
    }
    return context;
}

std::optional<std::string> parse_final_answer(const std::string& raw_output,
                                              std::size_t n_options) {
    // find the last case-insensitive "answer"
    std::string lower = to_lower(raw_output);
    std::size_t pos = lower.rfind("answer");
    if (pos == std::string::npos) return std::nullopt;
    std::size_t i = pos + 6;
    while (i < raw_output.size() &&
           (raw_output[i] == ':' || raw_output[i] == '-' || raw_output[i] == ' ' ||
            raw_output[i] == '\t')) {
        ++i;
    }
    if (i >= raw_output.size()) return std::nullopt;

    if (n_options > 0) {
        if (raw_output[i] == '(') ++i;
        if (i >= raw_output.size()) return std::nullopt;
        char c = raw_output[i];
        char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (upper < 'A' || upper >= static_cast<char>('A' + n_options)) return std::nullopt;
        // the letter must stand alone, not start a word
        if (i + 1 < raw_output.size()) {
            unsigned char next = static_cast<unsigned char>(raw_output[i + 1]);
            if (std::isalnum(next)) return std::nullopt;
        }
        return std::string(1, upper);
    }
    // open question: rest of the line
    std::size_t eol = raw_output.find('\n', i);
    std::string answer = raw_output.substr(i, eol == std::string::npos ? std::string::npos
                                                                       : eol - i);
    while (!answer.empty() && (answer.back() == '\r' || answer.back() == ' '))
        answer.pop_back();
    if (answer.empty()) return std::nullopt;
    return answer;
}

std::string build_answer_prompt(const QuestionRecord& question,
                                const std::string& context) {
    std::string user;
    if (!context.empty()) {
        user += "Context:\n" + context + "\n\n";
    }
    user += "Question: " + question.question + "\n";
    if (!question.options.empty()) {
        user += "Options:\n";
        for (std::size_t i = 0; i < question.options.size(); ++i) {
            user += static_cast<char>('A' + i);
            user += ". " + question.options[i] + "\n";
        }
    }
    return user;
}

QaPipeline::QaPipeline(Components components, PipelineConfig config)
    : components_(std::move(components)), config_(std::move(config)) {
    if (!components_.generator) {
        throw std::invalid_argument("QaPipeline: generator is required");
    }
    if (config_.retrieval_enabled) {
        if (!components_.semantic_index || !components_.embedder ||
            !components_.eutils || !components_.rewriter) {
            throw std::invalid_argument(
                "QaPipeline: retrieval requires index, embedder, eutils and rewriter");
        }
    }
}

AnswerRecord QaPipeline::answer(const QuestionRecord& question) const {
    AnswerRecord record;
    record.question_id = question.id;
    record.question = question.question;
    record.options = question.options;
    record.gold = question.gold;
    record.mode = config_.retrieval_enabled ? "rag" : "no_retrieval";

    std::vector<Chunk> chunks;
    if (config_.retrieval_enabled) {
        QueryLadder ladder;  // captured for the trace by wrapping the rewriter
        auto tracing_rewriter = [&](const std::string& raw) {
            ladder = components_.rewriter(raw);
            return ladder;
        };
        DocumentPool pool =
            hsrdr_retrieve(question.question, *components_.semantic_index,
                           *components_.embedder, *components_.eutils, tracing_rewriter,
                           config_.hsrdr);
        record.term_path_failed = pool.term_path_failed;
        record.ladder.origin = ladder.origin;
        record.ladder.fallback_reason = ladder.fallback_reason;
        record.ladder.level_used = pool.provenance.level_used;
        for (const auto& level : ladder.levels)
            record.ladder.levels.push_back(render(level));
        for (const auto& doc : pool.documents) {
            ++record.source_counts[to_string(doc.source_category)];
            auto ev = pool.evidence_category_by_pmid.find(doc.pmid);
            if (ev != pool.evidence_category_by_pmid.end()) {
                ++record.evidence_counts[to_string(ev->second)];
            }
        }

        for (const auto& doc : pool.documents) {
            std::vector<Chunk> doc_chunks =
                config_.chunk_method == ChunkMethod::seos
                    ? chunk_document(doc, *components_.embedder, config_.seos)
                    : chunk_document_fixed(doc, config_.fixed_chunk_tokens,
                                           config_.fixed_overlap_tokens);
            auto ev = pool.evidence_category_by_pmid.find(doc.pmid);
            for (auto& chunk : doc_chunks) {
                if (ev != pool.evidence_category_by_pmid.end()) {
                    chunk.metadata["evidence_category"] = to_string(ev->second);
                }
                chunks.push_back(std::move(chunk));
            }
        }
        record.evidence = two_stage_retrieve(question.question, chunks,
                                             *components_.embedder,
                                             components_.reranker.get(), config_.k_dense,
                                             config_.k_final, config_.two_stage);
        record.context = assemble_context(record.evidence, chunks, config_.budget_tokens,
                                          config_.seos.counter());
    }

    std::string user = build_answer_prompt(question, record.context);
    record.raw_output = components_.generator->complete(prompts::kAnswerCotV1, user);
    record.parsed_answer = parse_final_answer(record.raw_output, question.options.size());
    return record;
}

}  // namespace medrag
