// medrag command line: batch surface over ingestion, indexing, chunking,
// retrieval and evaluation. Data flows as JSON-lines on stdin/stdout when
// file flags are omitted; diagnostics go to stderr. Exit codes: 0 ok,
// 1 user error, 2 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "medrag/bm25.hpp"
#include "medrag/errors.hpp"
#include "medrag/json_io.hpp"
#include "medrag/metrics.hpp"
#include "medrag/pipeline.hpp"
#include "medrag/pubmed_xml.hpp"
#include "medrag/vector_index.hpp"

using nlohmann::json;

namespace {

void log_line(const char* level, const char* module, const std::string& message) {
    std::cerr << "[" << level << "] " << module << ": " << message << "\n";
}

// ---- config -------------------------------------------------------------

struct RunConfig {
    medrag::PipelineConfig pipeline;
    int rewrite_max_levels = 4;
    std::string rewrite_mode = "rule";  // rule | llm

    json embedder_spec = {{"kind", "hash"}, {"dim", 256}, {"seed", 0}, {"family", "bert"}};
    json reranker_spec = {{"kind", "none"}};

    std::string index_path;
    std::string generation_mode = "fixture";  // fixture | http
    std::string generation_transcript;
    std::optional<std::string> generation_default_response;
    std::string generation_endpoint;

    std::string eutils_fixtures;
    std::string questions_path;
    std::string records_out;
};

// Every known key, as dotted paths; anything else is rejected.
void validate_keys(const json& node, const std::string& prefix,
                   const std::set<std::string>& allowed) {
    if (!node.is_object()) return;
    for (const auto& [key, value] : node.items()) {
        std::string path = prefix.empty() ? key : prefix + "." + key;
        bool known = allowed.count(path) > 0;
        bool known_subtree = false;
        for (const auto& a : allowed) {
            if (a.starts_with(path + ".") || a == path + ".*") known_subtree = true;
        }
        if (!known && !known_subtree) {
            throw medrag::ConfigError("unknown config key '" + path + "'");
        }
        if (allowed.count(path + ".*")) continue;  // free-form subtree
        if (value.is_object()) validate_keys(value, path, allowed);
    }
}

void require_exists(const std::string& path, const std::string& key) {
    if (!path.empty() && !std::filesystem::exists(path)) {
        throw medrag::ConfigError("config key '" + key + "' references missing path " +
                                  path);
    }
}

medrag::SourceCategory parse_source(const std::string& s) {
    auto c = medrag::source_category_from_string(s);
    if (!c) throw medrag::ConfigError("bad source category '" + s + "'");
    return *c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw medrag::ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw medrag::ConfigError("config " + path + ": " + e.what());
    }

    static const std::set<std::string> allowed = {
        "sources", "sources.enabled", "sources.min_date", "sources.max_date",
        "sources.fetch_full_text", "sources.k_semantic",
        "rewrite", "rewrite.mode", "rewrite.min_docs", "rewrite.max_levels",
        "rewrite.retmax",
        "index", "index.path",
        "chunker", "chunker.method", "chunker.target_tokens", "chunker.overlap_tokens",
        "chunker.window", "chunker.smoothing", "chunker.depth_c",
        "chunker.fixed_chunk_tokens", "chunker.fixed_overlap_tokens",
        "retrieval", "retrieval.embedder.*", "retrieval.reranker.*",
        "retrieval.k_dense", "retrieval.k_final", "retrieval.budget_tokens",
        "retrieval.embed_metadata_in_text", "retrieval.enabled",
        "generation", "generation.mode", "generation.transcript",
        "generation.default_response", "generation.endpoint",
        "io", "io.eutils_fixtures", "io.questions", "io.records_out",
    };
    validate_keys(j, "", allowed);

    RunConfig cfg;
    if (j.contains("sources")) {
        const auto& s = j["sources"];
        if (s.contains("enabled")) {
            cfg.pipeline.hsrdr.sources_enabled.clear();
            for (const auto& e : s["enabled"])
                cfg.pipeline.hsrdr.sources_enabled.insert(parse_source(e.get<std::string>()));
        }
        medrag::DateRange range;
        bool have_range = false;
        if (s.contains("min_date")) {
            range.min = medrag::Date::parse(s["min_date"].get<std::string>());
            if (!range.min) throw medrag::ConfigError("bad sources.min_date");
            have_range = true;
        }
        if (s.contains("max_date")) {
            range.max = medrag::Date::parse(s["max_date"].get<std::string>());
            if (!range.max) throw medrag::ConfigError("bad sources.max_date");
            have_range = true;
        }
        if (have_range) cfg.pipeline.hsrdr.date_range = range;
        if (s.contains("fetch_full_text"))
            cfg.pipeline.hsrdr.fetch_full_text = s["fetch_full_text"].get<bool>();
        if (s.contains("k_semantic"))
            cfg.pipeline.hsrdr.k_semantic = s["k_semantic"].get<int>();
    }
    if (j.contains("rewrite")) {
        const auto& r = j["rewrite"];
        if (r.contains("mode")) cfg.rewrite_mode = r["mode"].get<std::string>();
        if (cfg.rewrite_mode != "rule" && cfg.rewrite_mode != "llm")
            throw medrag::ConfigError("rewrite.mode must be 'rule' or 'llm'");
        if (r.contains("min_docs")) cfg.pipeline.hsrdr.min_docs = r["min_docs"].get<int>();
        if (r.contains("max_levels")) cfg.rewrite_max_levels = r["max_levels"].get<int>();
        if (r.contains("retmax")) cfg.pipeline.hsrdr.retmax_term = r["retmax"].get<int>();
    }
    if (j.contains("index") && j["index"].contains("path")) {
        cfg.index_path = j["index"]["path"].get<std::string>();
        require_exists(cfg.index_path, "index.path");
    }
    if (j.contains("chunker")) {
        const auto& c = j["chunker"];
        if (c.contains("method")) {
            std::string m = c["method"].get<std::string>();
            if (m == "seos") cfg.pipeline.chunk_method = medrag::ChunkMethod::seos;
            else if (m == "fixed") cfg.pipeline.chunk_method = medrag::ChunkMethod::fixed;
            else throw medrag::ConfigError("chunker.method must be 'seos' or 'fixed'");
        }
        if (c.contains("target_tokens"))
            cfg.pipeline.seos.target_chunk_tokens = c["target_tokens"].get<int>();
        if (c.contains("overlap_tokens"))
            cfg.pipeline.seos.overlap_tokens = c["overlap_tokens"].get<int>();
        if (c.contains("window")) cfg.pipeline.seos.window_w = c["window"].get<int>();
        if (c.contains("smoothing"))
            cfg.pipeline.seos.smoothing_width = c["smoothing"].get<int>();
        if (c.contains("depth_c"))
            cfg.pipeline.seos.depth_coefficient = c["depth_c"].get<double>();
        if (c.contains("fixed_chunk_tokens"))
            cfg.pipeline.fixed_chunk_tokens = c["fixed_chunk_tokens"].get<int>();
        if (c.contains("fixed_overlap_tokens"))
            cfg.pipeline.fixed_overlap_tokens = c["fixed_overlap_tokens"].get<int>();
    }
    if (j.contains("retrieval")) {
        const auto& r = j["retrieval"];
        if (r.contains("embedder")) cfg.embedder_spec = r["embedder"];
        if (r.contains("reranker")) cfg.reranker_spec = r["reranker"];
        if (r.contains("k_dense")) cfg.pipeline.k_dense = r["k_dense"].get<int>();
        if (r.contains("k_final")) cfg.pipeline.k_final = r["k_final"].get<int>();
        if (r.contains("budget_tokens"))
            cfg.pipeline.budget_tokens = r["budget_tokens"].get<int>();
        if (r.contains("embed_metadata_in_text"))
            cfg.pipeline.two_stage.embed_metadata_in_text =
                r["embed_metadata_in_text"].get<bool>();
        if (r.contains("enabled")) cfg.pipeline.retrieval_enabled = r["enabled"].get<bool>();
    }
    if (j.contains("generation")) {
        const auto& g = j["generation"];
        if (g.contains("mode")) cfg.generation_mode = g["mode"].get<std::string>();
        if (cfg.generation_mode != "fixture" && cfg.generation_mode != "http")
            throw medrag::ConfigError("generation.mode must be 'fixture' or 'http'");
        if (g.contains("transcript")) {
            cfg.generation_transcript = g["transcript"].get<std::string>();
            require_exists(cfg.generation_transcript, "generation.transcript");
        }
        if (g.contains("default_response") && !g["default_response"].is_null())
            cfg.generation_default_response = g["default_response"].get<std::string>();
        if (g.contains("endpoint")) cfg.generation_endpoint = g["endpoint"].get<std::string>();
    }
    if (j.contains("io")) {
        const auto& io = j["io"];
        if (io.contains("eutils_fixtures")) {
            cfg.eutils_fixtures = io["eutils_fixtures"].get<std::string>();
            require_exists(cfg.eutils_fixtures, "io.eutils_fixtures");
        }
        if (io.contains("questions")) {
            cfg.questions_path = io["questions"].get<std::string>();
            require_exists(cfg.questions_path, "io.questions");
        }
        if (io.contains("records_out")) cfg.records_out = io["records_out"].get<std::string>();
    }
    return cfg;
}

std::shared_ptr<medrag::Embedder> make_embedder(const json& spec, std::uint64_t seed) {
    std::string kind = spec.value("kind", std::string{"hash"});
    auto family = spec.value("family", std::string{"bert"}) == "bert"
                      ? medrag::EmbedderFamily::bert
                      : medrag::EmbedderFamily::generic;
    if (kind == "hash") {
        int dim = spec.value("dim", 256);
        std::uint64_t embed_seed = spec.contains("seed")
                                       ? spec["seed"].get<std::uint64_t>()
                                       : seed;
        return std::make_shared<medrag::HashEmbedder>(dim, embed_seed, family);
    }
    if (kind == "remote") {
        if (!spec.contains("endpoint") || !spec.contains("dim"))
            throw medrag::ConfigError("remote embedder needs endpoint and dim");
        return std::make_shared<medrag::RemoteEmbedder>(
            spec["endpoint"].get<std::string>(), spec["dim"].get<int>(), family);
    }
    throw medrag::ConfigError("unknown embedder kind '" + kind + "'");
}

std::shared_ptr<medrag::Reranker> make_reranker(const json& spec) {
    std::string kind = spec.value("kind", std::string{"none"});
    if (kind == "none") return nullptr;
    if (kind == "overlap") return std::make_shared<medrag::TermOverlapReranker>();
    if (kind == "remote") {
        if (!spec.contains("endpoint"))
            throw medrag::ConfigError("remote reranker needs endpoint");
        return std::make_shared<medrag::RemoteReranker>(spec["endpoint"].get<std::string>());
    }
    throw medrag::ConfigError("unknown reranker kind '" + kind + "'");
}

// ---- stream helpers ------------------------------------------------------

std::unique_ptr<std::ifstream> open_input(const std::string& path) {
    if (path.empty() || path == "-") return nullptr;  // stdin
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in) throw medrag::Error("cannot open " + path);
    return in;
}

std::unique_ptr<std::ofstream> open_output(const std::string& path) {
    if (path.empty() || path == "-") return nullptr;  // stdout
    auto out = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*out) throw medrag::Error("cannot write " + path);
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw medrag::Error("cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// ---- subcommand payloads -------------------------------------------------

struct IngestArgs {
    std::vector<std::string> inputs;
    std::vector<std::string> pmc_inputs;
    std::string out;
    std::string min_date, max_date;
    bool require_abstract = false;
};

int run_ingest(const IngestArgs& args) {
    std::vector<medrag::Document> docs;
    std::size_t skipped_unclassifiable = 0;
    for (const auto& path : args.inputs) {
        auto parsed = medrag::parse_pubmed_xml(slurp(path));
        if (parsed.skipped_without_pmid) {
            log_line("warn", "ingest",
                     std::to_string(parsed.skipped_without_pmid) +
                         " article(s) without PMID skipped in " + path);
        }
        for (auto& doc : parsed.documents) {
            auto category = medrag::classify_source(doc);
            if (!category) {
                ++skipped_unclassifiable;
                continue;
            }
            doc.source_category = *category;
            docs.push_back(std::move(doc));
        }
    }
    if (skipped_unclassifiable) {
        log_line("warn", "ingest",
                 std::to_string(skipped_unclassifiable) +
                     " unretrievable document(s) dropped (no PMCID, no abstract)");
    }
    // attach PMC bodies by PMCID
    for (const auto& path : args.pmc_inputs) {
        for (auto& article : medrag::parse_pmc_xml(slurp(path))) {
            for (auto& doc : docs) {
                if (doc.pmcid && (*doc.pmcid == article.pmcid ||
                                  "PMC" + *doc.pmcid == article.pmcid)) {
                    doc.full_text = article.full_text;
                }
            }
        }
    }
    std::optional<medrag::Date> min_date, max_date;
    if (!args.min_date.empty()) {
        min_date = medrag::Date::parse(args.min_date);
        if (!min_date) throw medrag::ConfigError("bad --min-date");
    }
    if (!args.max_date.empty()) {
        max_date = medrag::Date::parse(args.max_date);
        if (!max_date) throw medrag::ConfigError("bad --max-date");
    }
    if (min_date || max_date || args.require_abstract) {
        docs = medrag::filter_documents(docs, min_date, max_date, args.require_abstract);
    }
    auto out = open_output(args.out);
    medrag::write_documents_jsonl(out ? *out : std::cout, docs);
    log_line("info", "ingest", std::to_string(docs.size()) + " document(s) written");
    return 0;
}

struct IndexBuildArgs {
    std::string docs;
    std::string out;
    std::string precomputed;
    std::string ids;
    int dim = 256;
    std::string family = "bert";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int run_index_build(const IndexBuildArgs& args, std::uint64_t global_seed) {
    medrag::VectorIndex index;
    if (!args.precomputed.empty()) {
        index = medrag::load_precomputed(args.precomputed, args.ids);
    } else {
        auto in = open_input(args.docs);
        auto docs = medrag::read_documents_jsonl(in ? *in : std::cin);
        std::vector<std::string> ids;
        std::vector<std::string> texts;
        for (const auto& doc : docs) {
            if (!doc.has_abstract()) {
                log_line("warn", "index", "pmid " + doc.pmid + " has no abstract; skipped");
                continue;
            }
            ids.push_back(doc.pmid);
            texts.push_back(*doc.abstract);
        }
        medrag::HashEmbedder embedder(args.dim, args.seed_set ? args.seed : global_seed,
                                      args.family == "bert"
                                          ? medrag::EmbedderFamily::bert
                                          : medrag::EmbedderFamily::generic);
        auto vectors = embedder.embed(texts);
        std::vector<float> flat;
        flat.reserve(vectors.size() * static_cast<std::size_t>(args.dim));
        for (const auto& v : vectors) flat.insert(flat.end(), v.begin(), v.end());
        index = medrag::VectorIndex::build(std::move(ids), std::move(flat), args.dim);
    }
    medrag::save_index_file(index, args.out);
    log_line("info", "index",
             "built index with " + std::to_string(index.size()) + " vector(s), dim " +
                 std::to_string(index.dim()));
    return 0;
}

struct IndexSearchArgs {
    std::string index_path;
    std::string query;
    int k = 10;
    int dim = 256;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string family = "bert";
    std::string out;
};

int run_index_search(const IndexSearchArgs& args, std::uint64_t global_seed) {
    auto index = medrag::load_index_file(args.index_path);
    medrag::HashEmbedder embedder(index.dim(), args.seed_set ? args.seed : global_seed,
                                  args.family == "bert" ? medrag::EmbedderFamily::bert
                                                        : medrag::EmbedderFamily::generic);
    auto hits = medrag::search(index, embedder.embed_one(args.query), args.k);
    auto out_file = open_output(args.out);
    std::ostream& out = out_file ? *out_file : std::cout;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        json j{{"id", hits[i].id}, {"score", hits[i].score}, {"rank", i + 1}};
        out << j.dump() << "\n";
    }
    return 0;
}

struct ChunkArgs {
    std::string method = "seos";
    std::string in;
    std::string out;
    std::optional<int> target_tokens;
    std::optional<int> overlap_tokens;
    int window = 3;
    int smoothing = 3;
    double depth_c = 0.5;
    int fixed_chunk_tokens = 512;
    int fixed_overlap_tokens = 32;
    int dim = 256;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string family = "bert";
};

int run_chunk(const ChunkArgs& args, std::uint64_t global_seed) {
    auto in = open_input(args.in);
    auto docs = medrag::read_documents_jsonl(in ? *in : std::cin);
    auto out_file = open_output(args.out);
    std::ostream& out = out_file ? *out_file : std::cout;

    std::size_t total = 0;
    if (args.method == "seos") {
        medrag::HashEmbedder embedder(args.dim, args.seed_set ? args.seed : global_seed,
                                      args.family == "bert"
                                          ? medrag::EmbedderFamily::bert
                                          : medrag::EmbedderFamily::generic);
        medrag::SeosConfig cfg;
        cfg.window_w = args.window;
        cfg.smoothing_width = args.smoothing;
        cfg.depth_coefficient = args.depth_c;
        cfg.target_chunk_tokens = args.target_tokens;
        cfg.overlap_tokens = args.overlap_tokens;
        for (const auto& doc : docs) {
            auto chunks = medrag::chunk_document(doc, embedder, cfg);
            for (const auto& c : chunks) out << medrag::to_json_line(c) << "\n";
            total += chunks.size();
        }
    } else if (args.method == "fixed") {
        for (const auto& doc : docs) {
            auto chunks = medrag::chunk_document_fixed(doc, args.fixed_chunk_tokens,
                                                       args.fixed_overlap_tokens);
            for (const auto& c : chunks) out << medrag::to_json_line(c) << "\n";
            total += chunks.size();
        }
    } else {
        throw medrag::ConfigError("--method must be 'seos' or 'fixed'");
    }
    log_line("info", "chunk", std::to_string(total) + " chunk(s) from " +
                                  std::to_string(docs.size()) + " document(s)");
    return 0;
}

struct RewriteArgs {
    std::string question;
    std::string mode = "rule";
    std::string transcript;
    int max_levels = 4;
    std::string out;
};

json ladder_to_json(const medrag::QueryLadder& ladder) {
    json j;
    json levels = json::array();
    for (const auto& level : ladder.levels) levels.push_back(medrag::render(level));
    j["levels"] = levels;
    j["origin"] = ladder.origin == medrag::LadderOrigin::llm ? "llm" : "rule_based";
    j["fallback_reason"] =
        ladder.fallback_reason ? json(*ladder.fallback_reason) : json(nullptr);
    return j;
}

int run_rewrite(const RewriteArgs& args) {
    std::unique_ptr<medrag::FixtureGenerationClient> llm;
    if (args.mode == "llm") {
        if (args.transcript.empty())
            throw medrag::ConfigError("--mode llm requires --transcript");
        llm = std::make_unique<medrag::FixtureGenerationClient>(
            medrag::FixtureGenerationClient::from_file(args.transcript));
    } else if (args.mode != "rule") {
        throw medrag::ConfigError("--mode must be 'rule' or 'llm'");
    }
    auto rewrite_one = [&](const std::string& question) {
        return args.mode == "llm"
                   ? medrag::generate_ladder_llm(question, *llm, args.max_levels)
                   : medrag::generate_ladder_rule_based(medrag::normalize(question),
                                                        args.max_levels);
    };
    auto out_file = open_output(args.out);
    std::ostream& out = out_file ? *out_file : std::cout;
    if (!args.question.empty()) {
        out << ladder_to_json(rewrite_one(args.question)).dump() << "\n";
        return 0;
    }
    // pipe mode: one question record per line
    for (const auto& q : medrag::read_questions_jsonl(std::cin)) {
        json j = ladder_to_json(rewrite_one(q.question));
        j["id"] = q.id;
        out << j.dump() << "\n";
    }
    return 0;
}

struct RetrieveArgs {
    std::string query;
    std::string chunks_path;
    std::string out;
    int k_dense = 20;
    int k_final = 5;
    std::string reranker = "none";
    bool use_bm25 = false;
    bool embed_metadata = false;
    int dim = 256;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string family = "bert";
};

int run_retrieve(const RetrieveArgs& args, std::uint64_t global_seed) {
    auto in = open_input(args.chunks_path);
    auto chunks = medrag::read_chunks_jsonl(in ? *in : std::cin);
    std::vector<medrag::EvidenceItem> evidence;
    if (args.use_bm25) {
        evidence = medrag::bm25_search(args.query, chunks, args.k_final);
    } else {
        medrag::HashEmbedder embedder(args.dim, args.seed_set ? args.seed : global_seed,
                                      args.family == "bert"
                                          ? medrag::EmbedderFamily::bert
                                          : medrag::EmbedderFamily::generic);
        std::shared_ptr<medrag::Reranker> reranker =
            make_reranker(json{{"kind", args.reranker}});
        medrag::TwoStageOptions options;
        options.embed_metadata_in_text = args.embed_metadata;
        evidence = medrag::two_stage_retrieve(args.query, chunks, embedder,
                                              reranker.get(), args.k_dense, args.k_final,
                                              options);
    }
    auto out_file = open_output(args.out);
    std::ostream& out = out_file ? *out_file : std::cout;
    for (const auto& item : evidence) out << medrag::to_json_line(item) << "\n";
    return 0;
}

struct AnswerArgs {
    std::string config_path;
    std::string questions;
    std::string out;
};

int run_answer(const AnswerArgs& args, std::uint64_t global_seed) {
    if (args.config_path.empty()) throw medrag::ConfigError("answer requires --config");
    RunConfig cfg = load_run_config(args.config_path);

    // components
    medrag::VectorIndex index;
    if (cfg.pipeline.retrieval_enabled) {
        if (cfg.index_path.empty())
            throw medrag::ConfigError("retrieval enabled but index.path missing");
        index = medrag::load_index_file(cfg.index_path);
    }
    auto embedder = make_embedder(cfg.embedder_spec, global_seed);
    auto reranker = make_reranker(cfg.reranker_spec);

    std::shared_ptr<medrag::Transport> transport;
    if (!cfg.eutils_fixtures.empty()) {
        transport = std::make_shared<medrag::FixtureTransport>(cfg.eutils_fixtures);
    } else {
        transport = std::make_shared<medrag::HttplibTransport>();
    }
    auto clock = std::make_shared<medrag::SystemClock>();
    medrag::EutilsClient eutils(transport, medrag::RateLimitPolicy::from_env(), clock);

    std::unique_ptr<medrag::GenerationClient> generator;
    if (cfg.generation_mode == "fixture") {
        if (cfg.generation_transcript.empty())
            throw medrag::ConfigError("generation.mode fixture requires generation.transcript");
        generator = std::make_unique<medrag::FixtureGenerationClient>(
            medrag::FixtureGenerationClient::from_file(cfg.generation_transcript,
                                                       cfg.generation_default_response));
    } else {
        if (cfg.generation_endpoint.empty())
            throw medrag::ConfigError("generation.mode http requires generation.endpoint");
        generator = std::make_unique<medrag::HttpGenerationClient>(cfg.generation_endpoint);
    }

    std::unique_ptr<medrag::FixtureGenerationClient> rewrite_llm;
    medrag::LadderGenerator rewriter;
    int max_levels = cfg.rewrite_max_levels;
    if (cfg.rewrite_mode == "llm") {
        if (cfg.generation_transcript.empty())
            throw medrag::ConfigError("rewrite.mode llm requires generation.transcript");
        rewrite_llm = std::make_unique<medrag::FixtureGenerationClient>(
            medrag::FixtureGenerationClient::from_file(cfg.generation_transcript,
                                                       cfg.generation_default_response));
        rewriter = [&rewrite_llm, max_levels](const std::string& raw) {
            return medrag::generate_ladder_llm(raw, *rewrite_llm, max_levels);
        };
    } else {
        rewriter = [max_levels](const std::string& raw) {
            return medrag::generate_ladder_rule_based(medrag::normalize(raw), max_levels);
        };
    }

    medrag::QaPipeline::Components components;
    components.semantic_index = &index;
    components.embedder = embedder;
    components.eutils = &eutils;
    components.rewriter = rewriter;
    components.reranker = reranker;
    components.generator = generator.get();
    medrag::QaPipeline pipeline(components, cfg.pipeline);

    std::string questions_path = !args.questions.empty() ? args.questions
                                                         : cfg.questions_path;
    auto in = open_input(questions_path);
    auto questions = medrag::read_questions_jsonl(in ? *in : std::cin);

    std::string out_path = !args.out.empty() ? args.out : cfg.records_out;
    auto out_file = open_output(out_path);
    std::ostream& out = out_file ? *out_file : std::cout;

    std::size_t correct = 0, answered = 0;
    for (const auto& q : questions) {
        medrag::AnswerRecord record = pipeline.answer(q);
        if (record.parsed_answer) ++answered;
        if (record.answered_correctly()) ++correct;
        out << medrag::to_json_line(record) << "\n";
    }
    log_line("info", "answer",
             std::to_string(questions.size()) + " question(s), " +
                 std::to_string(answered) + " answered, " + std::to_string(correct) +
                 " correct");
    return 0;
}

struct EvalRetrievalArgs {
    std::string judgments;
    std::string results;
    int k = 5;
    std::string out;
};

int run_eval_retrieval(const EvalRetrievalArgs& args) {
    auto in = open_input(args.judgments);
    auto judgments = medrag::read_judgments_jsonl(in ? *in : std::cin);
    if (!args.results.empty()) {
        // results file: {"query_id": ..., "results": [EvidenceItem...]} lines
        std::ifstream rin(args.results, std::ios::binary);
        if (!rin) throw medrag::Error("cannot open " + args.results);
        std::map<std::string, std::vector<medrag::EvidenceItem>> results;
        std::string line;
        while (std::getline(rin, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json j = json::parse(line);
            std::vector<medrag::EvidenceItem> items;
            for (const auto& r : j.at("results")) {
                items.push_back(medrag::evidence_item_from_json(r.dump()));
            }
            results[j.at("query_id").get<std::string>()] = std::move(items);
        }
        for (auto& judgment : judgments) {
            auto it = results.find(judgment.query_id);
            if (it != results.end()) judgment.results = it->second;
        }
    }
    json report;
    report["k"] = args.k;
    report["n_queries"] = judgments.size();
    report["hits_at_k"] = medrag::mean_hits_at_k(judgments, args.k);
    report["mrr_at_k"] = medrag::mean_mrr_at_k(judgments, args.k);
    auto out_file = open_output(args.out);
    (out_file ? *out_file : std::cout) << report.dump() << "\n";
    return 0;
}

struct EvalQaArgs {
    std::string records;
    std::string records_b;
    bool hard_negatives = false;
    std::string out;
};

int run_eval_qa(const EvalQaArgs& args) {
    auto in = open_input(args.records);
    auto records = medrag::read_answer_records_jsonl(in ? *in : std::cin);
    if (records.empty()) throw medrag::Error("no records");

    auto out_file = open_output(args.out);
    std::ostream& out = out_file ? *out_file : std::cout;

    if (args.hard_negatives) {
        if (args.records_b.empty())
            throw medrag::ConfigError("--hard-negatives requires --b");
        auto records_b = medrag::read_answer_records_file(args.records_b);
        auto ids = medrag::hard_negative_set(records, records_b);
        json j{{"hard_negative_ids", ids}};
        out << j.dump() << "\n";
        return 0;
    }

    std::vector<std::string> predictions, gold;
    std::set<std::string> class_set;
    std::size_t abstained = 0;
    for (const auto& r : records) {
        if (!r.gold) continue;
        gold.push_back(*r.gold);
        class_set.insert(*r.gold);
        if (r.parsed_answer) {
            predictions.push_back(*r.parsed_answer);
            class_set.insert(*r.parsed_answer);
        } else {
            predictions.push_back("<abstain>");
            ++abstained;
        }
    }
    if (gold.empty()) throw medrag::Error("no records carry gold answers");
    std::vector<std::string> classes(class_set.begin(), class_set.end());
    auto metrics = medrag::classification_metrics(predictions, gold, classes);
    json report;
    report["n"] = gold.size();
    report["abstained"] = abstained;
    report["accuracy"] = metrics.accuracy;
    report["macro_precision"] = metrics.macro_precision;
    report["macro_recall"] = metrics.macro_recall;
    report["macro_f1"] = metrics.macro_f1;
    out << report.dump() << "\n";
    return 0;
}

struct ReportArgs {
    std::string records;
    std::string family = "evidence";
    double kappa = 60.0;
    int window = 5;
    std::string format = "json";
    std::string out;
};

int run_report_categories(const ReportArgs& args) {
    auto in = open_input(args.records);
    auto records = medrag::read_answer_records_jsonl(in ? *in : std::cin);
    std::vector<std::vector<medrag::EvidenceItem>> per_query;
    per_query.reserve(records.size());
    for (const auto& r : records) per_query.push_back(r.evidence);

    auto family = args.family == "source" ? medrag::CategoryFamily::source
                                          : medrag::CategoryFamily::evidence;
    auto report = medrag::category_report(per_query, family, args.kappa, args.window);

    auto out_file = open_output(args.out);
    std::ostream& out = out_file ? *out_file : std::cout;
    std::vector<std::string> columns =
        family == medrag::CategoryFamily::evidence
            ? std::vector<std::string>{"E1", "E2", "E3"}
            : std::vector<std::string>{"D1", "D2", "D3"};

    if (args.format == "table") {
        auto print_row = [&](const std::string& name,
                             const std::map<std::string, double>& values) {
            out << name;
            for (const auto& c : columns) out << "\t" << values.at(c);
            out << "\n";
        };
        out << "Metrics";
        for (const auto& c : columns) out << "\t" << c;
        out << "\n";
        print_row("RRF Score", report.rrf);
        print_row("Information Entropy", report.entropy);
        print_row("Proportion in Top 5", report.proportion);
        return 0;
    }
    json j;
    j["columns"] = columns;
    j["rows"] = json::array({"RRF Score", "Information Entropy", "Proportion in Top 5"});
    j["rrf"] = report.rrf;
    j["entropy"] = report.entropy;
    j["proportion_top5"] = report.proportion;
    out << j.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"biomedical RAG query pipeline"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "seed for all randomness (default 0)");

    IngestArgs ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "parse efetch XML into documents");
    cmd_ingest->add_option("--in", ingest.inputs, "PubMed efetch XML file(s)")->required();
    cmd_ingest->add_option("--pmc", ingest.pmc_inputs, "PMC efetch XML file(s)");
    cmd_ingest->add_option("--out", ingest.out, "output .jsonl (default stdout)");
    cmd_ingest->add_option("--min-date", ingest.min_date, "YYYY-MM-DD lower bound");
    cmd_ingest->add_option("--max-date", ingest.max_date, "YYYY-MM-DD upper bound");
    cmd_ingest->add_flag("--require-abstract", ingest.require_abstract,
                         "drop documents without abstracts");

    auto* cmd_index = app.add_subcommand("index", "vector index operations");
    cmd_index->require_subcommand(1);
    IndexBuildArgs index_build;
    auto* cmd_index_build = cmd_index->add_subcommand("build", "build an index");
    cmd_index_build->add_option("--docs", index_build.docs, "documents .jsonl (default stdin)");
    cmd_index_build->add_option("--out", index_build.out, "index output path")->required();
    cmd_index_build->add_option("--precomputed", index_build.precomputed,
                                "precomputed embeddings (.jsonl)");
    cmd_index_build->add_option("--ids", index_build.ids, "ids file for --precomputed");
    cmd_index_build->add_option("--dim", index_build.dim, "embedding dimension");
    cmd_index_build->add_option("--family", index_build.family, "bert|generic");
    cmd_index_build->add_option("--embed-seed", index_build.seed, "embedder seed")
        ->each([&index_build](const std::string&) { index_build.seed_set = true; });

    IndexSearchArgs index_search;
    auto* cmd_index_search = cmd_index->add_subcommand("search", "query an index");
    cmd_index_search->add_option("--index", index_search.index_path, "index path")->required();
    cmd_index_search->add_option("--query", index_search.query, "query text")->required();
    cmd_index_search->add_option("-k,--k", index_search.k, "results to return");
    cmd_index_search->add_option("--family", index_search.family, "bert|generic");
    cmd_index_search->add_option("--embed-seed", index_search.seed, "embedder seed")
        ->each([&index_search](const std::string&) { index_search.seed_set = true; });
    cmd_index_search->add_option("--out", index_search.out, "output (default stdout)");

    ChunkArgs chunk;
    auto* cmd_chunk = app.add_subcommand("chunk", "split documents into chunks");
    cmd_chunk->add_option("--method", chunk.method, "seos|fixed");
    cmd_chunk->add_option("--in", chunk.in, "documents .jsonl (default stdin)");
    cmd_chunk->add_option("--out", chunk.out, "chunks .jsonl (default stdout)");
    int chunk_target = -1, chunk_overlap = -1;
    cmd_chunk->add_option("--target-tokens", chunk_target, "seos chunk token target");
    cmd_chunk->add_option("--overlap-tokens", chunk_overlap, "seos overlap tokens");
    cmd_chunk->add_option("--window", chunk.window, "sentences per gap side");
    cmd_chunk->add_option("--smoothing", chunk.smoothing, "smoothing width (odd)");
    cmd_chunk->add_option("--depth-c", chunk.depth_c, "depth threshold coefficient");
    cmd_chunk->add_option("--chunk-tokens", chunk.fixed_chunk_tokens, "fixed chunk size");
    cmd_chunk->add_option("--fixed-overlap", chunk.fixed_overlap_tokens,
                          "fixed overlap tokens");
    cmd_chunk->add_option("--dim", chunk.dim, "hash embedder dimension");
    cmd_chunk->add_option("--family", chunk.family, "bert|generic");
    cmd_chunk->add_option("--embed-seed", chunk.seed, "embedder seed")
        ->each([&chunk](const std::string&) { chunk.seed_set = true; });

    RewriteArgs rewrite;
    auto* cmd_rewrite = app.add_subcommand("rewrite", "question -> Boolean ladder");
    cmd_rewrite->add_option("--question", rewrite.question,
                            "single question (otherwise reads question .jsonl on stdin)");
    cmd_rewrite->add_option("--mode", rewrite.mode, "rule|llm");
    cmd_rewrite->add_option("--transcript", rewrite.transcript, "LLM transcript fixture");
    cmd_rewrite->add_option("--max-levels", rewrite.max_levels, "ladder depth cap");
    cmd_rewrite->add_option("--out", rewrite.out, "output (default stdout)");

    RetrieveArgs retrieve;
    auto* cmd_retrieve = app.add_subcommand("retrieve", "rank chunks for a query");
    cmd_retrieve->add_option("--query", retrieve.query, "query text")->required();
    cmd_retrieve->add_option("--chunks", retrieve.chunks_path,
                             "chunks .jsonl (default stdin)");
    cmd_retrieve->add_option("--out", retrieve.out, "output (default stdout)");
    cmd_retrieve->add_option("--k-dense", retrieve.k_dense, "stage-1 candidates");
    cmd_retrieve->add_option("--k-final", retrieve.k_final, "results to return");
    cmd_retrieve->add_option("--reranker", retrieve.reranker, "none|overlap");
    cmd_retrieve->add_flag("--bm25", retrieve.use_bm25, "use BM25 instead of dense");
    cmd_retrieve->add_flag("--embed-metadata", retrieve.embed_metadata,
                           "embed chunk metadata into retrieval text");
    cmd_retrieve->add_option("--dim", retrieve.dim, "hash embedder dimension");
    cmd_retrieve->add_option("--family", retrieve.family, "bert|generic");
    cmd_retrieve->add_option("--embed-seed", retrieve.seed, "embedder seed")
        ->each([&retrieve](const std::string&) { retrieve.seed_set = true; });

    AnswerArgs answer;
    auto* cmd_answer = app.add_subcommand("answer", "full question-answering runs");
    cmd_answer->add_option("--config", answer.config_path, "run config JSON")->required();
    cmd_answer->add_option("--questions", answer.questions,
                           "questions .jsonl (overrides io.questions)");
    cmd_answer->add_option("--out", answer.out, "records .jsonl (overrides io.records_out)");

    auto* cmd_eval = app.add_subcommand("eval", "evaluation reports");
    cmd_eval->require_subcommand(1);
    EvalRetrievalArgs eval_retrieval;
    auto* cmd_eval_retrieval = cmd_eval->add_subcommand("retrieval", "hits@k / mrr@k");
    cmd_eval_retrieval->add_option("--judgments", eval_retrieval.judgments,
                                   "judgments .jsonl (default stdin)");
    cmd_eval_retrieval->add_option("--results", eval_retrieval.results,
                                   "per-query results .jsonl");
    cmd_eval_retrieval->add_option("-k,--k", eval_retrieval.k, "cutoff");
    cmd_eval_retrieval->add_option("--out", eval_retrieval.out, "output (default stdout)");

    EvalQaArgs eval_qa;
    auto* cmd_eval_qa = cmd_eval->add_subcommand("qa", "answer accuracy");
    cmd_eval_qa->add_option("--records", eval_qa.records,
                            "answer records .jsonl (default stdin)");
    cmd_eval_qa->add_option("--b", eval_qa.records_b, "second run for hard negatives");
    cmd_eval_qa->add_flag("--hard-negatives", eval_qa.hard_negatives,
                          "emit ids both runs answered wrong");
    cmd_eval_qa->add_option("--out", eval_qa.out, "output (default stdout)");

    auto* cmd_report = app.add_subcommand("report", "category reports");
    cmd_report->require_subcommand(1);
    ReportArgs report;
    auto* cmd_report_categories =
        cmd_report->add_subcommand("categories", "per-category RRF/entropy/proportions");
    cmd_report_categories->add_option("--records", report.records,
                                      "answer records .jsonl (default stdin)");
    cmd_report_categories->add_option("--family", report.family, "evidence|source");
    cmd_report_categories->add_option("--kappa", report.kappa, "RRF constant");
    cmd_report_categories->add_option("--window", report.window, "top-K window");
    cmd_report_categories->add_option("--format", report.format, "json|table");
    cmd_report_categories->add_option("--out", report.out, "output (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_ingest) return run_ingest(ingest);
        if (*cmd_index_build) return run_index_build(index_build, seed);
        if (*cmd_index_search) return run_index_search(index_search, seed);
        if (*cmd_chunk) {
            if (chunk_target >= 0) chunk.target_tokens = chunk_target;
            if (chunk_overlap >= 0) chunk.overlap_tokens = chunk_overlap;
            return run_chunk(chunk, seed);
        }
        if (*cmd_rewrite) return run_rewrite(rewrite);
        if (*cmd_retrieve) return run_retrieve(retrieve, seed);
        if (*cmd_answer) return run_answer(answer, seed);
        if (*cmd_eval_retrieval) return run_eval_retrieval(eval_retrieval);
        if (*cmd_eval_qa) return run_eval_qa(eval_qa);
        if (*cmd_report_categories) return run_report_categories(report);
    } catch (const medrag::ConfigError& e) {
        log_line("error", "config", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        log_line("error", "args", e.what());
        return 1;
    } catch (const medrag::Error& e) {
        log_line("error", "run", e.what());
        return 1;
    } catch (const std::exception& e) {
        log_line("error", "internal", e.what());
        return 2;
    }
    return 0;
}
