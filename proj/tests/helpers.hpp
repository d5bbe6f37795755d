#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixture_util.hpp"
#include "medrag/document.hpp"
#include "medrag/embedder.hpp"
#include "medrag/eutils.hpp"
#include "medrag/text.hpp"

namespace testutil {

using fixture_util::esearch_body;
using fixture_util::make_pmc_xml;
using fixture_util::make_pubmed_xml;
using fixture_util::url_param;
using fixture_util::xml_escape;

inline std::filesystem::path fixtures_dir() {
    return std::filesystem::path(MEDRAG_FIXTURES_DIR);
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Unique scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        static std::atomic<int> counter{0};
        path = base / ("medrag_test_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

// Scripted transport: answers from a handler, counts calls.
class MockTransport final : public medrag::Transport {
public:
    using Handler = std::function<medrag::HttpResponse(const std::string&)>;

    explicit MockTransport(Handler handler) : handler_(std::move(handler)) {}

    medrag::HttpResponse get(const std::string& url) override {
        ++calls;
        urls.push_back(url);
        return handler_(url);
    }

    int calls = 0;
    std::vector<std::string> urls;

private:
    Handler handler_;
};

inline medrag::HttpResponse ok_response(std::string body) {
    return {200, {{"Content-Type", "application/json"}}, std::move(body)};
}

inline medrag::Chunk make_chunk(const std::string& doc_id, int index,
                                const std::string& core,
                                const std::string& prefix = "",
                                std::map<std::string, std::string> metadata = {}) {
    medrag::Chunk c;
    c.doc_id = doc_id;
    c.chunk_index = index;
    c.core_text = core;
    c.overlap_prefix = prefix;
    c.metadata = std::move(metadata);
    c.token_count = medrag::count_whitespace_tokens(c.full_text());
    return c;
}

// Deterministic two-topic document: `a` sentences from one vocabulary
// pool, `b` from a disjoint one. Returns the text and the true boundary
// gap (between sentences a-1 and a).
struct TwoTopicDoc {
    std::string text;
    int true_gap;
    int n_sentences;
};

inline TwoTopicDoc make_two_topic_doc(std::mt19937_64& rng, int a_sentences,
                                      int b_sentences, int words_min = 6,
                                      int words_max = 12) {
    static const std::vector<std::string> pool_a = {
        "tumor",    "biopsy",   "lesion",    "imaging",  "margin",  "resection",
        "grading",  "staging",  "carcinoma", "nodule",   "relapse", "oncology",
        "screening", "mutation", "biomarker", "prognosis", "adjuvant", "radiology",
        "pathology", "cytology", "malignant", "benign",   "invasive", "sarcoma",
        "melanoma", "lymphoma", "chemically", "histology", "genomic", "clonal"};
    static const std::vector<std::string> pool_b = {
        "voltage",   "circuit", "resistor",  "capacitor", "inductor", "amplifier",
        "waveform",  "antenna", "impedance", "frequency", "oscillator", "transistor",
        "decibel",   "diode",   "feedback",  "filtering", "harmonics", "latency",
        "modulation", "noise",  "photonics", "quantizer", "receiver",  "semiconductor",
        "signal",    "spectrum", "telemetry", "transducer", "bandwidth", "digital"};

    auto sentence = [&](const std::vector<std::string>& pool) {
        std::uniform_int_distribution<int> len(words_min, words_max);
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        int n = len(rng);
        std::string s;
        for (int w = 0; w < n; ++w) {
            std::string word = pool[pick(rng)];
            if (w == 0) word[0] = static_cast<char>(std::toupper(word[0]));
            if (!s.empty()) s += " ";
            s += word;
        }
        s += ".";
        return s;
    };

    TwoTopicDoc doc;
    std::vector<std::string> sentences;
    for (int i = 0; i < a_sentences; ++i) sentences.push_back(sentence(pool_a));
    for (int i = 0; i < b_sentences; ++i) sentences.push_back(sentence(pool_b));
    doc.text = medrag::join(sentences, " ");
    doc.true_gap = a_sentences - 1;
    doc.n_sentences = a_sentences + b_sentences;
    return doc;
}

// Embedder answering from a fixed text -> vector table (unknown texts get
// the fallback), for tests that need full control over similarity.
class ScriptedEmbedder final : public medrag::Embedder {
public:
    ScriptedEmbedder(int dim, std::map<std::string, std::vector<float>> table)
        : dim_(dim), table_(std::move(table)) {
        fallback_.assign(static_cast<std::size_t>(dim_), 0.0f);
        fallback_[0] = 1.0f;
    }

    int dim() const override { return dim_; }
    int preferred_chunk_tokens() const override { return 128; }
    int preferred_overlap_tokens() const override { return 32; }
    std::vector<std::vector<float>> embed(
        const std::vector<std::string>& texts) const override {
        std::vector<std::vector<float>> out;
        for (const auto& t : texts) {
            auto it = table_.find(t);
            out.push_back(it == table_.end() ? fallback_ : it->second);
        }
        return out;
    }

private:
    int dim_;
    std::map<std::string, std::vector<float>> table_;
    std::vector<float> fallback_;
};

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the built CLI binary with shell-quoted args.
inline CliResult run_cli(const std::string& args, const std::string& stdin_data = "") {
    TempDir dir;
    auto out_path = dir.path / "out";
    auto err_path = dir.path / "err";
    auto in_path = dir.path / "in";
    write_file(in_path, stdin_data);
    std::string cmd = std::string(MEDRAG_CLI_PATH) + " " + args + " < " +
                      in_path.string() + " > " + out_path.string() + " 2> " +
                      err_path.string();
    int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

}  // namespace testutil
