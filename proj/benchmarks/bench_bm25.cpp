#include <benchmark/benchmark.h>

#include <random>

#include "medrag/bm25.hpp"
#include "medrag/text.hpp"

namespace {

std::vector<medrag::Chunk> make_corpus(int n_chunks) {
    static const std::vector<std::string> vocab = {
        "tumor",  "biopsy",  "margin",   "staging", "resection", "imaging",
        "cohort", "therapy", "outcome",  "relapse", "screening", "biomarker",
        "dose",   "trial",   "survival", "adjuvant"};
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> words(20, 120);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::vector<medrag::Chunk> chunks;
    chunks.reserve(static_cast<std::size_t>(n_chunks));
    for (int i = 0; i < n_chunks; ++i) {
        std::string text;
        int n = words(rng);
        for (int w = 0; w < n; ++w) {
            if (!text.empty()) text += " ";
            text += vocab[pick(rng)];
        }
        medrag::Chunk c;
        c.doc_id = std::to_string(i);
        c.chunk_index = 0;
        c.core_text = std::move(text);
        c.token_count = medrag::count_whitespace_tokens(c.core_text);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

void Bm25Search(benchmark::State& state) {
    auto corpus = make_corpus(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto hits = medrag::bm25_search("tumor staging adjuvant therapy", corpus, 10);
        benchmark::DoNotOptimize(hits);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(Bm25Search)->Arg(100)->Arg(1000)->Arg(5000);
