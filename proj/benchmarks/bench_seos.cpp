#include <benchmark/benchmark.h>

#include <random>

#include "medrag/seos.hpp"

namespace {

std::string make_document(int sentences) {
    static const std::vector<std::string> vocab = {
        "tumor", "biopsy", "margin", "staging", "resection", "imaging", "cohort",
        "therapy", "outcome", "relapse", "screening", "biomarker", "adjuvant",
        "voltage", "circuit", "resistor", "signal", "filter", "antenna", "spectrum"};
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> words(6, 14);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::string text;
    for (int s = 0; s < sentences; ++s) {
        int n = words(rng);
        for (int w = 0; w < n; ++w) {
            std::string word = vocab[pick(rng)];
            if (w == 0) word[0] = static_cast<char>(std::toupper(word[0]));
            if (!text.empty()) text += " ";
            text += word;
        }
        text += ".";
    }
    return text;
}

void SeosChunking(benchmark::State& state) {
    auto text = make_document(static_cast<int>(state.range(0)));
    medrag::HashEmbedder embedder(128, 7);
    medrag::SeosConfig cfg;
    for (auto _ : state) {
        auto chunks = medrag::chunk_text_seos(text, embedder, cfg, "bench");
        benchmark::DoNotOptimize(chunks);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void SentenceSplitting(benchmark::State& state) {
    auto text = make_document(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto spans = medrag::split_sentences(text);
        benchmark::DoNotOptimize(spans);
    }
    state.SetBytesProcessed(state.iterations() * static_cast<long>(text.size()));
}

}  // namespace

BENCHMARK(SeosChunking)->Arg(20)->Arg(100)->Arg(400);
BENCHMARK(SentenceSplitting)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
