#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "medrag/embedder.hpp"
#include "medrag/vector_index.hpp"

namespace {

medrag::VectorIndex build_index(int n, int dim) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::string> ids;
    std::vector<float> flat;
    ids.reserve(static_cast<std::size_t>(n));
    flat.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim));
    for (int i = 0; i < n; ++i) {
        ids.push_back(std::to_string(1000000 + i));
        double norm = 0.0;
        std::vector<float> row(static_cast<std::size_t>(dim));
        for (auto& x : row) {
            x = static_cast<float>(normal(rng));
            norm += static_cast<double>(x) * x;
        }
        norm = std::sqrt(norm);
        for (auto& x : row) x = static_cast<float>(x / norm);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return medrag::VectorIndex::build(std::move(ids), std::move(flat), dim);
}

void FlatSearch(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    int dim = static_cast<int>(state.range(1));
    auto index = build_index(n, dim);
    auto query = medrag::hash_embed("tumor margins and staging review", dim, 7);
    for (auto _ : state) {
        auto hits = medrag::search(index, query, 10);
        benchmark::DoNotOptimize(hits);
    }
    state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK(FlatSearch)
    ->Args({1000, 256})
    ->Args({10000, 256})
    ->Args({100000, 64});
