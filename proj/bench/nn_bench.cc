// Serial reference vs OpenMP kernels: raw 1-NN batches and full CNN runs.
#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "cwp/embed.h"
#include "cwp/nn_kernels.h"
#include "cwp/prune.h"

namespace {

using cwp::corpus::ClassLabel;
using cwp::nn::Backend;

std::vector<float> random_rows(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  std::vector<float> v(n * dim);
  for (float& x : v) x = g(rng);
  return v;
}

void BM_NearestBatch(benchmark::State& state, Backend backend) {
  const std::size_t n = state.range(0), dim = state.range(1);
  const auto data = random_rows(n, dim, 1);
  const cwp::nn::DenseRows rows{data.data(), n, dim};
  std::vector<std::size_t> queries(n / 2), candidates(n - n / 2);
  std::iota(queries.begin(), queries.end(), 0);
  std::iota(candidates.begin(), candidates.end(), n / 2);
  std::vector<cwp::nn::Neighbor> out(queries.size());
  for (auto _ : state) {
    cwp::nn::nearest_batch(backend, rows, queries, candidates, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * queries.size() * candidates.size());
}

void BM_Cnn(benchmark::State& state, Backend backend) {
  const std::size_t n = state.range(0), dim = state.range(1);
  auto data = random_rows(n, dim, 2);
  std::vector<std::string> ids;
  std::unordered_map<std::string, ClassLabel> labels;
  for (std::size_t r = 0; r < n; ++r) {
    ids.push_back(std::to_string(r));
    const bool yes = r % 4 == 0;
    labels[ids.back()] = yes ? ClassLabel::kYes : ClassLabel::kNo;
    if (yes) data[r * dim] += 1.5f;
  }
  const cwp::embed::EmbeddingMatrix matrix(ids, dim, data);
  cwp::prune::CnnOptions opts;
  opts.backend = backend;
  for (auto _ : state) {
    auto result = cwp::prune::cnn_undersample(matrix, labels, opts);
    benchmark::DoNotOptimize(result.retained_rows.data());
  }
}

void Shapes(benchmark::internal::Benchmark* b) {
  b->Args({2000, 64})->Args({2000, 768})->Args({8000, 768})->Unit(benchmark::kMillisecond);
}

BENCHMARK_CAPTURE(BM_NearestBatch, serial, Backend::kSerial)->Apply(Shapes);
BENCHMARK_CAPTURE(BM_NearestBatch, parallel, Backend::kParallel)->Apply(Shapes);
BENCHMARK_CAPTURE(BM_Cnn, serial, Backend::kSerial)->Apply(Shapes);
BENCHMARK_CAPTURE(BM_Cnn, parallel, Backend::kParallel)->Apply(Shapes);

}  // namespace

BENCHMARK_MAIN();
