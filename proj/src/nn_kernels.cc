#include "cwp/nn_kernels.h"

#include <algorithm>
#include <vector>

#include <omp.h>

namespace cwp::nn {
namespace {

// Below this many float pairs a single query is scanned serially; thread
// start-up costs more than the scan.
constexpr std::size_t kParallelScanThreshold = 1u << 16;

}  // namespace

namespace serial {

Neighbor nearest(const DenseRows& rows, std::span<const float> query,
                 std::span<const std::size_t> candidates) {
  Neighbor best;
  for (std::size_t c : candidates) {
    const Neighbor here{squared_distance(query, rows.row(c)), c};
    if (here < best) best = here;
  }
  return best;
}

void nearest_batch(const DenseRows& rows, std::span<const std::size_t> queries,
                   std::span<const std::size_t> candidates, std::span<Neighbor> out) {
  for (std::size_t q = 0; q < queries.size(); ++q) {
    out[q] = nearest(rows, rows.row(queries[q]), candidates);
  }
}

}  // namespace serial

namespace parallel {

Neighbor nearest(const DenseRows& rows, std::span<const float> query,
                 std::span<const std::size_t> candidates) {
  if (candidates.size() * rows.dim < kParallelScanThreshold || omp_get_max_threads() == 1) {
    return serial::nearest(rows, query, candidates);
  }
  Neighbor best;
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel
  {
    Neighbor local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const std::size_t c = candidates[static_cast<std::size_t>(i)];
      const Neighbor here{squared_distance(query, rows.row(c)), c};
      if (here < local) local = here;
    }
    // (distance, row) is a total order, so the merge order cannot matter.
#pragma omp critical(cwp_nn_merge)
    if (local < best) best = local;
  }
  return best;
}

void nearest_batch(const DenseRows& rows, std::span<const std::size_t> queries,
                   std::span<const std::size_t> candidates, std::span<Neighbor> out) {
  const auto n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t q = 0; q < n; ++q) {
    const auto i = static_cast<std::size_t>(q);
    out[i] = serial::nearest(rows, rows.row(queries[i]), candidates);
  }
}

}  // namespace parallel

Neighbor nearest(Backend backend, const DenseRows& rows, std::span<const float> query,
                 std::span<const std::size_t> candidates) {
  return backend == Backend::kSerial ? serial::nearest(rows, query, candidates)
                                     : parallel::nearest(rows, query, candidates);
}

void nearest_batch(Backend backend, const DenseRows& rows,
                   std::span<const std::size_t> queries,
                   std::span<const std::size_t> candidates, std::span<Neighbor> out) {
  if (backend == Backend::kSerial) {
    serial::nearest_batch(rows, queries, candidates, out);
  } else {
    parallel::nearest_batch(rows, queries, candidates, out);
  }
}

}  // namespace cwp::nn
