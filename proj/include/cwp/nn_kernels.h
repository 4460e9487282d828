#ifndef CWP_NN_KERNELS_H_
#define CWP_NN_KERNELS_H_

// Exact 1-nearest-neighbour scans over dense float rows. Every kernel has a
// serial reference and an OpenMP version; both compute each pair distance
// with the same inline routine, so their results are bit-identical.

#include <cstddef>
#include <limits>
#include <span>

namespace cwp::nn {

struct DenseRows {
  const float* data = nullptr;
  std::size_t rows = 0;
  std::size_t dim = 0;

  std::span<const float> row(std::size_t i) const {
    return {data + i * dim, dim};
  }
};

// Ordered by (distance2, row): ties go to the lowest row index.
struct Neighbor {
  double distance2 = std::numeric_limits<double>::infinity();
  std::size_t row = std::numeric_limits<std::size_t>::max();

  bool valid() const { return row != std::numeric_limits<std::size_t>::max(); }
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance2 < b.distance2 ||
           (a.distance2 == b.distance2 && a.row < b.row);
  }
  bool operator==(const Neighbor&) const = default;
};

// Squared Euclidean distance accumulated in double over four fixed lanes
// (lane k takes indices congruent to k mod 4), summed as (l0 + l1) + (l2 + l3).
// The summation order is part of the contract: every kernel uses this routine.
inline double squared_distance(std::span<const float> a, std::span<const float> b) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t n = a.size();
  const std::size_t n4 = n - n % 4;
  std::size_t k = 0;
  for (; k < n4; k += 4) {
    const double d0 = static_cast<double>(a[k]) - b[k];
    const double d1 = static_cast<double>(a[k + 1]) - b[k + 1];
    const double d2 = static_cast<double>(a[k + 2]) - b[k + 2];
    const double d3 = static_cast<double>(a[k + 3]) - b[k + 3];
    l0 += d0 * d0;
    l1 += d1 * d1;
    l2 += d2 * d2;
    l3 += d3 * d3;
  }
  for (; k < n; ++k) {
    const double d = static_cast<double>(a[k]) - b[k];
    l0 += d * d;
  }
  return (l0 + l1) + (l2 + l3);
}

enum class Backend { kSerial, kParallel };

namespace serial {

Neighbor nearest(const DenseRows& rows, std::span<const float> query,
                 std::span<const std::size_t> candidates);

// out[i] = nearest candidate to rows.row(queries[i]).
void nearest_batch(const DenseRows& rows, std::span<const std::size_t> queries,
                   std::span<const std::size_t> candidates, std::span<Neighbor> out);

}  // namespace serial

namespace parallel {

Neighbor nearest(const DenseRows& rows, std::span<const float> query,
                 std::span<const std::size_t> candidates);

void nearest_batch(const DenseRows& rows, std::span<const std::size_t> queries,
                   std::span<const std::size_t> candidates, std::span<Neighbor> out);

}  // namespace parallel

Neighbor nearest(Backend backend, const DenseRows& rows,
                 std::span<const float> query,
                 std::span<const std::size_t> candidates);

void nearest_batch(Backend backend, const DenseRows& rows,
                   std::span<const std::size_t> queries,
                   std::span<const std::size_t> candidates,
                   std::span<Neighbor> out);

}  // namespace cwp::nn

#endif  // CWP_NN_KERNELS_H_
