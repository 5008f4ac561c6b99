#include <omp.h>

#include <exception>
#include <limits>

#include "cbcl/kernels.hpp"

namespace cbcl {

void set_thread_limit(int n) {
  static const int runtime_default = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : runtime_default);
}

namespace kernels::omp {

void distances(std::span<const CentroidRef> refs, const FeaturePair& f, const FusionWeights& w,
               std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(refs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = fused(*refs[i].pair, f, w);
}

DistanceMatrix distance_matrix(std::span<const FeaturePair* const> queries,
                               std::span<const CentroidRef> refs, const FusionWeights& w) {
  DistanceMatrix m{queries.size(), refs.size(), std::vector<double>(queries.size() * refs.size())};
  const auto rows = static_cast<std::ptrdiff_t>(m.rows);
  const std::size_t cols = m.cols;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t q = 0; q < rows; ++q) {
    double* row = m.values.data() + static_cast<std::size_t>(q) * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] = fused(*refs[c].pair, *queries[q], w);
  }
  return m;
}

DistanceMatrix distance_matrix(std::span<const FeaturePair> queries,
                               std::span<const CentroidRef> refs, const FusionWeights& w) {
  return distance_matrix(pointers(queries), refs, w);
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body) {
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::size_t failed_at = none;
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(cbcl_for_each_failure)
      {
        if (static_cast<std::size_t>(i) < failed_at) {
          failed_at = static_cast<std::size_t>(i);
          failure = std::current_exception();
        }
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kernels::omp
}  // namespace cbcl
