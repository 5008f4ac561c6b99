#pragma once

// Distance kernels. Every routine has a serial reference and an OpenMP
// version; both evaluate each distance with the same sequential summation,
// so their results are bit-identical regardless of thread count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cbcl/model.hpp"

namespace cbcl {

enum class Execution { serial, parallel };

/// Caps OpenMP worker threads; n <= 0 restores the runtime default.
void set_thread_limit(int n);

/// Applies CBCL_THREADS if set to a positive integer. Returns the value
/// applied, or 0.
int apply_thread_limit_from_env();

namespace kernels {

double squared_l2(std::span<const double> a, std::span<const float> b) noexcept;
double squared_l2(std::span<const double> a, std::span<const double> b) noexcept;

// Unchecked fused distances; callers validate dimensions.
double fused(const CentroidPair& c, const FeaturePair& f, const FusionWeights& w) noexcept;
double fused(const CentroidPair& a, const CentroidPair& b, const FusionWeights& w) noexcept;

struct Nearest {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Lowest index wins among equidistant centroids. `centroids` must be
/// nonempty.
Nearest nearest(std::span<const CentroidPair> centroids, const FeaturePair& f,
                const FusionWeights& w) noexcept;
Nearest nearest(std::span<const CentroidPair> centroids, const CentroidPair& c,
                const FusionWeights& w) noexcept;

/// A centroid addressed by (category position in the model, index within
/// the category).
struct CentroidRef {
  std::uint32_t category = 0;
  std::uint32_t index = 0;
  const CentroidPair* pair = nullptr;
};

std::vector<CentroidRef> flatten(const ConceptModel& m);

std::vector<const FeaturePair*> pointers(std::span<const FeaturePair> fs);

/// Dense row-major matrix, one row per query.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
};

namespace serial {
void distances(std::span<const CentroidRef> refs, const FeaturePair& f, const FusionWeights& w,
               std::span<double> out);
DistanceMatrix distance_matrix(std::span<const FeaturePair* const> queries,
                               std::span<const CentroidRef> refs, const FusionWeights& w);
DistanceMatrix distance_matrix(std::span<const FeaturePair> queries,
                               std::span<const CentroidRef> refs, const FusionWeights& w);
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body);
}  // namespace serial

namespace omp {
void distances(std::span<const CentroidRef> refs, const FeaturePair& f, const FusionWeights& w,
               std::span<double> out);
DistanceMatrix distance_matrix(std::span<const FeaturePair* const> queries,
                               std::span<const CentroidRef> refs, const FusionWeights& w);
DistanceMatrix distance_matrix(std::span<const FeaturePair> queries,
                               std::span<const CentroidRef> refs, const FusionWeights& w);
/// Dynamic schedule. If iterations throw, the exception from the lowest
/// failing index is rethrown after the loop.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body);
}  // namespace omp

inline DistanceMatrix distance_matrix(std::span<const FeaturePair* const> queries,
                                      std::span<const CentroidRef> refs, const FusionWeights& w,
                                      Execution exec) {
  return exec == Execution::serial ? serial::distance_matrix(queries, refs, w)
                                   : omp::distance_matrix(queries, refs, w);
}

inline DistanceMatrix distance_matrix(std::span<const FeaturePair> queries,
                                      std::span<const CentroidRef> refs, const FusionWeights& w,
                                      Execution exec) {
  return exec == Execution::serial ? serial::distance_matrix(queries, refs, w)
                                   : omp::distance_matrix(queries, refs, w);
}

inline void for_each_index(std::size_t n, Execution exec,
                           const std::function<void(std::size_t)>& body) {
  if (exec == Execution::serial)
    serial::for_each_index(n, body);
  else
    omp::for_each_index(n, body);
}

}  // namespace kernels
}  // namespace cbcl
