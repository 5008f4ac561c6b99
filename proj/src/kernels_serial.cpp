#include <cmath>
#include <cstdlib>
#include <string>

#include "cbcl/error.hpp"
#include "cbcl/kernels.hpp"

namespace cbcl {
namespace kernels {

namespace {

template <typename B>
double squared_l2_impl(std::span<const double> a, std::span<const B> b) noexcept {
  double acc = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

}  // namespace

double squared_l2(std::span<const double> a, std::span<const float> b) noexcept {
  return squared_l2_impl(a, b);
}

double squared_l2(std::span<const double> a, std::span<const double> b) noexcept {
  return squared_l2_impl(a, b);
}

double fused(const CentroidPair& c, const FeaturePair& f, const FusionWeights& w) noexcept {
  const double rgb = std::sqrt(squared_l2(c.rgb, f.rgb));
  const double depth = std::sqrt(squared_l2(c.depth, f.depth));
  return 0.5 * (w.rgb * rgb + w.depth * depth);
}

double fused(const CentroidPair& a, const CentroidPair& b, const FusionWeights& w) noexcept {
  const double rgb = std::sqrt(squared_l2(a.rgb, b.rgb));
  const double depth = std::sqrt(squared_l2(a.depth, b.depth));
  return 0.5 * (w.rgb * rgb + w.depth * depth);
}

namespace {

template <typename Query>
Nearest nearest_impl(std::span<const CentroidPair> centroids, const Query& q,
                     const FusionWeights& w) noexcept {
  Nearest best{0, fused(centroids[0], q, w)};
  for (std::size_t i = 1; i < centroids.size(); ++i) {
    const double d = fused(centroids[i], q, w);
    if (d < best.distance) best = {i, d};
  }
  return best;
}

}  // namespace

Nearest nearest(std::span<const CentroidPair> centroids, const FeaturePair& f,
                const FusionWeights& w) noexcept {
  return nearest_impl(centroids, f, w);
}

Nearest nearest(std::span<const CentroidPair> centroids, const CentroidPair& c,
                const FusionWeights& w) noexcept {
  return nearest_impl(centroids, c, w);
}

std::vector<CentroidRef> flatten(const ConceptModel& m) {
  std::vector<CentroidRef> refs;
  refs.reserve(m.total_centroids());
  for (std::size_t j = 0; j < m.categories.size(); ++j) {
    const auto& cs = m.categories[j].centroids;
    for (std::size_t i = 0; i < cs.size(); ++i)
      refs.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i), &cs[i]});
  }
  return refs;
}

std::vector<const FeaturePair*> pointers(std::span<const FeaturePair> fs) {
  std::vector<const FeaturePair*> out;
  out.reserve(fs.size());
  for (const auto& f : fs) out.push_back(&f);
  return out;
}

namespace serial {

void distances(std::span<const CentroidRef> refs, const FeaturePair& f, const FusionWeights& w,
               std::span<double> out) {
  for (std::size_t i = 0; i < refs.size(); ++i) out[i] = fused(*refs[i].pair, f, w);
}

DistanceMatrix distance_matrix(std::span<const FeaturePair* const> queries,
                               std::span<const CentroidRef> refs, const FusionWeights& w) {
  DistanceMatrix m{queries.size(), refs.size(), std::vector<double>(queries.size() * refs.size())};
  for (std::size_t q = 0; q < queries.size(); ++q)
    distances(refs, *queries[q], w, std::span<double>(m.values.data() + q * m.cols, m.cols));
  return m;
}

DistanceMatrix distance_matrix(std::span<const FeaturePair> queries,
                               std::span<const CentroidRef> refs, const FusionWeights& w) {
  return distance_matrix(pointers(queries), refs, w);
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace serial
}  // namespace kernels

int apply_thread_limit_from_env() {
  const char* raw = std::getenv("CBCL_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(raw, &end, 10);
  if (*end != '\0' || n <= 0) {
    warn(std::string("ignoring CBCL_THREADS='") + raw + "' (expected a positive integer)");
    return 0;
  }
  set_thread_limit(static_cast<int>(n));
  return static_cast<int>(n);
}

}  // namespace cbcl
