#include "cbcl/model.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "cbcl/error.hpp"
#include "cbcl/kernels.hpp"

namespace cbcl {

namespace {

[[noreturn]] void dim_error(std::string_view modality, std::size_t expected, std::size_t actual,
                            std::string_view context) {
  throw Error(ErrorCode::dimension_mismatch,
              std::string(context) + ": " + std::string(modality) + " dimension mismatch (" +
                  std::to_string(expected) + " vs " + std::to_string(actual) + ")");
}

template <typename A, typename B>
void require_same_dims(const A& a, const B& b, std::string_view op,
                       std::optional<SampleId> id = std::nullopt) {
  if (a.rgb.size() == b.rgb.size() && a.depth.size() == b.depth.size()) return;
  std::string context(op);
  if (id) context += " (sample " + std::to_string(*id) + ")";
  if (a.rgb.size() != b.rgb.size()) dim_error("rgb", a.rgb.size(), b.rgb.size(), context);
  dim_error("depth", a.depth.size(), b.depth.size(), context);
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void validate_fusion(const FusionWeights& w, bool warn_above_one) {
  if (!std::isfinite(w.rgb) || !std::isfinite(w.depth) || w.rgb < 0.0 || w.depth < 0.0)
    throw Error(ErrorCode::invalid_argument, "fusion weights must be finite and nonnegative (w_rgb=" +
                                                 std::to_string(w.rgb) +
                                                 ", w_depth=" + std::to_string(w.depth) + ")");
  if (w.rgb + w.depth <= 0.0)
    throw Error(ErrorCode::invalid_argument, "fusion weights must not both be zero");
  if (warn_above_one && (w.rgb > 1.0 || w.depth > 1.0))
    warn("fusion weight above 1 (w_rgb=" + std::to_string(w.rgb) +
         ", w_depth=" + std::to_string(w.depth) + "); the usual range is [0, 1]");
}

CentroidPair CentroidPair::from_sample(const FeaturePair& f) {
  return {CentroidVector(f.rgb.begin(), f.rgb.end()),
          CentroidVector(f.depth.begin(), f.depth.end()), 1};
}

void check_finite(std::span<const float> values, SampleId id, std::string_view modality) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw Error(ErrorCode::non_finite, "sample " + std::to_string(id) + ": non-finite " +
                                             std::string(modality) + " value at index " +
                                             std::to_string(i));
  }
}

void check_dims(const FeaturePair& f, std::size_t rgb_dim, std::size_t depth_dim) {
  const std::string context = "sample " + std::to_string(f.id);
  if (f.rgb.size() != rgb_dim) dim_error("rgb", rgb_dim, f.rgb.size(), context);
  if (f.depth.size() != depth_dim) dim_error("depth", depth_dim, f.depth.size(), context);
}

void ConceptModel::validate() const {
  if (rgb_dim == 0 || depth_dim == 0)
    throw Error(ErrorCode::invalid_argument, "model dimensions must be positive");
  if (!(distance_threshold > 0.0))
    throw Error(ErrorCode::invalid_argument, "distance threshold must be positive");
  validate_fusion(fusion, false);
  if (categories.empty()) throw Error(ErrorCode::empty_category, "model has no categories");
  std::set<std::string_view> seen;
  for (const auto& cat : categories) {
    if (cat.label.empty()) throw Error(ErrorCode::invalid_argument, "empty category label");
    if (!seen.insert(cat.label).second)
      throw Error(ErrorCode::invalid_argument, "duplicate category label '" + cat.label + "'");
    if (cat.centroids.empty())
      throw Error(ErrorCode::empty_category, "category '" + cat.label + "' has no centroids");
    std::uint64_t total = 0;
    for (const auto& c : cat.centroids) {
      const std::string context = "category '" + cat.label + "'";
      if (c.rgb.size() != rgb_dim) dim_error("rgb", rgb_dim, c.rgb.size(), context);
      if (c.depth.size() != depth_dim) dim_error("depth", depth_dim, c.depth.size(), context);
      if (c.weight == 0)
        throw Error(ErrorCode::invalid_argument, context + ": centroid with zero weight");
      if (!all_finite(c.rgb) || !all_finite(c.depth))
        throw Error(ErrorCode::non_finite, context + ": non-finite centroid value");
      total += c.weight;
    }
    if (total != cat.train_count)
      throw Error(ErrorCode::invalid_argument,
                  "category '" + cat.label + "': centroid weights sum to " + std::to_string(total) +
                      " but train_count is " + std::to_string(cat.train_count));
  }
}

std::size_t ConceptModel::total_centroids() const {
  std::size_t n = 0;
  for (const auto& c : categories) n += c.centroids.size();
  return n;
}

std::optional<std::size_t> ConceptModel::find(std::string_view label) const {
  for (std::size_t j = 0; j < categories.size(); ++j)
    if (categories[j].label == label) return j;
  return std::nullopt;
}

double fused_distance(const CentroidPair& c, const FeaturePair& f, const FusionWeights& w) {
  require_same_dims(c, f, "fused_distance", f.id);
  return kernels::fused(c, f, w);
}

double fused_distance(const CentroidPair& a, const CentroidPair& b, const FusionWeights& w) {
  require_same_dims(a, b, "fused_distance");
  return kernels::fused(a, b, w);
}

CentroidPair update_centroid(const CentroidPair& c, const FeaturePair& f) {
  require_same_dims(c, f, "update_centroid", f.id);
  const auto w = static_cast<double>(c.weight);
  const double denom = w + 1.0;
  CentroidPair out{CentroidVector(c.rgb.size()), CentroidVector(c.depth.size()), c.weight + 1};
  for (std::size_t i = 0; i < c.rgb.size(); ++i)
    out.rgb[i] = (w * c.rgb[i] + static_cast<double>(f.rgb[i])) / denom;
  for (std::size_t i = 0; i < c.depth.size(); ++i)
    out.depth[i] = (w * c.depth[i] + static_cast<double>(f.depth[i])) / denom;
  return out;
}

CentroidPair merge_centroids(const CentroidPair& a, const CentroidPair& b) {
  require_same_dims(a, b, "merge_centroids");
  const auto wa = static_cast<double>(a.weight);
  const auto wb = static_cast<double>(b.weight);
  const double denom = wa + wb;
  CentroidPair out{CentroidVector(a.rgb.size()), CentroidVector(a.depth.size()),
                   a.weight + b.weight};
  for (std::size_t i = 0; i < a.rgb.size(); ++i) out.rgb[i] = (wa * a.rgb[i] + wb * b.rgb[i]) / denom;
  for (std::size_t i = 0; i < a.depth.size(); ++i)
    out.depth[i] = (wa * a.depth[i] + wb * b.depth[i]) / denom;
  return out;
}

ConceptModel quantized(ConceptModel m) {
  for (auto& cat : m.categories) {
    for (auto& c : cat.centroids) {
      for (auto& x : c.rgb) x = static_cast<float>(x);
      for (auto& x : c.depth) x = static_cast<float>(x);
    }
  }
  return m;
}

}  // namespace cbcl
