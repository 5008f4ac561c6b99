#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbcl {

using SampleId = std::uint64_t;

// Sample features keep the on-disk f32 precision; centroids accumulate in f64.
using FeatureVector = std::vector<float>;
using CentroidVector = std::vector<double>;

struct FeaturePair {
  SampleId id = 0;
  FeatureVector rgb;
  FeatureVector depth;

  bool operator==(const FeaturePair&) const = default;
};

struct LabeledPair {
  FeaturePair features;
  std::string label;

  bool operator==(const LabeledPair&) const = default;
};

/// Per-modality multipliers of the fused distance. Defaults are the values
/// tuned for SUN RGB-D.
struct FusionWeights {
  double rgb = 1.0;
  double depth = 0.73;

  bool operator==(const FusionWeights&) const = default;
};

/// Throws invalid_argument for negative, non-finite or all-zero weights;
/// warns when a weight exceeds 1.
void validate_fusion(const FusionWeights& w, bool warn_above_one = true);

/// One learned concept: a centroid per modality and the number of samples
/// it represents.
struct CentroidPair {
  CentroidVector rgb;
  CentroidVector depth;
  std::uint64_t weight = 1;

  static CentroidPair from_sample(const FeaturePair& f);

  bool operator==(const CentroidPair&) const = default;
};

struct CategoryModel {
  std::string label;
  std::vector<CentroidPair> centroids;
  std::uint64_t train_count = 0;  // N_j

  bool operator==(const CategoryModel&) const = default;
};

struct ConceptModel {
  std::vector<CategoryModel> categories;
  FusionWeights fusion;
  std::uint32_t rgb_dim = 0;
  std::uint32_t depth_dim = 0;
  double distance_threshold = 85.0;

  /// Checks every structural invariant; throws cbcl::Error on the first
  /// violation.
  void validate() const;

  std::size_t total_centroids() const;
  std::optional<std::size_t> find(std::string_view label) const;

  bool operator==(const ConceptModel&) const = default;
};

void check_finite(std::span<const float> values, SampleId id, std::string_view modality);
void check_dims(const FeaturePair& f, std::size_t rgb_dim, std::size_t depth_dim);

/// ½ (w_rgb ‖c.rgb − f.rgb‖ + w_depth ‖c.depth − f.depth‖).
double fused_distance(const CentroidPair& c, const FeaturePair& f, const FusionWeights& w);
double fused_distance(const CentroidPair& a, const CentroidPair& b, const FusionWeights& w);

/// Running-mean update: (weight·c + f) / (weight + 1), per modality.
CentroidPair update_centroid(const CentroidPair& c, const FeaturePair& f);

/// Weight-proportional mean of two centroid pairs.
CentroidPair merge_centroids(const CentroidPair& a, const CentroidPair& b);

/// Rounds every centroid coordinate to f32, i.e. what a save/load round
/// trip yields.
ConceptModel quantized(ConceptModel m);

// CBM model file (version 1).
inline constexpr std::uint16_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const ConceptModel& m);
ConceptModel decode_model(std::span<const std::uint8_t> bytes);
void save_model(const ConceptModel& m, const std::filesystem::path& path);
ConceptModel load_model(const std::filesystem::path& path);

}  // namespace cbcl
