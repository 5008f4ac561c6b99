#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbcl/datastore.hpp"

namespace cbcl {

/// Gaussian "scene layout" mixture: each category owns `layouts` centers per
/// modality (coordinates ~ N(0, spread²)); samples are center + N(0, sigma²)
/// noise per coordinate.
struct SynthSpec {
  std::size_t categories = 2;
  std::size_t layouts = 1;
  std::uint32_t rgb_dim = 8;
  std::uint32_t depth_dim = 8;
  double spread = 1.0;
  double sigma = 0.05;
  std::size_t samples_per_layout = 10;
  double test_fraction = 0.5;  // per layout, interleaved
  std::uint64_t seed = 42;

  void validate() const;
};

struct LayoutTruth {
  SampleId id = 0;
  std::string category;
  std::size_t layout = 0;
};

struct SynthData {
  FeatureFile rgb;
  FeatureFile depth;
  LabelManifest manifest;
  std::vector<LayoutTruth> truth;
  // Exact layout centers, [category][layout].
  std::vector<std::vector<FeatureVector>> rgb_centers;
  std::vector<std::vector<FeatureVector>> depth_centers;
};

std::string synthetic_label(std::size_t category);

/// Deterministic for a given spec. Sample ids are 1-based and interleave
/// categories and layouts (sample-major), so dataset order mixes layouts.
SynthData generate_synthetic(const SynthSpec& spec);

}  // namespace cbcl
