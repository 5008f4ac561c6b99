#include "cbcl/synthetic.hpp"

#include <cmath>
#include <random>

#include "cbcl/error.hpp"

namespace cbcl {

void SynthSpec::validate() const {
  if (categories < 1 || layouts < 1 || samples_per_layout < 1 || rgb_dim < 1 || depth_dim < 1)
    throw Error(ErrorCode::invalid_argument, "synthetic spec counts and dims must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::invalid_argument, "synthetic sigma must be finite and >= 0");
  if (!(spread >= 0.0) || !std::isfinite(spread))
    throw Error(ErrorCode::invalid_argument, "synthetic spread must be finite and >= 0");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw Error(ErrorCode::invalid_argument, "synthetic test fraction must be in [0, 1)");
}

std::string synthetic_label(std::size_t category) {
  std::string digits = std::to_string(category);
  if (digits.size() < 2) digits.insert(0, 2 - digits.size(), '0');
  return "cat" + digits;
}

SynthData generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  auto draw_center = [&](std::uint32_t dim) {
    FeatureVector v(dim);
    for (auto& x : v) x = static_cast<float>(spec.spread * unit(rng));
    return v;
  };
  auto draw_sample = [&](const FeatureVector& center) {
    FeatureVector v(center.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = static_cast<float>(static_cast<double>(center[i]) + spec.sigma * unit(rng));
    return v;
  };

  SynthData out;
  out.rgb.modality = Modality::rgb;
  out.rgb.dim = spec.rgb_dim;
  out.depth.modality = Modality::depth;
  out.depth.dim = spec.depth_dim;
  out.rgb_centers.resize(spec.categories);
  out.depth_centers.resize(spec.categories);
  for (std::size_t c = 0; c < spec.categories; ++c) {
    for (std::size_t l = 0; l < spec.layouts; ++l) {
      out.rgb_centers[c].push_back(draw_center(spec.rgb_dim));
      out.depth_centers[c].push_back(draw_center(spec.depth_dim));
    }
  }

  SampleId next_id = 1;
  for (std::size_t s = 0; s < spec.samples_per_layout; ++s) {
    const bool test = std::floor(static_cast<double>(s + 1) * spec.test_fraction) >
                      std::floor(static_cast<double>(s) * spec.test_fraction);
    for (std::size_t c = 0; c < spec.categories; ++c) {
      const std::string label = synthetic_label(c);
      for (std::size_t l = 0; l < spec.layouts; ++l) {
        const SampleId id = next_id++;
        out.rgb.records.push_back({id, draw_sample(out.rgb_centers[c][l])});
        out.depth.records.push_back({id, draw_sample(out.depth_centers[c][l])});
        out.manifest.rows.push_back({id, label, test ? Split::test : Split::train});
        out.truth.push_back({id, label, l});
      }
    }
  }
  return out;
}

}  // namespace cbcl
