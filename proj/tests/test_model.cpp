#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "cbcl/fileio.hpp"
#include "cbcl/model.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace cbcl;
using testing::contains;
using testing::error_code_of;
using testing::error_message_of;

namespace {

FeaturePair random_pair(std::mt19937_64& rng, std::size_t dr, std::size_t dd, SampleId id = 0) {
  std::normal_distribution<float> v(0.0f, 2.0f);
  FeaturePair f{id, {}, {}};
  for (std::size_t i = 0; i < dr; ++i) f.rgb.push_back(v(rng));
  for (std::size_t i = 0; i < dd; ++i) f.depth.push_back(v(rng));
  return f;
}

ConceptModel tiny_model() {
  ConceptModel m;
  m.rgb_dim = 2;
  m.depth_dim = 1;
  m.distance_threshold = 3.5;
  m.fusion = {0.9, 0.4};
  m.categories.push_back({"bedroom", {{{0.5, 1.25}, {2.0}, 3}, {{-1.0, 0.0}, {7.5}, 1}}, 4});
  m.categories.push_back({"office", {{{3.0, 3.0}, {0.0}, 2}}, 2});
  return m;
}

}  // namespace

TEST_CASE("fused distance worked values") {
  const CentroidPair zero{{0, 0}, {0, 0}, 1};
  CHECK(fused_distance(zero, FeaturePair{1, {0, 0}, {0, 0}}, {1, 1}) == 0.0);
  CHECK(fused_distance(zero, FeaturePair{1, {3, 4}, {0, 0}}, {1.0, 0.5}) == 2.5);
  const CentroidPair c{{1, 1}, {2, 2}, 1};
  CHECK(fused_distance(c, FeaturePair{1, {1, 1}, {2, 2}}, {0.3, 0.7}) == 0.0);
}

TEST_CASE("fused distance reports modality and both dims on mismatch") {
  const CentroidPair c{{0, 0}, {0, 0, 0}, 1};
  const FeaturePair f{9, {0, 0, 0}, {0, 0, 0}};
  CHECK(error_code_of([&] { fused_distance(c, f, {}); }) == ErrorCode::dimension_mismatch);
  const auto msg = error_message_of([&] { fused_distance(c, f, {}); });
  CHECK(contains(msg, "rgb"));
  CHECK(contains(msg, "2"));
  CHECK(contains(msg, "3"));

  const FeaturePair g{9, {0, 0}, {0}};
  const auto msg2 = error_message_of([&] { fused_distance(c, g, {}); });
  CHECK(contains(msg2, "depth"));
  CHECK(error_code_of([&] { fused_distance(c, CentroidPair{{0}, {0, 0, 0}, 1}, {}); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("fused distance properties on random pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wdist(0.0, 1.5);
  std::uniform_real_distribution<double> adist(0.01, 50.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dr = 1 + rng() % 12, dd = 1 + rng() % 12;
    const FusionWeights w{wdist(rng), wdist(rng) + 0.01};
    const auto f1 = random_pair(rng, dr, dd);
    const auto f2 = random_pair(rng, dr, dd);
    const auto g = random_pair(rng, dr, dd);
    const auto c1 = CentroidPair::from_sample(f1);
    const auto c2 = CentroidPair::from_sample(f2);

    const double d = fused_distance(c1, f2, w);
    CHECK(d >= 0.0);
    CHECK(d == oracle::fused(c1, f2, w));
    // Swapping which side is the centroid does not matter.
    CHECK(d == fused_distance(c2, f1, w));
    CHECK(d == fused_distance(c1, c2, w));

    // Power-of-two scaling is exact; arbitrary scaling within rounding.
    CHECK(fused_distance(c1, f2, {4 * w.rgb, 4 * w.depth}) == 4 * d);
    const double alpha = adist(rng);
    CHECK(fused_distance(c1, f2, {alpha * w.rgb, alpha * w.depth}) ==
          doctest::Approx(alpha * d).epsilon(1e-12));

    // Triangle inequality through g.
    const double via = 0.5 * (w.rgb * (oracle::euclid(c1.rgb, g.rgb) + oracle::euclid(g.rgb, f2.rgb)) +
                              w.depth * (oracle::euclid(c1.depth, g.depth) +
                                         oracle::euclid(g.depth, f2.depth)));
    CHECK(d <= via * (1 + 1e-12));
  }
}

TEST_CASE("argmin over centroids survives uniform weight scaling") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dr = 1 + rng() % 6, dd = 1 + rng() % 6;
    std::vector<CentroidPair> cs;
    for (int i = 0; i < 12; ++i) cs.push_back(CentroidPair::from_sample(random_pair(rng, dr, dd)));
    const auto q = random_pair(rng, dr, dd);
    const FusionWeights w{0.8, 0.3};
    auto argmin = [&](const FusionWeights& ww) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < cs.size(); ++i)
        if (fused_distance(cs[i], q, ww) < fused_distance(cs[best], q, ww)) best = i;
      return best;
    };
    const auto base = argmin(w);
    for (double alpha : {0.125, 0.37, 3.0, 1000.0})
      CHECK(argmin({alpha * w.rgb, alpha * w.depth}) == base);
  }
}

TEST_CASE("update centroid worked values") {
  const CentroidPair c{{2, 2}, {2, 2}, 3};
  const auto u = update_centroid(c, FeaturePair{1, {6, 6}, {6, 6}});
  CHECK(u.rgb == std::vector<double>{3, 3});
  CHECK(u.weight == 4);

  const CentroidPair c1{{0, 0}, {0, 0}, 1};
  const auto u1 = update_centroid(c1, FeaturePair{1, {4, 0}, {4, 0}});
  CHECK(u1.rgb == std::vector<double>{2, 0});
  CHECK(u1.weight == 2);

  CHECK(error_code_of([&] { update_centroid(c1, FeaturePair{1, {4}, {4, 0}}); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("sequential updates give the member mean and conserve weight") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dr = 1 + rng() % 16, dd = 1 + rng() % 16;
    const std::size_t k = 1 + rng() % 60;
    std::vector<FeaturePair> members;
    for (std::size_t i = 0; i < k; ++i) members.push_back(random_pair(rng, dr, dd, i));
    auto c = CentroidPair::from_sample(members[0]);
    for (std::size_t i = 1; i < k; ++i) c = update_centroid(c, members[i]);
    CHECK(c.weight == k);

    std::vector<const FeaturePair*> ptrs;
    for (const auto& m : members) ptrs.push_back(&m);
    const auto mean = oracle::mean_of(ptrs);
    CHECK(oracle::rel_close(c.rgb, mean.rgb, 1e-6));
    CHECK(oracle::rel_close(c.depth, mean.depth, 1e-6));
  }
}

TEST_CASE("merge centroids worked values") {
  const auto m = merge_centroids({{0}, {0}, 2}, {{3}, {3}, 1});
  CHECK(m.rgb == std::vector<double>{1});
  CHECK(m.depth == std::vector<double>{1});
  CHECK(m.weight == 3);

  const CentroidPair a{{1.5, -2}, {0.25}, 5};
  const auto self = merge_centroids(a, a);
  CHECK(self.rgb == a.rgb);
  CHECK(self.depth == a.depth);
  CHECK(self.weight == 10);
}

TEST_CASE("merging centroids pairwise in any order gives the grand mean") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dr = 1 + rng() % 8, dd = 1 + rng() % 8;
    const std::size_t groups = 2 + rng() % 6;
    std::vector<FeaturePair> members;
    std::vector<CentroidPair> centroids;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t size = 1 + rng() % 7;
      CentroidPair c;
      for (std::size_t i = 0; i < size; ++i) {
        members.push_back(random_pair(rng, dr, dd));
        c = i == 0 ? CentroidPair::from_sample(members.back())
                   : update_centroid(c, members.back());
      }
      centroids.push_back(c);
    }
    std::shuffle(centroids.begin(), centroids.end(), rng);
    while (centroids.size() > 1) {
      const std::size_t i = rng() % centroids.size();
      std::size_t j = rng() % (centroids.size() - 1);
      if (j >= i) ++j;
      centroids[std::min(i, j)] = merge_centroids(centroids[i], centroids[j]);
      centroids.erase(centroids.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
    }
    std::vector<const FeaturePair*> ptrs;
    for (const auto& m : members) ptrs.push_back(&m);
    const auto mean = oracle::mean_of(ptrs);
    CHECK(centroids[0].weight == members.size());
    CHECK(oracle::rel_close(centroids[0].rgb, mean.rgb, 1e-6));
    CHECK(oracle::rel_close(centroids[0].depth, mean.depth, 1e-6));
  }
}

TEST_CASE("fusion weight validation") {
  CHECK(error_code_of([] { validate_fusion({-0.1, 1}); }) == ErrorCode::invalid_argument);
  CHECK(error_code_of([] { validate_fusion({0, 0}); }) == ErrorCode::invalid_argument);
  CHECK(error_code_of([] { validate_fusion({std::nan(""), 1}); }) == ErrorCode::invalid_argument);
  CHECK(error_code_of([] {
          validate_fusion({std::numeric_limits<double>::infinity(), 1});
        }) == ErrorCode::invalid_argument);
  {
    testing::WarningCapture warnings;
    validate_fusion({0, 0.5});
    validate_fusion({1, 0});
    CHECK(warnings.messages.empty());
    validate_fusion({1.5, 0.5});
    CHECK(warnings.messages.size() == 1);
  }
}

TEST_CASE("model validation rejects broken invariants") {
  CHECK_NOTHROW(tiny_model().validate());

  auto empty = tiny_model();
  empty.categories.clear();
  CHECK(error_code_of([&] { empty.validate(); }) == ErrorCode::empty_category);

  auto dup = tiny_model();
  dup.categories[1].label = "bedroom";
  CHECK(error_code_of([&] { dup.validate(); }) == ErrorCode::invalid_argument);

  auto nolabel = tiny_model();
  nolabel.categories[0].label.clear();
  CHECK_THROWS_AS(nolabel.validate(), Error);

  auto count = tiny_model();
  count.categories[0].train_count = 5;
  CHECK_THROWS_AS(count.validate(), Error);

  auto weight = tiny_model();
  weight.categories[1].centroids[0].weight = 0;
  CHECK_THROWS_AS(weight.validate(), Error);

  auto dims = tiny_model();
  dims.categories[0].centroids[1].depth.push_back(1.0);
  CHECK(error_code_of([&] { dims.validate(); }) == ErrorCode::dimension_mismatch);

  auto nan = tiny_model();
  nan.categories[0].centroids[0].rgb[1] = std::nan("");
  CHECK(error_code_of([&] { nan.validate(); }) == ErrorCode::non_finite);

  auto threshold = tiny_model();
  threshold.distance_threshold = 0;
  CHECK_THROWS_AS(threshold.validate(), Error);

  auto nocentroids = tiny_model();
  nocentroids.categories[1].centroids.clear();
  nocentroids.categories[1].train_count = 0;
  CHECK_THROWS_AS(nocentroids.validate(), Error);
}

TEST_CASE("model lookup and totals") {
  const auto m = tiny_model();
  CHECK(m.total_centroids() == 3);
  CHECK(m.find("office") == 1u);
  CHECK_FALSE(m.find("kitchen").has_value());
}

TEST_CASE("model file round trip") {
  testing::TempDir dir;
  const auto m = tiny_model();
  save_model(m, dir / "m.cbm");
  CHECK(load_model(dir / "m.cbm") == m);  // all values are exact in f32

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    auto r = oracle::random_model(rng, 6, 40, 12);
    r.distance_threshold = trial % 3 == 0 ? std::numeric_limits<double>::infinity() : 0.1 * (trial + 1);
    const auto bytes = encode_model(r);
    const auto back = decode_model(bytes);
    CHECK(back == quantized(r));
    // f32 storage: a second trip is bit-exact.
    CHECK(encode_model(back) == bytes);
  }
}

TEST_CASE("model file header and layout") {
  const auto bytes = encode_model(tiny_model());
  REQUIRE(bytes.size() > 10);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "CBM1");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  // Header 4+2+4+4+8+8+8+4; categories: (2+7+8+4) + 2*(8+2*4+1*4) and
  // (2+6+8+4) + (8+2*4+4); CRC 4.
  const std::size_t expect = 42 + (21 + 2 * 20) + (20 + 20) + 4;
  CHECK(bytes.size() == expect);
  const std::span<const std::uint8_t> body(bytes.data(), bytes.size() - 4);
  const std::uint32_t crc = crc32(body);
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= std::uint32_t(bytes[bytes.size() - 4 + i]) << (8 * i);
  CHECK(stored == crc);
}

TEST_CASE("model file corruption is reported with distinct errors") {
  const auto good = encode_model(tiny_model());

  auto magic = good;
  magic[0] = 'X';
  CHECK(error_code_of([&] { decode_model(magic); }) == ErrorCode::bad_format);

  auto future = good;
  future[4] = 7;
  // Keep the checksum valid so only the version is wrong.
  const std::uint32_t crc = crc32(std::span<const std::uint8_t>(future.data(), future.size() - 4));
  for (int i = 0; i < 4; ++i) future[future.size() - 4 + i] = std::uint8_t(crc >> (8 * i));
  CHECK(error_code_of([&] { decode_model(future); }) == ErrorCode::unsupported_version);
  const auto msg = error_message_of([&] { decode_model(future); });
  CHECK(contains(msg, "7"));
  CHECK(contains(msg, "1"));

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, good.size() / 2,
                          good.size() - 5}) {
    const std::vector<std::uint8_t> truncated(good.begin(), good.begin() + cut);
    CHECK(error_code_of([&] { decode_model(truncated); }) == ErrorCode::truncated);
  }

  auto flipped = good;
  flipped[good.size() / 2] ^= 0x40;
  CHECK(error_code_of([&] { decode_model(flipped); }) == ErrorCode::checksum_mismatch);

  auto extra = good;
  extra.push_back(0);
  CHECK_THROWS_AS(decode_model(extra), Error);
}

TEST_CASE("loading a missing model file is an io error") {
  testing::TempDir dir;
  CHECK(error_code_of([&] { load_model(dir / "absent.cbm"); }) == ErrorCode::io);
}

TEST_CASE("finite and dimension checks name the sample") {
  const std::vector<float> bad{1.0f, std::numeric_limits<float>::infinity()};
  const auto msg = error_message_of([&] { check_finite(bad, 1234, "depth"); });
  CHECK(contains(msg, "1234"));
  CHECK(error_code_of([&] { check_finite(bad, 1, "rgb"); }) == ErrorCode::non_finite);

  const FeaturePair f{77, {1, 2}, {3}};
  CHECK_NOTHROW(check_dims(f, 2, 1));
  CHECK(contains(error_message_of([&] { check_dims(f, 3, 1); }), "77"));
}
