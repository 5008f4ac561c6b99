#include <doctest.h>

#include <algorithm>
#include <limits>
#include <map>
#include <random>

#include "cbcl/synthetic.hpp"
#include "cbcl/trainer.hpp"
#include "cbcl/tuning.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace cbcl;
using testing::contains;
using testing::error_code_of;
using testing::error_message_of;

namespace {

std::vector<LabeledPair> synth_train(const SynthSpec& spec) {
  const auto s = generate_synthetic(spec);
  return join_dataset(s.rgb, s.depth, s.manifest).train;
}

}  // namespace

TEST_CASE("stratified folds partition every category evenly") {
  std::mt19937_64 rng(151);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = oracle::random_instance(rng, 5, 80, 2);
    const std::size_t k = 2 + rng() % 4;
    // Make sure every category can fill k folds.
    const auto groups = oracle::by_label(inst.data);
    bool enough = true;
    for (const auto& [l, g] : groups) enough = enough && g.size() >= k;
    if (!enough) {
      CHECK(error_code_of([&] { stratified_folds(inst.data, k, 1); }) == ErrorCode::invalid_argument);
      continue;
    }
    const auto folds = stratified_folds(inst.data, k, trial);
    REQUIRE(folds.size() == inst.data.size());
    std::map<std::string, std::vector<std::size_t>> per;  // label -> count per fold
    for (std::size_t i = 0; i < folds.size(); ++i) {
      REQUIRE(folds[i] < k);
      auto& v = per[inst.data[i].label];
      v.resize(k);
      ++v[folds[i]];
    }
    for (const auto& [label, counts] : per) {
      const std::size_t n = groups.at(label).size();
      for (std::size_t c : counts) {
        CHECK(c >= n / k);
        CHECK(c <= (n + k - 1) / k);
      }
    }
    CHECK(stratified_folds(inst.data, k, trial) == folds);
  }
}

TEST_CASE("stratified folds reject small categories by name") {
  std::vector<LabeledPair> data;
  for (int i = 0; i < 6; ++i) data.push_back({oracle::pair1d(i, i), "plenty"});
  for (int i = 0; i < 2; ++i) data.push_back({oracle::pair1d(10 + i, i), "rare"});
  CHECK_NOTHROW(stratified_folds(data, 2, 1));
  CHECK(error_code_of([&] { stratified_folds(data, 3, 1); }) == ErrorCode::invalid_argument);
  CHECK(contains(error_message_of([&] { stratified_folds(data, 3, 1); }), "rare"));
  CHECK(error_code_of([&] { stratified_folds(data, 1, 1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("a one-point grid returns that point with its cross-validation score") {
  const auto train = synth_train({3, 2, 4, 4, 1.0, 0.4, 12, 0.25, 21});
  TuneGrid grid;
  grid.distance_thresholds = {0.5};
  grid.n_neighbors = {3};
  grid.depth_weights = {0.6};
  const auto r = tune(train, grid, 3, 5);
  REQUIRE(r.table.size() == 1);
  CHECK(r.best == 0);
  CHECK(r.folds == 3);
  const auto& p = r.table[0];
  CHECK(p.distance_threshold == 0.5);
  CHECK(p.n_neighbors == 3);
  CHECK(p.depth_weight == 0.6);
  REQUIRE(p.fold_scores.size() == 3);

  // Recompute each fold by hand.
  const auto folds = stratified_folds(train, 3, 5);
  double sum = 0;
  for (std::size_t f = 0; f < 3; ++f) {
    std::vector<LabeledPair> fit_set, val_set;
    for (std::size_t i = 0; i < train.size(); ++i) (folds[i] == f ? val_set : fit_set).push_back(train[i]);
    TrainConfig cfg;
    cfg.distance_threshold = 0.5;
    cfg.fusion = {1.0, 0.6};
    const auto m = fit(fit_set, cfg).model;
    const auto score = evaluate(m, val_set, {3, 1e-9}).mean_class_accuracy;
    CHECK(p.fold_scores[f] == score);
    sum += score;
  }
  CHECK(p.mean_score == doctest::Approx(sum / 3));
}

TEST_CASE("duplicate grid values are dropped with a warning") {
  const auto train = synth_train({2, 1, 3, 3, 1.0, 0.2, 10, 0.2, 3});
  TuneGrid grid;
  grid.distance_thresholds = {1.0, 2.0, 1.0};
  grid.n_neighbors = {1, 1};
  grid.depth_weights = {0.5};
  testing::WarningCapture warnings;
  const auto r = tune(train, grid, 2, 1);
  CHECK(r.table.size() == 2);
  CHECK(warnings.messages.size() == 2);
  CHECK(contains(warnings.messages[0], "1"));
}

TEST_CASE("grid order and best point") {
  const auto train = synth_train({3, 2, 4, 4, 1.0, 0.3, 10, 0.2, 8});
  TuneGrid grid;
  grid.distance_thresholds = {0.2, 50.0};
  grid.n_neighbors = {1, 4};
  grid.depth_weights = {0.3, 1.0};
  const auto r = tune(train, grid, 2, 3);
  REQUIRE(r.table.size() == 8);
  std::size_t k = 0;
  for (double d : grid.distance_thresholds)
    for (std::size_t n : grid.n_neighbors)
      for (double w : grid.depth_weights) {
        CHECK(r.table[k].distance_threshold == d);
        CHECK(r.table[k].n_neighbors == n);
        CHECK(r.table[k].depth_weight == w);
        ++k;
      }
  double top = -1;
  for (const auto& p : r.table) top = std::max(top, p.mean_score);
  CHECK(r.table[r.best].mean_score == top);
  for (std::size_t i = 0; i < r.best; ++i) CHECK(r.table[i].mean_score < top);

  const auto serial = tune(train, grid, 2, 3, 1e-9, Execution::serial);
  for (std::size_t i = 0; i < r.table.size(); ++i) CHECK(serial.table[i].fold_scores == r.table[i].fold_scores);
}

TEST_CASE("thresholds inside the layout gap score identically") {
  const SynthSpec spec{4, 3, 6, 6, 1.0, 0.01, 20, 0.0, 13};
  const auto s = generate_synthetic(spec);
  const auto train = join_dataset(s.rgb, s.depth, s.manifest).train;
  const FusionWeights w{1.0, 0.73};

  // Gap bounds from the raw samples: widest same-layout pair, closest
  // different-layout pair within a category.
  double diameter = 0, gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < train.size(); ++i)
    for (std::size_t k = i + 1; k < train.size(); ++k) {
      if (s.truth[i].category != s.truth[k].category) continue;
      const double d = oracle::fused(CentroidPair::from_sample(train[i].features), train[k].features, w);
      if (s.truth[i].layout == s.truth[k].layout)
        diameter = std::max(diameter, d);
      else
        gap = std::min(gap, d);
    }
  REQUIRE(diameter < gap / 4);

  TuneGrid grid;
  grid.n_neighbors = {3};
  grid.depth_weights = {0.73};
  grid.distance_thresholds.clear();
  for (int i = 1; i <= 5; ++i) grid.distance_thresholds.push_back(diameter + (gap / 2 - diameter) * i / 5.0);
  const auto r = tune(train, grid, 4, 7);
  for (const auto& p : r.table) {
    CHECK(p.mean_score == r.table[0].mean_score);
    CHECK(p.fold_scores == r.table[0].fold_scores);
  }
  CHECK(r.best == 0);
}

TEST_CASE("tune rejects bad grids") {
  const auto train = synth_train({2, 1, 3, 3, 1.0, 0.2, 10, 0.2, 3});
  TuneGrid grid;
  grid.distance_thresholds = {};
  CHECK(error_code_of([&] { tune(train, grid, 2, 1); }) == ErrorCode::invalid_argument);
  grid = {};
  grid.distance_thresholds = {-1};
  CHECK(error_code_of([&] { tune(train, grid, 2, 1); }) == ErrorCode::invalid_argument);
  grid = {};
  grid.n_neighbors = {0};
  CHECK(error_code_of([&] { tune(train, grid, 2, 1); }) == ErrorCode::invalid_argument);
  grid = {};
  grid.depth_weights = {-0.5};
  CHECK(error_code_of([&] { tune(train, grid, 2, 1); }) == ErrorCode::invalid_argument);
  CHECK(error_code_of([&] { tune(train, TuneGrid{}, 1, 1); }) == ErrorCode::invalid_argument);
  CHECK(error_code_of([&] { tune(std::vector<LabeledPair>{}, TuneGrid{}, 2, 1); }) ==
        ErrorCode::invalid_argument);
}
