#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbcl/classifier.hpp"
#include "cbcl/kernels.hpp"
#include "cbcl/model.hpp"

namespace cbcl {

struct TuneGrid {
  std::vector<double> distance_thresholds{85.0};
  std::vector<std::size_t> n_neighbors{17};
  std::vector<double> depth_weights{0.73};
  double rgb_weight = 1.0;
};

struct TunePoint {
  double distance_threshold = 0.0;
  std::size_t n_neighbors = 0;
  double depth_weight = 0.0;
  std::vector<double> fold_scores;  // validation mean-class accuracy per fold
  double mean_score = 0.0;
};

struct TuneResult {
  std::vector<TunePoint> table;  // grid order: D, then n, then w_depth
  std::size_t best = 0;          // first point with the highest mean score
  std::size_t folds = 0;
};

/// Fold index per sample. Each category's samples are shuffled with the
/// seed and dealt round-robin, so every fold receives floor or ceil of
/// N_j / k samples of category j.
std::vector<std::size_t> stratified_folds(std::span<const LabeledPair> data, std::size_t folds,
                                          std::uint64_t seed);

/// Grid search with stratified k-fold cross-validation on `train`. Duplicate
/// grid values are dropped with a warning.
TuneResult tune(std::span<const LabeledPair> train, const TuneGrid& grid, std::size_t folds,
                std::uint64_t seed, double epsilon = 1e-9, Execution exec = Execution::parallel);

}  // namespace cbcl
