#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbcl/kernels.hpp"
#include "cbcl/model.hpp"

namespace cbcl {

enum class OrderPolicy { dataset_order, seeded_shuffle };

struct TrainConfig {
  double distance_threshold = 85.0;  // D
  FusionWeights fusion;
  OrderPolicy order = OrderPolicy::dataset_order;
  std::uint64_t seed = 42;  // used by seeded_shuffle only
  bool record_assignments = true;
};

enum class AssignAction { seed, absorb, create };

std::string_view to_string(AssignAction a);

struct Assignment {
  SampleId sample_id = 0;
  std::string category;
  std::size_t centroid_index = 0;
  AssignAction action = AssignAction::seed;

  bool operator==(const Assignment&) const = default;
};

/// Assignments in processing order: categories in model order, samples in
/// the order the clustering loop consumed them.
struct AssignmentTrace {
  std::vector<Assignment> entries;

  std::string to_csv() const;
  bool operator==(const AssignmentTrace&) const = default;
};

struct FitResult {
  ConceptModel model;
  AssignmentTrace trace;
};

/// Agg-Var clustering. Categories are ordered by label and clustered
/// independently (in parallel under Execution::parallel); within a category
/// each sample is absorbed into its nearest centroid pair when the fused
/// distance is strictly below D, otherwise it starts a new centroid pair.
FitResult fit(std::span<const LabeledPair> data, const TrainConfig& cfg,
              Execution exec = Execution::parallel);

/// Fits on data[subset[0]], data[subset[1]], ... in that order.
FitResult fit(std::span<const LabeledPair> data, std::span<const std::size_t> subset,
              const TrainConfig& cfg, Execution exec = Execution::parallel);

/// Re-runs the clustering loop over each category's existing centroids (in
/// stored order) with a new threshold, absorbing via merge_centroids. Pass
/// +infinity to collapse every category to a single centroid.
ConceptModel condense(const ConceptModel& m, double new_threshold);

struct CategoryStats {
  std::string label;
  std::size_t centroid_count = 0;
  std::uint64_t min_weight = 0;
  std::uint64_t max_weight = 0;
  double mean_weight = 0.0;
  std::uint64_t train_count = 0;
};

struct CentroidStats {
  std::vector<CategoryStats> categories;
  std::size_t total_centroids = 0;
  std::uint64_t total_train_count = 0;
};

CentroidStats centroid_stats(const ConceptModel& m);

}  // namespace cbcl
