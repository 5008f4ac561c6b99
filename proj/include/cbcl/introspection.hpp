#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbcl/kernels.hpp"
#include "cbcl/model.hpp"

namespace cbcl {

/// Centroid silhouette of one training sample: a is the fused distance to
/// the nearest centroid of its own category, b the distance to the nearest
/// centroid of any other category.
struct SilhouetteRecord {
  SampleId sample_id = 0;
  std::string own_category;
  double s = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::string nearest_other;

  bool operator==(const SilhouetteRecord&) const = default;
};

/// (b − a) / max(a, b), or 0 when both are zero.
double silhouette_value(double a, double b) noexcept;

std::vector<SilhouetteRecord> silhouette_all(const ConceptModel& m,
                                             std::span<const LabeledPair> train,
                                             Execution exec = Execution::parallel);

struct CategoryConfusion {
  std::string category;
  std::uint64_t train_count = 0;   // N_j
  std::uint64_t low_count = 0;     // samples with s <= 0
  double z_conf = 0.0;             // low_count / N_j
  std::optional<std::string> y_conf;  // most common nearest_other among low samples

  bool operator==(const CategoryConfusion&) const = default;
};

/// One entry per model category, in model order.
struct ConfusionSummary {
  std::vector<CategoryConfusion> categories;

  const CategoryConfusion* find(std::string_view label) const;
  bool operator==(const ConfusionSummary&) const = default;
};

ConfusionSummary confusion_summary(std::span<const SilhouetteRecord> records,
                                   const ConceptModel& m);

inline constexpr double kMergeFractionThreshold = 0.25;

/// Name given to the union of two categories.
std::string merged_label(std::string_view a, std::string_view b);

struct MergeRound {
  ConfusionSummary evidence;
  std::vector<std::pair<std::string, std::string>> merges;  // (lower, higher) label pairs

  bool operator==(const MergeRound&) const = default;
};

struct MergePlan {
  std::vector<MergeRound> rounds;  // the last round records the evidence that stopped the loop
  std::map<std::string, std::string> final_mapping;  // every label ever seen -> final label

  bool empty() const;
  std::size_t merge_count() const;
  bool operator==(const MergePlan&) const = default;
};

/// Recursive bidirectional-confusion merging: each round merges every pair
/// of categories whose low-silhouette fractions both exceed 25% and whose
/// y_conf point at each other, refitting merged categories from the pooled
/// training samples with the model's threshold and fusion weights.
MergePlan plan_merges(const ConceptModel& m, std::span<const LabeledPair> train,
                      Execution exec = Execution::parallel);

/// Relabels according to plan.final_mapping. Idempotent.
std::vector<std::string> apply_merge(const MergePlan& plan, std::span<const std::string> labels);
std::vector<LabeledPair> apply_merge(const MergePlan& plan, std::span<const LabeledPair> data);

}  // namespace cbcl
