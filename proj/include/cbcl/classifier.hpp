#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cbcl/kernels.hpp"
#include "cbcl/model.hpp"

namespace cbcl {

struct PredictConfig {
  std::size_t n_neighbors = 17;
  double epsilon = 1e-9;  // floor for zero distances
};

void validate(const PredictConfig& cfg);

struct Neighbor {
  std::string category;
  std::size_t centroid_index = 0;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct Prediction {
  std::string label;
  std::map<std::string, double> scores;  // every model category, zero if unsupported
  std::vector<Neighbor> neighbors;       // ascending distance

  double top_score() const;
  bool operator==(const Prediction&) const = default;
};

/// Distance-weighted vote of the n globally nearest centroid pairs, each
/// class score scaled by 1/N_j. Warns and clamps when n exceeds the number
/// of centroids.
Prediction predict(const ConceptModel& m, const FeaturePair& f, const PredictConfig& cfg);

std::vector<Prediction> predict_batch(const ConceptModel& m, std::span<const FeaturePair> fs,
                                      const PredictConfig& cfg,
                                      Execution exec = Execution::parallel);

struct EvalReport {
  double overall_accuracy = 0.0;
  double mean_class_accuracy = 0.0;
  std::vector<std::string> labels;                  // row/column order of the confusion matrix
  std::vector<std::vector<std::uint64_t>> confusion;  // rows: ground truth, cols: predicted
  std::map<std::string, double> per_class_accuracy;   // classes with >= 1 test sample
  std::map<std::string, std::uint64_t> support;
  std::uint64_t total = 0;
  std::uint64_t correct = 0;

  bool operator==(const EvalReport&) const = default;
};

/// Builds the report from (truth, predicted) label pairs.
EvalReport summarize(std::span<const std::string> truth, std::span<const std::string> predicted,
                     std::span<const std::string> model_labels);

EvalReport evaluate(const ConceptModel& m, std::span<const LabeledPair> test,
                    const PredictConfig& cfg, Execution exec = Execution::parallel);

}  // namespace cbcl
