#pragma once

// Text renderings of results. JSON documents use a fixed key order so that
// identical inputs give byte-identical files.

#include <span>
#include <string>

#include "cbcl/classifier.hpp"
#include "cbcl/introspection.hpp"
#include "cbcl/trainer.hpp"
#include "cbcl/tuning.hpp"

namespace cbcl {

struct ReportProvenance {
  double distance_threshold = 0.0;
  std::size_t n_neighbors = 0;
  double w_rgb = 0.0;
  double w_depth = 0.0;
  double epsilon = 0.0;
  std::string split;
};

std::string eval_report_json(const EvalReport& r, const ReportProvenance& p);

/// `sample_id,predicted,score_top1,neighbor_1_category,neighbor_1_distance,...`
std::string predictions_csv(std::span<const SampleId> ids, std::span<const Prediction> preds);

/// `sample_id,category,s,a,b,nearest_other`
std::string silhouettes_csv(std::span<const SilhouetteRecord> records);

std::string merge_plan_json(const MergePlan& plan);

std::string centroid_stats_json(const CentroidStats& stats, const ConceptModel& m);

std::string tune_report_json(const TuneResult& r, std::uint64_t seed);

/// Formats a double with the shortest representation that round-trips.
std::string format_number(double v);

}  // namespace cbcl
