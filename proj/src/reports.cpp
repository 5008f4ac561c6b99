#include "cbcl/reports.hpp"

#include <fmt/format.h>

#include <cmath>
#include <json.hpp>

namespace cbcl {

using ordered_json = nlohmann::ordered_json;

namespace {

// JSON has no infinity; thresholds may legitimately be +inf after condensing.
ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

ordered_json summary_json(const ConfusionSummary& s) {
  ordered_json out = ordered_json::array();
  for (const auto& c : s.categories) {
    ordered_json row;
    row["category"] = c.category;
    row["train_count"] = c.train_count;
    row["low_silhouette_count"] = c.low_count;
    row["z_conf"] = c.z_conf;
    row["y_conf"] = c.y_conf ? ordered_json(*c.y_conf) : ordered_json(nullptr);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

std::string eval_report_json(const EvalReport& r, const ReportProvenance& p) {
  ordered_json doc;
  auto& prov = doc["provenance"];
  prov["distance_threshold"] = number(p.distance_threshold);
  prov["n_neighbors"] = p.n_neighbors;
  prov["w_rgb"] = p.w_rgb;
  prov["w_depth"] = p.w_depth;
  prov["epsilon"] = p.epsilon;
  prov["split"] = p.split;
  doc["samples"] = r.total;
  doc["correct"] = r.correct;
  doc["overall_accuracy"] = r.overall_accuracy;
  doc["mean_class_accuracy"] = r.mean_class_accuracy;
  ordered_json per_class = ordered_json::object();
  for (const auto& [label, acc] : r.per_class_accuracy) {
    ordered_json entry;
    entry["support"] = r.support.at(label);
    entry["accuracy"] = acc;
    per_class[label] = std::move(entry);
  }
  doc["per_class"] = std::move(per_class);
  doc["confusion"]["labels"] = r.labels;
  doc["confusion"]["rows_are"] = "ground_truth";
  doc["confusion"]["matrix"] = r.confusion;
  return doc.dump(2) + "\n";
}

std::string predictions_csv(std::span<const SampleId> ids, std::span<const Prediction> preds) {
  std::size_t width = 0;
  for (const auto& p : preds) width = std::max(width, p.neighbors.size());
  std::string out = "sample_id,predicted,score_top1";
  for (std::size_t k = 1; k <= width; ++k)
    out += fmt::format(",neighbor_{0}_category,neighbor_{0}_distance", k);
  out += '\n';
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    out += fmt::format("{},{},{}", ids[i], p.label, format_number(p.top_score()));
    for (std::size_t k = 0; k < width; ++k) {
      if (k < p.neighbors.size())
        out += fmt::format(",{},{}", p.neighbors[k].category,
                           format_number(p.neighbors[k].distance));
      else
        out += ",,";
    }
    out += '\n';
  }
  return out;
}

std::string silhouettes_csv(std::span<const SilhouetteRecord> records) {
  std::string out = "sample_id,category,s,a,b,nearest_other\n";
  for (const auto& r : records)
    out += fmt::format("{},{},{},{},{},{}\n", r.sample_id, r.own_category, format_number(r.s),
                       format_number(r.a), format_number(r.b), r.nearest_other);
  return out;
}

std::string merge_plan_json(const MergePlan& plan) {
  ordered_json doc;
  doc["merge_count"] = plan.merge_count();
  doc["rounds"] = ordered_json::array();
  for (std::size_t i = 0; i < plan.rounds.size(); ++i) {
    const auto& r = plan.rounds[i];
    ordered_json round;
    round["round"] = i + 1;
    round["merges"] = ordered_json::array();
    for (const auto& [lo, hi] : r.merges) {
      ordered_json m;
      m["categories"] = {lo, hi};
      m["merged_label"] = merged_label(lo, hi);
      round["merges"].push_back(std::move(m));
    }
    round["evidence"] = summary_json(r.evidence);
    doc["rounds"].push_back(std::move(round));
  }
  ordered_json mapping = ordered_json::object();
  for (const auto& [from, to] : plan.final_mapping) mapping[from] = to;
  doc["final_mapping"] = std::move(mapping);
  return doc.dump(2) + "\n";
}

std::string centroid_stats_json(const CentroidStats& stats, const ConceptModel& m) {
  ordered_json doc;
  doc["rgb_dim"] = m.rgb_dim;
  doc["depth_dim"] = m.depth_dim;
  doc["w_rgb"] = m.fusion.rgb;
  doc["w_depth"] = m.fusion.depth;
  doc["distance_threshold"] = number(m.distance_threshold);
  doc["total_centroids"] = stats.total_centroids;
  doc["total_train_count"] = stats.total_train_count;
  doc["categories"] = ordered_json::array();
  for (const auto& c : stats.categories) {
    ordered_json row;
    row["label"] = c.label;
    row["centroids"] = c.centroid_count;
    row["train_count"] = c.train_count;
    row["min_weight"] = c.min_weight;
    row["max_weight"] = c.max_weight;
    row["mean_weight"] = c.mean_weight;
    doc["categories"].push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

std::string tune_report_json(const TuneResult& r, std::uint64_t seed) {
  ordered_json doc;
  doc["folds"] = r.folds;
  doc["seed"] = seed;
  const auto& best = r.table.at(r.best);
  doc["best"]["distance_threshold"] = best.distance_threshold;
  doc["best"]["n_neighbors"] = best.n_neighbors;
  doc["best"]["w_depth"] = best.depth_weight;
  doc["best"]["mean_class_accuracy"] = best.mean_score;
  doc["table"] = ordered_json::array();
  for (const auto& p : r.table) {
    ordered_json row;
    row["distance_threshold"] = p.distance_threshold;
    row["n_neighbors"] = p.n_neighbors;
    row["w_depth"] = p.depth_weight;
    row["mean_class_accuracy"] = p.mean_score;
    row["fold_scores"] = p.fold_scores;
    doc["table"].push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

}  // namespace cbcl
