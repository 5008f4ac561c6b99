#include "cbcl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "cbcl/error.hpp"

namespace cbcl {

std::string_view to_string(AssignAction a) {
  switch (a) {
    case AssignAction::seed: return "seed";
    case AssignAction::absorb: return "absorb";
    case AssignAction::create: return "create";
  }
  return "?";
}

std::string AssignmentTrace::to_csv() const {
  std::ostringstream out;
  out << "sample_id,category,centroid_index,action\n";
  for (const auto& e : entries)
    out << e.sample_id << ',' << e.category << ',' << e.centroid_index << ',' << to_string(e.action)
        << '\n';
  return out.str();
}

namespace {

struct CategoryFit {
  std::vector<CentroidPair> centroids;
  std::vector<Assignment> trace;
};

CategoryFit cluster_category(std::span<const LabeledPair> data, std::span<const std::size_t> members,
                             const std::string& label, const TrainConfig& cfg) {
  CategoryFit out;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const FeaturePair& f = data[members[k]].features;
    std::size_t index;
    AssignAction action;
    if (k == 0) {
      out.centroids.push_back(CentroidPair::from_sample(f));
      index = 0;
      action = AssignAction::seed;
    } else {
      const auto near = kernels::nearest(out.centroids, f, cfg.fusion);
      if (near.distance < cfg.distance_threshold) {
        out.centroids[near.index] = update_centroid(out.centroids[near.index], f);
        index = near.index;
        action = AssignAction::absorb;
      } else {
        out.centroids.push_back(CentroidPair::from_sample(f));
        index = out.centroids.size() - 1;
        action = AssignAction::create;
      }
    }
    if (cfg.record_assignments) out.trace.push_back({f.id, label, index, action});
  }
  return out;
}

void check_threshold(double d, std::string_view what) {
  if (std::isnan(d) || !(d > 0.0))
    throw Error(ErrorCode::invalid_argument,
                std::string(what) + " must be positive (got " + std::to_string(d) + ")");
}

}  // namespace

FitResult fit(std::span<const LabeledPair> data, const TrainConfig& cfg, Execution exec) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit(data, all, cfg, exec);
}

FitResult fit(std::span<const LabeledPair> data, std::span<const std::size_t> subset,
              const TrainConfig& cfg, Execution exec) {
  check_threshold(cfg.distance_threshold, "distance threshold");
  validate_fusion(cfg.fusion);
  if (subset.empty()) throw Error(ErrorCode::invalid_argument, "training set is empty");
  for (std::size_t i : subset)
    if (i >= data.size())
      throw Error(ErrorCode::invalid_argument, "subset index " + std::to_string(i) + " out of range");

  const auto& first = data[subset.front()].features;
  const std::size_t rgb_dim = first.rgb.size();
  const std::size_t depth_dim = first.depth.size();
  if (rgb_dim == 0 || depth_dim == 0)
    throw Error(ErrorCode::dimension_mismatch,
                "sample " + std::to_string(first.id) + ": empty feature vector");
  for (std::size_t i : subset) {
    const auto& s = data[i];
    check_dims(s.features, rgb_dim, depth_dim);
    check_finite(s.features.rgb, s.features.id, "rgb");
    check_finite(s.features.depth, s.features.id, "depth");
    if (s.label.empty())
      throw Error(ErrorCode::invalid_argument,
                  "sample " + std::to_string(s.features.id) + " has an empty label");
  }

  std::vector<std::size_t> order(subset.begin(), subset.end());
  if (cfg.order == OrderPolicy::seeded_shuffle) {
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i : order) groups[data[i].label].push_back(i);

  std::vector<const std::string*> labels;
  std::vector<const std::vector<std::size_t>*> members;
  for (const auto& [label, idx] : groups) {
    labels.push_back(&label);
    members.push_back(&idx);
  }

  std::vector<CategoryFit> fits(groups.size());
  kernels::for_each_index(groups.size(), exec, [&](std::size_t j) {
    fits[j] = cluster_category(data, *members[j], *labels[j], cfg);
  });

  FitResult result;
  auto& m = result.model;
  m.fusion = cfg.fusion;
  m.rgb_dim = static_cast<std::uint32_t>(rgb_dim);
  m.depth_dim = static_cast<std::uint32_t>(depth_dim);
  m.distance_threshold = cfg.distance_threshold;
  for (std::size_t j = 0; j < fits.size(); ++j) {
    m.categories.push_back({*labels[j], std::move(fits[j].centroids), members[j]->size()});
    auto& t = fits[j].trace;
    result.trace.entries.insert(result.trace.entries.end(), std::make_move_iterator(t.begin()),
                                std::make_move_iterator(t.end()));
  }
  return result;
}

ConceptModel condense(const ConceptModel& m, double new_threshold) {
  check_threshold(new_threshold, "condense threshold");
  m.validate();
  if (new_threshold <= m.distance_threshold)
    warn("condense threshold " + std::to_string(new_threshold) +
         " is not larger than the model's threshold " + std::to_string(m.distance_threshold));

  ConceptModel out = m;
  out.distance_threshold = new_threshold;
  for (auto& cat : out.categories) {
    std::vector<CentroidPair> merged;
    merged.reserve(cat.centroids.size());
    for (const auto& c : cat.centroids) {
      if (merged.empty()) {
        merged.push_back(c);
        continue;
      }
      const auto near = kernels::nearest(merged, c, m.fusion);
      if (near.distance < new_threshold)
        merged[near.index] = merge_centroids(merged[near.index], c);
      else
        merged.push_back(c);
    }
    cat.centroids = std::move(merged);
  }
  return out;
}

CentroidStats centroid_stats(const ConceptModel& m) {
  CentroidStats stats;
  for (const auto& cat : m.categories) {
    CategoryStats s;
    s.label = cat.label;
    s.centroid_count = cat.centroids.size();
    s.train_count = cat.train_count;
    if (!cat.centroids.empty()) {
      s.min_weight = s.max_weight = cat.centroids.front().weight;
      std::uint64_t sum = 0;
      for (const auto& c : cat.centroids) {
        s.min_weight = std::min(s.min_weight, c.weight);
        s.max_weight = std::max(s.max_weight, c.weight);
        sum += c.weight;
      }
      s.mean_weight = static_cast<double>(sum) / static_cast<double>(cat.centroids.size());
    }
    stats.total_centroids += s.centroid_count;
    stats.total_train_count += s.train_count;
    stats.categories.push_back(std::move(s));
  }
  return stats;
}

}  // namespace cbcl
