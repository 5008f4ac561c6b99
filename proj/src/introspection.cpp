#include "cbcl/introspection.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "cbcl/error.hpp"
#include "cbcl/trainer.hpp"

namespace cbcl {

double silhouette_value(double a, double b) noexcept {
  const double denom = std::max(a, b);
  return denom > 0.0 ? (b - a) / denom : 0.0;
}

namespace {

std::vector<SilhouetteRecord> silhouettes(const ConceptModel& m,
                                          std::span<const FeaturePair* const> features,
                                          std::span<const std::string> labels, Execution exec) {
  if (m.categories.size() < 2)
    throw Error(ErrorCode::invalid_argument,
                "silhouette needs at least two categories (model has " +
                    std::to_string(m.categories.size()) + ")");
  std::vector<std::uint32_t> own(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto j = m.find(labels[i]);
    if (!j)
      throw Error(ErrorCode::unknown_label, "sample " + std::to_string(features[i]->id) +
                                                ": label '" + labels[i] + "' is not in the model");
    own[i] = static_cast<std::uint32_t>(*j);
    check_dims(*features[i], m.rgb_dim, m.depth_dim);
  }

  const auto refs = kernels::flatten(m);
  std::vector<SilhouetteRecord> out(features.size());
  constexpr std::size_t chunk = 256;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t begin = 0; begin < features.size(); begin += chunk) {
    const auto queries = features.subspan(begin, std::min(chunk, features.size() - begin));
    const auto dm = kernels::distance_matrix(queries, refs, m.fusion, exec);
    kernels::for_each_index(queries.size(), exec, [&](std::size_t q) {
      const std::size_t i = begin + q;
      const auto row = dm.row(q);
      double a = inf;
      double b = inf;
      std::uint32_t other = 0;
      // Strict < keeps the first ref, i.e. the lowest (category, index), on ties.
      for (std::size_t r = 0; r < refs.size(); ++r) {
        if (refs[r].category == own[i]) {
          if (row[r] < a) a = row[r];
        } else if (row[r] < b) {
          b = row[r];
          other = refs[r].category;
        }
      }
      out[i] = {features[i]->id, labels[i], silhouette_value(a, b), a, b,
                m.categories[other].label};
    });
  }
  return out;
}

}  // namespace

std::vector<SilhouetteRecord> silhouette_all(const ConceptModel& m,
                                             std::span<const LabeledPair> train, Execution exec) {
  std::vector<const FeaturePair*> features;
  std::vector<std::string> labels;
  features.reserve(train.size());
  labels.reserve(train.size());
  for (const auto& s : train) {
    features.push_back(&s.features);
    labels.push_back(s.label);
  }
  return silhouettes(m, features, labels, exec);
}

const CategoryConfusion* ConfusionSummary::find(std::string_view label) const {
  for (const auto& c : categories)
    if (c.category == label) return &c;
  return nullptr;
}

ConfusionSummary confusion_summary(std::span<const SilhouetteRecord> records,
                                   const ConceptModel& m) {
  ConfusionSummary summary;
  std::vector<std::map<std::string, std::uint64_t>> votes(m.categories.size());
  for (const auto& cat : m.categories) {
    CategoryConfusion c;
    c.category = cat.label;
    c.train_count = cat.train_count;
    summary.categories.push_back(std::move(c));
  }

  for (const auto& r : records) {
    const auto j = m.find(r.own_category);
    if (!j)
      throw Error(ErrorCode::unknown_label,
                  "silhouette record for unknown category '" + r.own_category + "'");
    if (r.s <= 0.0) {
      ++summary.categories[*j].low_count;
      ++votes[*j][r.nearest_other];
    }
  }

  for (std::size_t j = 0; j < summary.categories.size(); ++j) {
    auto& c = summary.categories[j];
    c.z_conf = c.train_count == 0
                   ? 0.0
                   : static_cast<double>(c.low_count) / static_cast<double>(c.train_count);
    std::uint64_t best = 0;
    // Map order is lexicographic, so strict > keeps the smallest label on ties.
    for (const auto& [label, count] : votes[j]) {
      if (count > best) {
        best = count;
        c.y_conf = label;
      }
    }
  }
  return summary;
}

std::string merged_label(std::string_view a, std::string_view b) {
  const auto [lo, hi] = std::minmax(a, b);
  return std::string(lo) + "+" + std::string(hi);
}

bool MergePlan::empty() const { return merge_count() == 0; }

std::size_t MergePlan::merge_count() const {
  std::size_t n = 0;
  for (const auto& r : rounds) n += r.merges.size();
  return n;
}

MergePlan plan_merges(const ConceptModel& m, std::span<const LabeledPair> train, Execution exec) {
  m.validate();
  if (m.categories.size() < 2)
    throw Error(ErrorCode::invalid_argument, "merge planning needs at least two categories");

  std::vector<const FeaturePair*> features;
  std::vector<std::string> labels;
  for (const auto& s : train) {
    features.push_back(&s.features);
    labels.push_back(s.label);
  }

  MergePlan plan;
  for (const auto& cat : m.categories) plan.final_mapping[cat.label] = cat.label;
  for (const auto& l : labels) plan.final_mapping.emplace(l, l);

  ConceptModel current = m;
  while (current.categories.size() >= 2) {
    const auto records = silhouettes(current, features, labels, exec);
    MergeRound round;
    round.evidence = confusion_summary(records, current);

    for (const auto& c : round.evidence.categories) {
      if (!(c.z_conf > kMergeFractionThreshold) || !c.y_conf) continue;
      if (!(c.category < *c.y_conf)) continue;  // visit each unordered pair once
      const auto* other = round.evidence.find(*c.y_conf);
      if (other && other->z_conf > kMergeFractionThreshold && other->y_conf == c.category)
        round.merges.emplace_back(c.category, other->category);
    }
    const bool done = round.merges.empty();
    plan.rounds.push_back(round);
    if (done) break;

    TrainConfig refit;
    refit.distance_threshold = current.distance_threshold;
    refit.fusion = current.fusion;
    refit.record_assignments = false;

    for (const auto& [lo, hi] : round.merges) {
      const std::string merged = merged_label(lo, hi);
      for (auto& l : labels)
        if (l == lo || l == hi) l = merged;
      for (auto& [from, to] : plan.final_mapping)
        if (to == lo || to == hi) to = merged;
      plan.final_mapping[merged] = merged;

      std::vector<LabeledPair> pooled;
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == merged) pooled.push_back({*features[i], merged});
      auto refitted = fit(pooled, refit, Execution::serial).model;

      std::erase_if(current.categories,
                    [&](const CategoryModel& c) { return c.label == lo || c.label == hi; });
      current.categories.push_back(std::move(refitted.categories.front()));
    }
    std::sort(current.categories.begin(), current.categories.end(),
              [](const CategoryModel& a, const CategoryModel& b) { return a.label < b.label; });
  }
  return plan;
}

std::vector<std::string> apply_merge(const MergePlan& plan, std::span<const std::string> labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto it = plan.final_mapping.find(l);
    if (it == plan.final_mapping.end())
      throw Error(ErrorCode::unknown_label, "label '" + l + "' is not covered by the merge plan");
    out.push_back(it->second);
  }
  return out;
}

std::vector<LabeledPair> apply_merge(const MergePlan& plan, std::span<const LabeledPair> data) {
  std::vector<std::string> labels;
  labels.reserve(data.size());
  for (const auto& s : data) labels.push_back(s.label);
  auto mapped = apply_merge(plan, labels);
  std::vector<LabeledPair> out(data.begin(), data.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = std::move(mapped[i]);
  return out;
}

}  // namespace cbcl
