#include "cbcl/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cbcl/error.hpp"

namespace cbcl {

void validate(const PredictConfig& cfg) {
  if (cfg.n_neighbors < 1) throw Error(ErrorCode::invalid_argument, "n_neighbors must be >= 1");
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon))
    throw Error(ErrorCode::invalid_argument, "epsilon must be a positive finite number");
}

double Prediction::top_score() const {
  const auto it = scores.find(label);
  return it == scores.end() ? 0.0 : it->second;
}

namespace {

std::size_t effective_neighbors(const ConceptModel& m, const PredictConfig& cfg) {
  validate(cfg);
  const std::size_t total = m.total_centroids();
  if (total == 0) throw Error(ErrorCode::empty_category, "model has no centroids");
  if (cfg.n_neighbors > total) {
    warn("n_neighbors=" + std::to_string(cfg.n_neighbors) + " exceeds the model's " +
         std::to_string(total) + " centroids; using " + std::to_string(total));
    return total;
  }
  return cfg.n_neighbors;
}

// refs are in (category, index) order, so comparing positions breaks distance
// ties by category order and then centroid index.
Prediction vote(const ConceptModel& m, std::span<const kernels::CentroidRef> refs,
                std::span<const double> dist, std::size_t n, double epsilon) {
  std::vector<std::size_t> order(refs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                    });

  std::vector<double> sums(m.categories.size(), 0.0);
  Prediction p;
  p.neighbors.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& ref = refs[order[k]];
    const double d = dist[order[k]];
    sums[ref.category] += 1.0 / std::max(d, epsilon);
    p.neighbors.push_back({m.categories[ref.category].label, ref.index, d});
  }

  double best = -1.0;
  for (std::size_t j = 0; j < m.categories.size(); ++j) {
    const auto& cat = m.categories[j];
    p.scores[cat.label] = sums[j] / static_cast<double>(cat.train_count);
  }
  // std::map iterates labels lexicographically; strict > keeps the smallest on ties.
  for (const auto& [label, score] : p.scores) {
    if (score > best) {
      best = score;
      p.label = label;
    }
  }
  return p;
}

void check_query(const ConceptModel& m, const FeaturePair& f) {
  check_dims(f, m.rgb_dim, m.depth_dim);
  check_finite(f.rgb, f.id, "rgb");
  check_finite(f.depth, f.id, "depth");
}

}  // namespace

Prediction predict(const ConceptModel& m, const FeaturePair& f, const PredictConfig& cfg) {
  const std::size_t n = effective_neighbors(m, cfg);
  check_query(m, f);
  const auto refs = kernels::flatten(m);
  std::vector<double> dist(refs.size());
  kernels::serial::distances(refs, f, m.fusion, dist);
  return vote(m, refs, dist, n, cfg.epsilon);
}

namespace {

std::vector<Prediction> predict_all(const ConceptModel& m,
                                    std::span<const FeaturePair* const> fs,
                                    const PredictConfig& cfg, Execution exec) {
  if (fs.empty()) {
    validate(cfg);
    return {};
  }
  const std::size_t n = effective_neighbors(m, cfg);
  for (const auto* f : fs) check_query(m, *f);

  const auto refs = kernels::flatten(m);
  std::vector<Prediction> out(fs.size());
  // Bounded chunks keep the distance matrix small for large test sets.
  constexpr std::size_t chunk = 256;
  for (std::size_t begin = 0; begin < fs.size(); begin += chunk) {
    const auto queries = fs.subspan(begin, std::min(chunk, fs.size() - begin));
    const auto dm = kernels::distance_matrix(queries, refs, m.fusion, exec);
    kernels::for_each_index(queries.size(), exec, [&](std::size_t q) {
      out[begin + q] = vote(m, refs, dm.row(q), n, cfg.epsilon);
    });
  }
  return out;
}

}  // namespace

std::vector<Prediction> predict_batch(const ConceptModel& m, std::span<const FeaturePair> fs,
                                      const PredictConfig& cfg, Execution exec) {
  return predict_all(m, kernels::pointers(fs), cfg, exec);
}

EvalReport summarize(std::span<const std::string> truth, std::span<const std::string> predicted,
                     std::span<const std::string> model_labels) {
  if (truth.size() != predicted.size())
    throw Error(ErrorCode::invalid_argument, "truth and prediction counts differ");
  std::set<std::string> all(model_labels.begin(), model_labels.end());
  all.insert(truth.begin(), truth.end());
  all.insert(predicted.begin(), predicted.end());

  EvalReport r;
  r.labels.assign(all.begin(), all.end());
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < r.labels.size(); ++i) pos[r.labels[i]] = i;
  r.confusion.assign(r.labels.size(), std::vector<std::uint64_t>(r.labels.size(), 0));

  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion[pos[truth[i]]][pos[predicted[i]]];
    ++r.support[truth[i]];
    if (truth[i] == predicted[i]) ++r.correct;
  }
  r.total = truth.size();
  r.overall_accuracy =
      r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);

  double sum = 0.0;
  for (const auto& [label, count] : r.support) {
    const auto hits = r.confusion[pos[label]][pos[label]];
    const double acc = static_cast<double>(hits) / static_cast<double>(count);
    r.per_class_accuracy[label] = acc;
    sum += acc;
  }
  r.mean_class_accuracy =
      r.support.empty() ? 0.0 : sum / static_cast<double>(r.support.size());
  return r;
}

EvalReport evaluate(const ConceptModel& m, std::span<const LabeledPair> test,
                    const PredictConfig& cfg, Execution exec) {
  if (test.empty()) throw Error(ErrorCode::invalid_argument, "test set is empty");
  std::vector<const FeaturePair*> features;
  std::vector<std::string> truth;
  features.reserve(test.size());
  truth.reserve(test.size());
  for (const auto& s : test) {
    features.push_back(&s.features);
    truth.push_back(s.label);
  }
  const auto preds = predict_all(m, features, cfg, exec);
  std::vector<std::string> predicted;
  predicted.reserve(preds.size());
  for (const auto& p : preds) predicted.push_back(p.label);
  std::vector<std::string> model_labels;
  for (const auto& c : m.categories) model_labels.push_back(c.label);
  return summarize(truth, predicted, model_labels);
}

}  // namespace cbcl
