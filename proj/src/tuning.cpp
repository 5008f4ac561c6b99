#include "cbcl/tuning.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <random>

#include "cbcl/error.hpp"
#include "cbcl/trainer.hpp"

namespace cbcl {

namespace {

template <typename T>
std::vector<T> dedupe(const std::vector<T>& values, std::string_view axis) {
  std::vector<T> out;
  for (const auto& v : values) {
    if (std::find(out.begin(), out.end(), v) == out.end())
      out.push_back(v);
    else
      warn(fmt::format("duplicate {} grid value {} ignored", axis, v));
  }
  return out;
}

}  // namespace

std::vector<std::size_t> stratified_folds(std::span<const LabeledPair> data, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::invalid_argument, "fold count must be >= 2");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.size(); ++i) groups[data[i].label].push_back(i);

  std::vector<std::size_t> fold_of(data.size());
  std::mt19937_64 rng(seed);
  for (auto& [label, idx] : groups) {
    if (idx.size() < folds)
      throw Error(ErrorCode::invalid_argument,
                  "category '" + label + "' has " + std::to_string(idx.size()) +
                      " training samples, fewer than " + std::to_string(folds) + " folds");
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < idx.size(); ++k) fold_of[idx[k]] = k % folds;
  }
  return fold_of;
}

TuneResult tune(std::span<const LabeledPair> train, const TuneGrid& grid, std::size_t folds,
                std::uint64_t seed, double epsilon, Execution exec) {
  if (train.empty()) throw Error(ErrorCode::invalid_argument, "training set is empty");
  const auto ds = dedupe(grid.distance_thresholds, "distance-threshold");
  const auto ns = dedupe(grid.n_neighbors, "n-neighbors");
  const auto ws = dedupe(grid.depth_weights, "w-depth");
  if (ds.empty() || ns.empty() || ws.empty())
    throw Error(ErrorCode::invalid_argument, "tuning grid is empty");
  for (double d : ds)
    if (!(d > 0.0)) throw Error(ErrorCode::invalid_argument, "grid distance thresholds must be > 0");
  for (std::size_t n : ns)
    if (n < 1) throw Error(ErrorCode::invalid_argument, "grid n-neighbors must be >= 1");
  for (double w : ws) validate_fusion({grid.rgb_weight, w});

  const auto fold_of = stratified_folds(train, folds, seed);
  std::vector<std::vector<std::size_t>> fit_sets(folds);
  std::vector<std::vector<LabeledPair>> val_sets(folds);
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (std::size_t f = 0; f < folds; ++f) {
      if (fold_of[i] == f)
        val_sets[f].push_back(train[i]);
      else
        fit_sets[f].push_back(i);
    }
  }

  // A fitted model depends on (D, w_depth) only, so each job fits once and
  // scores every n.
  struct Job {
    std::size_t d, w, fold;
  };
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < ds.size(); ++d)
    for (std::size_t w = 0; w < ws.size(); ++w)
      for (std::size_t f = 0; f < folds; ++f) jobs.push_back({d, w, f});

  // scores[d][n][w][fold]
  std::vector scores(ds.size(),
                     std::vector(ns.size(), std::vector(ws.size(), std::vector<double>(folds))));
  kernels::for_each_index(jobs.size(), exec, [&](std::size_t j) {
    const auto& job = jobs[j];
    TrainConfig cfg;
    cfg.distance_threshold = ds[job.d];
    cfg.fusion = {grid.rgb_weight, ws[job.w]};
    cfg.record_assignments = false;
    const auto model = fit(train, fit_sets[job.fold], cfg, Execution::serial).model;
    for (std::size_t n = 0; n < ns.size(); ++n) {
      PredictConfig pc{ns[n], epsilon};
      pc.n_neighbors = std::min(pc.n_neighbors, model.total_centroids());
      scores[job.d][n][job.w][job.fold] =
          evaluate(model, val_sets[job.fold], pc, Execution::serial).mean_class_accuracy;
    }
  });

  TuneResult result;
  result.folds = folds;
  for (std::size_t d = 0; d < ds.size(); ++d) {
    for (std::size_t n = 0; n < ns.size(); ++n) {
      for (std::size_t w = 0; w < ws.size(); ++w) {
        TunePoint p{ds[d], ns[n], ws[w], scores[d][n][w], 0.0};
        double sum = 0.0;
        for (double s : p.fold_scores) sum += s;
        p.mean_score = sum / static_cast<double>(folds);
        if (result.table.empty() || p.mean_score > result.table[result.best].mean_score)
          result.best = result.table.size();
        result.table.push_back(std::move(p));
      }
    }
  }
  return result;
}

}  // namespace cbcl
