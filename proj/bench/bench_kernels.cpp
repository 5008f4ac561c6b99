// Serial reference vs OpenMP kernels on large feature vectors
// (4096-d per modality).

#include <benchmark/benchmark.h>

#include "cbcl/classifier.hpp"
#include "cbcl/kernels.hpp"
#include "cbcl/synthetic.hpp"
#include "cbcl/trainer.hpp"

namespace {

using namespace cbcl;

struct Fixture {
  std::vector<LabeledPair> train;
  std::vector<FeaturePair> queries;
  ConceptModel model;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    SynthSpec spec;
    spec.categories = 19;
    spec.layouts = 8;
    spec.rgb_dim = 4096;
    spec.depth_dim = 4096;
    spec.spread = 1.0;
    spec.sigma = 0.05;
    spec.samples_per_layout = 8;
    spec.test_fraction = 0.25;
    const auto data = generate_synthetic(spec);
    const auto ds = join_dataset(data.rgb, data.depth, data.manifest);
    Fixture out;
    out.train = ds.train;
    for (const auto& s : ds.test) out.queries.push_back(s.features);
    TrainConfig cfg;
    cfg.distance_threshold = 20.0;
    cfg.fusion = {1.0, 0.73};
    cfg.record_assignments = false;
    out.model = fit(out.train, cfg, Execution::serial).model;
    return out;
  }();
  return f;
}

void BM_DistanceMatrix(benchmark::State& state) {
  const auto& f = fixture();
  const auto refs = kernels::flatten(f.model);
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  for (auto _ : state) {
    auto dm = kernels::distance_matrix(f.queries, refs, f.model.fusion, exec);
    benchmark::DoNotOptimize(dm.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.queries.size() * refs.size()));
  state.SetLabel(exec == Execution::serial ? "serial" : "omp");
}
BENCHMARK(BM_DistanceMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
  const auto& f = fixture();
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  TrainConfig cfg;
  cfg.distance_threshold = 20.0;
  cfg.record_assignments = false;
  for (auto _ : state) {
    auto r = fit(f.train, cfg, exec);
    benchmark::DoNotOptimize(r.model.categories.data());
  }
  state.SetLabel(exec == Execution::serial ? "serial" : "omp");
}
BENCHMARK(BM_Fit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PredictBatch(benchmark::State& state) {
  const auto& f = fixture();
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  for (auto _ : state) {
    auto p = predict_batch(f.model, f.queries, {17, 1e-9}, exec);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetLabel(exec == Execution::serial ? "serial" : "omp");
}
BENCHMARK(BM_PredictBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
