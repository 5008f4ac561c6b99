// cbcl: command-line front end for centroid-based concept learning.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cbcl/classifier.hpp"
#include "cbcl/datastore.hpp"
#include "cbcl/error.hpp"
#include "cbcl/fileio.hpp"
#include "cbcl/introspection.hpp"
#include "cbcl/kernels.hpp"
#include "cbcl/model.hpp"
#include "cbcl/reports.hpp"
#include "cbcl/synthetic.hpp"
#include "cbcl/trainer.hpp"
#include "cbcl/tuning.hpp"

namespace {

using namespace cbcl;

struct Options {
  std::string rgb, depth, labels, model, out, trace, relabel_out;
  std::string distance_threshold = "85";
  std::size_t n_neighbors = 17;
  double w_rgb = 1.0;
  double w_depth = 0.73;
  double epsilon = 1e-9;
  std::size_t folds = 5;
  std::vector<double> grid_d, grid_wd;
  std::vector<std::size_t> grid_n;
  std::uint64_t seed = 42;
  std::string format = "cbf";
  std::string split = "test";
  bool shuffle = false;
  bool quiet = false;
  SynthSpec synth;
};

double parse_threshold(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "infinity")
    return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double d = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !(d > 0.0))
    throw Error(ErrorCode::invalid_argument,
                "--distance-threshold must be a positive number or 'inf', got '" + text + "'");
  return d;
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw Error(ErrorCode::invalid_argument, "--split must be train or test, got '" + s + "'");
}

Dataset load_dataset(const Options& o) {
  const auto rgb = read_features(o.rgb, Modality::rgb);
  const auto depth = read_features(o.depth, Modality::depth);
  if (rgb.modality != Modality::rgb)
    warn("--rgb file is tagged as " + std::string(to_string(rgb.modality)) + " features");
  if (depth.modality != Modality::depth)
    warn("--depth file is tagged as " + std::string(to_string(depth.modality)) + " features");
  return join_dataset(rgb, depth, read_manifest(o.labels));
}

const std::vector<LabeledPair>& pick(const Dataset& ds, Split s) {
  return s == Split::train ? ds.train : ds.test;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty())
    std::cout << text;
  else
    write_file_atomic(o.out, text);
}

void cmd_fit(const Options& o) {
  const auto ds = load_dataset(o);
  TrainConfig cfg;
  cfg.distance_threshold = parse_threshold(o.distance_threshold);
  cfg.fusion = {o.w_rgb, o.w_depth};
  cfg.order = o.shuffle ? OrderPolicy::seeded_shuffle : OrderPolicy::dataset_order;
  cfg.seed = o.seed;
  cfg.record_assignments = !o.trace.empty();
  const auto result = fit(ds.train, cfg);
  save_model(result.model, o.model);
  if (!o.trace.empty()) write_file_atomic(o.trace, result.trace.to_csv());
  std::cerr << "fit: " << ds.train.size() << " samples, " << result.model.categories.size()
            << " categories, " << result.model.total_centroids() << " centroids\n";
}

void cmd_predict(const Options& o) {
  const auto model = load_model(o.model);
  const auto ds = load_dataset(o);
  const auto& samples = pick(ds, parse_split(o.split));
  std::vector<FeaturePair> features;
  std::vector<SampleId> ids;
  for (const auto& s : samples) {
    features.push_back(s.features);
    ids.push_back(s.features.id);
  }
  const auto preds = predict_batch(model, features, {o.n_neighbors, o.epsilon});
  emit(o, predictions_csv(ids, preds));
}

void cmd_eval(const Options& o) {
  const auto model = load_model(o.model);
  const auto ds = load_dataset(o);
  const auto& samples = pick(ds, parse_split(o.split));
  const PredictConfig pc{o.n_neighbors, o.epsilon};
  const auto report = evaluate(model, samples, pc);
  // Requested n, not the clamped one; the clamp already warned.
  const ReportProvenance prov{model.distance_threshold, o.n_neighbors, model.fusion.rgb,
                              model.fusion.depth, o.epsilon, o.split};
  emit(o, eval_report_json(report, prov));
  std::cerr << "eval: mean-class accuracy " << format_number(report.mean_class_accuracy)
            << ", overall " << format_number(report.overall_accuracy) << "\n";
}

void cmd_tune(const Options& o) {
  const auto ds = load_dataset(o);
  TuneGrid grid;
  if (!o.grid_d.empty()) grid.distance_thresholds = o.grid_d;
  if (!o.grid_n.empty()) grid.n_neighbors = o.grid_n;
  if (!o.grid_wd.empty()) grid.depth_weights = o.grid_wd;
  grid.rgb_weight = o.w_rgb;
  const auto result = tune(ds.train, grid, o.folds, o.seed, o.epsilon);
  emit(o, tune_report_json(result, o.seed));
  const auto& best = result.table[result.best];
  std::cerr << "tune: best D=" << format_number(best.distance_threshold)
            << " n=" << best.n_neighbors << " w_depth=" << format_number(best.depth_weight)
            << " cv mean-class accuracy " << format_number(best.mean_score) << "\n";
}

void cmd_condense(const Options& o) {
  const auto model = load_model(o.model);
  const auto condensed = condense(model, parse_threshold(o.distance_threshold));
  save_model(condensed, o.out);
  std::cerr << "condense: " << model.total_centroids() << " -> " << condensed.total_centroids()
            << " centroids\n";
}

void cmd_silhouette(const Options& o) {
  const auto model = load_model(o.model);
  const auto ds = load_dataset(o);
  emit(o, silhouettes_csv(silhouette_all(model, ds.train)));
}

void cmd_merge(const Options& o) {
  const auto model = load_model(o.model);
  const auto ds = load_dataset(o);
  const auto plan = plan_merges(model, ds.train);
  emit(o, merge_plan_json(plan));
  if (!o.relabel_out.empty()) {
    auto manifest = read_manifest(o.labels);
    std::vector<std::string> labels;
    for (const auto& r : manifest.rows) labels.push_back(r.category);
    const auto mapped = apply_merge(plan, labels);
    for (std::size_t i = 0; i < mapped.size(); ++i) manifest.rows[i].category = mapped[i];
    write_manifest(o.relabel_out, manifest);
  }
  std::cerr << "merge: " << plan.merge_count() << " merge(s) over " << plan.rounds.size()
            << " round(s)\n";
}

void cmd_synth(const Options& o) {
  SynthSpec spec = o.synth;
  spec.seed = o.seed;
  const auto data = generate_synthetic(spec);
  const auto enc = o.format == "csv" ? FeatureEncoding::csv : FeatureEncoding::cbf;
  write_features(o.rgb, data.rgb, enc);
  write_features(o.depth, data.depth, enc);
  write_manifest(o.labels, data.manifest);
}

void cmd_inspect(const Options& o) {
  const auto model = load_model(o.model);
  emit(o, centroid_stats_json(centroid_stats(model), model));
}

std::string exit_code_table() {
  std::string s = "Exit codes:\n  0 success\n  1 unexpected internal error\n";
  for (int c = 2; c <= 13; ++c) {
    s += "  " + std::to_string(c) + " " +
         std::string(error_code_name(static_cast<ErrorCode>(c))) + "\n";
  }
  return s;
}

std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

int fail(ErrorCode code, const std::string& message) {
  std::cerr << "error: code=" << error_code_name(code) << " exit=" << static_cast<int>(code)
            << " message=" << one_line(message) << "\n";
  return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Centroid-based concept learning for paired RGB/depth feature vectors"};
  app.require_subcommand(1);
  app.footer(exit_code_table() + "\nEnvironment:\n  CBCL_THREADS caps worker threads.\n");
  app.add_flag("-q,--quiet", o.quiet, "Suppress warnings");

  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--rgb", o.rgb, "RGB feature file (CBF or CSV)")->required();
    sub->add_option("--depth", o.depth, "Depth feature file (CBF or CSV)")->required();
    sub->add_option("--labels", o.labels, "Label manifest CSV (id,category,split)")->required();
  };
  auto add_weights = [&](CLI::App* sub) {
    sub->add_option("--w-rgb", o.w_rgb, "RGB fusion weight")->capture_default_str();
    sub->add_option("--w-depth", o.w_depth, "Depth fusion weight")->capture_default_str();
  };
  auto add_prediction = [&](CLI::App* sub) {
    sub->add_option("--n-neighbors", o.n_neighbors, "Closest centroid pairs that vote")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--epsilon", o.epsilon, "Floor for zero distances")->capture_default_str();
  };
  auto add_split = [&](CLI::App* sub) {
    sub->add_option("--split", o.split, "Manifest split to use")
        ->capture_default_str()
        ->check(CLI::IsMember({"train", "test"}));
  };

  auto* fit_cmd = app.add_subcommand("fit", "Cluster the training split into a model file");
  add_data(fit_cmd);
  fit_cmd->add_option("--model", o.model, "Output model (CBM)")->required();
  fit_cmd->add_option("--distance-threshold", o.distance_threshold, "Absorb threshold D")
      ->capture_default_str();
  add_weights(fit_cmd);
  fit_cmd->add_option("--seed", o.seed, "Seed for --shuffle")->capture_default_str();
  fit_cmd->add_flag("--shuffle", o.shuffle, "Cluster in seeded-shuffle order");
  fit_cmd->add_option("--trace", o.trace, "Write the assignment trace CSV here");

  auto* predict_cmd = app.add_subcommand("predict", "Write per-sample predictions CSV");
  add_data(predict_cmd);
  predict_cmd->add_option("--model", o.model, "Model file")->required();
  add_prediction(predict_cmd);
  add_split(predict_cmd);
  predict_cmd->add_option("--out", o.out, "Output CSV (default stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a manifest split");
  add_data(eval_cmd);
  eval_cmd->add_option("--model", o.model, "Model file")->required();
  add_prediction(eval_cmd);
  add_split(eval_cmd);
  eval_cmd->add_option("--out", o.out, "Output report JSON (default stdout)");

  auto* tune_cmd = app.add_subcommand("tune", "Grid search with stratified k-fold CV");
  add_data(tune_cmd);
  tune_cmd->add_option("--grid-d", o.grid_d, "Distance thresholds, comma separated")
      ->delimiter(',');
  tune_cmd->add_option("--grid-n", o.grid_n, "Neighbor counts, comma separated")->delimiter(',');
  tune_cmd->add_option("--grid-wd", o.grid_wd, "Depth weights, comma separated")->delimiter(',');
  tune_cmd->add_option("--w-rgb", o.w_rgb, "RGB fusion weight")->capture_default_str();
  tune_cmd->add_option("--folds", o.folds, "Number of folds")
      ->capture_default_str()
      ->check(CLI::Range(2, 1000));
  tune_cmd->add_option("--seed", o.seed, "Fold assignment seed")->capture_default_str();
  tune_cmd->add_option("--epsilon", o.epsilon, "Floor for zero distances")->capture_default_str();
  tune_cmd->add_option("--out", o.out, "Output report JSON (default stdout)");

  auto* condense_cmd = app.add_subcommand("condense", "Re-cluster centroids with a larger D");
  condense_cmd->add_option("--model", o.model, "Input model")->required();
  condense_cmd->add_option("--distance-threshold", o.distance_threshold,
                           "New threshold (number or 'inf')")
      ->required();
  condense_cmd->add_option("--out", o.out, "Output model")->required();

  auto* sil_cmd = app.add_subcommand("silhouette", "Silhouette values of training samples");
  add_data(sil_cmd);
  sil_cmd->add_option("--model", o.model, "Model file")->required();
  sil_cmd->add_option("--out", o.out, "Output CSV (default stdout)");

  auto* merge_cmd = app.add_subcommand("merge", "Plan category merges from silhouettes");
  add_data(merge_cmd);
  merge_cmd->add_option("--model", o.model, "Model file")->required();
  merge_cmd->add_option("--out", o.out, "Output plan JSON (default stdout)");
  merge_cmd->add_option("--relabel-out", o.relabel_out, "Write the relabeled manifest here");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic layout-mixture dataset");
  synth_cmd->add_option("--rgb", o.rgb, "Output RGB feature file")->required();
  synth_cmd->add_option("--depth", o.depth, "Output depth feature file")->required();
  synth_cmd->add_option("--labels", o.labels, "Output manifest CSV")->required();
  synth_cmd->add_option("--format", o.format, "Feature encoding")
      ->capture_default_str()
      ->check(CLI::IsMember({"cbf", "csv"}));
  synth_cmd->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--categories", o.synth.categories)->capture_default_str();
  synth_cmd->add_option("--layouts", o.synth.layouts)->capture_default_str();
  synth_cmd->add_option("--rgb-dim", o.synth.rgb_dim)->capture_default_str();
  synth_cmd->add_option("--depth-dim", o.synth.depth_dim)->capture_default_str();
  synth_cmd->add_option("--spread", o.synth.spread)->capture_default_str();
  synth_cmd->add_option("--sigma", o.synth.sigma)->capture_default_str();
  synth_cmd->add_option("--samples-per-layout", o.synth.samples_per_layout)->capture_default_str();
  synth_cmd->add_option("--test-fraction", o.synth.test_fraction)->capture_default_str();

  auto* inspect_cmd = app.add_subcommand("inspect", "Per-category centroid statistics");
  inspect_cmd->add_option("--model", o.model, "Model file")->required();
  inspect_cmd->add_option("--out", o.out, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCode::invalid_argument, e.what());
  }

  if (o.quiet) set_warning_handler(nullptr);
  apply_thread_limit_from_env();

  try {
    if (*fit_cmd) cmd_fit(o);
    else if (*predict_cmd) cmd_predict(o);
    else if (*eval_cmd) cmd_eval(o);
    else if (*tune_cmd) cmd_tune(o);
    else if (*condense_cmd) cmd_condense(o);
    else if (*sil_cmd) cmd_silhouette(o);
    else if (*merge_cmd) cmd_merge(o);
    else if (*synth_cmd) cmd_synth(o);
    else if (*inspect_cmd) cmd_inspect(o);
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    std::cerr << "error: code=internal exit=1 message=" << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
