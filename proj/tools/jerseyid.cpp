#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jerseyid/harness.hpp"
#include "jerseyid/model.hpp"
#include "jerseyid/synthgen.hpp"
#include "jerseyid/weaklabel.hpp"

namespace fs = std::filesystem;
using namespace jerseyid;
using harness::RunConfig;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "run";
};

struct Paths {
  fs::path data, labels, checkpoint;
};

RunConfig load_config(const Globals& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : harness::load_run_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

fs::path or_default(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

void write_lines(const fs::path& path, const std::string& header,
                 const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

weak::LabelCache labels_for(const RunConfig& cfg, const fs::path& path) {
  if (cfg.sampling != harness::SamplingMode::approx_labels) return {};
  if (!fs::exists(path))
    throw std::runtime_error(path.string() + " not found; run `jerseyid label` first");
  return weak::read_label_cache(path);
}

int cmd_gen(const Globals& g, const Paths& p) {
  RunConfig cfg = load_config(g);
  if (g.seed) cfg.synth.seed = *g.seed;
  const auto ds = synth::gen_dataset(cfg.synth);
  synth::write_dataset(ds, p.data);
  std::cout << "wrote " << ds.train.size() << " train / " << ds.test.size()
            << " test tracklets and " << ds.shifts.size() << " shift records to "
            << p.data.string() << '\n';
  return 0;
}

int cmd_label(const Globals& g, const Paths& p, const std::string& scorer_name) {
  const RunConfig cfg = load_config(g);
  const auto ds = synth::read_dataset(p.data);
  weak::FrameScorer scorer;
  if (scorer_name == "oracle") {
    scorer = weak::oracle_scorer();
  } else {
    weak::FrameClassifierConfig fc;
    fc.seed = derive_seed(cfg.seed, seed_stream::init, 1);
    std::cerr << "training frame classifier (" << fc.steps << " steps)\n";
    scorer = weak::model_scorer(std::make_shared<const weak::FrameClassifier>(
        weak::train_frame_classifier(cfg.synth, ds.classes, fc)));
  }
  auto cache = harness::build_label_cache(ds.train, scorer, cfg.phi);
  std::size_t agree = 0, frames = 0;
  for (const auto& t : ds.train) {
    const auto& bits = cache.at(t.id).bits;
    for (std::size_t k = 0; k < t.size(); ++k) agree += bits[k] == t.visibility[k];
    frames += t.size();
  }
  fs::create_directories(p.labels.parent_path().empty() ? "." : p.labels.parent_path());
  weak::write_label_cache(p.labels, cache);
  std::printf("wrote %zu label records to %s (frame agreement with ground truth %.4f)\n",
              cache.size(), p.labels.string().c_str(),
              frames ? static_cast<double>(agree) / static_cast<double>(frames) : 0.0);
  return 0;
}

int cmd_train(const Globals& g, const Paths& p) {
  const RunConfig cfg = load_config(g);
  const auto ds = synth::read_dataset(p.data);
  const auto labels = labels_for(cfg, p.labels);
  const fs::path out(g.out);
  fs::create_directories(out);

  std::ofstream metrics(out / "metrics.csv", std::ios::trunc);
  std::ofstream timing(out / "timing.csv", std::ios::trunc);
  if (!metrics || !timing) throw std::runtime_error("cannot write logs under " + out.string());
  metrics << harness::metrics_header() << '\n';
  timing << harness::timing_header() << '\n';
  harness::TrainHooks hooks;
  hooks.on_log = [&](const harness::MetricsRow& r) {
    metrics << harness::metrics_csv_row(r) << '\n' << std::flush;
    timing << harness::timing_csv_row(r) << '\n' << std::flush;
    std::fprintf(stderr, "iter %zu loss %.4f train_acc %.3f eval_acc %.3f f1 %.3f (%.1fs)\n",
                 r.iteration, r.train_loss, r.train_accuracy, r.eval_accuracy, r.weighted_f1,
                 r.wall_clock_s);
  };
  const auto result = harness::train(cfg, ds, labels.empty() ? nullptr : &labels, hooks);
  model::save_checkpoint(p.checkpoint, cfg.model, result.params,
                         {{"run_config", cfg}, {"iterations_run", result.iterations_run}});
  std::cout << "checkpoint " << p.checkpoint.string() << " after " << result.iterations_run
            << " iterations\n";
  return 0;
}

int cmd_eval(const Globals& g, const Paths& p, const std::string& mask_name) {
  RunConfig cfg = load_config(g);
  if (!mask_name.empty()) cfg.mask = harness::mask_mode_from_string(mask_name);
  const auto ck = model::load_checkpoint(p.checkpoint);
  const auto ds = synth::read_dataset(p.data);
  const harness::EvalContext ctx{&ds.classes, &ds.rosters, &ds.shifts};
  const auto r = harness::evaluate(ck.params, ck.config, ds.test, ctx, cfg.mask);
  const fs::path out(g.out);
  fs::create_directories(out);
  const fs::path report = out / "report.csv";
  harness::write_report_csv(report, r, ds.test, ds.classes);
  std::printf("mode,accuracy,weighted_f1\n");
  for (auto [name, s] : {std::pair{"shifts", r.shifts}, {"roster", r.roster}, {"none", r.none}})
    std::printf("%s,%.6f,%.6f\n", name, s.accuracy, s.weighted_f1);
  std::printf("selected %s: accuracy %.6f weighted_f1 %.6f; unreadable clocks %zu; report %s\n",
              harness::to_string(cfg.mask).c_str(), r.accuracy(), r.weighted_f1(),
              r.unreadable_clocks, report.string().c_str());
  return 0;
}

int cmd_ablate(const Globals& g, const Paths& p, const std::string& axis_name) {
  const RunConfig cfg = load_config(g);
  const auto ds = synth::read_dataset(p.data);
  const auto labels = labels_for(cfg, p.labels);
  const fs::path out(g.out);
  fs::create_directories(out);
  std::vector<harness::AblationAxis> axes;
  if (axis_name == "all") {
    axes = {harness::AblationAxis::heads, harness::AblationAxis::layers,
            harness::AblationAxis::window};
  } else {
    axes = {harness::ablation_axis_from_string(axis_name)};
  }
  for (auto axis : axes) {
    std::vector<std::string> rows;
    harness::ablate(cfg, axis, ds, labels.empty() ? nullptr : &labels,
                    [&](const harness::AblationRow& r) {
                      rows.push_back(harness::ablation_csv_row(r));
                      std::cerr << rows.back() << '\n';
                    });
    const fs::path path = out / ("ablation_" + harness::to_string(axis) + ".csv");
    write_lines(path, harness::ablation_header(), rows);
    std::cout << "wrote " << path.string() << '\n';
  }
  return 0;
}

int cmd_convergence(const Globals& g, const Paths& p, const std::vector<std::uint64_t>& seeds) {
  RunConfig cfg = load_config(g);
  const auto ds = synth::read_dataset(p.data);
  cfg.sampling = harness::SamplingMode::approx_labels;
  const auto labels = labels_for(cfg, p.labels);
  const fs::path out(g.out);
  fs::create_directories(out);
  std::vector<std::string> rows;
  const auto s = harness::convergence_compare(cfg, seeds, ds, labels,
                                              [&](const harness::ConvergencePair& pr) {
                                                rows.push_back(harness::convergence_csv_row(pr));
                                                std::cerr << rows.back() << '\n';
                                              });
  write_lines(out / "convergence.csv", harness::convergence_header(), rows);
  std::ofstream(out / "convergence.json") << harness::convergence_summary_json(s).dump(2) << '\n';
  std::printf("median iterations to %.0f%% train accuracy: approx_labels %.1f, uniform %.1f "
              "(budget %zu)\n",
              100.0 * cfg.convergence_threshold, s.median_approx_labels, s.median_uniform,
              s.budget);
  return 0;
}

int cmd_infer(const Globals& g, const Paths& p, const std::string& id,
              const std::string& mask_name) {
  RunConfig cfg = load_config(g);
  if (!mask_name.empty()) cfg.mask = harness::mask_mode_from_string(mask_name);
  const auto ck = model::load_checkpoint(p.checkpoint);
  const auto ds = synth::read_dataset(p.data);
  const synth::Tracklet* found = nullptr;
  for (const auto* split : {&ds.test, &ds.train})
    for (const auto& t : *split)
      if (t.id == id) found = &t;
  if (!found) throw std::runtime_error("no tracklet with id '" + id + "' in " + p.data.string());
  const shiftsync::MaskContext ctx{&ds.classes, cfg.mask == harness::MaskMode::none ? nullptr
                                                                                    : &ds.shifts,
                                   &ds.rosters};
  const auto pred = shiftsync::predict_tracklet(*found, ck.params, ck.config, ctx);
  std::cout << shiftsync::report_header() << '\n'
            << shiftsync::report_row(pred, found->label, ds.classes) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracklet-based jersey number identification on synthetic hockey data"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::string data, labels, checkpoint;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--data", data, "dataset directory (default <out>/dataset)");
  app.add_option("--labels", labels, "frame-label cache (default <out>/labels.jsonl)");
  app.add_option("--checkpoint", checkpoint, "checkpoint file (default <out>/checkpoint.jnck)");

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset and shift database");
  std::string scorer = "oracle";
  auto* label = app.add_subcommand("label", "build the approximate frame-label cache");
  label->add_option("--scorer", scorer, "frame scorer")
      ->check(CLI::IsMember({"oracle", "model"}))
      ->capture_default_str();
  auto* train = app.add_subcommand("train", "train a model; writes metrics.csv and a checkpoint");
  std::string mask;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  eval->add_option("--mask", mask, "mask mode override")
      ->check(CLI::IsMember({"shifts", "roster", "none"}));
  std::string axis = "all";
  auto* ablate = app.add_subcommand("ablate", "h / l / m ablation grids");
  ablate->add_option("--axis", axis, "h, l, m or all")
      ->check(CLI::IsMember({"h", "l", "m", "all"}))
      ->capture_default_str();
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  auto* conv = app.add_subcommand("compare-convergence",
                                  "iterations to the train-accuracy threshold per sampling mode");
  conv->add_option("--seeds", seeds, "training seeds")->delimiter(',')->capture_default_str();
  std::string tracklet;
  auto* infer = app.add_subcommand("infer", "identify one tracklet and print its report row");
  infer->add_option("--tracklet", tracklet, "tracklet id")->required();
  infer->add_option("--mask", mask, "mask mode override")
      ->check(CLI::IsMember({"shifts", "roster", "none"}));

  CLI11_PARSE(app, argc, argv);

  const fs::path out(g.out);
  const Paths paths{or_default(data, out / "dataset"), or_default(labels, out / "labels.jsonl"),
                    or_default(checkpoint, out / "checkpoint.jnck")};
  try {
    if (*gen) return cmd_gen(g, paths);
    if (*label) return cmd_label(g, paths, scorer);
    if (*train) return cmd_train(g, paths);
    if (*eval) return cmd_eval(g, paths, mask);
    if (*ablate) return cmd_ablate(g, paths, axis);
    if (*conv) return cmd_convergence(g, paths, seeds);
    if (*infer) return cmd_infer(g, paths, tracklet, mask);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
