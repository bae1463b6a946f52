// Command-line front end: dataset generation, training, experiment sweeps,
// plotting and the model-level gradient check.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "strlab/corpus.hpp"
#include "strlab/gradcheck.hpp"
#include "strlab/harness.hpp"
#include "strlab/ops.hpp"
#include "strlab/model.hpp"
#include "strlab/rng.hpp"
#include "strlab/stimulus.hpp"
#include "strlab/train.hpp"

namespace fs = std::filesystem;
using namespace strlab;

namespace {

int cmd_gen_data(const std::string& set, const std::string& words_path, uint64_t seed,
                 const std::string& out_dir, bool balance) {
  WordList words = load_wordlist(words_path);
  if (balance) words = balance_567(words, derive_seed(seed, 0xba1a));

  SplitSpec split;
  split.seed = derive_seed(seed, 0x5711);
  auto [train_words, test_words] = stratified_split(words, split);

  fs::create_directories(out_dir);
  save_split_manifest(out_dir + "/split.json", set, split, train_words, test_words);

  for (const std::string part : {"train", "test"}) {
    ImageSetSpec spec;
    spec.name = set;
    spec.split = part;
    spec.seed = derive_seed(seed, part == "train" ? 0x7e57a : 0x7e57b);
    Dataset ds = build_image_set(spec, part == "train" ? train_words : test_words);
    std::string base = out_dir + "/" + set + "_" + part;
    save_dataset(ds, base + ".bin");
    save_dataset_manifest(ds, base + ".json");
    std::cout << base << ".bin: " << ds.samples.size() << " samples\n";
  }
  return 0;
}

int cmd_train(const std::string& kind, const std::string& train_path,
              const std::string& eval_path, const std::string& config_path, uint64_t seed,
              const std::string& out_path) {
  ModelConfig cfg =
      config_path.empty() ? ModelConfig::defaults_for(kind) : ModelConfig::load(config_path);
  if (!config_path.empty() && cfg.kind != kind)
    throw ConfigError("--kind disagrees with the config file");
  cfg.seed = seed;

  Dataset train_ds = load_dataset(train_path);
  Dataset eval_ds = load_dataset(eval_path);

  Model model(cfg);
  std::cout << kind << " model: " << model.param_count() << " parameters, "
            << model.frame_count() << " encoder frames\n";
  TrainOptions opts;
  opts.on_epoch = [](const EpochStats& s) {
    std::cout << "epoch " << s.epoch << ": train loss " << s.train_loss << ", eval word acc "
              << s.eval_word_acc << "\n";
  };
  auto [ckpt, report] = train(model, train_ds, eval_ds, opts);
  ckpt.save(out_path);
  std::cout << "best word accuracy " << report.best_metric << " at epoch " << report.best_epoch
            << "; stopped after epoch " << report.stopped_epoch << " ("
            << report.wall_seconds << "s)\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int jobs,
              size_t max_cells) {
  harness::ExperimentConfig cfg = harness::ExperimentConfig::load(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (cfg.out_dir.empty()) throw ConfigError("sweep needs --out or out_dir in the config");
  if (jobs > 0) cfg.jobs = jobs;

  harness::Harness h(cfg);
  harness::Hooks hooks;
  hooks.max_cells = max_cells;
  harness::RunStats stats;
  harness::SweepMatrix matrix = h.run_matrix(hooks, &stats);
  std::cout << "cells trained " << stats.cells_trained << ", replayed " << stats.cells_skipped
            << ", failed " << stats.cells_failed << "\n";

  fs::create_directories(cfg.out_dir);
  harness::export_matrix_csv(matrix, cfg.out_dir + "/matrix.csv");
  for (const auto& kind : matrix.kinds) {
    for (const auto& metric : harness::metric_names()) {
      std::ofstream svg(cfg.out_dir + "/heatmap_" + metric + "_" + kind + ".svg");
      svg << harness::heatmap_svg(matrix, metric, kind);
    }
  }

  if (max_cells == 0 && matrix.complete() && matrix.failed_cells() == 0) {
    auto has = [&](const std::string& s) {
      return std::find(cfg.train_sets.begin(), cfg.train_sets.end(), s) != cfg.train_sets.end();
    };
    if (has("all_words") && has("noise")) {
      auto curves = h.occlusion_sweep();
      harness::export_series_csv(curves, cfg.out_dir + "/occlusion_sweep.csv");
      std::ofstream svg(cfg.out_dir + "/occlusion_sweep.svg");
      svg << harness::curves_svg(curves);
    }
    std::vector<std::string> regimes;
    for (const std::string r : {"all_words", "5_letter", "4_6_letter", "3_7_letter", "flankers"})
      if (has(r)) regimes.push_back(r);
    if (!regimes.empty()) {
      auto curves = h.length_sweep(regimes);
      harness::export_series_csv(curves, cfg.out_dir + "/length_sweep.csv");
      std::ofstream svg(cfg.out_dir + "/length_sweep.svg");
      svg << harness::curves_svg(curves);
    }
    if (has("all_words") && has("fonts3") && has("fonts5")) {
      auto curves = h.font_sweep();
      harness::export_series_csv(curves, cfg.out_dir + "/font_sweep.csv");
      std::ofstream svg(cfg.out_dir + "/font_sweep.svg");
      svg << harness::curves_svg(curves);
    }
  }

  if (!matrix.complete()) return 2;       // interrupted (--max-cells)
  if (matrix.failed_cells() > 0) return 2;  // partial
  return 0;
}

int cmd_plot(const std::string& matrix_path, const std::string& metric,
             const std::string& out_path) {
  harness::SweepMatrix matrix = harness::import_matrix_csv(matrix_path);
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write SVG: " + out_path);
  for (const auto& kind : matrix.kinds) {
    std::string path = matrix.kinds.size() == 1
                           ? out_path
                           : out_path.substr(0, out_path.rfind(".svg")) + "_" + kind + ".svg";
    std::ofstream f(path);
    f << harness::heatmap_svg(matrix, metric, kind);
    std::cout << path << "\n";
  }
  return 0;
}

int cmd_gradcheck(const std::string& kind) {
  // Desk-size shapes keep the finite-difference loop fast while exercising
  // the full architecture.
  ModelConfig cfg = ModelConfig::defaults_for(kind);
  cfg.input_width = kind == "ctc" ? 20 : 28;
  cfg.input_height = 8;
  cfg.conv = {{2, 3, 2, 2}, {3, 3, 2, 1}};
  cfg.hidden_size = 6;
  cfg.embed_size = 5;
  cfg.seed = 7;
  Model model(cfg);

  Rng rng(derive_seed(11, 0x1e5));
  std::vector<Tensor> inputs;
  std::vector<std::string> labels = {"ab", "cad"};
  for (size_t i = 0; i < labels.size(); ++i) {
    Tensor x({1, cfg.input_height, cfg.input_width});
    for (int64_t j = 0; j < x.size(); ++j) x[j] = rng.next_double();
    inputs.push_back(std::move(x));
  }

  ScalarGraphFn f = [&](Tape& tape, const std::map<std::string, ValueId>& pids) {
    ValueId total = -1;
    for (size_t i = 0; i < labels.size(); ++i) {
      ValueId l = model.sample_loss(tape, pids, inputs[i], labels[i]);
      total = total < 0 ? l : ops::add(tape, total, l);
    }
    return ops::scale(tape, total, 1.0 / static_cast<double>(labels.size()));
  };

  GradCheckOptions opts;
  auto report = gradient_check(f, model.params(), opts);
  std::cout << kind << " gradcheck: " << report.elements_checked
            << " elements, max rel err " << report.max_rel_err << " (param "
            << report.worst_param << ")\n";
  bool ok = report.passed(1e-4);
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"word-stimulus generalization lab"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "render an image set to a packed dataset");
  std::string gen_set, gen_words, gen_out;
  uint64_t gen_seed = 0;
  bool gen_balance = false;
  gen->add_option("--set", gen_set, "image set name")->required();
  gen->add_option("--words", gen_words, "word list path")->required();
  gen->add_option("--seed", gen_seed, "master seed")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_flag("--balance", gen_balance, "equalize 5/6/7-letter word counts");

  auto* tr = app.add_subcommand("train", "train one model on packed datasets");
  std::string tr_kind, tr_train, tr_eval, tr_config, tr_out;
  uint64_t tr_seed = 0;
  tr->add_option("--kind", tr_kind, "ctc|attn")->required()->check(CLI::IsMember({"ctc", "attn"}));
  tr->add_option("--train-set", tr_train, "training dataset (.bin)")->required();
  tr->add_option("--eval-set", tr_eval, "evaluation dataset (.bin)")->required();
  tr->add_option("--config", tr_config, "model config JSON (defaults per kind)");
  tr->add_option("--seed", tr_seed, "training seed")->required();
  tr->add_option("--out", tr_out, "checkpoint output path")->required();

  auto* sw = app.add_subcommand("sweep", "run the train/test generalization matrix");
  std::string sw_config, sw_out;
  int sw_jobs = 0;
  size_t sw_max_cells = 0;
  bool sw_resume = false;
  sw->add_option("--config", sw_config, "experiment config JSON")->required();
  sw->add_option("--out", sw_out, "output directory (overrides config)");
  sw->add_option("--jobs", sw_jobs, "parallel cell jobs");
  sw->add_option("--max-cells", sw_max_cells, "stop after N newly trained cells");
  sw->add_flag("--resume", sw_resume, "resume from the journal (always on; kept for scripts)");

  auto* pl = app.add_subcommand("plot", "render heatmap SVGs from a matrix CSV");
  std::string pl_matrix, pl_metric = "word", pl_out;
  pl->add_option("--matrix", pl_matrix, "matrix CSV")->required();
  pl->add_option("--metric", pl_metric, "word|char|length|edit");
  pl->add_option("--out", pl_out, "output SVG path")->required();

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of a full model loss");
  std::string gc_kind;
  gc->add_option("--kind", gc_kind, "ctc|attn")->required()->check(CLI::IsMember({"ctc", "attn"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(gen_set, gen_words, gen_seed, gen_out, gen_balance);
    if (tr->parsed()) return cmd_train(tr_kind, tr_train, tr_eval, tr_config, tr_seed, tr_out);
    if (sw->parsed()) return cmd_sweep(sw_config, sw_out, sw_jobs, sw_max_cells);
    if (pl->parsed()) return cmd_plot(pl_matrix, pl_metric, pl_out);
    if (gc->parsed()) return cmd_gradcheck(gc_kind);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
