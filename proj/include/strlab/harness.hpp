#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "strlab/corpus.hpp"
#include "strlab/model.hpp"
#include "strlab/stimulus.hpp"
#include "strlab/svg.hpp"

namespace strlab {
namespace harness {

struct ExperimentConfig {
  std::vector<std::string> train_sets;
  std::vector<std::string> test_sets;
  std::vector<std::string> kinds = {"ctc", "attn"};
  int runs = 5;
  uint64_t seed = 0;
  std::string words_path;      // empty = data/words.txt next to the binary? must be set by CLI
  size_t vocab_size = 2000;    // 0 = all words
  bool balance = false;
  int subcategory_samples = 100;
  std::vector<int> occlusion_grid = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int max_epochs = 30;
  int patience = 5;
  int batch_size = 32;
  std::string out_dir;
  int jobs = 1;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);  // unknown keys are errors
  static ExperimentConfig load(const std::string& path);

  /// Hash of the canonical config JSON; journal entries are keyed on it.
  uint64_t config_hash() const;
};

struct CellKey {
  std::string kind;
  std::string train_set;
  int run = 0;

  std::string id() const { return kind + "/" + train_set + "/run" + std::to_string(run); }
  bool operator<(const CellKey& o) const {
    return std::tie(kind, train_set, run) < std::tie(o.kind, o.train_set, o.run);
  }
};

/// Means of the four metrics on one test set.
struct MetricMeans {
  double word = 0.0;
  double chars = 0.0;
  double length = 0.0;
  double edit = 0.0;

  double get(const std::string& metric) const;
};

struct CellResult {
  CellKey key;
  uint64_t model_seed = 0;
  bool failed = false;
  std::string error;
  std::map<std::string, MetricMeans> eval;  // test set -> means
  std::string ckpt_path;
  int stopped_epoch = 0;
  double best_eval_acc = 0.0;
  double wall_seconds = 0.0;
};

/// Train x test grid of metric statistics over repeated runs.
class SweepMatrix {
 public:
  std::vector<std::string> kinds, train_sets, test_sets;
  int runs = 0;
  std::map<CellKey, CellResult> cells;

  bool complete() const;
  size_t failed_cells() const;
  /// Per-run value; throws if the cell is missing or failed.
  double value(const std::string& kind, const std::string& train_set,
               const std::string& test_set, const std::string& metric, int run) const;
  /// Mean over runs (failed cells excluded -> throws if none succeeded).
  double mean(const std::string& kind, const std::string& train_set,
              const std::string& test_set, const std::string& metric) const;
  double stddev(const std::string& kind, const std::string& train_set,
                const std::string& test_set, const std::string& metric) const;
};

/// x-indexed accuracy series with mean/std over runs.
struct SeriesPoint {
  double x = 0.0;
  std::vector<double> run_values;
  double mean = 0.0;
  double std = 0.0;
};
struct Series {
  std::string name;
  std::vector<SeriesPoint> points;  // x strictly increasing
};
struct CurveSeries {
  std::string sweep;
  std::string x_label;
  std::vector<Series> series;
};

struct RunStats {
  size_t cells_trained = 0;
  size_t cells_skipped = 0;
  size_t cells_failed = 0;
};

/// Test hook: replaces the train+evaluate step of one cell.
struct Hooks {
  std::function<CellResult(const CellKey&, uint64_t model_seed)> train_cell;
  size_t max_cells = 0;  // stop (gracefully) after N newly trained cells; 0 = no cap
};

class Harness {
 public:
  explicit Harness(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const WordList& train_words() const { return train_words_; }
  const WordList& test_words() const { return test_words_; }

  /// Cached dataset for (set, split, run); seeds derive from the master
  /// seed, the set name, the split and the run index.
  const Dataset& dataset(const std::string& set, const std::string& split, int run);

  /// Train-on-X/test-on-all matrix with an append-only journal under
  /// out_dir; completed cells are never retrained.
  SweepMatrix run_matrix(const Hooks& hooks = {}, RunStats* stats = nullptr);

  /// Word accuracy vs occlusion percent, both modes, clean- and
  /// noise-trained models (requires a finished matrix for those sets).
  CurveSeries occlusion_sweep();

  /// Word accuracy vs tested word length per training regime.
  CurveSeries length_sweep(const std::vector<std::string>& regimes = {
                               "all_words", "5_letter", "4_6_letter", "3_7_letter", "flankers"});

  /// Accuracy vs number of fonts at test time per training regime; also
  /// fills per-font accuracies (series named "<regime>/font/<font_id>").
  CurveSeries font_sweep();

  /// Rebuild a trained model (best parameters) for a finished cell.
  Model load_cell_model(const CellKey& key);

  ModelConfig model_config_for(const std::string& kind, uint64_t model_seed) const;

  uint64_t model_seed_for(const CellKey& key) const;

 private:
  CellResult run_cell(const CellKey& key, uint64_t model_seed);
  std::vector<CellKey> all_cells() const;
  std::string journal_path() const;
  std::string ckpt_path(const CellKey& key) const;
  std::map<CellKey, CellResult> load_journal() const;
  void append_journal(const CellResult& result);
  double eval_subset(const Model& model, const std::vector<Sample>& samples) const;
  std::vector<std::string> pick_eval_words(size_t n, uint64_t seed,
                                           const std::vector<std::string>& pool) const;

  ExperimentConfig cfg_;
  WordList all_words_, train_words_, test_words_;
  std::map<std::string, Dataset> dataset_cache_;
  std::mutex cache_mutex_;
  std::mutex journal_mutex_;
};

/// CSV per spec: header train_set,test_set,model,metric,run,seed,value; one
/// row per (cell, test set, metric, run).
void export_matrix_csv(const SweepMatrix& matrix, const std::string& path);
SweepMatrix import_matrix_csv(const std::string& path);

void export_series_csv(const CurveSeries& series, const std::string& path);

/// One heatmap per (metric, kind): rows are test sets, columns train sets
/// (the diagonal is the matched train/test condition). Failed cells hatch.
std::string heatmap_svg(const SweepMatrix& matrix, const std::string& metric,
                        const std::string& kind);

std::string curves_svg(const CurveSeries& series);

const std::vector<std::string>& metric_names();  // word, char, length, edit

}  // namespace harness
}  // namespace strlab
