#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "strlab/model.hpp"
#include "strlab/stimulus.hpp"

namespace strlab {

struct EpochStats {
  int epoch = 0;           // 1-based
  double train_loss = 0.0; // mean per-sample loss
  double eval_word_acc = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;
  double best_metric = -1.0;
  int stopped_epoch = 0;
  double wall_seconds = 0.0;
};

/// Full training snapshot: resuming from a checkpoint continues the exact
/// trajectory of an uninterrupted run (parameters, optimizer accumulators,
/// early-stop counters and the per-epoch RNG streams are all restored).
struct Checkpoint {
  ModelConfig config;
  ParamStore params;       // current parameters
  ParamStore best_params;  // best-so-far by eval metric
  ParamStore opt_state;
  int epoch = 0;  // completed epochs
  double best_metric = -1.0;
  int best_epoch = -1;
  int since_improve = 0;
  uint64_t rng_seed = 0;  // per-epoch streams derive from (seed, epoch)

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

struct TrainOptions {
  int threads = 0;  // 0 = hardware concurrency (capped at the shard count)
  std::function<void(const EpochStats&)> on_epoch;
  const Checkpoint* resume_from = nullptr;
};

/// Shuffled mini-batches, per-epoch eval on eval_set's word accuracy,
/// early stop after `patience` consecutive non-improving epochs. Fully
/// deterministic per (config, data): batch gradients are reduced over a
/// fixed number of shards in fixed order whatever the thread count.
std::pair<Checkpoint, TrainReport> train(Model& model, const Dataset& train_set,
                                         const Dataset& eval_set, const TrainOptions& opts = {});

/// Word accuracy of greedy transcription over a dataset (images are resized
/// to the model dims here).
double evaluate_word_accuracy(const Model& model, const Dataset& ds, int threads = 0);

/// Per-sample predictions, in dataset order.
std::vector<std::string> predict_dataset(const Model& model, const Dataset& ds, int threads = 0);

}  // namespace strlab
