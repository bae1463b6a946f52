#include "strlab/train.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "strlab/errors.hpp"
#include "strlab/ops.hpp"
#include "strlab/rng.hpp"

namespace strlab {

namespace {

// Gradient reduction always uses this many shards, in index order, so the
// result is bit-identical for any worker count.
constexpr int kGradShards = 4;

int resolve_threads(int requested, int cap) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  return std::min(n, cap);
}

/// Run fn(shard) for shard in [0, n_shards) on up to n_threads workers.
void run_sharded(int n_shards, int n_threads, const std::function<void(int)>& fn) {
  if (n_threads <= 1) {
    for (int s = 0; s < n_shards; ++s) fn(s);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n_threads));
  for (int w = 0; w < n_threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (;;) {
          int s = next.fetch_add(1);
          if (s >= n_shards) break;
          fn(s);
        }
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct PreppedSet {
  std::vector<Tensor> inputs;
  std::vector<std::string> labels;
};

PreppedSet prep(const Model& model, const Dataset& ds) {
  PreppedSet out;
  out.inputs.reserve(ds.samples.size());
  out.labels.reserve(ds.samples.size());
  const auto& cfg = model.config();
  for (const auto& s : ds.samples) {
    Image resized = resize_bilinear(s.image, cfg.input_width, cfg.input_height);
    out.inputs.push_back(model.input_from_image(resized));
    out.labels.push_back(s.label);
  }
  return out;
}

/// Mean gradient over one batch; also returns the summed loss.
std::map<std::string, Tensor> batch_gradients(const Model& model, const PreppedSet& data,
                                              const std::vector<size_t>& batch, int threads,
                                              double* loss_sum_out) {
  std::vector<std::map<std::string, Tensor>> shard_grads(kGradShards);
  std::vector<double> shard_loss(kGradShards, 0.0);

  run_sharded(kGradShards, threads, [&](int shard) {
    size_t begin = batch.size() * static_cast<size_t>(shard) / kGradShards;
    size_t end = batch.size() * static_cast<size_t>(shard + 1) / kGradShards;
    if (begin == end) return;
    Tape tape;
    auto pids = model.params().bind(tape);
    ValueId total = -1;
    for (size_t i = begin; i < end; ++i) {
      ValueId loss =
          model.sample_loss(tape, pids, data.inputs[batch[i]], data.labels[batch[i]]);
      total = total < 0 ? loss : ops::add(tape, total, loss);
    }
    shard_loss[static_cast<size_t>(shard)] = tape.value(total).item();
    tape.backward(total);
    shard_grads[static_cast<size_t>(shard)] = tape.param_grads();
  });

  double inv = 1.0 / static_cast<double>(batch.size());
  std::map<std::string, Tensor> grads;
  double loss_sum = 0.0;
  for (int s = 0; s < kGradShards; ++s) {
    loss_sum += shard_loss[static_cast<size_t>(s)];
    for (auto& [name, g] : shard_grads[static_cast<size_t>(s)]) {
      auto it = grads.find(name);
      if (it == grads.end()) {
        Tensor scaled(g.shape());
        for (int64_t i = 0; i < g.size(); ++i) scaled[i] = g[i] * inv;
        grads.emplace(name, std::move(scaled));
      } else {
        Tensor& acc = it->second;
        for (int64_t i = 0; i < g.size(); ++i) acc[i] += g[i] * inv;
      }
    }
  }
  if (loss_sum_out) *loss_sum_out = loss_sum;
  return grads;
}

double eval_prepped(const Model& model, const PreppedSet& data, int threads) {
  if (data.inputs.empty()) throw Error("evaluate: empty dataset");
  std::vector<int> correct(kGradShards, 0);
  run_sharded(kGradShards, threads, [&](int shard) {
    size_t begin = data.inputs.size() * static_cast<size_t>(shard) / kGradShards;
    size_t end = data.inputs.size() * static_cast<size_t>(shard + 1) / kGradShards;
    int hits = 0;
    for (size_t i = begin; i < end; ++i)
      if (model.predict_input(data.inputs[i]) == data.labels[i]) ++hits;
    correct[static_cast<size_t>(shard)] = hits;
  });
  int total = 0;
  for (int c : correct) total += c;
  return static_cast<double>(total) / static_cast<double>(data.inputs.size());
}

ParamStore clone_store(const ParamStore& src) {
  ParamStore out;
  for (const auto& [name, t] : src.tensors()) out.add(name, t);
  return out;
}

}  // namespace

std::pair<Checkpoint, TrainReport> train(Model& model, const Dataset& train_set,
                                         const Dataset& eval_set, const TrainOptions& opts) {
  if (train_set.samples.empty() || eval_set.samples.empty())
    throw Error("train: datasets must be non-empty");
  const ModelConfig& cfg = model.config();
  int threads = resolve_threads(opts.threads, kGradShards);

  PreppedSet train_data = prep(model, train_set);
  PreppedSet eval_data = prep(model, eval_set);

  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.rng_seed = cfg.seed;
  TrainReport report;
  auto opt = model.make_optimizer();

  if (opts.resume_from) {
    const Checkpoint& rc = *opts.resume_from;
    model.params() = clone_store(rc.params);
    opt->load_state(rc.opt_state, "");
    ckpt = rc;
  }

  auto t0 = std::chrono::steady_clock::now();
  std::vector<size_t> order(train_data.inputs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = ckpt.epoch + 1; epoch <= cfg.max_epochs; ++epoch) {
    // Batch composition must be a pure function of (seed, epoch) so a
    // resumed run replays the identical schedule.
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(cfg.seed, 0xe60c0000u + static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    double eval_acc = 0.0;
    size_t batch_index = 0;
    try {
      for (size_t pos = 0; pos < order.size(); pos += static_cast<size_t>(cfg.batch_size)) {
        size_t end = std::min(order.size(), pos + static_cast<size_t>(cfg.batch_size));
        std::vector<size_t> batch(order.begin() + static_cast<long>(pos),
                                  order.begin() + static_cast<long>(end));
        double loss_sum = 0.0;
        auto grads = batch_gradients(model, train_data, batch, threads, &loss_sum);
        epoch_loss += loss_sum;
        opt->step(model.params(), grads);
        ++batch_index;
      }
      eval_acc = eval_prepped(model, eval_data, threads);
    } catch (const NumericError& e) {
      throw Error("training diverged (" + cfg.kind + ", epoch " + std::to_string(epoch) +
                  ", batch " + std::to_string(batch_index) + "): " + e.what());
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(order.size());
    stats.eval_word_acc = eval_acc;
    report.epochs.push_back(stats);
    if (opts.on_epoch) opts.on_epoch(stats);

    ckpt.epoch = epoch;
    if (stats.eval_word_acc > ckpt.best_metric) {
      ckpt.best_metric = stats.eval_word_acc;
      ckpt.best_epoch = epoch;
      ckpt.since_improve = 0;
      ckpt.best_params = clone_store(model.params());
    } else {
      ++ckpt.since_improve;
      if (ckpt.since_improve > cfg.patience) break;
    }
  }

  ckpt.params = clone_store(model.params());
  ckpt.opt_state = ParamStore();
  opt->save_state(ckpt.opt_state, "");
  if (ckpt.best_epoch < 0) ckpt.best_params = clone_store(model.params());

  report.best_epoch = ckpt.best_epoch;
  report.best_metric = ckpt.best_metric;
  report.stopped_epoch = ckpt.epoch;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(ckpt), std::move(report)};
}

double evaluate_word_accuracy(const Model& model, const Dataset& ds, int threads) {
  PreppedSet data = prep(model, ds);
  return eval_prepped(model, data, resolve_threads(threads, kGradShards));
}

std::vector<std::string> predict_dataset(const Model& model, const Dataset& ds, int threads) {
  PreppedSet data = prep(model, ds);
  std::vector<std::string> out(data.inputs.size());
  run_sharded(kGradShards, resolve_threads(threads, kGradShards), [&](int shard) {
    size_t begin = data.inputs.size() * static_cast<size_t>(shard) / kGradShards;
    size_t end = data.inputs.size() * static_cast<size_t>(shard + 1) / kGradShards;
    for (size_t i = begin; i < end; ++i) out[i] = model.predict_input(data.inputs[i]);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint container: params sections in one STPK payload, then a JSON
// meta blob (u32 length + bytes).

void Checkpoint::save(const std::string& path) const {
  ParamStore all;
  for (const auto& [name, t] : params.tensors()) all.add("param." + name, t);
  for (const auto& [name, t] : best_params.tensors()) all.add("best." + name, t);
  for (const auto& [name, t] : opt_state.tensors()) all.add("opt." + name, t);

  nlohmann::json meta;
  meta["config"] = nlohmann::json::parse(config.to_json());
  meta["epoch"] = epoch;
  meta["best_metric"] = best_metric;
  meta["best_epoch"] = best_epoch;
  meta["since_improve"] = since_improve;
  meta["rng_seed"] = rng_seed;
  std::string meta_text = meta.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  save_params_stream(all, out);
  uint32_t len = static_cast<uint32_t>(meta_text.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(meta_text.data(), len);
  if (!out) throw IoError("checkpoint write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint: " + path);
  ParamStore all = load_params_stream(in, path);
  uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 4);
  std::string meta_text(len, '\0');
  in.read(meta_text.data(), len);
  if (!in) throw IoError("truncated checkpoint: " + path);
  nlohmann::json meta = nlohmann::json::parse(meta_text);

  Checkpoint ckpt;
  ckpt.config = ModelConfig::from_json(meta.at("config").dump());
  ckpt.epoch = meta.at("epoch").get<int>();
  ckpt.best_metric = meta.at("best_metric").get<double>();
  ckpt.best_epoch = meta.at("best_epoch").get<int>();
  ckpt.since_improve = meta.at("since_improve").get<int>();
  ckpt.rng_seed = meta.at("rng_seed").get<uint64_t>();
  for (const auto& [name, t] : all.tensors()) {
    if (name.rfind("param.", 0) == 0) ckpt.params.add(name.substr(6), t);
    else if (name.rfind("best.", 0) == 0) ckpt.best_params.add(name.substr(5), t);
    else if (name.rfind("opt.", 0) == 0) ckpt.opt_state.add(name.substr(4), t);
  }
  return ckpt;
}

}  // namespace strlab
