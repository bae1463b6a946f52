#include "strlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "strlab/csv.hpp"
#include "strlab/errors.hpp"
#include "strlab/metrics.hpp"
#include "strlab/rng.hpp"
#include "strlab/train.hpp"

namespace strlab {
namespace harness {

namespace fs = std::filesystem;

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"word", "char", "length", "edit"};
  return names;
}

double MetricMeans::get(const std::string& metric) const {
  if (metric == "word") return word;
  if (metric == "char") return chars;
  if (metric == "length") return length;
  if (metric == "edit") return edit;
  throw ConfigError("unknown metric: " + metric);
}

// ---------------------------------------------------------------------------
// Config

namespace {

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["train_sets"] = train_sets;
  j["test_sets"] = test_sets;
  j["kinds"] = kinds;
  j["runs"] = runs;
  j["seed"] = seed;
  j["words"] = words_path;
  j["vocab_size"] = vocab_size;
  j["balance"] = balance;
  j["subcategory_samples"] = subcategory_samples;
  j["occlusion_grid"] = occlusion_grid;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["batch_size"] = batch_size;
  j["out_dir"] = out_dir;
  j["jobs"] = jobs;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config JSON: ") + e.what());
  }
  require_keys(j,
               {"train_sets", "test_sets", "kinds", "runs", "seed", "words", "vocab_size",
                "balance", "subcategory_samples", "occlusion_grid", "max_epochs", "patience",
                "batch_size", "out_dir", "jobs"},
               "experiment config");
  ExperimentConfig c;
  if (j.contains("train_sets")) c.train_sets = j["train_sets"].get<std::vector<std::string>>();
  if (j.contains("test_sets")) c.test_sets = j["test_sets"].get<std::vector<std::string>>();
  if (j.contains("kinds")) c.kinds = j["kinds"].get<std::vector<std::string>>();
  if (j.contains("runs")) c.runs = j["runs"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  if (j.contains("words")) c.words_path = j["words"].get<std::string>();
  if (j.contains("vocab_size")) c.vocab_size = j["vocab_size"].get<size_t>();
  if (j.contains("balance")) c.balance = j["balance"].get<bool>();
  if (j.contains("subcategory_samples"))
    c.subcategory_samples = j["subcategory_samples"].get<int>();
  if (j.contains("occlusion_grid")) c.occlusion_grid = j["occlusion_grid"].get<std::vector<int>>();
  if (j.contains("max_epochs")) c.max_epochs = j["max_epochs"].get<int>();
  if (j.contains("patience")) c.patience = j["patience"].get<int>();
  if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();

  if (c.runs < 1) throw ConfigError("runs must be >= 1");
  for (const auto& s : c.train_sets)
    if (!is_image_set_name(s)) throw ConfigError("unknown train set: " + s);
  for (const auto& s : c.test_sets)
    if (!is_image_set_name(s)) throw ConfigError("unknown test set: " + s);
  for (const auto& k : c.kinds)
    if (k != "ctc" && k != "attn") throw ConfigError("unknown model kind: " + k);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read experiment config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

uint64_t ExperimentConfig::config_hash() const {
  // out_dir and jobs do not change the science; keep them out of the key.
  ExperimentConfig c = *this;
  c.out_dir.clear();
  c.jobs = 1;
  return fnv1a(c.to_json());
}

// ---------------------------------------------------------------------------
// SweepMatrix

bool SweepMatrix::complete() const {
  for (const auto& kind : kinds)
    for (const auto& ts : train_sets)
      for (int r = 0; r < runs; ++r)
        if (!cells.count(CellKey{kind, ts, r})) return false;
  return true;
}

size_t SweepMatrix::failed_cells() const {
  size_t n = 0;
  for (const auto& [key, cell] : cells)
    if (cell.failed) ++n;
  return n;
}

double SweepMatrix::value(const std::string& kind, const std::string& train_set,
                          const std::string& test_set, const std::string& metric,
                          int run) const {
  auto it = cells.find(CellKey{kind, train_set, run});
  if (it == cells.end() || it->second.failed)
    throw Error("matrix cell missing or failed: " + kind + "/" + train_set + "/run" +
                std::to_string(run));
  auto eit = it->second.eval.find(test_set);
  if (eit == it->second.eval.end()) throw Error("cell lacks test set " + test_set);
  return eit->second.get(metric);
}

double SweepMatrix::mean(const std::string& kind, const std::string& train_set,
                         const std::string& test_set, const std::string& metric) const {
  double sum = 0.0;
  int n = 0;
  for (int r = 0; r < runs; ++r) {
    auto it = cells.find(CellKey{kind, train_set, r});
    if (it == cells.end() || it->second.failed) continue;
    sum += it->second.eval.at(test_set).get(metric);
    ++n;
  }
  if (n == 0) throw Error("no successful runs for " + kind + "/" + train_set);
  return sum / n;
}

double SweepMatrix::stddev(const std::string& kind, const std::string& train_set,
                           const std::string& test_set, const std::string& metric) const {
  double mu = mean(kind, train_set, test_set, metric);
  double acc = 0.0;
  int n = 0;
  for (int r = 0; r < runs; ++r) {
    auto it = cells.find(CellKey{kind, train_set, r});
    if (it == cells.end() || it->second.failed) continue;
    double d = it->second.eval.at(test_set).get(metric) - mu;
    acc += d * d;
    ++n;
  }
  return n > 1 ? std::sqrt(acc / n) : 0.0;
}

// ---------------------------------------------------------------------------
// Harness

Harness::Harness(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.words_path.empty()) throw ConfigError("experiment config needs a word list path");
  all_words_ = load_wordlist(cfg_.words_path);
  if (cfg_.balance) all_words_ = balance_567(all_words_, derive_seed(cfg_.seed, 0xba1a));
  if (cfg_.vocab_size > 0 && cfg_.vocab_size < all_words_.words.size())
    all_words_ = select_vocab(all_words_, cfg_.vocab_size, derive_seed(cfg_.seed, 0x70cab));
  SplitSpec split;
  split.seed = derive_seed(cfg_.seed, 0x5711);
  split.train_fraction = 0.7;
  std::tie(train_words_, test_words_) = stratified_split(all_words_, split);
}

uint64_t Harness::model_seed_for(const CellKey& key) const {
  return derive_seed(cfg_.seed, fnv1a("model/" + key.id()));
}

ModelConfig Harness::model_config_for(const std::string& kind, uint64_t model_seed) const {
  ModelConfig mc = ModelConfig::defaults_for(kind);
  mc.max_epochs = cfg_.max_epochs;
  mc.patience = cfg_.patience;
  mc.batch_size = cfg_.batch_size;
  mc.seed = model_seed;
  return mc;
}

const Dataset& Harness::dataset(const std::string& set, const std::string& split, int run) {
  std::string cache_key = set + "/" + split + "/" + std::to_string(run);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = dataset_cache_.find(cache_key);
  if (it != dataset_cache_.end()) return it->second;

  ImageSetSpec spec;
  spec.name = set;
  spec.split = split;
  spec.seed = derive_seed(cfg_.seed, fnv1a("data/" + cache_key));
  const WordList& words = split == "train" ? train_words_ : test_words_;
  Dataset ds = build_image_set(spec, words);
  return dataset_cache_.emplace(cache_key, std::move(ds)).first->second;
}

std::vector<CellKey> Harness::all_cells() const {
  std::vector<CellKey> cells;
  for (const auto& kind : cfg_.kinds)
    for (const auto& ts : cfg_.train_sets)
      for (int r = 0; r < cfg_.runs; ++r) cells.push_back(CellKey{kind, ts, r});
  return cells;
}

std::string Harness::journal_path() const { return cfg_.out_dir + "/journal.jsonl"; }

std::string Harness::ckpt_path(const CellKey& key) const {
  return cfg_.out_dir + "/ckpt/" + key.kind + "_" + key.train_set + "_run" +
         std::to_string(key.run) + ".ckpt";
}

std::map<CellKey, CellResult> Harness::load_journal() const {
  std::map<CellKey, CellResult> done;
  std::ifstream in(journal_path());
  if (!in) return done;
  uint64_t want_hash = cfg_.config_hash();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      continue;  // partial line from a killed writer; ignore
    }
    if (j.value("config_hash", uint64_t{0}) != want_hash) continue;
    CellResult r;
    r.key.kind = j.at("kind").get<std::string>();
    r.key.train_set = j.at("train_set").get<std::string>();
    r.key.run = j.at("run").get<int>();
    r.model_seed = j.at("model_seed").get<uint64_t>();
    r.failed = j.at("status").get<std::string>() == "failed";
    r.error = j.value("error", "");
    r.ckpt_path = j.value("ckpt", "");
    r.stopped_epoch = j.value("stopped_epoch", 0);
    r.best_eval_acc = j.value("best_eval_acc", 0.0);
    r.wall_seconds = j.value("wall_seconds", 0.0);
    if (j.contains("eval")) {
      for (auto it = j["eval"].begin(); it != j["eval"].end(); ++it) {
        MetricMeans m;
        m.word = it.value().at("word").get<double>();
        m.chars = it.value().at("char").get<double>();
        m.length = it.value().at("length").get<double>();
        m.edit = it.value().at("edit").get<double>();
        r.eval[it.key()] = m;
      }
    }
    done[r.key] = r;
  }
  return done;
}

void Harness::append_journal(const CellResult& r) {
  std::lock_guard<std::mutex> lock(journal_mutex_);
  nlohmann::json j;
  j["config_hash"] = cfg_.config_hash();
  j["cell"] = r.key.id();
  j["kind"] = r.key.kind;
  j["train_set"] = r.key.train_set;
  j["run"] = r.key.run;
  j["model_seed"] = r.model_seed;
  j["status"] = r.failed ? "failed" : "done";
  if (r.failed) j["error"] = r.error;
  j["ckpt"] = r.ckpt_path;
  j["stopped_epoch"] = r.stopped_epoch;
  j["best_eval_acc"] = r.best_eval_acc;
  j["wall_seconds"] = r.wall_seconds;
  nlohmann::json eval;
  for (const auto& [ts, m] : r.eval)
    eval[ts] = {{"word", m.word}, {"char", m.chars}, {"length", m.length}, {"edit", m.edit}};
  j["eval"] = eval;

  fs::create_directories(cfg_.out_dir);
  std::ofstream out(journal_path(), std::ios::app);
  if (!out) throw IoError("cannot append journal: " + journal_path());
  out << j.dump() << "\n";
  out.flush();
}

CellResult Harness::run_cell(const CellKey& key, uint64_t model_seed) {
  CellResult result;
  result.key = key;
  result.model_seed = model_seed;
  auto t0 = std::chrono::steady_clock::now();
  try {
    const Dataset& train_ds = dataset(key.train_set, "train", key.run);
    const Dataset& eval_ds = dataset(key.train_set, "test", key.run);

    Model model(model_config_for(key.kind, model_seed));
    auto [ckpt, report] = train(model, train_ds, eval_ds);
    result.stopped_epoch = report.stopped_epoch;
    result.best_eval_acc = report.best_metric;

    fs::create_directories(fs::path(ckpt_path(key)).parent_path());
    ckpt.save(ckpt_path(key));
    result.ckpt_path = ckpt_path(key);

    // Evaluate the best parameters on every test set.
    model.params() = ckpt.best_params;
    for (const auto& ts : cfg_.test_sets) {
      const Dataset& test_ds = dataset(ts, "test", key.run);
      auto preds = predict_dataset(model, test_ds);
      std::vector<metrics::Prediction> pairs;
      pairs.reserve(preds.size());
      for (size_t i = 0; i < preds.size(); ++i)
        pairs.push_back({preds[i], test_ds.samples[i].label});
      auto rep = metrics::aggregate(pairs);
      MetricMeans m;
      m.word = rep.mean_word;
      m.chars = rep.mean_char;
      m.length = rep.mean_length;
      m.edit = rep.mean_edit;
      result.eval[ts] = m;
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

SweepMatrix Harness::run_matrix(const Hooks& hooks, RunStats* stats) {
  RunStats local;
  auto done = load_journal();

  std::vector<CellKey> pending;
  for (const auto& key : all_cells()) {
    if (done.count(key)) {
      ++local.cells_skipped;
    } else {
      pending.push_back(key);
    }
  }
  if (hooks.max_cells > 0 && pending.size() > hooks.max_cells)
    pending.resize(hooks.max_cells);

  // Cells are independent jobs; the journal append is the only shared write.
  std::atomic<size_t> next{0};
  std::mutex done_mutex;
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= pending.size()) break;
      const CellKey& key = pending[i];
      uint64_t seed = model_seed_for(key);
      CellResult r = hooks.train_cell ? hooks.train_cell(key, seed) : run_cell(key, seed);
      r.key = key;
      r.model_seed = seed;
      append_journal(r);
      std::lock_guard<std::mutex> lock(done_mutex);
      done[key] = r;
      ++local.cells_trained;
    }
  };
  int jobs = std::max(1, cfg_.jobs);
  if (jobs == 1 || pending.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < jobs; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  SweepMatrix matrix;
  matrix.kinds = cfg_.kinds;
  matrix.train_sets = cfg_.train_sets;
  matrix.test_sets = cfg_.test_sets;
  matrix.runs = cfg_.runs;
  for (const auto& key : all_cells()) {
    auto it = done.find(key);
    if (it != done.end()) {
      matrix.cells[key] = it->second;
      if (it->second.failed) ++local.cells_failed;
    }
  }
  if (stats) *stats = local;
  return matrix;
}

Model Harness::load_cell_model(const CellKey& key) {
  Checkpoint ckpt = Checkpoint::load(ckpt_path(key));
  Model model(ckpt.config);
  model.params() = ckpt.best_params;
  return model;
}

std::vector<std::string> Harness::pick_eval_words(size_t n, uint64_t seed,
                                                  const std::vector<std::string>& pool) const {
  if (pool.empty()) throw Error("no words available for evaluation subset");
  std::vector<std::string> shuffled = pool;
  std::sort(shuffled.begin(), shuffled.end());
  Rng rng(seed);
  rng.shuffle(shuffled);
  if (shuffled.size() > n) shuffled.resize(n);
  return shuffled;
}

double Harness::eval_subset(const Model& model, const std::vector<Sample>& samples) const {
  Dataset ds;
  ds.samples = samples;
  return evaluate_word_accuracy(model, ds);
}

namespace {

void finalize_point(SeriesPoint& p) {
  double sum = 0.0;
  for (double v : p.run_values) sum += v;
  p.mean = p.run_values.empty() ? 0.0 : sum / p.run_values.size();
  double acc = 0.0;
  for (double v : p.run_values) acc += (v - p.mean) * (v - p.mean);
  p.std = p.run_values.size() > 1 ? std::sqrt(acc / p.run_values.size()) : 0.0;
}

}  // namespace

CurveSeries Harness::occlusion_sweep() {
  CurveSeries out;
  out.sweep = "occlusion";
  out.x_label = "occlusion percent";

  const auto& atlas = builtin_atlas(default_font_id());
  for (const auto& kind : cfg_.kinds) {
    for (const std::string regime : {"all_words", "noise"}) {
      for (OcclusionMode mode : {OcclusionMode::kBottomUp, OcclusionMode::kTopDown}) {
        std::string mode_name = mode == OcclusionMode::kBottomUp ? "bottom_up" : "top_down";
        Series series;
        series.name = kind + "/" + regime + "/" + mode_name;
        for (int percent : cfg_.occlusion_grid) {
          SeriesPoint point;
          point.x = percent;
          for (int run = 0; run < cfg_.runs; ++run) {
            Model model = load_cell_model(CellKey{kind, regime, run});
            uint64_t sub_seed = derive_seed(
                cfg_.seed, fnv1a("occl/" + series.name + "/" + std::to_string(percent) +
                                 "/run" + std::to_string(run)));
            auto words = pick_eval_words(static_cast<size_t>(cfg_.subcategory_samples),
                                         sub_seed, test_words_.words);
            std::vector<Sample> samples;
            for (const auto& w : words) {
              Sample s;
              s.label = w;
              s.font_id = atlas.font_id;
              s.image = occlude(render_word(w, atlas), mode, percent);
              s.manipulation = mode == OcclusionMode::kBottomUp
                                   ? Manipulation(OccludeBottomUp{percent})
                                   : Manipulation(OccludeTopDown{percent});
              samples.push_back(std::move(s));
            }
            point.run_values.push_back(eval_subset(model, samples));
          }
          finalize_point(point);
          series.points.push_back(std::move(point));
        }
        out.series.push_back(std::move(series));
      }
    }
  }
  return out;
}

CurveSeries Harness::length_sweep(const std::vector<std::string>& regimes) {
  CurveSeries out;
  out.sweep = "length";
  out.x_label = "word length";

  const auto& atlas = builtin_atlas(default_font_id());
  for (const auto& kind : cfg_.kinds) {
    for (const auto& regime : regimes) {
      Series series;
      series.name = kind + "/" + regime;
      for (int len = kMinWordLen; len <= kMaxWordLen; ++len) {
        std::vector<std::string> pool;
        for (const auto& w : test_words_.words)
          if (static_cast<int>(w.size()) == len) pool.push_back(w);
        if (pool.empty()) continue;
        SeriesPoint point;
        point.x = len;
        for (int run = 0; run < cfg_.runs; ++run) {
          Model model = load_cell_model(CellKey{kind, regime, run});
          uint64_t sub_seed = derive_seed(
              cfg_.seed,
              fnv1a("len/" + series.name + "/" + std::to_string(len) + "/run" +
                    std::to_string(run)));
          auto words =
              pick_eval_words(static_cast<size_t>(cfg_.subcategory_samples), sub_seed, pool);
          std::vector<Sample> samples;
          for (const auto& w : words) {
            Sample s;
            s.label = w;
            s.font_id = atlas.font_id;
            s.image = render_word(w, atlas);
            s.manipulation = NoManipulation{};
            samples.push_back(std::move(s));
          }
          point.run_values.push_back(eval_subset(model, samples));
        }
        finalize_point(point);
        series.points.push_back(std::move(point));
      }
      out.series.push_back(std::move(series));
    }
  }
  return out;
}

CurveSeries Harness::font_sweep() {
  CurveSeries out;
  out.sweep = "fonts";
  out.x_label = "fonts at test time";

  const std::map<std::string, int> regimes = {{"all_words", 1}, {"fonts3", 3}, {"fonts5", 5}};
  for (const auto& kind : cfg_.kinds) {
    for (const auto& [regime, trained_fonts] : regimes) {
      // Per-font accuracy; aggregate curves are means over the palette.
      std::map<std::string, SeriesPoint> per_font;
      for (const auto& font : font_ids()) {
        SeriesPoint point;
        point.x = 0.0;
        for (int run = 0; run < cfg_.runs; ++run) {
          Model model = load_cell_model(CellKey{kind, regime, run});
          uint64_t sub_seed = derive_seed(
              cfg_.seed, fnv1a("font/" + kind + "/" + regime + "/" + font + "/run" +
                               std::to_string(run)));
          auto words = pick_eval_words(static_cast<size_t>(cfg_.subcategory_samples), sub_seed,
                                       test_words_.words);
          const auto& atlas = builtin_atlas(font);
          std::vector<Sample> samples;
          for (const auto& w : words) {
            Sample s;
            s.label = w;
            s.font_id = font;
            s.image = render_word(w, atlas);
            s.manipulation = FontOverride{font};
            samples.push_back(std::move(s));
          }
          point.run_values.push_back(eval_subset(model, samples));
        }
        finalize_point(point);
        per_font[font] = point;

        Series fs_series;
        fs_series.name = kind + "/" + regime + "/font/" + font;
        SeriesPoint labeled = point;
        labeled.x = static_cast<double>(
            std::find(font_ids().begin(), font_ids().end(), font) - font_ids().begin());
        fs_series.points.push_back(labeled);
        out.series.push_back(std::move(fs_series));
      }

      Series agg;
      agg.name = kind + "/" + regime;
      for (int n : {1, 3, 5}) {
        SeriesPoint point;
        point.x = n;
        point.run_values.assign(static_cast<size_t>(cfg_.runs), 0.0);
        auto palette = font_palette(n);
        for (int run = 0; run < cfg_.runs; ++run) {
          double acc = 0.0;
          for (const auto& font : palette)
            acc += per_font.at(font).run_values[static_cast<size_t>(run)];
          point.run_values[static_cast<size_t>(run)] = acc / palette.size();
        }
        finalize_point(point);
        agg.points.push_back(std::move(point));
      }
      out.series.push_back(std::move(agg));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export / plots

void export_matrix_csv(const SweepMatrix& matrix, const std::string& path) {
  CsvWriter csv(path);
  csv.row({"train_set", "test_set", "model", "metric", "run", "seed", "value"});
  for (const auto& kind : matrix.kinds) {
    for (const auto& ts : matrix.train_sets) {
      for (int run = 0; run < matrix.runs; ++run) {
        auto it = matrix.cells.find(CellKey{kind, ts, run});
        if (it == matrix.cells.end() || it->second.failed) continue;
        for (const auto& test : matrix.test_sets) {
          for (const auto& metric : metric_names()) {
            csv.row({ts, test, kind, metric, std::to_string(run),
                     std::to_string(it->second.model_seed),
                     CsvWriter::num(it->second.eval.at(test).get(metric))});
          }
        }
      }
    }
  }
}

SweepMatrix import_matrix_csv(const std::string& path) {
  auto rows = parse_csv(path);
  if (rows.empty()) throw IoError("empty matrix CSV: " + path);
  SweepMatrix m;
  std::set<std::string> kinds, trains, tests;
  int max_run = -1;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 7) throw IoError("bad matrix CSV row in " + path);
    const std::string& train = r[0];
    const std::string& test = r[1];
    const std::string& kind = r[2];
    const std::string& metric = r[3];
    int run = std::stoi(r[4]);
    uint64_t seed = std::stoull(r[5]);
    double value = std::stod(r[6]);
    kinds.insert(kind);
    trains.insert(train);
    tests.insert(test);
    max_run = std::max(max_run, run);
    CellKey key{kind, train, run};
    CellResult& cell = m.cells[key];
    cell.key = key;
    cell.model_seed = seed;
    MetricMeans& mm = cell.eval[test];
    if (metric == "word") mm.word = value;
    else if (metric == "char") mm.chars = value;
    else if (metric == "length") mm.length = value;
    else if (metric == "edit") mm.edit = value;
    else throw IoError("unknown metric in CSV: " + metric);
  }
  m.kinds.assign(kinds.begin(), kinds.end());
  m.train_sets.assign(trains.begin(), trains.end());
  m.test_sets.assign(tests.begin(), tests.end());
  m.runs = max_run + 1;
  return m;
}

void export_series_csv(const CurveSeries& series, const std::string& path) {
  CsvWriter csv(path);
  csv.row({"sweep", "series", "x", "run", "value"});
  for (const auto& s : series.series)
    for (const auto& p : s.points)
      for (size_t run = 0; run < p.run_values.size(); ++run)
        csv.row({series.sweep, s.name, CsvWriter::num(p.x), std::to_string(run),
                 CsvWriter::num(p.run_values[run])});
}

std::string heatmap_svg(const SweepMatrix& matrix, const std::string& metric,
                        const std::string& kind) {
  bool metric_ok = false;
  for (const auto& m : metric_names()) metric_ok |= (m == metric);
  if (!metric_ok) throw ConfigError("unknown metric: " + metric);

  // Rows: test sets. Columns: train sets. Diagonal = matched condition.
  std::vector<std::vector<HeatmapCell>> cells;
  for (const auto& test : matrix.test_sets) {
    std::vector<HeatmapCell> row;
    for (const auto& train : matrix.train_sets) {
      HeatmapCell cell;
      try {
        cell.value = matrix.mean(kind, train, test, metric);
      } catch (const Error&) {
        cell.value = std::nullopt;  // failed cell -> hatched
      }
      row.push_back(cell);
    }
    cells.push_back(std::move(row));
  }
  std::vector<std::string> col_labels;
  for (const auto& train : matrix.train_sets) col_labels.push_back("train:" + train);
  std::vector<std::string> row_labels;
  for (const auto& test : matrix.test_sets) row_labels.push_back("test:" + test);
  return render_heatmap_svg(metric + " accuracy (" + kind + ")", row_labels, col_labels, cells);
}

std::string curves_svg(const CurveSeries& series) {
  std::vector<Curve> curves;
  for (const auto& s : series.series) {
    Curve c;
    c.name = s.name;
    for (const auto& p : s.points) c.points.push_back({p.x, p.mean, p.std});
    curves.push_back(std::move(c));
  }
  return render_curves_svg(series.sweep + " sweep", series.x_label, curves);
}

}  // namespace harness
}  // namespace strlab
