#include "strlab/model.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "strlab/ctc.hpp"
#include "strlab/errors.hpp"
#include "strlab/init.hpp"
#include "strlab/ops.hpp"
#include "strlab/rng.hpp"

namespace strlab {

namespace {

std::vector<ConvLayerSpec> default_conv_stack() {
  // Four 3x3 layers; pooling halves height each time (32 -> 2) and width
  // twice (so the CTC encoder emits width/4 frames).
  return {{16, 3, 2, 2}, {32, 3, 2, 2}, {48, 3, 2, 1}, {64, 3, 2, 1}};
}

}  // namespace

ModelConfig ModelConfig::ctc_defaults() {
  ModelConfig c;
  c.kind = "ctc";
  c.input_width = 100;
  c.input_height = 32;
  c.conv = default_conv_stack();
  c.init_scheme = "normal";
  c.init_variance = 0.02;
  c.optimizer = "adadelta";
  return c;
}

ModelConfig ModelConfig::attn_defaults() {
  ModelConfig c;
  c.kind = "attn";
  c.input_width = 280;
  c.input_height = 32;
  c.conv = default_conv_stack();
  c.init_scheme = "kaiming";
  c.optimizer = "adam";
  return c;
}

ModelConfig ModelConfig::defaults_for(const std::string& kind) {
  if (kind == "ctc") return ctc_defaults();
  if (kind == "attn") return attn_defaults();
  throw ConfigError("unknown model kind: " + kind);
}

void ModelConfig::validate() const {
  if (kind != "ctc" && kind != "attn") throw ConfigError("kind must be ctc or attn");
  if (conv.empty()) throw ConfigError("empty conv stack");
  if (input_width < 1 || input_height < 1) throw ConfigError("bad input dims");
  int h = input_height, w = input_width;
  for (const auto& l : conv) {
    if (l.channels < 1 || l.kernel < 1 || l.kernel % 2 == 0)
      throw ConfigError("conv layers need positive channels and odd kernels");
    if (h % l.pool_h != 0 || w % l.pool_w != 0)
      throw ConfigError("pooling does not divide the activation dims");
    h /= l.pool_h;
    w /= l.pool_w;
  }
  if (hidden_size < 1 || embed_size < 1 || batch_size < 1 || max_epochs < 1 || patience < 0)
    throw ConfigError("bad training hyperparameters");

  auto warn = [this](const std::string& what) {
    std::cerr << "warning: " << kind << " model overrides the paper default (" << what << ")\n";
  };
  if (kind == "ctc") {
    if (input_width != 100 || input_height != 32) warn("input dims 100x32");
    if (optimizer != "adadelta") warn("adadelta optimizer");
    if (init_scheme != "normal" || init_variance != 0.02) warn("normal(0, 0.02) init");
  } else {
    if (input_width != 280 || input_height != 32) warn("input dims 280x32");
    if (optimizer != "adam") warn("adam optimizer");
    if (init_scheme != "kaiming") warn("kaiming init");
  }
}

namespace {

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

}  // namespace

std::string ModelConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["input_width"] = input_width;
  j["input_height"] = input_height;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : conv)
    layers.push_back({{"channels", l.channels},
                      {"kernel", l.kernel},
                      {"pool_h", l.pool_h},
                      {"pool_w", l.pool_w}});
  j["conv"] = layers;
  j["hidden_size"] = hidden_size;
  j["embed_size"] = embed_size;
  j["init"] = {{"scheme", init_scheme}, {"variance", init_variance}};
  j["optimizer"] = {{"name", optimizer}, {"lr", optimizer == "adam" ? adam.lr : adadelta.lr},
                    {"beta1", adam.beta1}, {"beta2", adam.beta2},
                    {"eps", optimizer == "adam" ? adam.eps : adadelta.eps},
                    {"rho", adadelta.rho}};
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["seed"] = seed;
  j["l_max"] = l_max;
  return j.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config JSON: ") + e.what());
  }
  require_keys(j, {"kind", "input_width", "input_height", "conv", "hidden_size", "embed_size",
                   "init", "optimizer", "batch_size", "max_epochs", "patience", "seed", "l_max"},
               "model config");
  if (!j.contains("kind")) throw ConfigError("model config needs 'kind'");
  ModelConfig c = defaults_for(j["kind"].get<std::string>());
  if (j.contains("input_width")) c.input_width = j["input_width"].get<int>();
  if (j.contains("input_height")) c.input_height = j["input_height"].get<int>();
  if (j.contains("conv")) {
    c.conv.clear();
    for (const auto& l : j["conv"]) {
      require_keys(l, {"channels", "kernel", "pool_h", "pool_w"}, "conv layer");
      ConvLayerSpec s;
      s.channels = l.at("channels").get<int>();
      if (l.contains("kernel")) s.kernel = l["kernel"].get<int>();
      if (l.contains("pool_h")) s.pool_h = l["pool_h"].get<int>();
      if (l.contains("pool_w")) s.pool_w = l["pool_w"].get<int>();
      c.conv.push_back(s);
    }
  }
  if (j.contains("hidden_size")) c.hidden_size = j["hidden_size"].get<int>();
  if (j.contains("embed_size")) c.embed_size = j["embed_size"].get<int>();
  if (j.contains("init")) {
    require_keys(j["init"], {"scheme", "variance"}, "init");
    if (j["init"].contains("scheme")) c.init_scheme = j["init"]["scheme"].get<std::string>();
    if (j["init"].contains("variance")) c.init_variance = j["init"]["variance"].get<double>();
  }
  if (j.contains("optimizer")) {
    require_keys(j["optimizer"], {"name", "lr", "beta1", "beta2", "eps", "rho"}, "optimizer");
    const auto& o = j["optimizer"];
    if (o.contains("name")) c.optimizer = o["name"].get<std::string>();
    if (c.optimizer == "adam") {
      if (o.contains("lr")) c.adam.lr = o["lr"].get<double>();
      if (o.contains("beta1")) c.adam.beta1 = o["beta1"].get<double>();
      if (o.contains("beta2")) c.adam.beta2 = o["beta2"].get<double>();
      if (o.contains("eps")) c.adam.eps = o["eps"].get<double>();
    } else if (c.optimizer == "adadelta") {
      if (o.contains("lr")) c.adadelta.lr = o["lr"].get<double>();
      if (o.contains("rho")) c.adadelta.rho = o["rho"].get<double>();
      if (o.contains("eps")) c.adadelta.eps = o["eps"].get<double>();
    } else {
      throw ConfigError("unknown optimizer: " + c.optimizer);
    }
  }
  if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
  if (j.contains("max_epochs")) c.max_epochs = j["max_epochs"].get<int>();
  if (j.contains("patience")) c.patience = j["patience"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  if (j.contains("l_max")) c.l_max = j["l_max"].get<int>();
  c.validate();
  return c;
}

ModelConfig ModelConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

// ---------------------------------------------------------------------------

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  init_params();
}

int Model::frame_count() const {
  int w = config_.input_width;
  for (const auto& l : config_.conv) w /= l.pool_w;
  return w;
}

int Model::feature_dim() const {
  int h = config_.input_height;
  for (const auto& l : config_.conv) h /= l.pool_h;
  return config_.conv.back().channels * h;
}

void Model::init_params() {
  uint64_t counter = 0;
  auto next_seed = [&] { return derive_seed(config_.seed, 0xbeef0000u + counter++); };
  auto weight = [&](const std::vector<int64_t>& shape, int64_t fan_in) {
    if (config_.init_scheme == "kaiming") return kaiming_init(shape, fan_in, next_seed());
    if (config_.init_scheme == "normal")
      return normal_init(shape, 0.0, config_.init_variance, next_seed());
    throw ConfigError("unknown init scheme: " + config_.init_scheme);
  };
  auto zeros = [&](const std::vector<int64_t>& shape) {
    ++counter;  // keep seeds stable whether or not a tensor is random
    return Tensor(shape);
  };

  int ic = 1;
  for (size_t i = 0; i < config_.conv.size(); ++i) {
    const auto& l = config_.conv[i];
    std::string base = "conv" + std::to_string(i + 1);
    params_.add(base + ".w",
                weight({l.channels, ic, l.kernel, l.kernel},
                       static_cast<int64_t>(ic) * l.kernel * l.kernel));
    params_.add(base + ".b", zeros({l.channels}));
    ic = l.channels;
  }

  int feat = feature_dim();
  int hid = config_.hidden_size;
  if (config_.kind == "ctc") {
    for (const char* dir : {"fwd", "bwd"}) {
      std::string base = std::string("lstm_") + dir;
      params_.add(base + ".w", weight({feat + hid, 4 * hid}, feat + hid));
      params_.add(base + ".b", zeros({4 * hid}));
    }
    params_.add("out.w", weight({2 * hid, ctc::kNumSymbols}, 2 * hid));
    params_.add("out.b", zeros({ctc::kNumSymbols}));
  } else {
    int emb = config_.embed_size;
    params_.add("attn.W", weight({hid, hid}, hid));
    params_.add("attn.V", weight({feat, hid}, feat));
    params_.add("attn.v", weight({hid}, hid));
    params_.add("attn.b", zeros({hid}));
    params_.add("embed", weight({attn::kVocabSize, emb}, emb));
    params_.add("dec.w", weight({emb + feat + hid, 4 * hid}, emb + feat + hid));
    params_.add("dec.b", zeros({4 * hid}));
    params_.add("out.w", weight({hid, attn::kVocabSize}, hid));
    params_.add("out.b", zeros({attn::kVocabSize}));
  }
}

Tensor Model::input_from_image(const Image& img) const {
  if (img.width != config_.input_width || img.height != config_.input_height)
    throw Error("predict: image is " + std::to_string(img.width) + "x" +
                std::to_string(img.height) + ", model wants " +
                std::to_string(config_.input_width) + "x" + std::to_string(config_.input_height));
  Tensor t({1, config_.input_height, config_.input_width});
  for (int64_t i = 0; i < t.size(); ++i)
    t[i] = img.pixels[static_cast<size_t>(i)] / 255.0;  // intensities into [0,1]
  return t;
}

ValueId Model::encoder_frames(Tape& tape, const std::map<std::string, ValueId>& pids,
                              const Tensor& input) const {
  ValueId x = tape.leaf(input);
  for (size_t i = 0; i < config_.conv.size(); ++i) {
    const auto& l = config_.conv[i];
    std::string base = "conv" + std::to_string(i + 1);
    x = ops::conv2d(tape, x, pids.at(base + ".w"), pids.at(base + ".b"), l.kernel, l.kernel);
    x = ops::relu(tape, x);
    x = ops::maxpool2d(tape, x, l.pool_h, l.pool_w);
  }
  return ops::columns_to_frames(tape, x);
}

ValueId Model::ctc_logits(Tape& tape, const std::map<std::string, ValueId>& pids,
                          const Tensor& input) const {
  ValueId frames = encoder_frames(tape, pids, input);
  int T = frame_count();
  int hid = config_.hidden_size;

  Tensor zero({1, hid});
  std::vector<ValueId> fwd(T), bwd(T);
  {
    ValueId h = tape.leaf(zero), c = tape.leaf(zero);
    for (int t = 0; t < T; ++t) {
      auto [h2, c2] = ops::lstm_cell(tape, ops::select_row(tape, frames, t), h, c,
                                     pids.at("lstm_fwd.w"), pids.at("lstm_fwd.b"));
      fwd[static_cast<size_t>(t)] = h2;
      h = h2;
      c = c2;
    }
  }
  {
    ValueId h = tape.leaf(zero), c = tape.leaf(zero);
    for (int t = T - 1; t >= 0; --t) {
      auto [h2, c2] = ops::lstm_cell(tape, ops::select_row(tape, frames, t), h, c,
                                     pids.at("lstm_bwd.w"), pids.at("lstm_bwd.b"));
      bwd[static_cast<size_t>(t)] = h2;
      h = h2;
      c = c2;
    }
  }
  std::vector<ValueId> rows(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t)
    rows[static_cast<size_t>(t)] =
        ops::concat_cols(tape, fwd[static_cast<size_t>(t)], bwd[static_cast<size_t>(t)]);
  ValueId states = ops::concat_rows(tape, rows);  // [T, 2*hid]
  return ops::add_rowvec(tape, ops::matmul(tape, states, pids.at("out.w")),
                         ops::reshape(tape, pids.at("out.b"), {1, ctc::kNumSymbols}));
}

attn::DecoderParamIds Model::decoder_ids(const std::map<std::string, ValueId>& pids) const {
  attn::DecoderParamIds ids;
  ids.attn_w = pids.at("attn.W");
  ids.attn_v = pids.at("attn.V");
  ids.attn_vec = pids.at("attn.v");
  ids.attn_b = pids.at("attn.b");
  ids.embed = pids.at("embed");
  ids.lstm_w = pids.at("dec.w");
  ids.lstm_b = pids.at("dec.b");
  ids.out_w = pids.at("out.w");
  ids.out_b = pids.at("out.b");
  return ids;
}

ValueId Model::sample_loss(Tape& tape, const std::map<std::string, ValueId>& pids,
                           const Tensor& input, const std::string& label) const {
  if (config_.kind == "ctc") {
    ValueId logits = ctc_logits(tape, pids, input);
    return ctc::ctc_loss_op(tape, logits, ctc::encode_label(label));
  }
  if (static_cast<int>(label.size()) + 1 > config_.l_max)
    throw Error("label exceeds decoder budget: " + label);
  ValueId frames = encoder_frames(tape, pids, input);
  return attn::teacher_forced_loss(tape, decoder_ids(pids), frames, label, config_.hidden_size);
}

std::string Model::predict_input(const Tensor& input) const {
  Tape tape;
  auto pids = params_.bind(tape);
  if (config_.kind == "ctc") {
    ValueId logits = ctc_logits(tape, pids, input);
    return ctc::greedy_decode(tape.value(logits));
  }
  ValueId frames = encoder_frames(tape, pids, input);
  return attn::greedy_decode(tape, decoder_ids(pids), frames, config_.hidden_size,
                             config_.l_max);
}

std::string Model::predict(const Image& img) const { return predict_input(input_from_image(img)); }

std::unique_ptr<Optimizer> Model::make_optimizer() const {
  if (config_.optimizer == "adam") return std::make_unique<Adam>(config_.adam);
  if (config_.optimizer == "adadelta") return std::make_unique<Adadelta>(config_.adadelta);
  throw ConfigError("unknown optimizer: " + config_.optimizer);
}

}  // namespace strlab
