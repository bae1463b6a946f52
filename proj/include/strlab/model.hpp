#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strlab/attention.hpp"
#include "strlab/image.hpp"
#include "strlab/optim.hpp"
#include "strlab/tape.hpp"

namespace strlab {

struct ConvLayerSpec {
  int channels = 0;
  int kernel = 3;
  int pool_h = 2;
  int pool_w = 2;
};

/// Full description of one model; (config, seed) determine every parameter
/// at every epoch. The paper pins the pairings (CTC: 100x32 input, adadelta,
/// normal(0, 0.02); Attn: 280x32, adam, kaiming); overriding them is allowed
/// but warned about.
struct ModelConfig {
  std::string kind;  // "ctc" | "attn"
  int input_width = 0;
  int input_height = 0;
  std::vector<ConvLayerSpec> conv;
  int hidden_size = 128;
  int embed_size = 128;  // attn only
  std::string init_scheme;  // "kaiming" | "normal"
  double init_variance = 0.02;
  std::string optimizer;  // "adam" | "adadelta"
  AdamConfig adam;
  AdadeltaConfig adadelta;
  int batch_size = 32;
  int max_epochs = 30;
  int patience = 5;
  uint64_t seed = 0;
  int l_max = attn::kMaxDecodeSteps;

  static ModelConfig ctc_defaults();
  static ModelConfig attn_defaults();
  static ModelConfig defaults_for(const std::string& kind);

  /// Throws ConfigError on inconsistency; warns on stderr when a paper
  /// pairing is overridden.
  void validate() const;

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);  // unknown keys are errors
  static ModelConfig load(const std::string& path);
};

/// A built model: parameters plus the graph builders for its architecture.
class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  int64_t param_count() const { return params_.total_size(); }

  /// Encoder sequence length: CTC frame count T / attention column count n.
  int frame_count() const;
  /// Feature dimension of one encoder column.
  int feature_dim() const;

  /// Normalized [1,H,W] input from a raster of the model's input dims.
  Tensor input_from_image(const Image& img) const;

  /// Per-sample training loss subgraph (CTC loss or teacher-forced sum).
  ValueId sample_loss(Tape& tape, const std::map<std::string, ValueId>& pids,
                      const Tensor& input, const std::string& label) const;

  /// Greedy transcription of one already-resized image.
  std::string predict(const Image& img) const;
  std::string predict_input(const Tensor& input) const;

  std::unique_ptr<Optimizer> make_optimizer() const;

 private:
  ValueId encoder_frames(Tape& tape, const std::map<std::string, ValueId>& pids,
                         const Tensor& input) const;
  ValueId ctc_logits(Tape& tape, const std::map<std::string, ValueId>& pids,
                     const Tensor& input) const;
  attn::DecoderParamIds decoder_ids(const std::map<std::string, ValueId>& pids) const;
  void init_params();

  ModelConfig config_;
  ParamStore params_;
};

}  // namespace strlab
