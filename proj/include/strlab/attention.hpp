#pragma once

#include <string>
#include <vector>

#include "strlab/tape.hpp"

namespace strlab {
namespace attn {

/// Output vocabulary: a-z, then the control tokens.
constexpr int kSos = 26;
constexpr int kEos = 27;
constexpr int kPad = 28;
constexpr int kVocabSize = 29;

/// Decode-step budget: words cap at 7 letters, the slack absorbs degenerate
/// models.
constexpr int kMaxDecodeSteps = 25;

int char_to_token(char c);
std::string tokens_to_string(const std::vector<int>& tokens);  // strips control tokens

/// Additive-attention parameters: e_i = v^T tanh(W s_prev + V h_i + b).
struct AttnParams {
  Tensor W;  // [state_dim, attn_dim]
  Tensor V;  // [feat_dim, attn_dim]
  Tensor v;  // [attn_dim]
  Tensor b;  // [attn_dim]
};

/// alpha_i = exp(e_i) / sum_k exp(e_k); nonneg, sums to 1.
Tensor attention_weights(const Tensor& s_prev, const Tensor& H, const AttnParams& p);

/// c = sum_i alpha_i h_i (convex combination of feature rows).
Tensor context(const Tensor& alpha, const Tensor& H);

/// Tape-side decoder. Parameter ids are bound by the model; Vh (= H x V)
/// is precomputed once per sample and shared across steps.
struct DecoderParamIds {
  ValueId attn_w, attn_v, attn_vec, attn_b;
  ValueId embed;            // [kVocabSize, embed_dim]
  ValueId lstm_w, lstm_b;   // [embed+feat+hidden, 4*hidden], [4*hidden]
  ValueId out_w, out_b;     // [hidden, kVocabSize], [kVocabSize]
};

struct DecoderState {
  ValueId h;  // [1, hidden]
  ValueId c;  // [1, hidden]
  int t = 0;
};

struct StepResult {
  ValueId logits;  // [1, kVocabSize]
  ValueId alpha;   // [1, n]
  DecoderState state;
};

ValueId precompute_vh(Tape& tape, ValueId features, const DecoderParamIds& ids);

/// One decode step: attention over encoder columns with the previous
/// hidden state, context + embedded previous token into the LSTM, affine
/// readout. Throws on invalid tokens.
StepResult decode_step(Tape& tape, const DecoderParamIds& ids, const DecoderState& state,
                       int y_prev, ValueId features, ValueId vh);

/// Sum over positions of cross-entropy against target tokens (with EOS
/// appended), teacher-forcing the ground-truth previous token.
ValueId teacher_forced_loss(Tape& tape, const DecoderParamIds& ids, ValueId features,
                            const std::string& target, int hidden_dim);

/// Greedy inference from SOS; argmax per step, stop at EOS or after
/// kMaxDecodeSteps; control tokens are stripped from the result.
std::string greedy_decode(Tape& tape, const DecoderParamIds& ids, ValueId features,
                          int hidden_dim, int max_steps = kMaxDecodeSteps);

}  // namespace attn
}  // namespace strlab
