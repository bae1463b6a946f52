#include "strlab/attention.hpp"

#include "strlab/errors.hpp"
#include "strlab/ops.hpp"

namespace strlab {
namespace attn {

int char_to_token(char c) {
  if (c < 'a' || c > 'z') throw Error("token: character outside a-z");
  return c - 'a';
}

std::string tokens_to_string(const std::vector<int>& tokens) {
  std::string out;
  for (int t : tokens)
    if (t >= 0 && t < 26) out.push_back(static_cast<char>('a' + t));
  return out;
}

namespace {

/// Energies + softmax on a scratch tape; shared by the pure entry points
/// and (structurally) by the model path in decode_step.
ValueId weights_graph(Tape& tape, ValueId s_prev, ValueId features, ValueId w, ValueId v_mat,
                      ValueId v_vec, ValueId b) {
  ValueId vh = ops::matmul(tape, features, v_mat);                        // [n,a]
  ValueId ws = ops::matmul(tape, s_prev, w);                              // [1,a]
  ValueId wsb = ops::add(tape, ws, ops::reshape(tape, b, {1, tape.value(b).size()}));
  ValueId g = ops::tanh(tape, ops::add_rowvec(tape, vh, wsb));            // [n,a]
  ValueId e = ops::matmul(tape, g, ops::reshape(tape, v_vec, {tape.value(v_vec).size(), 1}));
  ValueId e_row = ops::reshape(tape, e, {1, tape.value(e).dim(0)});       // [1,n]
  return ops::softmax(tape, e_row);
}

}  // namespace

Tensor attention_weights(const Tensor& s_prev, const Tensor& H, const AttnParams& p) {
  if (s_prev.rank() != 2 || s_prev.dim(0) != 1) throw NumericError("s_prev must be [1,d]");
  if (H.rank() != 2) throw NumericError("H must be [n,d]");
  if (p.W.dim(0) != s_prev.dim(1) || p.V.dim(0) != H.dim(1) || p.W.dim(1) != p.V.dim(1) ||
      p.v.size() != p.W.dim(1) || p.b.size() != p.W.dim(1))
    throw NumericError("attention parameter shapes are inconsistent");
  Tape tape;
  ValueId alpha = weights_graph(tape, tape.leaf(s_prev), tape.leaf(H), tape.leaf(p.W),
                                tape.leaf(p.V), tape.leaf(p.v), tape.leaf(p.b));
  return tape.value(alpha);
}

Tensor context(const Tensor& alpha, const Tensor& H) {
  if (alpha.rank() != 2 || alpha.dim(0) != 1 || alpha.dim(1) != H.dim(0))
    throw NumericError("context: alpha must be [1,n] matching H rows");
  Tape tape;
  ValueId c = ops::matmul(tape, tape.leaf(alpha), tape.leaf(H));
  return tape.value(c);
}

ValueId precompute_vh(Tape& tape, ValueId features, const DecoderParamIds& ids) {
  return ops::matmul(tape, features, ids.attn_v);
}

StepResult decode_step(Tape& tape, const DecoderParamIds& ids, const DecoderState& state,
                       int y_prev, ValueId features, ValueId vh) {
  if (y_prev < 0 || y_prev >= kVocabSize) throw Error("decode_step: invalid token");

  // alpha from the pre-update hidden state.
  ValueId ws = ops::matmul(tape, state.h, ids.attn_w);
  ValueId wsb = ops::add(
      tape, ws, ops::reshape(tape, ids.attn_b, {1, tape.value(ids.attn_b).size()}));
  ValueId g = ops::tanh(tape, ops::add_rowvec(tape, vh, wsb));
  ValueId e = ops::matmul(
      tape, g, ops::reshape(tape, ids.attn_vec, {tape.value(ids.attn_vec).size(), 1}));
  ValueId alpha = ops::softmax(tape, ops::reshape(tape, e, {1, tape.value(e).dim(0)}));
  ValueId ctx = ops::matmul(tape, alpha, features);

  ValueId emb = ops::select_row(tape, ids.embed, y_prev);
  ValueId x = ops::concat_cols(tape, emb, ctx);
  auto [h_next, c_next] = ops::lstm_cell(tape, x, state.h, state.c, ids.lstm_w, ids.lstm_b);
  ValueId logits = ops::add_rowvec(
      tape, ops::matmul(tape, h_next, ids.out_w),
      ops::reshape(tape, ids.out_b, {1, tape.value(ids.out_b).size()}));

  StepResult r;
  r.logits = logits;
  r.alpha = alpha;
  r.state = DecoderState{h_next, c_next, state.t + 1};
  return r;
}

namespace {

DecoderState initial_state(Tape& tape, int hidden_dim) {
  return DecoderState{tape.leaf(Tensor({1, hidden_dim})), tape.leaf(Tensor({1, hidden_dim})), 0};
}

}  // namespace

ValueId teacher_forced_loss(Tape& tape, const DecoderParamIds& ids, ValueId features,
                            const std::string& target, int hidden_dim) {
  if (static_cast<int>(target.size()) > kMaxDecodeSteps - 1)
    throw Error("teacher_forced_loss: target exceeds decode budget");
  std::vector<int> targets;
  for (char c : target) targets.push_back(char_to_token(c));
  targets.push_back(kEos);

  ValueId vh = precompute_vh(tape, features, ids);
  DecoderState state = initial_state(tape, hidden_dim);
  std::vector<ValueId> step_logits;
  int y_prev = kSos;
  for (size_t l = 0; l < targets.size(); ++l) {
    StepResult r = decode_step(tape, ids, state, y_prev, features, vh);
    step_logits.push_back(r.logits);
    state = r.state;
    y_prev = targets[l];  // teacher forcing
  }
  return ops::cross_entropy_sum(tape, ops::concat_rows(tape, step_logits), targets);
}

std::string greedy_decode(Tape& tape, const DecoderParamIds& ids, ValueId features,
                          int hidden_dim, int max_steps) {
  ValueId vh = precompute_vh(tape, features, ids);
  DecoderState state = initial_state(tape, hidden_dim);
  std::vector<int> out;
  int y_prev = kSos;
  for (int step = 0; step < max_steps; ++step) {
    StepResult r = decode_step(tape, ids, state, y_prev, features, vh);
    const Tensor& logits = tape.value(r.logits);
    int best = 0;
    for (int k = 1; k < kVocabSize; ++k)
      if (logits[k] > logits[best]) best = k;
    if (best == kEos) break;
    out.push_back(best);
    state = r.state;
    y_prev = best;
  }
  return tokens_to_string(out);
}

}  // namespace attn
}  // namespace strlab
