#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "strlab/attention.hpp"
#include "strlab/errors.hpp"
#include "strlab/gradcheck.hpp"
#include "strlab/model.hpp"
#include "strlab/ops.hpp"
#include "strlab/rng.hpp"

using namespace strlab;

namespace {

Tensor random_tensor(const std::vector<int64_t>& shape, uint64_t seed, double scale = 1.0) {
  Tensor t(shape);
  Rng rng(seed);
  for (int64_t i = 0; i < t.size(); ++i) t[i] = scale * (rng.next_double() * 2.0 - 1.0);
  return t;
}

attn::AttnParams random_params(int state_dim, int feat_dim, int attn_dim, uint64_t seed) {
  attn::AttnParams p;
  p.W = random_tensor({state_dim, attn_dim}, derive_seed(seed, 1));
  p.V = random_tensor({feat_dim, attn_dim}, derive_seed(seed, 2));
  p.v = random_tensor({attn_dim}, derive_seed(seed, 3));
  p.b = random_tensor({attn_dim}, derive_seed(seed, 4));
  return p;
}

/// Naive scalar-loop evaluation of the two attention formulas.
std::vector<double> naive_attention(const Tensor& s_prev, const Tensor& H,
                                    const attn::AttnParams& p) {
  int64_t n = H.dim(0), d = H.dim(1), ds = s_prev.dim(1), a = p.W.dim(1);
  std::vector<double> e(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (int64_t k = 0; k < a; ++k) {
      double t = p.b[k];
      for (int64_t j = 0; j < ds; ++j) t += s_prev[j] * p.W.at(j, k);
      for (int64_t j = 0; j < d; ++j) t += H.at(i, j) * p.V.at(j, k);
      dot += p.v[k] * std::tanh(t);
    }
    e[static_cast<size_t>(i)] = dot;
  }
  double mx = e[0];
  for (double v : e) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : e) z += std::exp(v - mx);
  std::vector<double> alpha;
  for (double v : e) alpha.push_back(std::exp(v - mx) / z);
  return alpha;
}

}  // namespace

TEST_CASE("attention weights: identical features give uniform attention") {
  int n = 6, d = 4, ds = 3, a = 5;
  auto p = random_params(ds, d, a, 7);
  Tensor H({n, d});
  Tensor row = random_tensor({1, d}, 8);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < d; ++j) H.at(i, j) = row[j];
  Tensor s = random_tensor({1, ds}, 9);
  Tensor alpha = attn::attention_weights(s, H, p);
  for (int64_t i = 0; i < n; ++i)
    CHECK(alpha[i] == doctest::Approx(1.0 / n).epsilon(1e-12));
}

TEST_CASE("attention weights: single column gets weight one") {
  auto p = random_params(3, 4, 5, 17);
  Tensor H = random_tensor({1, 4}, 18);
  Tensor s = random_tensor({1, 3}, 19);
  Tensor alpha = attn::attention_weights(s, H, p);
  CHECK(alpha.size() == 1);
  CHECK(alpha[0] == doctest::Approx(1.0));
}

TEST_CASE("attention weights match the naive scalar loop and normalize") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    int n = 3 + static_cast<int>(seed % 5);
    auto p = random_params(4, 6, 5, derive_seed(100, seed));
    Tensor H = random_tensor({n, 6}, derive_seed(101, seed));
    Tensor s = random_tensor({1, 4}, derive_seed(102, seed));
    Tensor alpha = attn::attention_weights(s, H, p);
    auto want = naive_attention(s, H, p);
    double sum = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      CHECK(std::fabs(alpha[i] - want[static_cast<size_t>(i)]) < 1e-12);
      CHECK(alpha[i] >= 0.0);
      sum += alpha[i];
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("attention is invariant to constant energy shifts") {
  // Shifting every energy by a constant via the bias path through tanh is
  // not constant; instead verify on the softmax itself: uniform energies in,
  // uniform weights out regardless of the constant.
  Tape t1, t2;
  Tensor e({1, 7});
  Tensor e2({1, 7});
  Rng rng(5);
  for (int i = 0; i < 7; ++i) {
    e[i] = rng.next_double();
    e2[i] = e[i] + 42.0;
  }
  ValueId a1 = ops::softmax(t1, t1.leaf(e));
  ValueId a2 = ops::softmax(t2, t2.leaf(e2));
  for (int i = 0; i < 7; ++i) CHECK(std::fabs(t1.value(a1)[i] - t2.value(a2)[i]) < 1e-9);
}

TEST_CASE("context: one-hot picks a row, uniform averages rows, naive oracle") {
  Tensor H = random_tensor({5, 3}, 31);
  Tensor onehot({1, 5});
  onehot[3] = 1.0;
  Tensor c = attn::context(onehot, H);
  for (int64_t j = 0; j < 3; ++j) CHECK(c[j] == doctest::Approx(H.at(3, j)));

  Tensor uniform({1, 5});
  for (int i = 0; i < 5; ++i) uniform[i] = 0.2;
  Tensor mean = attn::context(uniform, H);
  for (int64_t j = 0; j < 3; ++j) {
    double want = 0.0;
    for (int64_t i = 0; i < 5; ++i) want += H.at(i, j) / 5.0;
    CHECK(mean[j] == doctest::Approx(want).epsilon(1e-12));
  }

  Tensor alpha = attn::attention_weights(random_tensor({1, 2}, 32), H,
                                         random_params(2, 3, 4, 33));
  Tensor ctx = attn::context(alpha, H);
  for (int64_t j = 0; j < 3; ++j) {
    double want = 0.0;
    for (int64_t i = 0; i < 5; ++i) want += alpha[i] * H.at(i, j);
    CHECK(std::fabs(ctx[j] - want) < 1e-12);
  }
}

namespace {

struct TinyDecoder {
  ParamStore params;
  int hidden = 4, embed = 3, feat = 5;

  TinyDecoder(uint64_t seed, bool zero = false) {
    auto mk = [&](const std::vector<int64_t>& shape, uint64_t s) {
      return zero ? Tensor(shape) : random_tensor(shape, s, 0.6);
    };
    params.add("attn.W", mk({hidden, hidden}, derive_seed(seed, 1)));
    params.add("attn.V", mk({feat, hidden}, derive_seed(seed, 2)));
    params.add("attn.v", mk({hidden}, derive_seed(seed, 3)));
    params.add("attn.b", mk({hidden}, derive_seed(seed, 4)));
    params.add("embed", mk({attn::kVocabSize, embed}, derive_seed(seed, 5)));
    params.add("dec.w", mk({embed + feat + hidden, 4 * hidden}, derive_seed(seed, 6)));
    params.add("dec.b", mk({4 * hidden}, derive_seed(seed, 7)));
    params.add("out.w", mk({hidden, attn::kVocabSize}, derive_seed(seed, 8)));
    params.add("out.b", mk({attn::kVocabSize}, derive_seed(seed, 9)));
  }

  attn::DecoderParamIds ids(const std::map<std::string, ValueId>& pids) const {
    return {pids.at("attn.W"), pids.at("attn.V"), pids.at("attn.v"), pids.at("attn.b"),
            pids.at("embed"),  pids.at("dec.w"),  pids.at("dec.b"),  pids.at("out.w"),
            pids.at("out.b")};
  }
};

/// Scalar re-implementation of the full teacher-forced decoder.
double naive_teacher_forced(const TinyDecoder& d, const Tensor& H, const std::string& target) {
  int hid = d.hidden, emb = d.embed, feat = d.feat;
  int64_t n = H.dim(0);
  std::vector<double> h(static_cast<size_t>(hid), 0.0), c(static_cast<size_t>(hid), 0.0);
  std::vector<int> targets;
  for (char ch : target) targets.push_back(ch - 'a');
  targets.push_back(attn::kEos);

  const Tensor& W = d.params.at("attn.W");
  const Tensor& V = d.params.at("attn.V");
  const Tensor& v = d.params.at("attn.v");
  const Tensor& b = d.params.at("attn.b");
  const Tensor& E = d.params.at("embed");
  const Tensor& LW = d.params.at("dec.w");
  const Tensor& LB = d.params.at("dec.b");
  const Tensor& OW = d.params.at("out.w");
  const Tensor& OB = d.params.at("out.b");

  double loss = 0.0;
  int y_prev = attn::kSos;
  for (int tgt : targets) {
    // attention
    std::vector<double> e(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int k = 0; k < hid; ++k) {
        double t = b[k];
        for (int j = 0; j < hid; ++j) t += h[static_cast<size_t>(j)] * W.at(j, k);
        for (int j = 0; j < feat; ++j) t += H.at(i, j) * V.at(j, k);
        acc += v[k] * std::tanh(t);
      }
      e[static_cast<size_t>(i)] = acc;
    }
    double mx = e[0];
    for (double x : e) mx = std::max(mx, x);
    double z = 0.0;
    for (double x : e) z += std::exp(x - mx);
    std::vector<double> ctx(static_cast<size_t>(feat), 0.0);
    for (int64_t i = 0; i < n; ++i) {
      double a = std::exp(e[static_cast<size_t>(i)] - mx) / z;
      for (int j = 0; j < feat; ++j) ctx[static_cast<size_t>(j)] += a * H.at(i, j);
    }
    // lstm over [embed ; ctx ; h]
    std::vector<double> x(static_cast<size_t>(emb + feat));
    for (int j = 0; j < emb; ++j) x[static_cast<size_t>(j)] = E.at(y_prev, j);
    for (int j = 0; j < feat; ++j) x[static_cast<size_t>(emb + j)] = ctx[static_cast<size_t>(j)];
    std::vector<double> gates(static_cast<size_t>(4 * hid));
    for (int g = 0; g < 4 * hid; ++g) {
      double t = LB[g];
      for (int j = 0; j < emb + feat; ++j) t += x[static_cast<size_t>(j)] * LW.at(j, g);
      for (int j = 0; j < hid; ++j) t += h[static_cast<size_t>(j)] * LW.at(emb + feat + j, g);
      gates[static_cast<size_t>(g)] = t;
    }
    auto sig = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
    std::vector<double> h2(static_cast<size_t>(hid)), c2(static_cast<size_t>(hid));
    for (int k = 0; k < hid; ++k) {
      double gi = sig(gates[static_cast<size_t>(k)]);
      double gf = sig(gates[static_cast<size_t>(hid + k)]);
      double gg = std::tanh(gates[static_cast<size_t>(2 * hid + k)]);
      double go = sig(gates[static_cast<size_t>(3 * hid + k)]);
      c2[static_cast<size_t>(k)] = gf * c[static_cast<size_t>(k)] + gi * gg;
      h2[static_cast<size_t>(k)] = go * std::tanh(c2[static_cast<size_t>(k)]);
    }
    h = h2;
    c = c2;
    // readout + cross-entropy
    std::vector<double> logits(attn::kVocabSize);
    for (int k = 0; k < attn::kVocabSize; ++k) {
      double t = OB[k];
      for (int j = 0; j < hid; ++j) t += h[static_cast<size_t>(j)] * OW.at(j, k);
      logits[static_cast<size_t>(k)] = t;
    }
    double lmx = logits[0];
    for (double t : logits) lmx = std::max(lmx, t);
    double lz = 0.0;
    for (double t : logits) lz += std::exp(t - lmx);
    loss += std::log(lz) + lmx - logits[static_cast<size_t>(tgt)];
    y_prev = tgt;
  }
  return loss;
}

}  // namespace

TEST_CASE("decode_step: zero parameters give a uniform next-token distribution") {
  TinyDecoder d(0, /*zero=*/true);
  Tensor H = random_tensor({6, 5}, 41);
  Tape tape;
  auto pids = d.params.bind(tape);
  auto ids = d.ids(pids);
  ValueId features = tape.leaf(H);
  ValueId vh = attn::precompute_vh(tape, features, ids);
  attn::DecoderState state{tape.leaf(Tensor({1, 4})), tape.leaf(Tensor({1, 4})), 0};
  auto r = attn::decode_step(tape, ids, state, attn::kSos, features, vh);
  Tape t2;
  ValueId probs = ops::softmax(t2, t2.leaf(tape.value(r.logits)));
  for (int k = 0; k < attn::kVocabSize; ++k)
    CHECK(t2.value(probs)[k] == doctest::Approx(1.0 / attn::kVocabSize).epsilon(1e-12));
  CHECK_THROWS_AS(attn::decode_step(tape, ids, state, 99, features, vh), Error);
}

TEST_CASE("decode_step is deterministic") {
  TinyDecoder d(5);
  Tensor H = random_tensor({4, 5}, 42);
  auto run = [&] {
    Tape tape;
    auto pids = d.params.bind(tape);
    auto ids = d.ids(pids);
    ValueId features = tape.leaf(H);
    ValueId vh = attn::precompute_vh(tape, features, ids);
    attn::DecoderState state{tape.leaf(Tensor({1, 4})), tape.leaf(Tensor({1, 4})), 0};
    auto r = attn::decode_step(tape, ids, state, attn::kSos, features, vh);
    const Tensor& t = tape.value(r.logits);
    return std::vector<double>(t.data(), t.data() + t.size());
  };
  CHECK(run() == run());
}

TEST_CASE("teacher_forced_loss: uniform logits give (L+1) ln k") {
  TinyDecoder d(0, /*zero=*/true);
  Tensor H = random_tensor({5, 5}, 43);
  for (const std::string target : {"abc", "", "zebra"}) {
    Tape tape;
    auto pids = d.params.bind(tape);
    ValueId features = tape.leaf(H);
    ValueId loss = attn::teacher_forced_loss(tape, d.ids(pids), features, target, d.hidden);
    double want = (static_cast<double>(target.size()) + 1.0) * std::log(attn::kVocabSize);
    CHECK(tape.value(loss).item() == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("teacher_forced_loss matches the scalar recomputation") {
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    TinyDecoder d(seed);
    Tensor H = random_tensor({5, 5}, derive_seed(50, seed));
    std::string target = seed % 2 ? "cab" : "dog";
    Tape tape;
    auto pids = d.params.bind(tape);
    ValueId features = tape.leaf(H);
    ValueId loss = attn::teacher_forced_loss(tape, d.ids(pids), features, target, d.hidden);
    double want = naive_teacher_forced(d, H, target);
    CHECK(tape.value(loss).item() == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("decoder gradients pass finite differences") {
  TinyDecoder d(9);
  Tensor H = random_tensor({4, 5}, 51);
  ScalarGraphFn f = [&](Tape& tape, const std::map<std::string, ValueId>& pids) {
    ValueId features = tape.leaf(H);
    return attn::teacher_forced_loss(tape, d.ids(pids), features, "bad", d.hidden);
  };
  auto report = gradient_check(f, d.params, {});
  INFO("worst " << report.worst_param << " err " << report.max_rel_err);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("greedy_decode stops at EOS and strips control tokens") {
  // Bias the readout so EOS always wins: empty decode.
  TinyDecoder d(0, /*zero=*/true);
  d.params.at("out.b")[attn::kEos] = 5.0;
  Tensor H = random_tensor({4, 5}, 61);
  Tape tape;
  auto pids = d.params.bind(tape);
  ValueId features = tape.leaf(H);
  CHECK(attn::greedy_decode(tape, d.ids(pids), features, d.hidden) == "");
}

TEST_CASE("greedy_decode is deterministic and bounded by the step budget") {
  TinyDecoder d(12);
  Tensor H = random_tensor({6, 5}, 62);
  auto decode = [&] {
    Tape tape;
    auto pids = d.params.bind(tape);
    ValueId features = tape.leaf(H);
    return attn::greedy_decode(tape, d.ids(pids), features, d.hidden);
  };
  std::string a = decode();
  CHECK(a == decode());
  CHECK(a.size() <= attn::kMaxDecodeSteps);

  // A PAD-biased decoder emits nothing printable yet still terminates.
  TinyDecoder pad(0, /*zero=*/true);
  pad.params.at("out.b")[attn::kPad] = 5.0;
  Tape tape;
  auto pids = pad.params.bind(tape);
  ValueId features = tape.leaf(H);
  std::string out = attn::greedy_decode(tape, pad.ids(pids), features, pad.hidden);
  CHECK(out.empty());
}

TEST_CASE("token helpers") {
  CHECK(attn::char_to_token('a') == 0);
  CHECK(attn::char_to_token('z') == 25);
  CHECK_THROWS_AS(attn::char_to_token('!'), Error);
  CHECK(attn::tokens_to_string({2, 0, 19, attn::kEos, attn::kPad}) == "cat");
}
