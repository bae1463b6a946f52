#include "strlab/ctc.hpp"

#include <cmath>

#include "strlab/errors.hpp"

namespace strlab {
namespace ctc {

namespace {

/// log(exp(a) + exp(b)) with -inf handled exactly.
double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

/// Blank-augmented target: blank, s1, blank, s2, ..., sL, blank.
std::vector<int> augment(const std::vector<int>& target) {
  std::vector<int> aug;
  aug.reserve(2 * target.size() + 1);
  aug.push_back(kBlank);
  for (int s : target) {
    aug.push_back(s);
    aug.push_back(kBlank);
  }
  return aug;
}

}  // namespace

std::string collapse(const std::vector<int>& path) {
  std::string out;
  int prev = -1;
  for (int s : path) {
    if (s != prev && s != kBlank) out.push_back(static_cast<char>('a' + s));
    prev = s;
  }
  return out;
}

std::vector<int> encode_label(const std::string& label) {
  std::vector<int> out;
  out.reserve(label.size());
  for (char c : label) {
    if (c < 'a' || c > 'z') throw Error("label contains non a-z character");
    out.push_back(c - 'a');
  }
  return out;
}

int min_frames(const std::vector<int>& target) {
  int repeats = 0;
  for (size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++repeats;
  return static_cast<int>(target.size()) + repeats;
}

CtcResult ctc_loss_logprobs(const Tensor& logprobs, const std::vector<int>& target) {
  if (logprobs.rank() != 2 || logprobs.dim(1) != kNumSymbols)
    throw NumericError("ctc_loss: expected [T, " + std::to_string(kNumSymbols) + "] logprobs");
  if (target.empty()) throw Error("ctc_loss: empty target");
  int64_t T = logprobs.dim(0);
  if (T < min_frames(target))
    throw InfeasibleTargetError("ctc_loss: target needs " + std::to_string(min_frames(target)) +
                                " frames, got " + std::to_string(T));

  std::vector<int> aug = augment(target);
  int64_t M = static_cast<int64_t>(aug.size());
  auto lp = [&](int64_t t, int m) { return logprobs.at(t, aug[static_cast<size_t>(m)]); };
  // A state may skip from m-2 when its symbol is neither blank nor a repeat.
  auto can_skip = [&](int64_t m) {
    return m >= 2 && aug[static_cast<size_t>(m)] != kBlank &&
           aug[static_cast<size_t>(m)] != aug[static_cast<size_t>(m - 2)];
  };

  // Alpha: paths ending at (t, m), emission at t included.
  std::vector<double> alpha(static_cast<size_t>(T * M), kLogZero);
  auto A = [&](int64_t t, int64_t m) -> double& { return alpha[static_cast<size_t>(t * M + m)]; };
  A(0, 0) = lp(0, 0);
  if (M > 1) A(0, 1) = lp(0, 1);
  for (int64_t t = 1; t < T; ++t) {
    for (int64_t m = 0; m < M; ++m) {
      double acc = A(t - 1, m);
      if (m >= 1) acc = log_add(acc, A(t - 1, m - 1));
      if (can_skip(m)) acc = log_add(acc, A(t - 1, m - 2));
      A(t, m) = acc == kLogZero ? kLogZero : acc + lp(t, static_cast<int>(m));
    }
  }
  double log_p = A(T - 1, M - 1);
  if (M > 1) log_p = log_add(log_p, A(T - 1, M - 2));

  // Beta: paths starting at (t, m), emission at t included.
  std::vector<double> beta(static_cast<size_t>(T * M), kLogZero);
  auto B = [&](int64_t t, int64_t m) -> double& { return beta[static_cast<size_t>(t * M + m)]; };
  B(T - 1, M - 1) = lp(T - 1, static_cast<int>(M - 1));
  if (M > 1) B(T - 1, M - 2) = lp(T - 1, static_cast<int>(M - 2));
  for (int64_t t = T - 2; t >= 0; --t) {
    for (int64_t m = M - 1; m >= 0; --m) {
      double acc = B(t + 1, m);
      if (m + 1 < M) acc = log_add(acc, B(t + 1, m + 1));
      if (m + 2 < M && can_skip(m + 2)) acc = log_add(acc, B(t + 1, m + 2));
      B(t, m) = acc == kLogZero ? kLogZero : acc + lp(t, static_cast<int>(m));
    }
  }

  CtcResult res;
  res.loss = -log_p;
  res.grad_wrt_logprobs = Tensor({T, kNumSymbols});
  if (log_p == kLogZero) {
    // Zero-probability lattice: loss is +inf, gradient undefined; report
    // zeros so callers that only read the loss stay usable.
    res.loss = std::numeric_limits<double>::infinity();
    return res;
  }

  // d(-log P)/d(logprob[t,k]) = -Q(t,k)/P, with Q the total probability of
  // paths emitting symbol k at frame t (alpha*beta counts the frame-t
  // emission twice, so divide it back out).
  for (int64_t t = 0; t < T; ++t) {
    std::vector<double> log_q(kNumSymbols, kLogZero);
    for (int64_t m = 0; m < M; ++m) {
      double ab = A(t, m) == kLogZero || B(t, m) == kLogZero
                      ? kLogZero
                      : A(t, m) + B(t, m) - lp(t, static_cast<int>(m));
      int sym = aug[static_cast<size_t>(m)];
      log_q[static_cast<size_t>(sym)] = log_add(log_q[static_cast<size_t>(sym)], ab);
    }
    for (int k = 0; k < kNumSymbols; ++k) {
      double lq = log_q[static_cast<size_t>(k)];
      res.grad_wrt_logprobs.at(t, k) = lq == kLogZero ? 0.0 : -std::exp(lq - log_p);
    }
  }
  return res;
}

ValueId ctc_loss_op(Tape& tape, ValueId logits, const std::vector<int>& target) {
  const Tensor& u = tape.value(logits);
  if (u.rank() != 2 || u.dim(1) != kNumSymbols)
    throw NumericError("ctc_loss_op: expected [T, 27] logits");
  int64_t T = u.dim(0);

  // log_softmax on the raw values (no tape node needed; the combined
  // gradient through the softmax is analytic: p - Q/P).
  Tensor logprobs({T, kNumSymbols});
  for (int64_t t = 0; t < T; ++t) {
    double mx = u.at(t, 0);
    for (int k = 1; k < kNumSymbols; ++k) mx = std::max(mx, u.at(t, k));
    double z = 0.0;
    for (int k = 0; k < kNumSymbols; ++k) z += std::exp(u.at(t, k) - mx);
    double logz = std::log(z) + mx;
    for (int k = 0; k < kNumSymbols; ++k) logprobs.at(t, k) = u.at(t, k) - logz;
  }

  CtcResult res = ctc_loss_logprobs(logprobs, target);
  if (!std::isfinite(res.loss))
    throw NumericError("ctc_loss_op: zero-probability lattice");

  Tensor grad_logits({T, kNumSymbols});
  for (int64_t t = 0; t < T; ++t) {
    // grad wrt logprobs is -Q/P per symbol; through log_softmax this
    // becomes softmax(u) - Q/P (the Q/P row sums to 1).
    for (int k = 0; k < kNumSymbols; ++k)
      grad_logits.at(t, k) = std::exp(logprobs.at(t, k)) + res.grad_wrt_logprobs.at(t, k);
  }

  return tape.record("ctc_loss", Tensor::scalar(res.loss), {logits},
                     [logits, grad_logits](Tape& tp, ValueId o) {
                       double g = tp.grad(o)[0];
                       Tensor gl(grad_logits.shape());
                       for (int64_t i = 0; i < gl.size(); ++i) gl[i] = g * grad_logits[i];
                       tp.accumulate(logits, gl);
                     });
}

std::string greedy_decode(const Tensor& frame_scores) {
  if (frame_scores.rank() != 2 || frame_scores.dim(1) != kNumSymbols)
    throw NumericError("greedy_decode: expected [T, 27] scores");
  std::vector<int> path;
  path.reserve(static_cast<size_t>(frame_scores.dim(0)));
  for (int64_t t = 0; t < frame_scores.dim(0); ++t) {
    int best = 0;
    for (int k = 1; k < kNumSymbols; ++k)
      if (frame_scores.at(t, k) > frame_scores.at(t, best)) best = k;
    path.push_back(best);
  }
  return collapse(path);
}

}  // namespace ctc
}  // namespace strlab
