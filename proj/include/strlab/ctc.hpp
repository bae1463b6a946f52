#pragma once

#include <limits>
#include <string>
#include <vector>

#include "strlab/tape.hpp"

namespace strlab {
namespace ctc {

/// Alphabet is a-z as indices 0..25; the blank takes the last slot (26).
constexpr int kAlphabetSize = 26;
constexpr int kBlank = kAlphabetSize;
constexpr int kNumSymbols = kAlphabetSize + 1;

/// Log-space zero (no path). All lattice arithmetic runs in log space;
/// -inf is the documented sentinel for "impossible".
constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// Collapse map B: merge consecutive repeats, then delete blanks.
/// Path symbols are indices into the blank-augmented alphabet.
std::string collapse(const std::vector<int>& path);

/// Label string -> symbol indices. Throws on characters outside a-z.
std::vector<int> encode_label(const std::string& label);

/// Frames needed for a target: L plus one per adjacent repeated pair.
int min_frames(const std::vector<int>& target);

struct CtcResult {
  double loss = 0.0;                // -log P(target | logprobs)
  Tensor grad_wrt_logprobs;         // [T, 27], d(loss)/d(logprob), entries independent
};

/// Forward-backward over the 2L+1 blank-augmented lattice, in log space.
/// `logprobs` is [T, 27] with rows log-sum-exp'ing to ~0. Throws
/// InfeasibleTargetError when T < min_frames(target). A feasible lattice
/// whose paths all have zero probability yields loss = +inf.
CtcResult ctc_loss_logprobs(const Tensor& logprobs, const std::vector<int>& target);

/// Tape op on raw logits [T, 27]: applies log_softmax internally and uses
/// the analytic alpha-beta gradient (softmax - path posterior).
ValueId ctc_loss_op(Tape& tape, ValueId logits, const std::vector<int>& target);

/// Per-frame argmax then collapse; ties break toward the lowest symbol
/// index. Accepts logits or (log-)probabilities.
std::string greedy_decode(const Tensor& frame_scores);

}  // namespace ctc
}  // namespace strlab
