#pragma once

#include <utility>
#include <vector>

#include "strlab/tape.hpp"

namespace strlab {
namespace ops {

// Differentiable kernels. Shapes are checked; every output is scanned for
// NaN/Inf by the tape. 2-D tensors are [rows, cols] row-major.

ValueId add(Tape& t, ValueId a, ValueId b);                  // same shape
ValueId sub(Tape& t, ValueId a, ValueId b);
ValueId mul(Tape& t, ValueId a, ValueId b);                  // elementwise
ValueId scale(Tape& t, ValueId a, double s);
ValueId add_rowvec(Tape& t, ValueId m, ValueId r);           // [n,c] + [1,c]
ValueId matmul(Tape& t, ValueId a, ValueId b);               // [m,k] x [k,n]
ValueId tanh(Tape& t, ValueId a);
ValueId sigmoid(Tape& t, ValueId a);
ValueId relu(Tape& t, ValueId a);
ValueId softmax(Tape& t, ValueId a);                         // rowwise, last axis
ValueId log_softmax(Tape& t, ValueId a);                     // rowwise, last axis
ValueId reshape(Tape& t, ValueId a, std::vector<int64_t> shape);
ValueId concat_cols(Tape& t, ValueId a, ValueId b);          // [r,c1] ++ [r,c2]
ValueId slice_cols(Tape& t, ValueId a, int64_t c0, int64_t c1);
ValueId select_row(Tape& t, ValueId m, int64_t row);         // -> [1,c]; embedding lookup
ValueId concat_rows(Tape& t, const std::vector<ValueId>& rows);  // n x [1,c] -> [n,c]
ValueId sum_all(Tape& t, ValueId a);                         // -> scalar

/// 2-D convolution over [C,H,W] with same padding, stride 1. Weight is
/// [OC,IC,KH,KW], bias [OC]. Backed by im2col + GEMM.
ValueId conv2d(Tape& t, ValueId x, ValueId w, ValueId b, int kh, int kw);

/// Non-overlapping max pooling by (ph, pw); dims must divide.
ValueId maxpool2d(Tape& t, ValueId x, int ph, int pw);

/// [C,H,W] -> [W, C*H]: one feature row per image column, left to right.
ValueId columns_to_frames(Tape& t, ValueId x);

/// Standard 4-gate LSTM cell. x [1,I], h/c [1,H], w [I+H,4H] with gate
/// order (input, forget, cell, output), b [4H]. Returns (h', c').
std::pair<ValueId, ValueId> lstm_cell(Tape& t, ValueId x, ValueId h, ValueId c, ValueId w,
                                      ValueId b);

/// Sum over rows of cross-entropy between logits [n,V] and target ids.
ValueId cross_entropy_sum(Tape& t, ValueId logits, const std::vector<int>& targets);

}  // namespace ops
}  // namespace strlab
