#include "strlab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/Core>

#include "strlab/errors.hpp"

namespace strlab {
namespace ops {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapCM = Eigen::Map<const MatRM>;

MapCM as_mat(const Tensor& t) {
  if (t.rank() != 2) throw NumericError("expected 2-D tensor, got " + t.shape_str());
  return MapCM(t.data(), t.dim(0), t.dim(1));
}

MapM as_mat(Tensor& t) {
  if (t.rank() != 2) throw NumericError("expected 2-D tensor, got " + t.shape_str());
  return MapM(t.data(), t.dim(0), t.dim(1));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw NumericError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                       b.shape_str());
}

}  // namespace

ValueId add(Tape& t, ValueId a, ValueId b) {
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  require_same_shape(va, vb, "add");
  Tensor out(va.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
  return t.record("add", std::move(out), {a, b}, [a, b](Tape& tp, ValueId o) {
    tp.accumulate(a, tp.grad(o));
    tp.accumulate(b, tp.grad(o));
  });
}

ValueId sub(Tape& t, ValueId a, ValueId b) {
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  require_same_shape(va, vb, "sub");
  Tensor out(va.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = va[i] - vb[i];
  return t.record("sub", std::move(out), {a, b}, [a, b](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    tp.accumulate(a, g);
    Tensor neg(g.shape());
    for (int64_t i = 0; i < g.size(); ++i) neg[i] = -g[i];
    tp.accumulate(b, neg);
  });
}

ValueId mul(Tape& t, ValueId a, ValueId b) {
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  require_same_shape(va, vb, "mul");
  Tensor out(va.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
  return t.record("mul", std::move(out), {a, b}, [a, b](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    const Tensor& va = tp.value(a);
    const Tensor& vb = tp.value(b);
    Tensor ga(g.shape()), gb(g.shape());
    for (int64_t i = 0; i < g.size(); ++i) {
      ga[i] = g[i] * vb[i];
      gb[i] = g[i] * va[i];
    }
    tp.accumulate(a, ga);
    tp.accumulate(b, gb);
  });
}

ValueId scale(Tape& t, ValueId a, double s) {
  const Tensor& va = t.value(a);
  Tensor out(va.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = va[i] * s;
  return t.record("scale", std::move(out), {a}, [a, s](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    Tensor ga(g.shape());
    for (int64_t i = 0; i < g.size(); ++i) ga[i] = g[i] * s;
    tp.accumulate(a, ga);
  });
}

ValueId add_rowvec(Tape& t, ValueId m, ValueId r) {
  const Tensor& vm = t.value(m);
  const Tensor& vr = t.value(r);
  if (vm.rank() != 2 || vr.rank() != 2 || vr.dim(0) != 1 || vr.dim(1) != vm.dim(1))
    throw NumericError("add_rowvec: want [n,c] + [1,c], got " + vm.shape_str() + " + " +
                       vr.shape_str());
  Tensor out(vm.shape());
  int64_t rows = vm.dim(0), cols = vm.dim(1);
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j) out.at(i, j) = vm.at(i, j) + vr[j];
  return t.record("add_rowvec", std::move(out), {m, r}, [m, r](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    tp.accumulate(m, g);
    Tensor gr({1, g.dim(1)});
    for (int64_t i = 0; i < g.dim(0); ++i)
      for (int64_t j = 0; j < g.dim(1); ++j) gr[j] += g.at(i, j);
    tp.accumulate(r, gr);
  });
}

ValueId matmul(Tape& t, ValueId a, ValueId b) {
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  if (va.rank() != 2 || vb.rank() != 2 || va.dim(1) != vb.dim(0))
    throw NumericError("matmul: incompatible " + va.shape_str() + " x " + vb.shape_str());
  Tensor out({va.dim(0), vb.dim(1)});
  as_mat(out).noalias() = as_mat(va) * as_mat(vb);
  return t.record("matmul", std::move(out), {a, b}, [a, b](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    const Tensor& va = tp.value(a);
    const Tensor& vb = tp.value(b);
    if (tp.needs_grad(a)) {
      Tensor ga(va.shape());
      as_mat(ga).noalias() = as_mat(g) * as_mat(vb).transpose();
      tp.accumulate(a, ga);
    }
    if (tp.needs_grad(b)) {
      Tensor gb(vb.shape());
      as_mat(gb).noalias() = as_mat(va).transpose() * as_mat(g);
      tp.accumulate(b, gb);
    }
  });
}

namespace {

template <typename Fwd, typename Dfn>
ValueId unary_ew(Tape& t, ValueId a, const char* name, Fwd f, Dfn dfn) {
  const Tensor& va = t.value(a);
  Tensor out(va.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = f(va[i]);
  // dfn maps (input, output) -> local derivative
  Tensor saved = out;
  return t.record(name, std::move(out), {a}, [a, saved, dfn](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    const Tensor& va = tp.value(a);
    Tensor ga(g.shape());
    for (int64_t i = 0; i < g.size(); ++i) ga[i] = g[i] * dfn(va[i], saved[i]);
    tp.accumulate(a, ga);
  });
}

}  // namespace

ValueId tanh(Tape& t, ValueId a) {
  return unary_ew(
      t, a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

ValueId sigmoid(Tape& t, ValueId a) {
  return unary_ew(
      t, a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

ValueId relu(Tape& t, ValueId a) {
  return unary_ew(
      t, a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

namespace {

Tensor softmax_value(const Tensor& v, bool log_domain) {
  if (v.rank() != 2) throw NumericError("softmax: expected 2-D tensor");
  Tensor out(v.shape());
  int64_t rows = v.dim(0), cols = v.dim(1);
  for (int64_t i = 0; i < rows; ++i) {
    double mx = v.at(i, 0);
    for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, v.at(i, j));
    double z = 0.0;
    for (int64_t j = 0; j < cols; ++j) z += std::exp(v.at(i, j) - mx);
    double logz = std::log(z) + mx;
    for (int64_t j = 0; j < cols; ++j) {
      double l = v.at(i, j) - logz;
      out.at(i, j) = log_domain ? l : std::exp(l);
    }
  }
  return out;
}

}  // namespace

ValueId softmax(Tape& t, ValueId a) {
  Tensor out = softmax_value(t.value(a), false);
  Tensor saved = out;
  return t.record("softmax", std::move(out), {a}, [a, saved](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    Tensor ga(g.shape());
    int64_t rows = g.dim(0), cols = g.dim(1);
    for (int64_t i = 0; i < rows; ++i) {
      double dot = 0.0;
      for (int64_t j = 0; j < cols; ++j) dot += g.at(i, j) * saved.at(i, j);
      for (int64_t j = 0; j < cols; ++j)
        ga.at(i, j) = saved.at(i, j) * (g.at(i, j) - dot);
    }
    tp.accumulate(a, ga);
  });
}

ValueId log_softmax(Tape& t, ValueId a) {
  Tensor out = softmax_value(t.value(a), true);
  Tensor saved = out;
  return t.record("log_softmax", std::move(out), {a}, [a, saved](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    Tensor ga(g.shape());
    int64_t rows = g.dim(0), cols = g.dim(1);
    for (int64_t i = 0; i < rows; ++i) {
      double gsum = 0.0;
      for (int64_t j = 0; j < cols; ++j) gsum += g.at(i, j);
      for (int64_t j = 0; j < cols; ++j)
        ga.at(i, j) = g.at(i, j) - std::exp(saved.at(i, j)) * gsum;
    }
    tp.accumulate(a, ga);
  });
}

ValueId reshape(Tape& t, ValueId a, std::vector<int64_t> shape) {
  const Tensor& va = t.value(a);
  Tensor out(shape, std::vector<double>(va.data(), va.data() + va.size()));
  std::vector<int64_t> orig = va.shape();
  return t.record("reshape", std::move(out), {a}, [a, orig](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    Tensor ga(orig, std::vector<double>(g.data(), g.data() + g.size()));
    tp.accumulate(a, ga);
  });
}

ValueId concat_cols(Tape& t, ValueId a, ValueId b) {
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  if (va.rank() != 2 || vb.rank() != 2 || va.dim(0) != vb.dim(0))
    throw NumericError("concat_cols: row mismatch");
  int64_t rows = va.dim(0), ca = va.dim(1), cb = vb.dim(1);
  Tensor out({rows, ca + cb});
  for (int64_t i = 0; i < rows; ++i) {
    for (int64_t j = 0; j < ca; ++j) out.at(i, j) = va.at(i, j);
    for (int64_t j = 0; j < cb; ++j) out.at(i, ca + j) = vb.at(i, j);
  }
  return t.record("concat_cols", std::move(out), {a, b}, [a, b, ca, cb](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    int64_t rows = g.dim(0);
    Tensor ga({rows, ca}), gb({rows, cb});
    for (int64_t i = 0; i < rows; ++i) {
      for (int64_t j = 0; j < ca; ++j) ga.at(i, j) = g.at(i, j);
      for (int64_t j = 0; j < cb; ++j) gb.at(i, j) = g.at(i, ca + j);
    }
    tp.accumulate(a, ga);
    tp.accumulate(b, gb);
  });
}

ValueId slice_cols(Tape& t, ValueId a, int64_t c0, int64_t c1) {
  const Tensor& va = t.value(a);
  if (va.rank() != 2 || c0 < 0 || c1 > va.dim(1) || c0 >= c1)
    throw NumericError("slice_cols: bad range");
  int64_t rows = va.dim(0);
  Tensor out({rows, c1 - c0});
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = c0; j < c1; ++j) out.at(i, j - c0) = va.at(i, j);
  return t.record("slice_cols", std::move(out), {a}, [a, c0](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    const Tensor& va = tp.value(a);
    Tensor ga(va.shape());
    for (int64_t i = 0; i < g.dim(0); ++i)
      for (int64_t j = 0; j < g.dim(1); ++j) ga.at(i, c0 + j) = g.at(i, j);
    tp.accumulate(a, ga);
  });
}

ValueId select_row(Tape& t, ValueId m, int64_t row) {
  const Tensor& vm = t.value(m);
  if (vm.rank() != 2 || row < 0 || row >= vm.dim(0)) throw NumericError("select_row: bad row");
  int64_t cols = vm.dim(1);
  Tensor out({1, cols});
  for (int64_t j = 0; j < cols; ++j) out[j] = vm.at(row, j);
  return t.record("select_row", std::move(out), {m}, [m, row](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    const Tensor& vm = tp.value(m);
    Tensor gm(vm.shape());
    for (int64_t j = 0; j < g.size(); ++j) gm.at(row, j) = g[j];
    tp.accumulate(m, gm);
  });
}

ValueId concat_rows(Tape& t, const std::vector<ValueId>& rows) {
  if (rows.empty()) throw NumericError("concat_rows: no rows");
  int64_t cols = t.value(rows[0]).dim(1);
  Tensor out({static_cast<int64_t>(rows.size()), cols});
  for (size_t i = 0; i < rows.size(); ++i) {
    const Tensor& r = t.value(rows[i]);
    if (r.rank() != 2 || r.dim(0) != 1 || r.dim(1) != cols)
      throw NumericError("concat_rows: rows must all be [1,c]");
    for (int64_t j = 0; j < cols; ++j) out.at(static_cast<int64_t>(i), j) = r[j];
  }
  std::vector<ValueId> ins = rows;
  return t.record("concat_rows", std::move(out), ins, [ins, cols](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    for (size_t i = 0; i < ins.size(); ++i) {
      Tensor gr({1, cols});
      for (int64_t j = 0; j < cols; ++j) gr[j] = g.at(static_cast<int64_t>(i), j);
      tp.accumulate(ins[i], gr);
    }
  });
}

ValueId sum_all(Tape& t, ValueId a) {
  const Tensor& va = t.value(a);
  double s = 0.0;
  for (int64_t i = 0; i < va.size(); ++i) s += va[i];
  return t.record("sum_all", Tensor::scalar(s), {a}, [a](Tape& tp, ValueId o) {
    double g = tp.grad(o)[0];
    const Tensor& va = tp.value(a);
    Tensor ga(va.shape());
    ga.fill(g);
    tp.accumulate(a, ga);
  });
}

// ---------------------------------------------------------------------------
// Convolution

namespace {

struct ConvDims {
  int64_t ic, h, w, oc, kh, kw, ph, pw;  // ph/pw: same-padding offsets
};

// Zero-padded im2col: cols[ic*kh*kw, h*w].
std::shared_ptr<Tensor> im2col(const Tensor& x, const ConvDims& d) {
  auto cols = std::make_shared<Tensor>(
      std::vector<int64_t>{d.ic * d.kh * d.kw, d.h * d.w});
  double* out = cols->data();
  int64_t patch = 0;
  for (int64_t c = 0; c < d.ic; ++c) {
    const double* plane = x.data() + c * d.h * d.w;
    for (int64_t dy = 0; dy < d.kh; ++dy) {
      for (int64_t dx = 0; dx < d.kw; ++dx, ++patch) {
        double* row = out + patch * d.h * d.w;
        for (int64_t y = 0; y < d.h; ++y) {
          int64_t sy = y + dy - d.ph;
          if (sy < 0 || sy >= d.h) {
            std::fill(row + y * d.w, row + (y + 1) * d.w, 0.0);
            continue;
          }
          const double* src = plane + sy * d.w;
          for (int64_t xq = 0; xq < d.w; ++xq) {
            int64_t sx = xq + dx - d.pw;
            row[y * d.w + xq] = (sx < 0 || sx >= d.w) ? 0.0 : src[sx];
          }
        }
      }
    }
  }
  return cols;
}

void col2im_accumulate(const Tensor& cols, const ConvDims& d, Tensor& dx) {
  const double* in = cols.data();
  int64_t patch = 0;
  for (int64_t c = 0; c < d.ic; ++c) {
    double* plane = dx.data() + c * d.h * d.w;
    for (int64_t dy = 0; dy < d.kh; ++dy) {
      for (int64_t dx_ = 0; dx_ < d.kw; ++dx_, ++patch) {
        const double* row = in + patch * d.h * d.w;
        for (int64_t y = 0; y < d.h; ++y) {
          int64_t sy = y + dy - d.ph;
          if (sy < 0 || sy >= d.h) continue;
          double* dst = plane + sy * d.w;
          for (int64_t xq = 0; xq < d.w; ++xq) {
            int64_t sx = xq + dx_ - d.pw;
            if (sx >= 0 && sx < d.w) dst[sx] += row[y * d.w + xq];
          }
        }
      }
    }
  }
}

}  // namespace

ValueId conv2d(Tape& t, ValueId x, ValueId w, ValueId b, int kh, int kw) {
  const Tensor& vx = t.value(x);
  const Tensor& vw = t.value(w);
  const Tensor& vb = t.value(b);
  if (vx.rank() != 3) throw NumericError("conv2d: input must be [C,H,W]");
  if (vw.rank() != 4 || vw.dim(1) != vx.dim(0) || vw.dim(2) != kh || vw.dim(3) != kw)
    throw NumericError("conv2d: weight shape mismatch " + vw.shape_str());
  if (vb.rank() != 1 || vb.dim(0) != vw.dim(0)) throw NumericError("conv2d: bias shape mismatch");

  ConvDims d{vx.dim(0), vx.dim(1), vx.dim(2), vw.dim(0),
             kh,        kw,        (kh - 1) / 2, (kw - 1) / 2};
  auto cols = im2col(vx, d);

  Tensor out({d.oc, d.h, d.w});
  {
    MapCM wm(vw.data(), d.oc, d.ic * d.kh * d.kw);
    MapCM cm(cols->data(), d.ic * d.kh * d.kw, d.h * d.w);
    MapM om(out.data(), d.oc, d.h * d.w);
    om.noalias() = wm * cm;
    for (int64_t c = 0; c < d.oc; ++c) om.row(c).array() += vb[c];
  }

  return t.record("conv2d", std::move(out), {x, w, b}, [x, w, b, d, cols](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    MapCM gm(g.data(), d.oc, d.h * d.w);
    if (tp.needs_grad(w)) {
      Tensor gw(tp.value(w).shape());
      MapM gwm(gw.data(), d.oc, d.ic * d.kh * d.kw);
      MapCM cm(cols->data(), d.ic * d.kh * d.kw, d.h * d.w);
      gwm.noalias() = gm * cm.transpose();
      tp.accumulate(w, gw);
    }
    if (tp.needs_grad(b)) {
      Tensor gb({d.oc});
      // Scalar loop: fixed summation order regardless of buffer placement.
      for (int64_t c = 0; c < d.oc; ++c) {
        double acc = 0.0;
        const double* row = g.data() + c * d.h * d.w;
        for (int64_t i = 0; i < d.h * d.w; ++i) acc += row[i];
        gb[c] = acc;
      }
      tp.accumulate(b, gb);
    }
    if (tp.needs_grad(x)) {
      Tensor dcols({d.ic * d.kh * d.kw, d.h * d.w});
      MapM dcm(dcols.data(), d.ic * d.kh * d.kw, d.h * d.w);
      MapCM wm(tp.value(w).data(), d.oc, d.ic * d.kh * d.kw);
      dcm.noalias() = wm.transpose() * gm;
      Tensor gx(tp.value(x).shape());
      col2im_accumulate(dcols, d, gx);
      tp.accumulate(x, gx);
    }
  });
}

ValueId maxpool2d(Tape& t, ValueId x, int ph, int pw) {
  const Tensor& vx = t.value(x);
  if (vx.rank() != 3) throw NumericError("maxpool2d: input must be [C,H,W]");
  int64_t c = vx.dim(0), h = vx.dim(1), w = vx.dim(2);
  if (h % ph != 0 || w % pw != 0)
    throw NumericError("maxpool2d: dims must divide pool size");
  int64_t oh = h / ph, ow = w / pw;
  Tensor out({c, oh, ow});
  auto argmax = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(c * oh * ow));
  for (int64_t ch = 0; ch < c; ++ch) {
    const double* plane = vx.data() + ch * h * w;
    for (int64_t y = 0; y < oh; ++y) {
      for (int64_t xq = 0; xq < ow; ++xq) {
        double best = -std::numeric_limits<double>::infinity();
        int64_t best_idx = 0;
        for (int64_t dy = 0; dy < ph; ++dy) {
          for (int64_t dx = 0; dx < pw; ++dx) {
            int64_t idx = (y * ph + dy) * w + (xq * pw + dx);
            if (plane[idx] > best) {
              best = plane[idx];
              best_idx = idx;
            }
          }
        }
        out[(ch * oh + y) * ow + xq] = best;
        (*argmax)[static_cast<size_t>((ch * oh + y) * ow + xq)] = ch * h * w + best_idx;
      }
    }
  }
  return t.record("maxpool2d", std::move(out), {x}, [x, argmax](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    Tensor gx(tp.value(x).shape());
    for (int64_t i = 0; i < g.size(); ++i)
      gx[(*argmax)[static_cast<size_t>(i)]] += g[i];
    tp.accumulate(x, gx);
  });
}

ValueId columns_to_frames(Tape& t, ValueId x) {
  const Tensor& vx = t.value(x);
  if (vx.rank() != 3) throw NumericError("columns_to_frames: input must be [C,H,W]");
  int64_t c = vx.dim(0), h = vx.dim(1), w = vx.dim(2);
  Tensor out({w, c * h});
  for (int64_t col = 0; col < w; ++col)
    for (int64_t ch = 0; ch < c; ++ch)
      for (int64_t y = 0; y < h; ++y)
        out.at(col, ch * h + y) = vx[(ch * h + y) * w + col];
  return t.record("columns_to_frames", std::move(out), {x}, [x, c, h, w](Tape& tp, ValueId o) {
    const Tensor& g = tp.grad(o);
    Tensor gx(tp.value(x).shape());
    for (int64_t col = 0; col < w; ++col)
      for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t y = 0; y < h; ++y)
          gx[(ch * h + y) * w + col] = g.at(col, ch * h + y);
    tp.accumulate(x, gx);
  });
}

std::pair<ValueId, ValueId> lstm_cell(Tape& t, ValueId x, ValueId h, ValueId c, ValueId w,
                                      ValueId b) {
  int64_t hidden = t.value(h).dim(1);
  ValueId xh = concat_cols(t, x, h);
  ValueId z = add_rowvec(t, matmul(t, xh, w), reshape(t, b, {1, t.value(b).size()}));
  ValueId gi = sigmoid(t, slice_cols(t, z, 0, hidden));
  ValueId gf = sigmoid(t, slice_cols(t, z, hidden, 2 * hidden));
  ValueId gg = tanh(t, slice_cols(t, z, 2 * hidden, 3 * hidden));
  ValueId go = sigmoid(t, slice_cols(t, z, 3 * hidden, 4 * hidden));
  ValueId c_next = add(t, mul(t, gf, c), mul(t, gi, gg));
  ValueId h_next = mul(t, go, tanh(t, c_next));
  return {h_next, c_next};
}

ValueId cross_entropy_sum(Tape& t, ValueId logits, const std::vector<int>& targets) {
  const Tensor& v = t.value(logits);
  if (v.rank() != 2 || v.dim(0) != static_cast<int64_t>(targets.size()))
    throw NumericError("cross_entropy_sum: logits/targets mismatch");
  int64_t rows = v.dim(0), cols = v.dim(1);
  Tensor probs = softmax_value(v, false);
  double loss = 0.0;
  for (int64_t i = 0; i < rows; ++i) {
    int tgt = targets[static_cast<size_t>(i)];
    if (tgt < 0 || tgt >= cols) throw NumericError("cross_entropy_sum: target out of range");
    loss -= std::log(std::max(probs.at(i, tgt), 1e-300));
  }
  Tensor saved = probs;
  std::vector<int> tgts = targets;
  return t.record("cross_entropy_sum", Tensor::scalar(loss), {logits},
                  [logits, saved, tgts](Tape& tp, ValueId o) {
                    double g = tp.grad(o)[0];
                    Tensor gl(saved.shape());
                    for (int64_t i = 0; i < saved.dim(0); ++i) {
                      for (int64_t j = 0; j < saved.dim(1); ++j)
                        gl.at(i, j) = g * saved.at(i, j);
                      gl.at(i, tgts[static_cast<size_t>(i)]) -= g;
                    }
                    tp.accumulate(logits, gl);
                  });
}

}  // namespace ops
}  // namespace strlab
