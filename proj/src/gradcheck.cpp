#include "strlab/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "strlab/errors.hpp"
#include "strlab/rng.hpp"

namespace strlab {

namespace {

double eval_loss(const ScalarGraphFn& f, const ParamStore& params) {
  Tape tape;
  auto ids = params.bind(tape);
  ValueId loss = f(tape, ids);
  double v = tape.value(loss).item();
  if (!std::isfinite(v)) throw NumericError("gradient_check: non-finite loss");
  return v;
}

}  // namespace

GradCheckReport gradient_check(const ScalarGraphFn& f, ParamStore& params,
                               const GradCheckOptions& opts) {
  if (opts.eps <= 0.0) throw Error("gradient_check: eps must be positive");

  // Analytic route.
  std::map<std::string, Tensor> analytic;
  double base_loss = 0.0;
  {
    Tape tape;
    auto ids = params.bind(tape);
    ValueId loss = f(tape, ids);
    base_loss = tape.value(loss).item();
    tape.backward(loss);
    analytic = tape.param_grads();
  }

  // Central differences cannot resolve gradients below the rounding noise
  // of the loss itself: (up - down) is quantized to ~ulp(|loss|), so the
  // finite-difference value carries absolute noise ~ulp(|loss|)/(2 eps).
  // Elements whose gradients sit at that scale would "fail" from double
  // rounding alone; the denominator floor absorbs them.
  double fd_noise_floor = 2e4 * std::numeric_limits<double>::epsilon() *
                          std::max(1.0, std::fabs(base_loss)) / (2.0 * opts.eps);

  GradCheckReport report;
  Rng rng(derive_seed(opts.sample_seed, 0x9c));
  for (auto& [name, w] : params.tensors()) {
    const Tensor& g_ad = analytic.at(name);

    std::vector<int64_t> indices;
    if (w.size() <= opts.max_elements_per_param) {
      indices.resize(static_cast<size_t>(w.size()));
      for (int64_t i = 0; i < w.size(); ++i) indices[static_cast<size_t>(i)] = i;
    } else {
      for (int64_t k = 0; k < opts.max_elements_per_param; ++k)
        indices.push_back(static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(w.size()))));
      std::sort(indices.begin(), indices.end());
      indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    }

    for (int64_t i : indices) {
      double saved = w[i];
      w[i] = saved + opts.eps;
      double up = eval_loss(f, params);
      w[i] = saved - opts.eps;
      double down = eval_loss(f, params);
      w[i] = saved;

      double g_fd = (up - down) / (2.0 * opts.eps);
      double denom = std::max({std::fabs(g_ad[i]), std::fabs(g_fd), 1e-8, fd_noise_floor});
      double rel = std::fabs(g_ad[i] - g_fd) / denom;
      ++report.elements_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = name;
        report.worst_index = i;
        report.worst_analytic = g_ad[i];
        report.worst_numeric = g_fd;
      }
    }
  }
  return report;
}

}  // namespace strlab
