#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "strlab/tape.hpp"

namespace strlab {

/// Builds a scalar loss graph from bound parameters.
using ScalarGraphFn = std::function<ValueId(Tape&, const std::map<std::string, ValueId>&)>;

struct GradCheckOptions {
  double eps = 1e-5;
  /// Cap on elements checked per parameter tensor (seeded subsample when a
  /// tensor is larger); default checks everything.
  int64_t max_elements_per_param = std::numeric_limits<int64_t>::max();
  uint64_t sample_seed = 0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int64_t worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  int64_t elements_checked = 0;

  bool passed(double tol) const { return max_rel_err < tol; }
};

/// Central finite differences against the tape gradient. For each checked
/// element: rel_err = |g_ad - g_fd| / max(|g_ad|, |g_fd|, 1e-8).
GradCheckReport gradient_check(const ScalarGraphFn& f, ParamStore& params,
                               const GradCheckOptions& opts = {});

}  // namespace strlab
