#pragma once

#include <cstdint>
#include <vector>

#include "strlab/tensor.hpp"

namespace strlab {

enum class InitScheme { kKaiming, kNormal };

/// Kaiming (He) fan-in initialization: N(0, 2/fan_in). fan_in is the
/// product of all dims except the first for rank >= 2 weights (i.e. in
/// features for [in,out] matrices stored transposed, receptive field for
/// conv weights); pass it explicitly.
Tensor kaiming_init(const std::vector<int64_t>& shape, int64_t fan_in, uint64_t seed);

/// N(mean, variance). The paper's "variance 0.02" is taken literally
/// (sigma = sqrt(0.02)).
Tensor normal_init(const std::vector<int64_t>& shape, double mean, double variance,
                   uint64_t seed);

}  // namespace strlab
