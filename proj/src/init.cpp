#include "strlab/init.hpp"

#include <cmath>

#include "strlab/errors.hpp"
#include "strlab/rng.hpp"

namespace strlab {

Tensor kaiming_init(const std::vector<int64_t>& shape, int64_t fan_in, uint64_t seed) {
  if (fan_in <= 0) throw Error("kaiming_init: fan_in must be positive");
  double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  Tensor t(shape);
  Rng rng(seed);
  for (int64_t i = 0; i < t.size(); ++i) t[i] = std * rng.next_normal();
  return t;
}

Tensor normal_init(const std::vector<int64_t>& shape, double mean, double variance,
                   uint64_t seed) {
  if (variance < 0.0) throw Error("normal_init: negative variance");
  double std = std::sqrt(variance);
  Tensor t(shape);
  Rng rng(seed);
  for (int64_t i = 0; i < t.size(); ++i) t[i] = mean + std * rng.next_normal();
  return t;
}

}  // namespace strlab
