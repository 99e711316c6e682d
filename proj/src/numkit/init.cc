#include "crosspath/numkit/init.h"

#include <cmath>
#include <random>

namespace crosspath::numkit {
namespace {

Tensor uniform(std::size_t rows, std::size_t cols, double limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform(fan_in, fan_out, limit, rng);
}

Tensor fan_in_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in,
                      Rng& rng) {
  return uniform(rows, cols, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

}  // namespace crosspath::numkit
