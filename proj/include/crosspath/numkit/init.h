#pragma once

#include <cstddef>

#include "crosspath/common/seeds.h"
#include "crosspath/numkit/tensor.h"

namespace crosspath::numkit {

// U(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) over the given shape.
Tensor fan_in_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in,
                      Rng& rng);

}  // namespace crosspath::numkit
