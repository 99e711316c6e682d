#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crosspath/numkit/tape.h"

namespace crosspath::numkit {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive moment estimation with bias correction. Moments are bound to
// parameters by position, so step() must always see the same list.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update from the parameters' current gradients. Non-trainable
  // entries are skipped. Throws TrainingDivergedError on non-finite grads.
  void step(std::span<Parameter* const> params);

  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

// Rescales gradients so their joint L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_global_norm(std::span<Parameter* const> params, double max_norm);

}  // namespace crosspath::numkit
