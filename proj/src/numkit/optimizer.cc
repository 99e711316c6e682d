#include "crosspath/numkit/optimizer.h"

#include <cmath>

#include "crosspath/common/errors.h"

namespace crosspath::numkit {

void Adam::step(std::span<Parameter* const> params) {
  if (m_.empty()) {
    for (const Parameter* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }
  if (m_.size() != params.size()) {
    throw DimensionError("optimizer bound to " + std::to_string(m_.size()) +
                         " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Parameter& p = *params[k];
    if (!p.grad.same_shape(p.value) || !m_[k].same_shape(p.value)) {
      throw DimensionError("optimizer: shape mismatch for " + p.name);
    }
    if (p.trainable && !p.grad.all_finite()) {
      throw TrainingDivergedError("non-finite gradient for " + p.name);
    }
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    if (!p.trainable) continue;
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / corr1;
      const double v_hat = v[i] / corr2;
      p.value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

double clip_global_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    if (!p->trainable) continue;
    for (double g : p->grad.data()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (Parameter* p : params) {
      if (!p->trainable) continue;
      for (double& g : p->grad.data()) g *= factor;
    }
  }
  return norm;
}

}  // namespace crosspath::numkit
