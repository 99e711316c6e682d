#include "crosspath/model/network.h"

#include <algorithm>

#include "crosspath/common/errors.h"
#include "crosspath/numkit/init.h"

namespace crosspath::model {

Batch make_batch(const windowing::SampleSet& set, std::span<const std::size_t> indices) {
  Batch b;
  b.size = indices.size();
  if (b.size == 0) throw DimensionError("empty batch");
  const std::size_t f = set.features;
  const std::size_t width = 2 * set.output_steps;
  const std::size_t ctx = data::kContextSize;
  std::size_t steps = 0;
  for (auto i : indices) steps = std::max(steps, set.samples.at(i).input.rows());
  b.inputs.assign(steps, Tensor::matrix(b.size, f));
  b.step_masks.assign(steps, {});
  b.context = Tensor::matrix(b.size, ctx);
  b.target = Tensor::matrix(b.size, width);
  b.mask = Tensor::matrix(b.size, width);
  for (std::size_t r = 0; r < b.size; ++r) {
    const auto& s = set.samples[indices[r]];
    const std::size_t len = s.input.rows();
    const std::size_t pad = steps - len;
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t c = 0; c < f; ++c) b.inputs[pad + t](r, c) = s.input(t, c);
    }
    for (std::size_t t = 0; t < pad; ++t) {
      if (b.step_masks[t].empty()) b.step_masks[t].assign(b.size, 1.0);
      b.step_masks[t][r] = 0.0;
    }
    std::copy(s.context.begin(), s.context.end(), b.context.storage().begin() + r * ctx);
    for (std::size_t k = 0; k < set.output_steps; ++k) {
      b.target(r, 2 * k) = s.target(k, 0);
      b.target(r, 2 * k + 1) = s.target(k, 1);
      b.mask(r, 2 * k) = s.mask[k];
      b.mask(r, 2 * k + 1) = s.mask[k];
    }
  }
  return b;
}

Parameter& Network::add(std::string name, Tensor value, bool trainable) {
  params_.emplace_back(std::move(name), std::move(value), trainable);
  return params_.back();
}

Network::Network(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng = make_rng(derive_seed(seed, "init"));
  const std::size_t h = static_cast<std::size_t>(config_.nodes);
  const std::size_t out = config_.output_width();
  params_.reserve(64);

  std::size_t in = config_.input_features;
  for (int l = 0; l < config_.lstm_layers; ++l) {
    const std::string p = "lstm" + std::to_string(l) + "/";
    lstm_kernel_.push_back(params_.size());
    add(p + "kernel", numkit::fan_in_uniform(in, 4 * h, h, rng));
    lstm_recurrent_.push_back(params_.size());
    add(p + "recurrent", numkit::fan_in_uniform(h, 4 * h, h, rng));
    Tensor bias({4 * h});
    for (std::size_t j = h; j < 2 * h; ++j) bias[j] = 1.0;  // forget gate
    lstm_bias_.push_back(params_.size());
    add(p + "bias", std::move(bias));
    in = h;
  }

  if (config_.is_aux()) {
    aux_kernel_ = params_.size();
    add("aux_head/kernel", numkit::glorot_uniform(h, out, rng));
    aux_bias_ = params_.size();
    add("aux_head/bias", Tensor({out}));

    std::size_t merged = h;
    if (config_.use_context) {
      merged += config_.context_size;
      bn_gamma_ = params_.size();
      add("batchnorm/gamma", Tensor({merged}, 1.0));
      bn_beta_ = params_.size();
      add("batchnorm/beta", Tensor({merged}));
      bn_mean_ = params_.size();
      add("batchnorm/running_mean", Tensor({merged}), false);
      bn_var_ = params_.size();
      add("batchnorm/running_var", Tensor({merged}, 1.0), false);
    }
    in = merged;
    for (int k = 0; k < config_.dense_layers; ++k) {
      const std::string p = "dense" + std::to_string(k) + "/";
      dense_kernel_.push_back(params_.size());
      add(p + "kernel", numkit::glorot_uniform(in, h, rng));
      dense_bias_.push_back(params_.size());
      add(p + "bias", Tensor({h}));
      in = h;
    }
  }
  out_kernel_ = params_.size();
  add("output/kernel", numkit::glorot_uniform(in, out, rng));
  out_bias_ = params_.size();
  add("output/bias", Tensor({out}));
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<Parameter*> Network::trainable() {
  std::vector<Parameter*> out;
  for (auto& p : params_) {
    if (p.trainable) out.push_back(&p);
  }
  return out;
}

std::size_t Network::index(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw StateError("no parameter named " + name);
}

const Parameter& Network::parameter(const std::string& name) const {
  return params_[index(name)];
}

std::size_t Network::parameter_count(bool trainable_only) const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p.trainable || !trainable_only) n += p.value.size();
  }
  return n;
}

Var Network::encode(Tape& tape, const Batch& batch, Mode mode, Rng& rng) {
  if (batch.inputs.empty()) throw DimensionError("batch has no input steps");
  if (batch.inputs.front().cols() != config_.input_features) {
    throw DimensionError("batch has " + std::to_string(batch.inputs.front().cols()) +
                         " input features, model expects " +
                         std::to_string(config_.input_features));
  }
  const std::size_t h = static_cast<std::size_t>(config_.nodes);
  const std::size_t steps = batch.inputs.size();
  std::vector<Var> seq;
  seq.reserve(steps);
  for (const auto& x : batch.inputs) seq.push_back(tape.constant(x));
  Var h_last;
  for (int l = 0; l < config_.lstm_layers; ++l) {
    const Var kernel = tape.parameter(params_[lstm_kernel_[l]]);
    const Var recurrent = tape.parameter(params_[lstm_recurrent_[l]]);
    const Var bias = tape.parameter(params_[lstm_bias_[l]]);
    numkit::LstmState state{tape.constant(Tensor::matrix(batch.size, h)),
                            tape.constant(Tensor::matrix(batch.size, h))};
    const bool last_layer = l + 1 == config_.lstm_layers;
    for (std::size_t t = 0; t < steps; ++t) {
      state = numkit::lstm_cell(seq[t], state.h, state.c, kernel, recurrent, bias,
                                batch.step_masks[t]);
      seq[t] = last_layer ? state.h : numkit::dropout(state.h, config_.dropout, mode, rng);
    }
    h_last = state.h;
  }
  return h_last;
}

Outputs Network::head(Tape& tape, const Var& h_last, const Tensor& context, Mode mode,
                      Rng& rng) {
  using numkit::Activation;
  Outputs out;
  if (!config_.is_aux()) {
    const Var x = numkit::dropout(h_last, config_.dropout, mode, rng);
    out.main = numkit::dense(x, tape.parameter(params_[out_kernel_]),
                             tape.parameter(params_[out_bias_]), Activation::kSigmoid);
    return out;
  }
  out.secondary = numkit::dense(h_last, tape.parameter(params_[aux_kernel_]),
                                tape.parameter(params_[aux_bias_]), Activation::kSigmoid);
  Var x = h_last;
  if (config_.use_context) {
    if (context.cols() != config_.context_size || context.rows() != h_last.value().rows()) {
      throw DimensionError("context " + context.shape_string() + " does not fit batch of " +
                           std::to_string(h_last.value().rows()) + " rows");
    }
    const Var parts[] = {h_last, tape.constant(context)};
    x = numkit::concat_cols(parts);
    x = numkit::batchnorm(x, tape.parameter(params_[bn_gamma_]),
                          tape.parameter(params_[bn_beta_]), params_[bn_mean_],
                          params_[bn_var_], mode);
  }
  x = numkit::dropout(x, config_.dropout, mode, rng);
  for (std::size_t k = 0; k < dense_kernel_.size(); ++k) {
    x = numkit::dense(x, tape.parameter(params_[dense_kernel_[k]]),
                      tape.parameter(params_[dense_bias_[k]]), Activation::kRelu);
  }
  out.main = numkit::dense(x, tape.parameter(params_[out_kernel_]),
                           tape.parameter(params_[out_bias_]), Activation::kSigmoid);
  return out;
}

Outputs Network::forward(Tape& tape, const Batch& batch, Mode mode, Rng& rng) {
  const Var h = encode(tape, batch, mode, rng);
  return head(tape, h, batch.context, mode, rng);
}

std::vector<Tensor> Network::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

void Network::restore(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) throw StateError("snapshot size mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!values[i].same_shape(params_[i].value)) throw StateError("snapshot shape mismatch");
    params_[i].value = values[i];
  }
}

std::vector<numkit::NamedTensor> Network::export_tensors() const {
  std::vector<numkit::NamedTensor> out;
  for (const auto& p : params_) out.push_back({p.name, p.value});
  return out;
}

void Network::import_tensors(const numkit::Container& c) {
  for (auto& p : params_) {
    const Tensor& t = c.get(p.name);
    if (!t.same_shape(p.value)) {
      throw SchemaError(p.name, "shape " + t.shape_string() + " does not match model " +
                                    p.value.shape_string());
    }
    if (!t.all_finite()) throw SchemaError(p.name, "non-finite weights");
    p.value = t;
  }
}

Var dual_loss(const Outputs& out, const Tensor& target, const Tensor& mask, double lambda) {
  Tape& tape = *out.main.tape();
  const Var t = tape.constant(target);
  const Var m = tape.constant(mask);
  Var loss = numkit::masked_mse(out.main, t, m);
  if (out.secondary.valid() && lambda != 0.0) {
    loss = numkit::add(loss, numkit::scale(numkit::masked_mse(out.secondary, t, m), lambda));
  }
  return loss;
}

}  // namespace crosspath::model
