#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crosspath/model/config.h"
#include "crosspath/numkit/container.h"
#include "crosspath/numkit/ops.h"
#include "crosspath/numkit/tape.h"
#include "crosspath/windowing/windowing.h"

namespace crosspath::model {

using numkit::Mode;
using numkit::Parameter;
using numkit::Tape;
using numkit::Tensor;
using numkit::Var;

// A minibatch in time-major layout. Sequences are left-padded to the batch
// maximum; step_masks[t] is empty when every row is active at step t.
struct Batch {
  std::size_t size = 0;
  std::vector<Tensor> inputs;                  // steps x [B x F]
  std::vector<std::vector<double>> step_masks;  // steps x [B] or empty
  Tensor context;                              // [B x C]
  Tensor target;                               // [B x 2*T_out], (x0,y0,x1,y1,...)
  Tensor mask;                                 // [B x 2*T_out]
};

Batch make_batch(const windowing::SampleSet& set, std::span<const std::size_t> indices);

struct Outputs {
  Var main;       // [B x 2*T_out], sigmoid
  Var secondary;  // aux only
};

class Network {
 public:
  Network(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  std::vector<Parameter*> parameters();
  std::vector<Parameter*> trainable();
  const Parameter& parameter(const std::string& name) const;
  std::size_t parameter_count(bool trainable_only = true) const;

  // Final hidden state of the LSTM stack, [B x nodes].
  Var encode(Tape& tape, const Batch& batch, Mode mode, Rng& rng);
  // Heads on top of an encoded state. `context` is [B x C]; ignored by
  // vanilla models and when use_context is off.
  Outputs head(Tape& tape, const Var& h_last, const Tensor& context, Mode mode, Rng& rng);
  Outputs forward(Tape& tape, const Batch& batch, Mode mode, Rng& rng);

  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

  // Weight tensors only; the config travels in container metadata.
  std::vector<numkit::NamedTensor> export_tensors() const;
  void import_tensors(const numkit::Container& c);

 private:
  Parameter& add(std::string name, Tensor value, bool trainable = true);
  std::size_t index(const std::string& name) const;

  ModelConfig config_;
  std::vector<Parameter> params_;
  std::vector<std::size_t> lstm_kernel_, lstm_recurrent_, lstm_bias_;
  std::vector<std::size_t> dense_kernel_, dense_bias_;
  std::size_t aux_kernel_ = 0, aux_bias_ = 0;
  std::size_t bn_gamma_ = 0, bn_beta_ = 0, bn_mean_ = 0, bn_var_ = 0;
  std::size_t out_kernel_ = 0, out_bias_ = 0;
};

// Masked MSE of the main head plus lambda times that of the secondary head
// (vanilla: main only). Throws EmptyTargetError on an all-zero mask.
Var dual_loss(const Outputs& out, const Tensor& target, const Tensor& mask, double lambda);

}  // namespace crosspath::model
