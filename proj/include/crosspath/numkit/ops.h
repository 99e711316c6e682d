#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "crosspath/common/seeds.h"
#include "crosspath/numkit/tape.h"

namespace crosspath::numkit {

enum class Activation { kLinear, kRelu, kSigmoid, kTanh };
enum class Mode { kTrain, kInfer };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation a);

// Scalar activations shared by the tape ops and reference code. Sigmoid and
// tanh saturate before reaching their asymptotes so outputs stay strictly
// inside (0,1) and (-1,1).
double sigmoid(double z);
double tanh_bounded(double z);

// Row-major products: a [m x k] times b [k x n].
Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
// Adds a rank-1 `row` of length n to every row of a [m x n].
Var add_row(const Var& a, const Var& row);
Var scale(const Var& a, double factor);

Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var activate(const Var& a, Activation act);

Var concat_cols(std::span<const Var> parts);
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);

Var sum(const Var& a);
Var mean(const Var& a);

// activation(x * kernel + bias) with kernel laid out [in x out].
Var dense(const Var& x, const Var& kernel, const Var& bias, Activation act);

struct LstmState {
  Var h;
  Var c;
};

// One LSTM step over a batch. Kernel is [F x 4H], recurrent [H x 4H], bias
// [4H], gate blocks ordered (input, forget, candidate, output). Rows whose
// `row_mask` entry is 0 carry h_prev/c_prev through unchanged (left padding
// of variable-length sequences); an empty mask means every row is active.
LstmState lstm_cell(const Var& x, const Var& h_prev, const Var& c_prev,
                    const Var& kernel, const Var& recurrent, const Var& bias,
                    std::span<const double> row_mask = {});

struct BatchNormConfig {
  double epsilon = 1e-5;
  double momentum = 0.9;
};

// Per-column normalization of x [B x D]. Train mode uses batch statistics
// and updates the running ones in place; infer mode uses the running ones.
Var batchnorm(const Var& x, const Var& gamma, const Var& beta,
              Parameter& running_mean, Parameter& running_var, Mode mode,
              BatchNormConfig cfg = {});

// Inverted dropout; identity in infer mode or at rate 0.
Var dropout(const Var& x, double rate, Mode mode, Rng& rng);

// Mean of squared error over entries where mask != 0. Target and mask are
// treated as constants.
Var masked_mse(const Var& pred, const Var& target, const Var& mask);

}  // namespace crosspath::numkit
