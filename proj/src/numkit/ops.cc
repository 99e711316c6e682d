#include "crosspath/numkit/ops.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>

#include <Eigen/Core>

#include "crosspath/common/errors.h"

namespace crosspath::numkit {
namespace {

constexpr double kSigmoidClamp = 36.0;
constexpr double kTanhClamp = 18.0;

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw GraphError("detached variable used in graph");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  Tape& t = tape_of(a);
  if (b.tape() != &t) {
    throw GraphError(b.valid() ? "operands live on different tapes"
                               : "detached variable used in graph");
  }
  return t;
}

void require_matrix(const Tensor& t, std::string_view what) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(what) + " must be rank 2, got " +
                         t.shape_string());
  }
}

void require_same(const Tensor& a, const Tensor& b, std::string_view what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape " + a.shape_string() +
                         " vs " + b.shape_string());
  }
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  MutMap(c, m, n).noalias() += ConstMap(a, m, k) * ConstMap(b, k, n);
}

// C[m x k] += A[m x n] * B[k x n]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
  MutMap(c, m, k).noalias() += ConstMap(a, m, n) * ConstMap(b, k, n).transpose();
}

// C[k x n] += A[m x k]^T * B[m x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  MutMap(c, k, n).noalias() += ConstMap(a, m, k).transpose() * ConstMap(b, m, n);
}

template <typename Fwd, typename Deriv>
Var unary(const Var& a, Fwd fwd, Deriv deriv_from_output) {
  Tape& tape = tape_of(a);
  const Tensor& av = tape.value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  return tape.record(
      std::move(out), {a},
      [deriv_from_output](const Tensor& y, const Tensor& gy,
                          std::span<const Tensor* const> in,
                          std::span<Tensor* const> gin) {
        if (!gin[0]) return;
        Tensor& ga = *gin[0];
        const Tensor& x = *in[0];
        for (std::size_t i = 0; i < gy.size(); ++i) {
          ga[i] += gy[i] * deriv_from_output(x[i], y[i]);
        }
      });
}

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
  }
  return "linear";
}

double sigmoid(double z) {
  z = std::clamp(z, -kSigmoidClamp, kSigmoidClamp);
  return 1.0 / (1.0 + std::exp(-z));
}

double tanh_bounded(double z) {
  return std::tanh(std::clamp(z, -kTanhClamp, kTanhClamp));
}

Var matmul(const Var& a, const Var& b) {
  Tape& tape = tape_of(a, b);
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_matrix(av, "matmul lhs");
  require_matrix(bv, "matmul rhs");
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) {
    throw DimensionError("matmul: " + av.shape_string() + " x " +
                         bv.shape_string());
  }
  Tensor out = Tensor::matrix(m, n);
  gemm_nn(av.data().data(), bv.data().data(), out.data().data(), m, k, n);
  return tape.record(std::move(out), {a, b},
                     [m, k, n](const Tensor&, const Tensor& gy,
                               std::span<const Tensor* const> in,
                               std::span<Tensor* const> gin) {
                       if (gin[0]) {
                         gemm_nt(gy.data().data(), in[1]->data().data(),
                                 gin[0]->data().data(), m, n, k);
                       }
                       if (gin[1]) {
                         gemm_tn(in[0]->data().data(), gy.data().data(),
                                 gin[1]->data().data(), m, k, n);
                       }
                     });
}

Var add(const Var& a, const Var& b) {
  Tape& tape = tape_of(a, b);
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same(av, bv, "add");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape.record(std::move(out), {a, b},
                     [](const Tensor&, const Tensor& gy,
                        std::span<const Tensor* const>,
                        std::span<Tensor* const> gin) {
                       for (Tensor* g : gin) {
                         if (!g) continue;
                         for (std::size_t i = 0; i < gy.size(); ++i) (*g)[i] += gy[i];
                       }
                     });
}

Var sub(const Var& a, const Var& b) {
  Tape& tape = tape_of(a, b);
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same(av, bv, "sub");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return tape.record(std::move(out), {a, b},
                     [](const Tensor&, const Tensor& gy,
                        std::span<const Tensor* const>,
                        std::span<Tensor* const> gin) {
                       if (gin[0]) {
                         for (std::size_t i = 0; i < gy.size(); ++i) (*gin[0])[i] += gy[i];
                       }
                       if (gin[1]) {
                         for (std::size_t i = 0; i < gy.size(); ++i) (*gin[1])[i] -= gy[i];
                       }
                     });
}

Var mul(const Var& a, const Var& b) {
  Tape& tape = tape_of(a, b);
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same(av, bv, "mul");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return tape.record(std::move(out), {a, b},
                     [](const Tensor&, const Tensor& gy,
                        std::span<const Tensor* const> in,
                        std::span<Tensor* const> gin) {
                       if (gin[0]) {
                         for (std::size_t i = 0; i < gy.size(); ++i)
                           (*gin[0])[i] += gy[i] * (*in[1])[i];
                       }
                       if (gin[1]) {
                         for (std::size_t i = 0; i < gy.size(); ++i)
                           (*gin[1])[i] += gy[i] * (*in[0])[i];
                       }
                     });
}

Var add_row(const Var& a, const Var& row) {
  Tape& tape = tape_of(a, row);
  const Tensor& av = tape.value(a);
  const Tensor& rv = tape.value(row);
  const std::size_t m = av.rows(), n = av.cols();
  if (rv.size() != n) {
    throw DimensionError("add_row: " + av.shape_string() + " + " +
                         rv.shape_string());
  }
  Tensor out = av;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += rv[j];
  return tape.record(std::move(out), {a, row},
                     [m, n](const Tensor&, const Tensor& gy,
                            std::span<const Tensor* const>,
                            std::span<Tensor* const> gin) {
                       if (gin[0]) {
                         for (std::size_t i = 0; i < gy.size(); ++i) (*gin[0])[i] += gy[i];
                       }
                       if (gin[1]) {
                         Tensor& g = *gin[1];
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t j = 0; j < n; ++j) g[j] += gy[i * n + j];
                       }
                     });
}

Var scale(const Var& a, double factor) {
  return unary(
      a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var relu(const Var& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& a) {
  return unary(
      a, [](double x) { return sigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& a) {
  return unary(
      a, [](double x) { return tanh_bounded(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var activate(const Var& a, Activation act) {
  switch (act) {
    case Activation::kLinear: return a;
    case Activation::kRelu: return relu(a);
    case Activation::kSigmoid: return sigmoid(a);
    case Activation::kTanh: return tanh(a);
  }
  return a;
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  Tape& tape = tape_of(parts[0]);
  std::vector<std::size_t> widths;
  std::vector<Var> inputs(parts.begin(), parts.end());
  const std::size_t m = tape.value(parts[0]).rows();
  std::size_t total = 0;
  for (const Var& p : parts) {
    tape_of(parts[0], p);
    const Tensor& v = tape.value(p);
    if (v.rows() != m) {
      throw DimensionError("concat_cols: row mismatch " + v.shape_string());
    }
    widths.push_back(v.cols());
    total += v.cols();
  }
  Tensor out = Tensor::matrix(m, total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = tape.value(parts[k]);
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(&v.data()[i * widths[k]], widths[k], &out.data()[i * total + offset]);
    offset += widths[k];
  }
  return tape.record(std::move(out), std::move(inputs),
                     [widths, m, total](const Tensor&, const Tensor& gy,
                                        std::span<const Tensor* const>,
                                        std::span<Tensor* const> gin) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         if (gin[k]) {
                           Tensor& g = *gin[k];
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t j = 0; j < widths[k]; ++j)
                               g[i * widths[k] + j] += gy[i * total + off + j];
                         }
                         off += widths[k];
                       }
                     });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  Tape& tape = tape_of(a);
  const Tensor& av = tape.value(a);
  const std::size_t m = av.rows(), n = av.cols();
  if (begin >= end || end > n) {
    throw DimensionError("slice_cols [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") of " + av.shape_string());
  }
  const std::size_t w = end - begin;
  Tensor out = Tensor::matrix(m, w);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(&av.data()[i * n + begin], w, &out.data()[i * w]);
  return tape.record(std::move(out), {a},
                     [m, n, w, begin](const Tensor&, const Tensor& gy,
                                      std::span<const Tensor* const>,
                                      std::span<Tensor* const> gin) {
                       if (!gin[0]) return;
                       Tensor& g = *gin[0];
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t j = 0; j < w; ++j)
                           g[i * n + begin + j] += gy[i * w + j];
                     });
}

Var sum(const Var& a) {
  Tape& tape = tape_of(a);
  double s = 0.0;
  for (double v : tape.value(a).data()) s += v;
  return tape.record(Tensor::scalar(s), {a},
                     [](const Tensor&, const Tensor& gy,
                        std::span<const Tensor* const>,
                        std::span<Tensor* const> gin) {
                       if (!gin[0]) return;
                       for (double& g : gin[0]->data()) g += gy[0];
                     });
}

Var mean(const Var& a) {
  const std::size_t n = tape_of(a).value(a).size();
  if (n == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var dense(const Var& x, const Var& kernel, const Var& bias, Activation act) {
  return activate(add_row(matmul(x, kernel), bias), act);
}

LstmState lstm_cell(const Var& x, const Var& h_prev, const Var& c_prev,
                    const Var& kernel, const Var& recurrent, const Var& bias,
                    std::span<const double> row_mask) {
  Tape& tape = tape_of(x, h_prev);
  tape_of(x, c_prev);
  tape_of(x, kernel);
  tape_of(x, recurrent);
  tape_of(x, bias);
  const Tensor& xv = tape.value(x);
  const Tensor& hv = tape.value(h_prev);
  const Tensor& cv = tape.value(c_prev);
  const Tensor& wx = tape.value(kernel);
  const Tensor& wh = tape.value(recurrent);
  const Tensor& bv = tape.value(bias);
  require_matrix(xv, "lstm input");
  require_matrix(hv, "lstm hidden");
  require_matrix(wx, "lstm kernel");
  require_matrix(wh, "lstm recurrent kernel");
  const std::size_t batch = xv.rows(), feat = xv.cols(), hidden = hv.cols();
  const std::size_t g4 = 4 * hidden;
  if (hv.rows() != batch || !cv.same_shape(hv) || wx.rows() != feat ||
      wx.cols() != g4 || wh.rows() != hidden || wh.cols() != g4 ||
      bv.size() != g4) {
    throw DimensionError("lstm_cell: x " + xv.shape_string() + ", h " +
                         hv.shape_string() + ", c " + cv.shape_string() +
                         ", kernel " + wx.shape_string() + ", recurrent " +
                         wh.shape_string() + ", bias " + bv.shape_string());
  }
  if (!row_mask.empty() && row_mask.size() != batch) {
    throw DimensionError("lstm_cell: row mask length " +
                         std::to_string(row_mask.size()) + " vs batch " +
                         std::to_string(batch));
  }

  struct Cache {
    Tensor gates;   // activated i, f, g, o blocks
    Tensor tanh_c;  // tanh(c_new)
    std::vector<double> mask;
  };
  auto cache = std::make_shared<Cache>();
  cache->gates = Tensor::matrix(batch, g4);
  cache->tanh_c = Tensor::matrix(batch, hidden);
  cache->mask.assign(row_mask.begin(), row_mask.end());
  if (cache->mask.empty()) cache->mask.assign(batch, 1.0);

  Tensor& z = cache->gates;
  for (std::size_t r = 0; r < batch; ++r)
    std::copy_n(bv.data().data(), g4, &z.data()[r * g4]);
  gemm_nn(xv.data().data(), wx.data().data(), z.data().data(), batch, feat, g4);
  gemm_nn(hv.data().data(), wh.data().data(), z.data().data(), batch, hidden, g4);

  Tensor out = Tensor::matrix(batch, 2 * hidden);
  for (std::size_t r = 0; r < batch; ++r) {
    double* zr = &z.data()[r * g4];
    double* orow = &out.data()[r * 2 * hidden];
    const bool active = cache->mask[r] != 0.0;
    for (std::size_t j = 0; j < hidden; ++j) {
      const double ig = sigmoid(zr[j]);
      const double fg = sigmoid(zr[hidden + j]);
      const double gg = tanh_bounded(zr[2 * hidden + j]);
      const double og = sigmoid(zr[3 * hidden + j]);
      zr[j] = ig;
      zr[hidden + j] = fg;
      zr[2 * hidden + j] = gg;
      zr[3 * hidden + j] = og;
      const double c_new = fg * cv(r, j) + ig * gg;
      const double tc = tanh_bounded(c_new);
      cache->tanh_c(r, j) = tc;
      if (active) {
        orow[j] = og * tc;
        orow[hidden + j] = c_new;
      } else {
        orow[j] = hv(r, j);
        orow[hidden + j] = cv(r, j);
      }
    }
  }

  Var packed = tape.record(
      std::move(out), {x, h_prev, c_prev, kernel, recurrent, bias},
      [cache, batch, feat, hidden, g4](const Tensor&, const Tensor& gy,
                                       std::span<const Tensor* const> in,
                                       std::span<Tensor* const> gin) {
        const Tensor& c_prev_v = *in[2];
        Tensor dz = Tensor::matrix(batch, g4);
        for (std::size_t r = 0; r < batch; ++r) {
          const double* gr = &gy.data()[r * 2 * hidden];
          if (cache->mask[r] == 0.0) {
            if (gin[1])
              for (std::size_t j = 0; j < hidden; ++j) (*gin[1])(r, j) += gr[j];
            if (gin[2])
              for (std::size_t j = 0; j < hidden; ++j)
                (*gin[2])(r, j) += gr[hidden + j];
            continue;
          }
          const double* a = &cache->gates.data()[r * g4];
          double* dzr = &dz.data()[r * g4];
          for (std::size_t j = 0; j < hidden; ++j) {
            const double ig = a[j], fg = a[hidden + j], gg = a[2 * hidden + j],
                         og = a[3 * hidden + j];
            const double tc = cache->tanh_c(r, j);
            const double dh = gr[j];
            const double dc = gr[hidden + j] + dh * og * (1.0 - tc * tc);
            dzr[j] = dc * gg * ig * (1.0 - ig);
            dzr[hidden + j] = dc * c_prev_v(r, j) * fg * (1.0 - fg);
            dzr[2 * hidden + j] = dc * ig * (1.0 - gg * gg);
            dzr[3 * hidden + j] = dh * tc * og * (1.0 - og);
            if (gin[2]) (*gin[2])(r, j) += dc * fg;
          }
        }
        if (gin[0])
          gemm_nt(dz.data().data(), in[3]->data().data(), gin[0]->data().data(),
                  batch, g4, feat);
        if (gin[1])
          gemm_nt(dz.data().data(), in[4]->data().data(), gin[1]->data().data(),
                  batch, g4, hidden);
        if (gin[3])
          gemm_tn(in[0]->data().data(), dz.data().data(), gin[3]->data().data(),
                  batch, feat, g4);
        if (gin[4])
          gemm_tn(in[1]->data().data(), dz.data().data(), gin[4]->data().data(),
                  batch, hidden, g4);
        if (gin[5]) {
          Tensor& gb = *gin[5];
          for (std::size_t r = 0; r < batch; ++r)
            for (std::size_t j = 0; j < g4; ++j) gb[j] += dz(r, j);
        }
      });
  return {slice_cols(packed, 0, hidden), slice_cols(packed, hidden, 2 * hidden)};
}

Var batchnorm(const Var& x, const Var& gamma, const Var& beta,
              Parameter& running_mean, Parameter& running_var, Mode mode,
              BatchNormConfig cfg) {
  Tape& tape = tape_of(x, gamma);
  tape_of(x, beta);
  const Tensor& xv = tape.value(x);
  const Tensor& gv = tape.value(gamma);
  const Tensor& bv = tape.value(beta);
  require_matrix(xv, "batchnorm input");
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (gv.size() != cols || bv.size() != cols ||
      running_mean.value.size() != cols || running_var.value.size() != cols) {
    throw DimensionError("batchnorm: input " + xv.shape_string() +
                         " vs scale " + gv.shape_string());
  }
  const bool train = mode == Mode::kTrain;
  if (train && rows < 2) {
    throw DegenerateBatchError("batchnorm in train mode needs >= 2 rows, got " +
                               std::to_string(rows));
  }

  auto xhat = std::make_shared<Tensor>(Tensor::matrix(rows, cols));
  auto inv_std = std::make_shared<std::vector<double>>(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double mu, var;
    if (train) {
      mu = 0.0;
      for (std::size_t i = 0; i < rows; ++i) mu += xv(i, j);
      mu /= static_cast<double>(rows);
      var = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        const double d = xv(i, j) - mu;
        var += d * d;
      }
      var /= static_cast<double>(rows);
      running_mean.value[j] =
          cfg.momentum * running_mean.value[j] + (1.0 - cfg.momentum) * mu;
      running_var.value[j] =
          cfg.momentum * running_var.value[j] + (1.0 - cfg.momentum) * var;
    } else {
      mu = running_mean.value[j];
      var = running_var.value[j];
    }
    const double is = 1.0 / std::sqrt(var + cfg.epsilon);
    (*inv_std)[j] = is;
    for (std::size_t i = 0; i < rows; ++i) (*xhat)(i, j) = (xv(i, j) - mu) * is;
  }
  Tensor out = Tensor::matrix(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out(i, j) = gv[j] * (*xhat)(i, j) + bv[j];

  return tape.record(
      std::move(out), {x, gamma, beta},
      [xhat, inv_std, rows, cols, train](const Tensor&, const Tensor& gy,
                                         std::span<const Tensor* const> in,
                                         std::span<Tensor* const> gin) {
        const Tensor& g = *in[1];
        for (std::size_t j = 0; j < cols; ++j) {
          double sum_dy = 0.0, sum_dy_xhat = 0.0;
          for (std::size_t i = 0; i < rows; ++i) {
            sum_dy += gy(i, j);
            sum_dy_xhat += gy(i, j) * (*xhat)(i, j);
          }
          if (gin[1]) (*gin[1])[j] += sum_dy_xhat;
          if (gin[2]) (*gin[2])[j] += sum_dy;
          if (!gin[0]) continue;
          const double is = (*inv_std)[j];
          if (train) {
            const double n = static_cast<double>(rows);
            for (std::size_t i = 0; i < rows; ++i) {
              (*gin[0])(i, j) += g[j] * is / n *
                                 (n * gy(i, j) - sum_dy - (*xhat)(i, j) * sum_dy_xhat);
            }
          } else {
            for (std::size_t i = 0; i < rows; ++i)
              (*gin[0])(i, j) += gy(i, j) * g[j] * is;
          }
        }
      });
}

Var dropout(const Var& x, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(rate));
  }
  Tape& tape = tape_of(x);
  if (mode == Mode::kInfer || rate == 0.0) return x;
  const Tensor& xv = tape.value(x);
  auto mask = std::make_shared<std::vector<double>>(xv.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    (*mask)[i] = unit(rng) < rate ? 0.0 : keep_scale;
    out[i] = xv[i] * (*mask)[i];
  }
  return tape.record(std::move(out), {x},
                     [mask](const Tensor&, const Tensor& gy,
                            std::span<const Tensor* const>,
                            std::span<Tensor* const> gin) {
                       if (!gin[0]) return;
                       for (std::size_t i = 0; i < gy.size(); ++i)
                         (*gin[0])[i] += gy[i] * (*mask)[i];
                     });
}

Var masked_mse(const Var& pred, const Var& target, const Var& mask) {
  Tape& tape = tape_of(pred, target);
  tape_of(pred, mask);
  const Tensor& pv = tape.value(pred);
  const Tensor& tv = tape.value(target);
  const Tensor& mv = tape.value(mask);
  require_same(pv, tv, "masked_mse target");
  require_same(pv, mv, "masked_mse mask");
  double count = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (mv[i] == 0.0) continue;
    const double d = pv[i] - tv[i];
    acc += d * d;
    count += 1.0;
  }
  if (count == 0.0) throw EmptyTargetError("masked_mse: mask selects no entries");
  return tape.record(Tensor::scalar(acc / count), {pred, target, mask},
                     [count](const Tensor&, const Tensor& gy,
                             std::span<const Tensor* const> in,
                             std::span<Tensor* const> gin) {
                       if (!gin[0]) return;
                       const Tensor& p = *in[0];
                       const Tensor& t = *in[1];
                       const Tensor& m = *in[2];
                       const double k = 2.0 * gy[0] / count;
                       for (std::size_t i = 0; i < p.size(); ++i) {
                         if (m[i] != 0.0) (*gin[0])[i] += k * (p[i] - t[i]);
                       }
                     });
}

}  // namespace crosspath::numkit
