#include "crosspath/model/train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crosspath/common/errors.h"
#include "crosspath/numkit/optimizer.h"

namespace crosspath::model {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SquaredError {
  double sum_norm = 0.0;     // normalized-space squared error, main head
  double sum_sec = 0.0;      // normalized-space squared error, secondary head
  double sum_meters = 0.0;
  double count = 0.0;

  void add(const Tensor& pred, const Tensor* secondary, const Tensor& target,
           const Tensor& mask, double rx, double ry) {
    const std::size_t cols = target.cols();
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (mask[i] == 0.0) continue;
      const double e = pred[i] - target[i];
      const double scale = (i % cols) % 2 == 0 ? rx : ry;
      sum_norm += e * e;
      sum_meters += e * e * scale * scale;
      if (secondary) {
        const double s = (*secondary)[i] - target[i];
        sum_sec += s * s;
      }
      count += 1.0;
    }
  }
};

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// Runs the inference pass over `set` in chunks, handing each chunk's outputs
// to `sink`.
template <typename Sink>
void infer(Network& net, const windowing::SampleSet& set, Sink&& sink) {
  Rng unused = make_rng(0);
  const auto all = iota(set.size());
  for (std::size_t begin = 0; begin < all.size(); begin += kEvalBatch) {
    const std::size_t end = std::min(all.size(), begin + kEvalBatch);
    const std::span<const std::size_t> idx(all.data() + begin, end - begin);
    const Batch batch = make_batch(set, idx);
    Tape tape;
    const Outputs out = net.forward(tape, batch, Mode::kInfer, unused);
    sink(begin, batch, out);
  }
}

void check_compatible(const Network& net, const windowing::SampleSet& set) {
  const auto& c = net.config();
  if (set.features != c.input_features) {
    throw DimensionError("sample set has " + std::to_string(set.features) +
                         " features, model expects " + std::to_string(c.input_features));
  }
  if (set.output_steps != c.output_steps) {
    throw DimensionError("sample set has " + std::to_string(set.output_steps) +
                         " target steps, model expects " + std::to_string(c.output_steps));
  }
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> target,
            std::span<const double> mask) {
  if (pred.size() != target.size() || mask.size() != target.size()) {
    throw DimensionError("rmse operands differ in size");
  }
  double sum = 0.0, count = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask[i] == 0.0) continue;
    const double e = pred[i] - target[i];
    sum += e * e;
    count += 1.0;
  }
  if (count == 0.0) throw EmptyTargetError("rmse over an empty mask");
  return std::sqrt(sum / count);
}

double rmse_meters(const Tensor& pred, const Tensor& target, const Tensor& mask, double range_x,
                   double range_y) {
  if (!pred.same_shape(target) || !mask.same_shape(target)) {
    throw DimensionError("rmse operands differ in shape");
  }
  SquaredError acc;
  acc.add(pred, nullptr, target, mask, range_x, range_y);
  if (acc.count == 0.0) throw EmptyTargetError("rmse over an empty mask");
  return std::sqrt(acc.sum_meters / acc.count);
}

std::vector<double> row_rmse_meters(const Tensor& pred, const Tensor& target, const Tensor& mask,
                                    double range_x, double range_y) {
  if (!pred.same_shape(target) || !mask.same_shape(target)) {
    throw DimensionError("rmse operands differ in shape");
  }
  const std::size_t rows = target.rows(), cols = target.cols();
  std::vector<double> out(rows, kNaN);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0, count = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (mask[i] == 0.0) continue;
      const double e = (pred[i] - target[i]) * (c % 2 == 0 ? range_x : range_y);
      sum += e * e;
      count += 1.0;
    }
    if (count > 0.0) out[r] = std::sqrt(sum / count);
  }
  return out;
}

Metrics evaluate(Network& net, const windowing::SampleSet& set) {
  check_compatible(net, set);
  if (set.size() == 0) throw EmptyTargetError("evaluation on an empty sample set");
  const double rx = set.norm.range(0), ry = set.norm.range(1);
  SquaredError acc;
  infer(net, set, [&](std::size_t, const Batch& b, const Outputs& out) {
    const Tensor* sec = out.secondary.valid() ? &out.secondary.value() : nullptr;
    acc.add(out.main.value(), sec, b.target, b.mask, rx, ry);
  });
  if (acc.count == 0.0) throw EmptyTargetError("evaluation set has no valid targets");
  Metrics m;
  m.samples = set.size();
  const double lambda = net.config().is_aux() ? net.config().secondary_loss_weight : 0.0;
  m.loss = (acc.sum_norm + lambda * acc.sum_sec) / acc.count;
  m.rmse = std::sqrt(acc.sum_meters / acc.count);
  return m;
}

Tensor predict_normalized(Network& net, const windowing::SampleSet& set) {
  check_compatible(net, set);
  const std::size_t width = net.config().output_width();
  Tensor out = Tensor::matrix(set.size(), width);
  infer(net, set, [&](std::size_t begin, const Batch&, const Outputs& o) {
    const auto& v = o.main.value().storage();
    std::copy(v.begin(), v.end(), out.storage().begin() + begin * width);
  });
  return out;
}

TrainingHistory train(Network& net, const windowing::SampleSet& train_set,
                      const windowing::SampleSet* val_set, std::uint64_t seed,
                      const EpochCallback& on_epoch) {
  check_compatible(net, train_set);
  if (train_set.size() == 0) throw EmptyTargetError("training on an empty sample set");
  if (val_set) check_compatible(net, *val_set);
  const auto& cfg = net.config();
  const double lambda = cfg.is_aux() ? cfg.secondary_loss_weight : 0.0;
  const double rx = train_set.norm.range(0), ry = train_set.norm.range(1);
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  Rng shuffle_rng = make_rng(derive_seed(seed, "shuffle"));
  Rng dropout_rng = make_rng(derive_seed(seed, "dropout"));
  numkit::Adam adam(numkit::AdamConfig{cfg.learning_rate});
  auto params = net.parameters();
  auto trainable = net.trainable();

  TrainingHistory history;
  std::vector<Tensor> best;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order = iota(train_set.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    SquaredError acc;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      std::size_t end = std::min(order.size(), begin + batch_size);
      // A trailing single-sample batch cannot be batch-normalized.
      if (end - begin < 2 && cfg.is_aux() && cfg.use_context) {
        if (begin == 0) throw DegenerateBatchError("need at least 2 training samples");
        continue;
      }
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const Batch batch = make_batch(train_set, idx);
      for (auto* p : params) p->zero_grad();
      Tape tape;
      const Outputs out = net.forward(tape, batch, Mode::kTrain, dropout_rng);
      const Var loss = dual_loss(out, batch.target, batch.mask, lambda);
      const double lv = loss.value().item();
      if (!std::isfinite(lv)) {
        throw TrainingDivergedError("non-finite training loss at epoch " + std::to_string(epoch),
                                    epoch);
      }
      tape.backward(loss);
      try {
        if (cfg.clip_norm > 0.0) numkit::clip_global_norm(trainable, cfg.clip_norm);
        adam.step(trainable);
      } catch (const TrainingDivergedError& e) {
        throw TrainingDivergedError(std::string(e.what()) + " at epoch " + std::to_string(epoch),
                                    epoch);
      }
      loss_sum += lv;
      ++batches;
      acc.add(out.main.value(), nullptr, batch.target, batch.mask, rx, ry);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.train_rmse = acc.count > 0.0 ? std::sqrt(acc.sum_meters / acc.count) : kNaN;
    rec.val_loss = kNaN;
    rec.val_rmse = kNaN;
    if (val_set && val_set->size() > 0) {
      const Metrics m = evaluate(net, *val_set);
      rec.val_loss = m.loss;
      rec.val_rmse = m.rmse;
      if (!std::isfinite(m.loss)) {
        throw TrainingDivergedError("non-finite validation loss at epoch " +
                                        std::to_string(epoch), epoch);
      }
      if (m.loss < best_val) {
        best_val = m.loss;
        best = net.snapshot();
        history.best_epoch = epoch;
      }
    } else {
      history.best_epoch = epoch;
    }
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  if (!best.empty()) net.restore(best);
  return history;
}

}  // namespace crosspath::model
