#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "crosspath/model/network.h"
#include "crosspath/windowing/windowing.h"

namespace crosspath::model {

struct EpochRecord {
  int epoch = 0;             // 1-based
  double train_loss = 0.0;   // mean of minibatch losses, normalized space
  double train_rmse = 0.0;   // meters, over the epoch's training predictions
  double val_loss = 0.0;     // NaN without a validation set
  double val_rmse = 0.0;     // meters; NaN without a validation set
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // epoch whose parameters were retained
};

// Called after every epoch; used for progress reporting.
using EpochCallback = std::function<void(const EpochRecord&)>;

// Minibatch Adam training with seeded shuffling. With a validation set the
// parameters of the lowest-validation-loss epoch are restored at the end;
// without one the final epoch is kept. Throws TrainingDivergedError naming
// the epoch on a non-finite loss or gradient.
TrainingHistory train(Network& net, const windowing::SampleSet& train_set,
                      const windowing::SampleSet* val_set, std::uint64_t seed,
                      const EpochCallback& on_epoch = {});

struct Metrics {
  double loss = 0.0;  // dual loss over the whole set, normalized space
  double rmse = 0.0;  // meters
  std::size_t samples = 0;
};

// Inference-mode metrics over a full sample set.
Metrics evaluate(Network& net, const windowing::SampleSet& set);

// Inference-mode main-head outputs, [N x 2*T_out], normalized.
Tensor predict_normalized(Network& net, const windowing::SampleSet& set);

// Root mean square over valid entries (x and y pooled) of plain values.
double rmse(std::span<const double> pred, std::span<const double> target,
            std::span<const double> mask);

// Same over interleaved normalized (x, y) columns, scaled to meters by the
// coordinate ranges. Throws EmptyTargetError on an all-zero mask.
double rmse_meters(const Tensor& pred, const Tensor& target, const Tensor& mask,
                   double range_x, double range_y);

// Per-row RMSE in meters; rows with no valid entries yield NaN.
std::vector<double> row_rmse_meters(const Tensor& pred, const Tensor& target, const Tensor& mask,
                                    double range_x, double range_y);

// Inference batch size used by evaluate/predict.
inline constexpr std::size_t kEvalBatch = 512;

}  // namespace crosspath::model
