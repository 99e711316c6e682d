#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crosspath/model/config.h"
#include "crosspath/model/network.h"
#include "crosspath/model/train.h"
#include "crosspath/windowing/splits.h"
#include "crosspath/windowing/windowing.h"

namespace crosspath::harness {

using data::Json;
using model::ModelConfig;
using model::ModelKind;

struct GridSpace {
  std::vector<int> batch_sizes{32, 64, 128};
  std::vector<double> dropouts{0.0, 0.2, 0.5};
  std::vector<int> nodes{10, 50, 100};
  std::vector<int> lstm_layers{1, 2, 3};
  std::vector<int> dense_layers{1, 2, 3};  // ignored for vanilla
  std::vector<std::string> data_types{"D_3", "D_5", "D_7", "T_1_1", "T_1_2", "T_2_1"};
  std::vector<windowing::Variant> variants{windowing::Variant::kXyod};

  // Throws ConfigError on an empty axis or an unknown data type.
  void validate() const;
  // Cartesian product in axis order (batch, dropout, nodes, lstm, dense),
  // each applied on top of `base`. Vanilla configs get dense_layers = 0.
  std::vector<ModelConfig> configs(const ModelConfig& base) const;

  friend bool operator==(const GridSpace&, const GridSpace&) = default;
};

Json to_json(const GridSpace& g);
GridSpace grid_from_json(const Json& j);

// Corpus plus its instance-level split. The test instances can be drawn
// exactly once per token; a second draw raises ProtocolError.
class Dataset {
 public:
  Dataset(std::vector<data::CrossingInstance> corpus, windowing::DatasetSplit split);
  static Dataset from_corpus(std::vector<data::CrossingInstance> corpus, std::uint64_t seed,
                             std::size_t folds = windowing::kDefaultFolds);

  const windowing::DatasetSplit& split() const { return split_; }
  std::size_t folds() const { return split_.folds.size(); }
  const std::vector<data::CrossingInstance>& pool() const { return pool_; }
  std::vector<data::CrossingInstance> fold_train(std::size_t fold) const;
  std::vector<data::CrossingInstance> fold_validation(std::size_t fold) const;

  std::vector<data::CrossingInstance> take_test(const std::string& token);
  bool test_taken(const std::string& token) const;

 private:
  std::vector<data::CrossingInstance> select(const std::vector<std::string>& ids) const;

  windowing::DatasetSplit split_;
  std::vector<data::CrossingInstance> pool_;
  std::vector<data::CrossingInstance> test_;
  std::vector<std::size_t> fold_of_;  // per pool instance
  mutable std::unique_ptr<std::mutex> mutex_;
  std::set<std::string> consumed_;
};

// Windowed pool of one data type. Normalization and the distance-based
// target length come from the pool only.
struct PreparedData {
  windowing::WindowingSpec spec;
  windowing::SampleSet pool;
  std::vector<std::size_t> fold_of;  // per pool sample
  std::size_t folds = 0;

  windowing::SampleSet fold_train(std::size_t fold) const;
  windowing::SampleSet fold_validation(std::size_t fold) const;
};

PreparedData prepare(const Dataset& dataset, const windowing::WindowingSpec& spec);

// Copies input width and output length from the data into the config.
ModelConfig fit_to_data(ModelConfig config, const windowing::SampleSet& set);

struct FoldResult {
  std::size_t fold = 0;
  model::TrainingHistory history;
  double train_loss = 0.0;  // at the retained epoch
  double train_rmse = 0.0;
  double val_loss = 0.0;
  double val_rmse = 0.0;
};

struct CvResult {
  ModelConfig config;
  std::size_t parameter_count = 0;
  std::vector<FoldResult> folds;
  double mean_val_loss = 0.0;
  double std_val_loss = 0.0;
  double mean_val_rmse = 0.0;
  double std_val_rmse = 0.0;
  double mean_train_loss = 0.0;
  double mean_train_rmse = 0.0;
};

// Model seeds per fold; shared across configs and kinds so comparisons are
// paired.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

FoldResult run_fold(const ModelConfig& config, const PreparedData& data, std::size_t fold,
                    std::uint64_t seed);
CvResult aggregate(const ModelConfig& config, std::size_t parameter_count,
                   std::vector<FoldResult> folds);

// One model per fold, each validated on its own fold. TrainingDivergedError
// is rethrown with the fold index in its message.
CvResult cross_validate(const ModelConfig& config, const PreparedData& data, std::uint64_t seed,
                        int jobs = 1);

struct ExperimentReport {
  ModelKind kind = ModelKind::kAux;
  windowing::WindowingSpec spec;
  std::uint64_t seed = 0;
  std::vector<CvResult> leaderboard;  // sorted, best first
  double wall_clock_s = 0.0;
  std::optional<double> test_rmse;

  const CvResult& best() const { return leaderboard.front(); }
  // Identifies the report to the test guard.
  std::string token() const;
};

// Selection order: mean validation loss, then parameter count, then key().
bool better(const CvResult& a, const CvResult& b);

// Every configuration of the space (for `base.kind`) cross-validated on the
// prepared data. Work is split over (config, fold) units.
ExperimentReport grid_search(const GridSpace& space, const ModelConfig& base,
                             const PreparedData& data, std::uint64_t seed, int jobs = 1);

struct FinalEvaluation {
  double test_rmse = 0.0;
  double test_loss = 0.0;
  std::size_t test_samples = 0;
  model::TrainingHistory history;
  std::unique_ptr<model::Network> network;
};

// Retrains the best configuration on the whole pool and evaluates it once on
// the test split. Stores the RMSE in the report.
FinalEvaluation final_eval(ExperimentReport& report, Dataset& dataset, const PreparedData& data,
                           std::uint64_t seed);

struct ComparisonRow {
  std::string data_type;
  double aux_rmse = 0.0;
  double vanilla_rmse = 0.0;
  double improvement_pct = 0.0;  // RMSE reduction of aux relative to vanilla
};

double relative_improvement_pct(double aux_rmse, double vanilla_rmse);

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<ExperimentReport> reports;  // aux and vanilla per data type
};

// Both kinds searched on the same splits and seeds, then evaluated on test.
// `stride_steps` applies to the time-based data types.
Comparison compare_aux_vanilla(Dataset& dataset, const GridSpace& space, const ModelConfig& base,
                               std::uint64_t seed, int jobs = 1, int stride_steps = 1);

// Outputs.
void write_leaderboard_csv(std::ostream& out, const ExperimentReport& r);
void write_history_csv(std::ostream& out, const model::TrainingHistory& h);
void write_comparison_csv(std::ostream& out, const Comparison& c);
Json to_json(const CvResult& r);
Json to_json(const ExperimentReport& r);

}  // namespace crosspath::harness
