#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "crosspath/data/context.h"
#include "crosspath/explain/shapley.h"
#include "crosspath/model/config.h"
#include "crosspath/model/network.h"
#include "crosspath/windowing/windowing.h"

namespace crosspath::explain {

// A player owns a set of encoded context dimensions.
struct Player {
  std::string name;
  std::vector<std::size_t> dims;
  int variable = -1;  // data::ContextVariable for whole-variable players
};

// The six scenario variables, or (encoded_dims) one player per encoded
// dimension that carries information.
std::vector<Player> context_players(bool encoded_dims = false);

// Context of an instance with the dimensions of players outside `s` taken
// from `other`.
data::ContextVector compose(const data::ContextVector& own, const data::ContextVector& other,
                            const std::vector<Player>& players, Coalition s);

// Background-marginalized value of any per-context error:
// v(S) = mean over b of error(compose(own, b, S)). Throws ConfigError on an
// empty background.
using ErrorFunction = std::function<double(const data::ContextVector&)>;
double marginal_value(const ErrorFunction& error, const data::ContextVector& own,
                      const std::vector<data::ContextVector>& background,
                      const std::vector<Player>& players, Coalition s);

struct Explanation {
  std::string instance_id;
  std::vector<double> phi;  // per player, meters of RMSE
  double v_full = 0.0;
  double v_empty = 0.0;
};

// v(S) for one crossing instance: every window of the instance is predicted
// with the context dimensions of players outside S taken from each background
// context in turn; v(S) is the mean over the background of the instance's
// RMSE in meters. LSTM states are computed once and only the heads rerun.
class ModelErrorGame {
 public:
  // `windows` holds the instance's windows (one instance id). Throws
  // ConfigError on an empty background and DimensionError on shape mismatch.
  ModelErrorGame(model::Network& net, const windowing::SampleSet& windows,
                 std::vector<data::ContextVector> background, std::vector<Player> players);

  std::size_t players() const { return players_.size(); }
  double value(Coalition s) const;
  Explanation explain(int jobs = 1) const;

 private:
  model::Network& net_;
  const windowing::SampleSet& windows_;
  std::vector<data::ContextVector> background_;
  std::vector<Player> players_;
  numkit::Tensor h_last_;  // [W x nodes]
  numkit::Tensor target_, mask_;
  data::ContextVector own_{};
};

struct ExplainOptions {
  std::size_t background_size = 100;
  std::uint64_t seed = 0;
  bool encoded_dims = false;
  int jobs = 1;
};

// Seeded subsample (without replacement) of background sample contexts.
std::vector<data::ContextVector> sample_background(const windowing::SampleSet& background,
                                                   std::size_t count, std::uint64_t seed);

struct CorpusExplanation {
  std::vector<Player> players;
  std::vector<Explanation> explanations;  // in order of first appearance
  std::vector<data::ScenarioContext> contexts;  // per explanation
};

// Windows `instances` with the model's spec and normalization and explains
// each instance against a background drawn from `background`.
CorpusExplanation explain_corpus(model::Network& net, const windowing::WindowingSpec& spec,
                                 const windowing::NormalizationParams& norm,
                                 const std::vector<data::CrossingInstance>& instances,
                                 const std::vector<data::CrossingInstance>& background,
                                 const ExplainOptions& options);

// Exact retraining variant for tiny configurations: one model per coalition,
// trained with context dimensions outside the coalition zeroed. v(S) is the
// instance's RMSE under the coalition's model.
CorpusExplanation explain_by_retraining(const model::ModelConfig& config,
                                        const windowing::SampleSet& train_set,
                                        const windowing::SampleSet& eval_set,
                                        const std::vector<data::CrossingInstance>& instances,
                                        std::uint64_t seed, bool encoded_dims = false);

// Level of a scenario variable as written in the summary CSV.
std::string player_value(const Player& player, const data::ScenarioContext& c);

// Long format for beeswarm plots: instance_id,feature,feature_value,phi.
void write_summary_csv(std::ostream& out, const CorpusExplanation& e);
// Wide format: instance_id,v_empty,v_full,<one phi column per player>.
void write_explanations_csv(std::ostream& out, const CorpusExplanation& e);

}  // namespace crosspath::explain
