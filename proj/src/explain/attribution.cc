#include "crosspath/explain/attribution.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>

#include "crosspath/common/errors.h"
#include "crosspath/common/parallel.h"
#include "crosspath/common/seeds.h"
#include "crosspath/model/train.h"

namespace crosspath::explain {
namespace {

using numkit::Tensor;

constexpr Coalition full_mask(std::size_t n) { return (Coalition{1} << n) - 1; }

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Pooled x/y RMSE in meters over rows [begin, end).
double block_rmse(const Tensor& pred, const Tensor& target, const Tensor& mask, std::size_t begin,
                  std::size_t end, std::size_t target_row0, double rx, double ry) {
  const std::size_t w = pred.cols();
  double se = 0.0, n = 0.0;
  for (std::size_t r = begin; r < end; ++r) {
    const std::size_t tr = target_row0 + (r - begin);
    for (std::size_t c = 0; c < w; ++c) {
      const double m = mask(tr, c);
      if (m == 0.0) continue;
      const double e = (pred(r, c) - target(tr, c)) * (c % 2 == 0 ? rx : ry);
      se += m * e * e;
      n += m;
    }
  }
  if (n == 0.0) throw EmptyTargetError("instance has no valid target steps");
  return std::sqrt(se / n);
}

// Incremental mean; exact when every value is equal, so games whose value
// does not depend on the background give exactly zero attributions.
double running_mean(double mean, double x, std::size_t index) {
  return mean + (x - mean) / static_cast<double>(index + 1);
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

windowing::SampleSet empty_like(const windowing::SampleSet& set) {
  windowing::SampleSet out = set;
  out.samples.clear();
  return out;
}

// Samples grouped by instance id, in order of first appearance.
std::vector<windowing::SampleSet> group_by_instance(const windowing::SampleSet& set) {
  std::vector<windowing::SampleSet> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& s : set.samples) {
    auto [it, fresh] = index.try_emplace(s.instance_id, groups.size());
    if (fresh) groups.push_back(empty_like(set));
    groups[it->second].samples.push_back(s);
  }
  return groups;
}

}  // namespace

std::vector<Player> context_players(bool encoded_dims) {
  using data::ContextVariable;
  std::vector<Player> out;
  for (std::size_t v = 0; v < data::kContextVariableCount; ++v) {
    const auto var = static_cast<ContextVariable>(v);
    const auto dims = data::context_dims(var);
    const std::string name = data::context_variable_name(var);
    if (!encoded_dims) {
      out.push_back({name, dims, static_cast<int>(v)});
      continue;
    }
    if (var == ContextVariable::kRoadType) {
      for (std::size_t k = 0; k < dims.size(); ++k) {
        out.push_back({name + ":" + std::string(data::to_string(data::kRoadTypes[k])), {dims[k]}, -1});
      }
    } else if (var == ContextVariable::kWeather) {
      out.push_back({name + ":snow", dims, -1});
    } else if (var == ContextVariable::kTimeOfDay) {
      out.push_back({name + ":night", dims, -1});
    } else {
      out.push_back({name, dims, -1});
    }
  }
  return out;
}

data::ContextVector compose(const data::ContextVector& own, const data::ContextVector& other,
                            const std::vector<Player>& players, Coalition s) {
  data::ContextVector out = own;
  for (std::size_t p = 0; p < players.size(); ++p) {
    if (s & (Coalition{1} << p)) continue;
    for (auto d : players[p].dims) out[d] = other[d];
  }
  return out;
}

double marginal_value(const ErrorFunction& error, const data::ContextVector& own,
                      const std::vector<data::ContextVector>& background,
                      const std::vector<Player>& players, Coalition s) {
  if (background.empty()) throw ConfigError("background set is empty");
  double mean = 0.0;
  for (std::size_t b = 0; b < background.size(); ++b) {
    mean = running_mean(mean, error(compose(own, background[b], players, s)), b);
  }
  return mean;
}

ModelErrorGame::ModelErrorGame(model::Network& net, const windowing::SampleSet& windows,
                               std::vector<data::ContextVector> background,
                               std::vector<Player> players)
    : net_(net), windows_(windows), background_(std::move(background)), players_(std::move(players)) {
  if (background_.empty()) throw ConfigError("background set is empty");
  if (windows_.samples.empty()) throw ConfigError("instance has no windows");
  if (players_.size() > kMaxPlayers) throw SizeError("too many players");
  const auto idx = iota(windows_.size());
  const auto batch = model::make_batch(windows_, idx);
  if (batch.inputs.front().cols() != net_.config().input_features ||
      batch.target.cols() != net_.config().output_width()) {
    throw DimensionError("windows do not match the network");
  }
  numkit::Tape tape;
  Rng rng = make_rng(0);
  h_last_ = net_.encode(tape, batch, numkit::Mode::kInfer, rng).value();
  target_ = batch.target;
  mask_ = batch.mask;
  own_ = windows_.samples.front().context;
}

double ModelErrorGame::value(Coalition s) const {
  const std::size_t w = windows_.size();
  const std::size_t nodes = h_last_.cols();
  const double rx = windows_.norm.range(0), ry = windows_.norm.range(1);
  const bool identity = s == full_mask(players_.size());
  const std::size_t copies = identity ? 1 : background_.size();

  Tensor h = Tensor::matrix(w * copies, nodes);
  Tensor ctx = Tensor::matrix(w * copies, data::kContextSize);
  for (std::size_t b = 0; b < copies; ++b) {
    const auto c = identity ? own_ : compose(own_, background_[b], players_, s);
    for (std::size_t r = 0; r < w; ++r) {
      const std::size_t row = b * w + r;
      std::copy_n(h_last_.storage().begin() + r * nodes, nodes, h.storage().begin() + row * nodes);
      std::copy(c.begin(), c.end(), ctx.storage().begin() + row * data::kContextSize);
    }
  }
  numkit::Tape tape;
  Rng rng = make_rng(0);
  const auto out = net_.head(tape, tape.constant(std::move(h)), ctx, numkit::Mode::kInfer, rng);
  const Tensor& pred = out.main.value();
  double mean = 0.0;
  for (std::size_t b = 0; b < copies; ++b) {
    mean = running_mean(mean, block_rmse(pred, target_, mask_, b * w, (b + 1) * w, 0, rx, ry), b);
  }
  return mean;
}

Explanation ModelErrorGame::explain(int jobs) const {
  const auto table = tabulate(players_.size(), [&](Coalition s) { return value(s); }, jobs);
  Explanation e;
  e.instance_id = windows_.samples.front().instance_id;
  e.phi = shapley_exact(players_.size(), table);
  e.v_full = table.back();
  e.v_empty = table.front();
  return e;
}

std::vector<data::ContextVector> sample_background(const windowing::SampleSet& background,
                                                   std::size_t count, std::uint64_t seed) {
  auto idx = iota(background.size());
  Rng rng = make_rng(derive_seed(seed, "background"));
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(count, idx.size()));
  std::vector<data::ContextVector> out;
  for (auto i : idx) out.push_back(background.samples[i].context);
  return out;
}

namespace {

std::map<std::string, data::ScenarioContext> contexts_by_id(
    const std::vector<data::CrossingInstance>& instances) {
  std::map<std::string, data::ScenarioContext> out;
  for (const auto& i : instances) out[i.id] = i.context;
  return out;
}

std::size_t target_steps_for(const windowing::WindowingSpec& spec, std::size_t output_steps) {
  return spec.mode == windowing::Mode::kDistanceBased ? output_steps : 0;
}

}  // namespace

CorpusExplanation explain_corpus(model::Network& net, const windowing::WindowingSpec& spec,
                                 const windowing::NormalizationParams& norm,
                                 const std::vector<data::CrossingInstance>& instances,
                                 const std::vector<data::CrossingInstance>& background,
                                 const ExplainOptions& options) {
  const std::size_t target = target_steps_for(spec, net.config().output_steps);
  const auto bg_set = windowing::build_samples(background, spec, norm, target);
  const auto bg = sample_background(bg_set, options.background_size, options.seed);
  if (bg.empty()) throw ConfigError("background set is empty");
  const auto groups = group_by_instance(windowing::build_samples(instances, spec, norm, target));
  const auto ctx = contexts_by_id(instances);

  CorpusExplanation out;
  out.players = context_players(options.encoded_dims);
  out.explanations.resize(groups.size());
  parallel_for(groups.size(), options.jobs, [&](std::size_t g) {
    out.explanations[g] = ModelErrorGame(net, groups[g], bg, out.players).explain();
  });
  for (const auto& e : out.explanations) out.contexts.push_back(ctx.at(e.instance_id));
  return out;
}

CorpusExplanation explain_by_retraining(const model::ModelConfig& config,
                                        const windowing::SampleSet& train_set,
                                        const windowing::SampleSet& eval_set,
                                        const std::vector<data::CrossingInstance>& instances,
                                        std::uint64_t seed, bool encoded_dims) {
  CorpusExplanation out;
  out.players = context_players(encoded_dims);
  const std::size_t n = out.players.size();
  const auto groups = group_by_instance(eval_set);
  const double rx = eval_set.norm.range(0), ry = eval_set.norm.range(1);
  model::ModelConfig cfg = config;
  cfg.input_features = train_set.features;
  cfg.output_steps = train_set.output_steps;

  auto masked = [&](windowing::SampleSet set, Coalition s) {
    for (auto& sample : set.samples) {
      for (std::size_t p = 0; p < n; ++p) {
        if (s & (Coalition{1} << p)) continue;
        for (auto d : out.players[p].dims) sample.context[d] = 0.0;
      }
    }
    return set;
  };

  // tables[g][S]
  std::vector<std::vector<double>> tables(groups.size(), std::vector<double>(std::size_t{1} << n));
  for (Coalition s = 0; s <= full_mask(n); ++s) {
    model::Network net(cfg, derive_seed(seed, "coalition", s));
    model::train(net, masked(train_set, s), nullptr, derive_seed(seed, "coalition/train", s));
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto set = masked(groups[g], s);
      const auto idx = iota(set.size());
      const auto batch = model::make_batch(set, idx);
      const Tensor pred = model::predict_normalized(net, set);
      tables[g][s] = block_rmse(pred, batch.target, batch.mask, 0, set.size(), 0, rx, ry);
    }
  }
  const auto ctx = contexts_by_id(instances);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Explanation e;
    e.instance_id = groups[g].samples.front().instance_id;
    e.phi = shapley_exact(n, tables[g]);
    e.v_full = tables[g].back();
    e.v_empty = tables[g].front();
    out.explanations.push_back(std::move(e));
    out.contexts.push_back(ctx.at(out.explanations.back().instance_id));
  }
  return out;
}

std::string player_value(const Player& player, const data::ScenarioContext& c) {
  using data::ContextVariable;
  if (player.variable < 0) {
    const auto enc = data::encode_context(c);
    return format_number(enc[player.dims.front()]);
  }
  switch (static_cast<ContextVariable>(player.variable)) {
    case ContextVariable::kRoadType: return std::string(data::to_string(c.road_type));
    case ContextVariable::kSpeedLimit: return format_number(c.speed_limit_kmh);
    case ContextVariable::kLaneWidth: return format_number(c.lane_width_m);
    case ContextVariable::kWeather: return std::string(data::to_string(c.weather));
    case ContextVariable::kTimeOfDay: return std::string(data::to_string(c.time_of_day));
    case ContextVariable::kArrivalRate: return format_number(c.arrival_rate_vph);
  }
  return "";
}

void write_summary_csv(std::ostream& out, const CorpusExplanation& e) {
  out << "instance_id,feature,feature_value,phi\n";
  for (std::size_t i = 0; i < e.explanations.size(); ++i) {
    const auto& x = e.explanations[i];
    for (std::size_t p = 0; p < e.players.size(); ++p) {
      out << x.instance_id << ',' << e.players[p].name << ','
          << player_value(e.players[p], e.contexts[i]) << ',' << format_number(x.phi[p]) << '\n';
    }
  }
}

void write_explanations_csv(std::ostream& out, const CorpusExplanation& e) {
  out << "instance_id,v_empty,v_full";
  for (const auto& p : e.players) out << ",phi_" << p.name;
  out << '\n';
  for (const auto& x : e.explanations) {
    out << x.instance_id << ',' << format_number(x.v_empty) << ',' << format_number(x.v_full);
    for (double v : x.phi) out << ',' << format_number(v);
    out << '\n';
  }
}

}  // namespace crosspath::explain
