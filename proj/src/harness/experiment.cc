#include "crosspath/harness/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "crosspath/common/errors.h"
#include "crosspath/common/parallel.h"
#include "crosspath/common/seeds.h"

namespace crosspath::harness {
namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename T>
void require_axis(const std::vector<T>& axis, const char* name) {
  if (axis.empty()) throw ConfigError(std::string("grid axis '") + name + "' is empty");
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for a single value.
double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

windowing::SampleSet subset(const windowing::SampleSet& set, const std::vector<std::size_t>& fold_of,
                            std::size_t fold, bool in_fold) {
  windowing::SampleSet out;
  out.spec = set.spec;
  out.norm = set.norm;
  out.input_steps = set.input_steps;
  out.output_steps = set.output_steps;
  out.features = set.features;
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    if ((fold_of[i] == fold) == in_fold) out.samples.push_back(set.samples[i]);
  }
  return out;
}

}  // namespace

void GridSpace::validate() const {
  require_axis(batch_sizes, "batch_sizes");
  require_axis(dropouts, "dropouts");
  require_axis(nodes, "nodes");
  require_axis(lstm_layers, "lstm_layers");
  require_axis(dense_layers, "dense_layers");
  require_axis(data_types, "data_types");
  require_axis(variants, "variants");
  for (const auto& d : data_types) windowing::parse_data_type(d);
}

std::vector<ModelConfig> GridSpace::configs(const ModelConfig& base) const {
  validate();
  const bool aux = base.is_aux();
  const std::vector<int> dense = aux ? dense_layers : std::vector<int>{0};
  std::vector<ModelConfig> out;
  for (int b : batch_sizes) {
    for (double d : dropouts) {
      for (int n : nodes) {
        for (int l : lstm_layers) {
          for (int k : dense) {
            ModelConfig c = base;
            c.batch_size = b;
            c.dropout = d;
            c.nodes = n;
            c.lstm_layers = l;
            c.dense_layers = k;
            c.validate();
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

Json to_json(const GridSpace& g) {
  Json j;
  j["batch_sizes"] = g.batch_sizes;
  j["dropouts"] = g.dropouts;
  j["nodes"] = g.nodes;
  j["lstm_layers"] = g.lstm_layers;
  j["dense_layers"] = g.dense_layers;
  j["data_types"] = g.data_types;
  Json v = Json::array();
  for (auto x : g.variants) v.push_back(windowing::variant_name(x));
  j["variants"] = std::move(v);
  return j;
}

GridSpace grid_from_json(const Json& j) {
  GridSpace g;
  try {
    g.batch_sizes = j.value("batch_sizes", g.batch_sizes);
    g.dropouts = j.value("dropouts", g.dropouts);
    g.nodes = j.value("nodes", g.nodes);
    g.lstm_layers = j.value("lstm_layers", g.lstm_layers);
    g.dense_layers = j.value("dense_layers", g.dense_layers);
    g.data_types = j.value("data_types", g.data_types);
    if (j.contains("variants")) {
      g.variants.clear();
      for (const auto& v : j.at("variants")) g.variants.push_back(windowing::parse_variant(v.get<std::string>()));
    }
  } catch (const Json::exception& e) {
    throw SchemaError("grid", e.what());
  }
  g.validate();
  return g;
}

Dataset::Dataset(std::vector<data::CrossingInstance> corpus, windowing::DatasetSplit split)
    : split_(std::move(split)), mutex_(std::make_unique<std::mutex>()) {
  std::map<std::string, std::size_t> fold;
  for (std::size_t f = 0; f < split_.folds.size(); ++f) {
    for (const auto& id : split_.folds[f]) fold[id] = f;
  }
  const std::set<std::string> test(split_.test_ids.begin(), split_.test_ids.end());
  for (auto& inst : corpus) {
    if (test.count(inst.id)) {
      test_.push_back(std::move(inst));
    } else if (auto it = fold.find(inst.id); it != fold.end()) {
      fold_of_.push_back(it->second);
      pool_.push_back(std::move(inst));
    } else {
      throw SplitError("instance '" + inst.id + "' is not in the split");
    }
  }
  if (pool_.size() + test_.size() != fold.size() + test.size()) {
    throw SplitError("split names instances missing from the corpus");
  }
}

Dataset Dataset::from_corpus(std::vector<data::CrossingInstance> corpus, std::uint64_t seed,
                             std::size_t folds) {
  std::vector<std::string> ids;
  for (const auto& i : corpus) ids.push_back(i.id);
  auto split = windowing::make_splits(ids, seed, folds);
  return Dataset(std::move(corpus), std::move(split));
}

std::vector<data::CrossingInstance> Dataset::fold_train(std::size_t fold) const {
  std::vector<data::CrossingInstance> out;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (fold_of_[i] != fold) out.push_back(pool_[i]);
  }
  return out;
}

std::vector<data::CrossingInstance> Dataset::fold_validation(std::size_t fold) const {
  std::vector<data::CrossingInstance> out;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (fold_of_[i] == fold) out.push_back(pool_[i]);
  }
  return out;
}

std::vector<data::CrossingInstance> Dataset::take_test(const std::string& token) {
  std::lock_guard lock(*mutex_);
  if (!consumed_.insert(token).second) {
    throw ProtocolError("test split already used for '" + token + "'");
  }
  return test_;
}

bool Dataset::test_taken(const std::string& token) const {
  std::lock_guard lock(*mutex_);
  return consumed_.count(token) > 0;
}

windowing::SampleSet PreparedData::fold_train(std::size_t fold) const {
  return subset(pool, fold_of, fold, false);
}

windowing::SampleSet PreparedData::fold_validation(std::size_t fold) const {
  return subset(pool, fold_of, fold, true);
}

PreparedData prepare(const Dataset& dataset, const windowing::WindowingSpec& spec) {
  spec.validate();
  const auto& pool = dataset.pool();
  PreparedData out;
  out.spec = spec;
  out.folds = dataset.folds();
  const auto norm = windowing::fit_normalization(pool);
  const std::size_t target = spec.mode == windowing::Mode::kDistanceBased
                                 ? windowing::max_remaining_steps(pool, spec.p)
                                 : 0;
  out.pool = windowing::build_samples(pool, spec, norm, target);
  std::map<std::string, std::size_t> fold;
  for (std::size_t f = 0; f < dataset.split().folds.size(); ++f) {
    for (const auto& id : dataset.split().folds[f]) fold[id] = f;
  }
  for (const auto& s : out.pool.samples) out.fold_of.push_back(fold.at(s.instance_id));
  return out;
}

ModelConfig fit_to_data(ModelConfig config, const windowing::SampleSet& set) {
  config.input_features = set.features;
  config.output_steps = set.output_steps;
  config.context_size = data::kContextSize;
  return config;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
  return derive_seed(seed, "fold", fold);
}

FoldResult run_fold(const ModelConfig& config, const PreparedData& data, std::size_t fold,
                    std::uint64_t seed) {
  const auto train_set = data.fold_train(fold);
  const auto val_set = data.fold_validation(fold);
  const std::uint64_t s = fold_seed(seed, fold);
  FoldResult r;
  r.fold = fold;
  try {
    model::Network net(fit_to_data(config, data.pool), derive_seed(s, "init"));
    r.history = model::train(net, train_set, &val_set, derive_seed(s, "train"));
  } catch (const TrainingDivergedError& e) {
    throw TrainingDivergedError("fold " + std::to_string(fold) + ": " + e.what(), e.epoch());
  }
  const auto& best = r.history.epochs.at(static_cast<std::size_t>(r.history.best_epoch - 1));
  r.train_loss = best.train_loss;
  r.train_rmse = best.train_rmse;
  r.val_loss = best.val_loss;
  r.val_rmse = best.val_rmse;
  return r;
}

CvResult aggregate(const ModelConfig& config, std::size_t parameter_count,
                   std::vector<FoldResult> folds) {
  CvResult r;
  r.config = config;
  r.parameter_count = parameter_count;
  std::vector<double> vl, vr, tl, tr;
  for (const auto& f : folds) {
    vl.push_back(f.val_loss);
    vr.push_back(f.val_rmse);
    tl.push_back(f.train_loss);
    tr.push_back(f.train_rmse);
  }
  r.mean_val_loss = mean(vl);
  r.std_val_loss = stddev(vl);
  r.mean_val_rmse = mean(vr);
  r.std_val_rmse = stddev(vr);
  r.mean_train_loss = mean(tl);
  r.mean_train_rmse = mean(tr);
  r.folds = std::move(folds);
  return r;
}

namespace {

std::size_t count_parameters(const ModelConfig& config, const PreparedData& data) {
  return model::Network(fit_to_data(config, data.pool), 0).parameter_count();
}

}  // namespace

CvResult cross_validate(const ModelConfig& config, const PreparedData& data, std::uint64_t seed,
                        int jobs) {
  std::vector<FoldResult> folds(data.folds);
  parallel_for(data.folds, jobs, [&](std::size_t f) { folds[f] = run_fold(config, data, f, seed); });
  return aggregate(config, count_parameters(config, data), std::move(folds));
}

std::string ExperimentReport::token() const {
  return std::string(model::kind_name(kind)) + "/" + spec.data_type() + "/" +
         windowing::variant_name(spec.variant) + "/" + std::to_string(seed);
}

bool better(const CvResult& a, const CvResult& b) {
  if (a.mean_val_loss != b.mean_val_loss) return a.mean_val_loss < b.mean_val_loss;
  if (a.parameter_count != b.parameter_count) return a.parameter_count < b.parameter_count;
  return a.config.key() < b.config.key();
}

ExperimentReport grid_search(const GridSpace& space, const ModelConfig& base,
                             const PreparedData& data, std::uint64_t seed, int jobs) {
  const auto start = std::chrono::steady_clock::now();
  const auto configs = space.configs(base);
  const std::size_t k = data.folds;
  std::vector<FoldResult> units(configs.size() * k);
  parallel_for(units.size(), jobs, [&](std::size_t u) {
    units[u] = run_fold(configs[u / k], data, u % k, seed);
  });
  ExperimentReport r;
  r.kind = base.kind;
  r.spec = data.spec;
  r.seed = seed;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<FoldResult> folds(std::make_move_iterator(units.begin() + c * k),
                                  std::make_move_iterator(units.begin() + (c + 1) * k));
    r.leaderboard.push_back(aggregate(configs[c], count_parameters(configs[c], data), std::move(folds)));
  }
  std::stable_sort(r.leaderboard.begin(), r.leaderboard.end(), better);
  r.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

FinalEvaluation final_eval(ExperimentReport& report, Dataset& dataset, const PreparedData& data,
                           std::uint64_t seed) {
  if (report.leaderboard.empty()) throw StateError("report has no evaluated configurations");
  const auto test = dataset.take_test(report.token());
  const auto test_set = windowing::build_samples(test, data.spec, data.pool.norm, data.pool.output_steps);
  FinalEvaluation out;
  const ModelConfig cfg = fit_to_data(report.best().config, data.pool);
  out.network = std::make_unique<model::Network>(cfg, derive_seed(seed, "final/init"));
  out.history = model::train(*out.network, data.pool, nullptr, derive_seed(seed, "final/train"));
  const auto m = model::evaluate(*out.network, test_set);
  out.test_rmse = m.rmse;
  out.test_loss = m.loss;
  out.test_samples = m.samples;
  report.test_rmse = m.rmse;
  return out;
}

double relative_improvement_pct(double aux_rmse, double vanilla_rmse) {
  return 100.0 * (vanilla_rmse - aux_rmse) / vanilla_rmse;
}

Comparison compare_aux_vanilla(Dataset& dataset, const GridSpace& space, const ModelConfig& base,
                               std::uint64_t seed, int jobs, int stride_steps) {
  space.validate();
  Comparison out;
  for (auto variant : space.variants) {
    for (const auto& name : space.data_types) {
      const auto data = prepare(dataset, windowing::parse_data_type(name, variant, stride_steps));
      ComparisonRow row;
      row.data_type = space.variants.size() > 1 ? name + "/" + windowing::variant_name(variant) : name;
      for (ModelKind kind : {ModelKind::kAux, ModelKind::kVanilla}) {
        ModelConfig b = base;
        b.kind = kind;
        if (kind == ModelKind::kVanilla) b.dense_layers = 0;
        auto report = grid_search(space, b, data, seed, jobs);
        final_eval(report, dataset, data, seed);
        (kind == ModelKind::kAux ? row.aux_rmse : row.vanilla_rmse) = *report.test_rmse;
        out.reports.push_back(std::move(report));
      }
      row.improvement_pct = relative_improvement_pct(row.aux_rmse, row.vanilla_rmse);
      out.rows.push_back(row);
    }
  }
  return out;
}

void write_leaderboard_csv(std::ostream& out, const ExperimentReport& r) {
  out << "rank,kind,data_type,batch_size,dropout,nodes,lstm_layers,dense_layers,parameters,"
         "mean_val_loss,std_val_loss,mean_val_rmse,std_val_rmse,mean_train_loss,mean_train_rmse\n";
  for (std::size_t i = 0; i < r.leaderboard.size(); ++i) {
    const auto& e = r.leaderboard[i];
    const auto& c = e.config;
    out << i + 1 << ',' << model::kind_name(c.kind) << ',' << r.spec.data_type() << ','
        << c.batch_size << ',' << num(c.dropout) << ',' << c.nodes << ',' << c.lstm_layers << ','
        << c.dense_layers << ',' << e.parameter_count << ',' << num(e.mean_val_loss) << ','
        << num(e.std_val_loss) << ',' << num(e.mean_val_rmse) << ',' << num(e.std_val_rmse) << ','
        << num(e.mean_train_loss) << ',' << num(e.mean_train_rmse) << '\n';
  }
}

void write_history_csv(std::ostream& out, const model::TrainingHistory& h) {
  out << "epoch,train_loss,train_rmse,val_loss,val_rmse,retained\n";
  for (const auto& e : h.epochs) {
    out << e.epoch << ',' << num(e.train_loss) << ',' << num(e.train_rmse) << ','
        << num(e.val_loss) << ',' << num(e.val_rmse) << ',' << (e.epoch == h.best_epoch) << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const Comparison& c) {
  out << "data_type,aux_test_rmse,vanilla_test_rmse,improvement_pct\n";
  for (const auto& r : c.rows) {
    out << r.data_type << ',' << num(r.aux_rmse) << ',' << num(r.vanilla_rmse) << ','
        << num(r.improvement_pct) << '\n';
  }
}

Json to_json(const CvResult& r) {
  Json j;
  j["config"] = model::to_json(r.config);
  j["key"] = r.config.key();
  j["parameters"] = r.parameter_count;
  j["mean_val_loss"] = r.mean_val_loss;
  j["std_val_loss"] = r.std_val_loss;
  j["mean_val_rmse"] = r.mean_val_rmse;
  j["std_val_rmse"] = r.std_val_rmse;
  j["mean_train_loss"] = r.mean_train_loss;
  j["mean_train_rmse"] = r.mean_train_rmse;
  Json folds = Json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold},
                     {"best_epoch", f.history.best_epoch},
                     {"train_loss", f.train_loss},
                     {"train_rmse", f.train_rmse},
                     {"val_loss", f.val_loss},
                     {"val_rmse", f.val_rmse}});
  }
  j["folds"] = std::move(folds);
  return j;
}

// Wall-clock time is left out so reports stay byte-identical across runs.
Json to_json(const ExperimentReport& r) {
  Json j;
  j["kind"] = model::kind_name(r.kind);
  j["windowing"] = windowing::to_json(r.spec);
  j["seed"] = r.seed;
  j["configs_evaluated"] = r.leaderboard.size();
  j["best"] = r.leaderboard.empty() ? Json() : to_json(r.best());
  j["test_rmse"] = r.test_rmse ? Json(*r.test_rmse) : Json();
  Json board = Json::array();
  for (const auto& e : r.leaderboard) board.push_back(to_json(e));
  j["leaderboard"] = std::move(board);
  return j;
}

}  // namespace crosspath::harness
