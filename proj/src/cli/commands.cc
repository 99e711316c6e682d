#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

#include "command.h"
#include "crosspath/common/checksum.h"
#include "crosspath/common/errors.h"
#include "crosspath/common/seeds.h"
#include "crosspath/data/context.h"
#include "crosspath/explain/attribution.h"
#include "crosspath/extractor/extract.h"
#include "crosspath/harness/experiment.h"
#include "crosspath/model/artifact.h"
#include "crosspath/synthgen/generator.h"
#include "crosspath/windowing/windowing.h"

namespace crosspath::cli {

namespace fs = std::filesystem;
using windowing::SampleSet;
using windowing::WindowingSpec;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string pretty(const Json& j) {
  std::ostringstream os;
  os << std::setw(2) << j << '\n';
  return os.str();
}

std::string instances_jsonl(const std::vector<data::CrossingInstance>& v) {
  std::ostringstream os;
  data::write_instances(os, v);
  return os.str();
}

// ---- shared config pieces --------------------------------------------------

Json model_defaults() {
  Json j = model::to_json(model::ModelConfig{});
  // Derived from the data at training time.
  j.erase("input_features");
  j.erase("context_size");
  j.erase("output_steps");
  return j;
}

std::vector<Flag> model_flags() {
  return {
      {"kind", "/model/kind", FlagKind::kString, "Model kind: aux or vanilla"},
      {"nodes", "/model/nodes", FlagKind::kInt, "Units per hidden layer"},
      {"lstm-layers", "/model/lstm_layers", FlagKind::kInt, "Stacked LSTM layers"},
      {"dense-layers", "/model/dense_layers", FlagKind::kInt, "Dense layers after the merge (aux)"},
      {"dropout", "/model/dropout", FlagKind::kDouble, "Dropout rate"},
      {"batch-size", "/model/batch_size", FlagKind::kInt, "Minibatch size"},
      {"epochs", "/model/epochs", FlagKind::kInt, "Training epochs"},
      {"learning-rate", "/model/learning_rate", FlagKind::kDouble, "Adam learning rate"},
      {"lambda", "/model/secondary_loss_weight", FlagKind::kDouble, "Secondary loss weight"},
      {"no-context", "/model/use_context", FlagKind::kSetFalse,
       "Aux only: do not merge the context vector"},
  };
}

std::vector<Flag> windowing_flags() {
  return {
      {"data-type", "/data_type", FlagKind::kString,
       "Shorthand such as T_1_2 or D_5; overrides mode, t1, t2 and p"},
      {"mode", "/windowing/mode", FlagKind::kString, "time or distance"},
      {"t1", "/windowing/t1_s", FlagKind::kDouble, "Input seconds (time-based)"},
      {"t2", "/windowing/t2_s", FlagKind::kDouble, "Predicted seconds (time-based)"},
      {"p", "/windowing/p", FlagKind::kDouble, "Observed fraction of the road (distance-based)"},
      {"variant", "/windowing/variant", FlagKind::kString, "Input channels: xy, xyo, xyd or xyod"},
      {"stride", "/windowing/stride_steps", FlagKind::kInt, "Window stride in steps (time-based)"},
  };
}

std::vector<Flag> split_flags() {
  return {
      {"seed", "/seed", FlagKind::kUInt, "Master seed"},
      {"folds", "/folds", FlagKind::kInt, "Cross-validation folds"},
  };
}

template <typename... Lists>
std::vector<Flag> join(Lists... lists) {
  std::vector<Flag> out;
  (out.insert(out.end(), lists.begin(), lists.end()), ...);
  return out;
}

void normalize_windowing(Json& c) {
  Json& w = c["windowing"];
  if (w["mode"] == "time") w["mode"] = "time_based";
  if (w["mode"] == "distance") w["mode"] = "distance_based";
  const std::string dt = c.value("data_type", "");
  if (!dt.empty()) {
    const auto variant = windowing::parse_variant(w.at("variant").get<std::string>());
    w = windowing::to_json(windowing::parse_data_type(dt, variant, w.at("stride_steps").get<int>()));
  }
  windowing::spec_from_json(w);
}

void normalize_model(Json& m) {
  const auto cfg = model::config_from_json(m);
  if (!cfg.is_aux()) m["dense_layers"] = 0;
}

std::size_t folds_of(const Run& r) {
  const int folds = r.integer("/folds");
  if (folds < 2) throw ConfigError("folds must be at least 2");
  return static_cast<std::size_t>(folds);
}

// Target length for distance-based windows comes from the model.
std::size_t target_steps(const model::ModelArtifact& a) {
  return a.windowing.mode == windowing::Mode::kDistanceBased ? a.network->config().output_steps : 0;
}

std::string tag(model::ModelKind kind, const WindowingSpec& spec) {
  return std::string(model::kind_name(kind)) + "_" + spec.data_type() + "_" +
         windowing::variant_name(spec.variant);
}

std::string artifact_bytes(model::ModelArtifact& a) {
  return numkit::encode_container(model::to_container(a));
}

// ---- generate ----------------------------------------------------------------

void run_generate(Run& r, const std::vector<std::string>&) {
  auto config = synthgen::config_from_json(r.at("/generator"));
  if (!r.flag("/context_effects")) config.behavior = config.behavior.without_context_effects();
  r.set_seed(config.seed);
  const auto corpus = synthgen::generate(config, r.jobs());
  const std::string bytes = instances_jsonl(corpus);
  r.emit("corpus.jsonl", bytes);
  r.log() << "generated " << corpus.size() << " instances, sha256 " << sha256_hex(bytes) << '\n';
}

Command generate_command() {
  Command c;
  c.name = "generate";
  c.help = "Generate a synthetic crossing corpus (corpus.jsonl)";
  c.defaults = Json{{"generator", synthgen::to_json(synthgen::GeneratorConfig{})},
                    {"context_effects", true}};
  c.flags = {
      {"seed", "/generator/seed", FlagKind::kUInt, "Generation seed"},
      {"participants", "/generator/n_participants", FlagKind::kInt, "Number of participants"},
      {"scenarios", "/generator/scenarios_per_participant", FlagKind::kInt,
       "Crossings per participant"},
      {"lanes", "/generator/n_lanes", FlagKind::kInt, "Lanes per road"},
      {"no-context-effects", "/context_effects", FlagKind::kSetFalse,
       "Neutralize every context-dependent behavior coefficient"},
  };
  c.handler = run_generate;
  return c;
}

// ---- window ------------------------------------------------------------------

void run_window(Run& r, const std::vector<std::string>&) {
  const auto corpus = data::read_instances(r.input("/data"));
  const auto spec = windowing::spec_from_json(r.at("/windowing"));
  const auto norm = windowing::fit_normalization(corpus);
  const auto set = windowing::build_samples(corpus, spec, norm);
  r.emit("samples.bin", numkit::encode_container(windowing::to_container(set)));
  std::ostringstream counts;
  counts << "data_type,variant,instances,samples,dropped\n"
         << spec.data_type() << ',' << windowing::variant_name(spec.variant) << ','
         << corpus.size() << ',' << set.size() << ',' << set.dropped << '\n';
  r.emit("counts.csv", counts.str());
  r.log() << spec.data_type() << ": " << set.size() << " samples from " << corpus.size()
          << " instances\n";
}

Command window_command() {
  Command c;
  c.name = "window";
  c.help = "Window a corpus into samples (samples.bin, counts.csv)";
  c.defaults = Json{{"data", ""}, {"data_type", ""}, {"windowing", windowing::to_json(WindowingSpec{})}};
  c.flags = join(std::vector<Flag>{{"data", "/data", FlagKind::kString, "Corpus JSONL"}},
                 windowing_flags());
  c.required = {"data"};
  c.normalize = normalize_windowing;
  c.handler = run_window;
  return c;
}

// ---- train -------------------------------------------------------------------

void run_train(Run& r, const std::vector<std::string>&) {
  const std::uint64_t seed = r.seed_at("/seed");
  r.set_seed(seed);
  const auto data_path = r.input("/data");
  auto dataset = harness::Dataset::from_corpus(data::read_instances(data_path), seed, folds_of(r));
  const auto spec = windowing::spec_from_json(r.at("/windowing"));
  const auto prepared = harness::prepare(dataset, spec);
  const auto config = harness::fit_to_data(model::config_from_json(r.at("/model")), prepared.pool);

  const int vf = r.integer("/validation_fold");
  if (vf >= static_cast<int>(prepared.folds)) throw ConfigError("validation_fold out of range");
  SampleSet fold_train, fold_val;
  const SampleSet* train_set = &prepared.pool;
  const SampleSet* val_set = nullptr;
  if (vf >= 0) {
    fold_train = prepared.fold_train(static_cast<std::size_t>(vf));
    fold_val = prepared.fold_validation(static_cast<std::size_t>(vf));
    train_set = &fold_train;
    val_set = &fold_val;
  }

  const std::uint64_t init_seed = derive_seed(seed, "init");
  const std::uint64_t train_seed = derive_seed(seed, "train");
  r.seed("split", derive_seed(seed, "split"));
  r.seed("init", init_seed);
  r.seed("train", train_seed);
  r.seed("shuffle", derive_seed(train_seed, "shuffle"));
  r.seed("dropout", derive_seed(train_seed, "dropout"));

  model::ModelArtifact artifact;
  artifact.network = std::make_unique<model::Network>(config, init_seed);
  r.log() << "training " << config.key() << " on " << train_set->size() << " samples ("
          << spec.data_type() << ")\n";
  const auto history = model::train(*artifact.network, *train_set, val_set, train_seed,
                                    [&](const model::EpochRecord& e) {
                                      r.log() << "epoch " << e.epoch << " train_loss "
                                              << num(e.train_loss) << " train_rmse "
                                              << num(e.train_rmse) << '\n';
                                    });
  artifact.norm = prepared.pool.norm;
  artifact.windowing = spec;
  artifact.extra = Json{{"seed", seed},
                        {"data_sha256", sha256_file(data_path)},
                        {"validation_fold", vf},
                        {"best_epoch", history.best_epoch}};

  r.emit("model.bin", artifact_bytes(artifact));
  std::ostringstream hist;
  harness::write_history_csv(hist, history);
  r.emit("history.csv", hist.str());
  r.emit("split.json", pretty(windowing::to_json(dataset.split())));
  r.emit("train.jsonl", instances_jsonl(dataset.pool()));
  r.emit("test.jsonl", instances_jsonl(dataset.take_test("cli/train")));
}

Command train_command() {
  Command c;
  c.name = "train";
  c.help = "Train one model on the training pool (model.bin, history.csv, split files)";
  c.defaults = Json{{"data", ""},
                    {"data_type", ""},
                    {"windowing", windowing::to_json(WindowingSpec{})},
                    {"model", model_defaults()},
                    {"seed", 7},
                    {"folds", static_cast<int>(windowing::kDefaultFolds)},
                    {"validation_fold", -1}};
  c.flags = join(std::vector<Flag>{{"data", "/data", FlagKind::kString, "Corpus JSONL"},
                                   {"validation-fold", "/validation_fold", FlagKind::kInt,
                                    "Hold out this fold and keep the best validation epoch"}},
                 windowing_flags(), model_flags(), split_flags());
  c.required = {"data"};
  c.normalize = [](Json& j) {
    normalize_windowing(j);
    normalize_model(j["model"]);
  };
  c.handler = run_train;
  return c;
}

// ---- gridsearch / compare ------------------------------------------------------

Json grid_defaults() { return harness::to_json(harness::GridSpace{}); }

std::vector<Flag> grid_flags() {
  return {
      {"data-types", "/grid/data_types", FlagKind::kStringList, "Comma-separated data types"},
      {"variants", "/grid/variants", FlagKind::kStringList, "Comma-separated variants"},
      {"batch-sizes", "/grid/batch_sizes", FlagKind::kIntList, "Candidate batch sizes"},
      {"dropouts", "/grid/dropouts", FlagKind::kDoubleList, "Candidate dropout rates"},
      {"nodes", "/grid/nodes", FlagKind::kIntList, "Candidate layer widths"},
      {"lstm-layers", "/grid/lstm_layers", FlagKind::kIntList, "Candidate LSTM depths"},
      {"dense-layers", "/grid/dense_layers", FlagKind::kIntList, "Candidate dense depths"},
      {"epochs", "/model/epochs", FlagKind::kInt, "Training epochs per model"},
      {"learning-rate", "/model/learning_rate", FlagKind::kDouble, "Adam learning rate"},
      {"lambda", "/model/secondary_loss_weight", FlagKind::kDouble, "Secondary loss weight"},
      {"stride", "/stride", FlagKind::kInt, "Window stride for time-based data types"},
  };
}

Json search_defaults() {
  return Json{{"data", ""},        {"grid", grid_defaults()}, {"model", model_defaults()},
              {"seed", 7},         {"folds", static_cast<int>(windowing::kDefaultFolds)},
              {"stride", 1}};
}

void record_search_seeds(Run& r, std::uint64_t seed, std::size_t folds) {
  r.seed("split", derive_seed(seed, "split"));
  for (std::size_t k = 0; k < folds; ++k) r.seed("fold" + std::to_string(k), harness::fold_seed(seed, k));
  r.seed("final/init", derive_seed(seed, "final/init"));
  r.seed("final/train", derive_seed(seed, "final/train"));
}

void emit_report(Run& r, const harness::ExperimentReport& report) {
  const std::string t = tag(report.kind, report.spec);
  std::ostringstream board;
  harness::write_leaderboard_csv(board, report);
  r.emit("leaderboard_" + t + ".csv", board.str());
  r.emit("report_" + t + ".json", pretty(harness::to_json(report)));
}

void run_gridsearch(Run& r, const std::vector<std::string>&) {
  const std::uint64_t seed = r.seed_at("/seed");
  r.set_seed(seed);
  const std::size_t folds = folds_of(r);
  auto dataset = harness::Dataset::from_corpus(data::read_instances(r.input("/data")), seed, folds);
  const auto grid = harness::grid_from_json(r.at("/grid"));
  grid.validate();
  const auto base = model::config_from_json(r.at("/model"));
  const int stride = r.integer("/stride");
  record_search_seeds(r, seed, folds);

  for (const auto& dt : grid.data_types) {
    for (const auto variant : grid.variants) {
      const auto spec = windowing::parse_data_type(dt, variant, stride);
      const auto prepared = harness::prepare(dataset, spec);
      r.log() << "searching " << tag(base.kind, spec) << " over " << grid.configs(base).size()
              << " configurations\n";
      auto report = harness::grid_search(grid, base, prepared, seed, r.jobs());
      r.log() << "best " << report.best().config.key() << " val_loss "
              << num(report.best().mean_val_loss) << '\n';
      if (r.flag("/final")) {
        auto fe = harness::final_eval(report, dataset, prepared, seed);
        r.log() << "test rmse " << num(fe.test_rmse) << " m\n";
        model::ModelArtifact artifact;
        artifact.network = std::move(fe.network);
        artifact.norm = prepared.pool.norm;
        artifact.windowing = spec;
        artifact.extra = Json{{"seed", seed}, {"best_epoch", fe.history.best_epoch}};
        const std::string t = tag(report.kind, spec);
        r.emit("model_" + t + ".bin", artifact_bytes(artifact));
        std::ostringstream hist;
        harness::write_history_csv(hist, fe.history);
        r.emit("history_" + t + ".csv", hist.str());
      }
      emit_report(r, report);
    }
  }
}

Command gridsearch_command() {
  Command c;
  c.name = "gridsearch";
  c.help = "Cross-validated grid search per data type (leaderboards, reports, best models)";
  c.defaults = search_defaults();
  c.defaults["final"] = false;
  c.flags = join(std::vector<Flag>{{"data", "/data", FlagKind::kString, "Corpus JSONL"},
                                   {"kind", "/model/kind", FlagKind::kString, "aux or vanilla"},
                                   {"final", "/final", FlagKind::kSetTrue,
                                    "Retrain the best config on the pool and score the test split"}},
                 grid_flags(), split_flags());
  c.required = {"data"};
  c.normalize = [](Json& j) {
    normalize_model(j["model"]);
    harness::grid_from_json(j["grid"]).validate();
  };
  c.handler = run_gridsearch;
  return c;
}

void run_compare(Run& r, const std::vector<std::string>&) {
  const std::uint64_t seed = r.seed_at("/seed");
  r.set_seed(seed);
  const std::size_t folds = folds_of(r);
  auto dataset = harness::Dataset::from_corpus(data::read_instances(r.input("/data")), seed, folds);
  const auto grid = harness::grid_from_json(r.at("/grid"));
  grid.validate();
  const auto base = model::config_from_json(r.at("/model"));
  record_search_seeds(r, seed, folds);
  const auto comparison =
      harness::compare_aux_vanilla(dataset, grid, base, seed, r.jobs(), r.integer("/stride"));
  std::ostringstream csv;
  harness::write_comparison_csv(csv, comparison);
  r.emit("comparison.csv", csv.str());
  for (const auto& report : comparison.reports) emit_report(r, report);
  for (const auto& row : comparison.rows) {
    r.log() << row.data_type << ": aux " << num(row.aux_rmse) << " m, vanilla "
            << num(row.vanilla_rmse) << " m, improvement " << num(row.improvement_pct) << "%\n";
  }
}

Command compare_command() {
  Command c;
  c.name = "compare";
  c.help = "Aux vs vanilla: search both on identical splits, score each on test (comparison.csv)";
  c.defaults = search_defaults();
  c.flags = join(std::vector<Flag>{{"data", "/data", FlagKind::kString, "Corpus JSONL"}},
                 grid_flags(), split_flags());
  c.required = {"data"};
  c.normalize = [](Json& j) { harness::grid_from_json(j["grid"]).validate(); };
  c.handler = run_compare;
  return c;
}

// ---- evaluate / predict ----------------------------------------------------------

SampleSet subset(const SampleSet& set, const std::vector<std::size_t>& rows) {
  SampleSet s;
  s.spec = set.spec;
  s.norm = set.norm;
  s.input_steps = set.input_steps;
  s.output_steps = set.output_steps;
  s.features = set.features;
  for (const auto i : rows) s.samples.push_back(set.samples[i]);
  return s;
}

void run_evaluate(Run& r, const std::vector<std::string>&) {
  auto artifact = model::load_artifact(r.input("/model"));
  const auto instances = data::read_instances(r.input("/data"));
  const auto set =
      windowing::build_samples(instances, artifact.windowing, artifact.norm, target_steps(artifact));
  if (set.size() == 0) throw EmptyTargetError("no samples could be windowed from the data");
  const auto metrics = model::evaluate(*artifact.network, set);

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto& v = rows[set.samples[i].instance_id];
    if (v.empty()) order.push_back(set.samples[i].instance_id);
    v.push_back(i);
  }
  std::ostringstream per;
  per << "instance_id,samples,rmse_m\n";
  for (const auto& id : order) {
    const auto m = model::evaluate(*artifact.network, subset(set, rows[id]));
    per << id << ',' << m.samples << ',' << num(m.rmse) << '\n';
  }

  Json j;
  j["kind"] = model::kind_name(artifact.network->config().kind);
  j["data_type"] = artifact.windowing.data_type();
  j["variant"] = windowing::variant_name(artifact.windowing.variant);
  j["instances"] = order.size();
  j["samples"] = metrics.samples;
  j["loss"] = metrics.loss;
  j["rmse_m"] = metrics.rmse;
  r.emit("metrics.json", pretty(j));
  r.emit("per_instance.csv", per.str());
  r.log() << "rmse " << num(metrics.rmse) << " m over " << metrics.samples << " samples\n";
}

Command evaluate_command() {
  Command c;
  c.name = "evaluate";
  c.help = "Score a trained model on a crossing corpus (metrics.json, per_instance.csv)";
  c.defaults = Json{{"model", ""}, {"data", ""}};
  c.flags = {{"model", "/model", FlagKind::kString, "Model artifact (model.bin)"},
             {"data", "/data", FlagKind::kString, "Crossing JSONL to evaluate on"}};
  c.required = {"model", "data"};
  c.handler = run_evaluate;
  return c;
}

// Observation records share the crossing-instance layout but may stop
// mid-road; only the context and point values are checked.
std::vector<data::CrossingInstance> read_observations(const fs::path& path) {
  auto in = data::open_input(path);
  std::vector<data::CrossingInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSON", lineno);
    if (j.contains("schema") && !j.contains("points")) continue;
    auto obs = data::instance_from_json(j);
    data::validate(obs.context);
    if (obs.points.empty()) throw SchemaError("points", "observation " + obs.id + " is empty");
    for (const auto& p : obs.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.o) || !std::isfinite(p.d)) {
        throw SchemaError("points", "non-finite value in observation " + obs.id);
      }
    }
    out.push_back(std::move(obs));
  }
  return out;
}

void run_predict(Run& r, const std::vector<std::string>&) {
  auto artifact = model::load_artifact(r.input("/model"));
  const auto observations = read_observations(r.input("/data"));
  const auto& spec = artifact.windowing;
  const auto& norm = artifact.norm;
  const auto& cfg = artifact.network->config();
  const auto cols = windowing::variant_columns(spec.variant);

  SampleSet set;
  set.spec = spec;
  set.norm = norm;
  set.output_steps = cfg.output_steps;
  set.features = cols.size();
  for (const auto& obs : observations) {
    std::span<const data::TrajectoryPoint> pts(obs.points);
    if (spec.mode == windowing::Mode::kTimeBased) {
      const auto need = static_cast<std::size_t>(spec.input_steps());
      if (pts.size() < need) {
        throw SchemaError("points", "observation " + obs.id + " has " + std::to_string(pts.size()) +
                                        " points; the model needs " + std::to_string(need));
      }
      pts = pts.last(need);
    }
    windowing::SequenceSample s;
    s.instance_id = obs.id;
    s.input = windowing::select_features(pts, spec.variant);
    for (std::size_t t = 0; t < s.input.rows(); ++t) {
      for (std::size_t f = 0; f < cols.size(); ++f) s.input(t, f) = norm.apply(cols[f], s.input(t, f));
    }
    s.context = data::encode_context(obs.context);
    s.target = numkit::Tensor::matrix(cfg.output_steps, 2);
    s.mask.assign(cfg.output_steps, 1.0);
    set.input_steps = std::max(set.input_steps, pts.size());
    set.samples.push_back(std::move(s));
  }

  std::ostringstream out;
  if (!set.samples.empty()) {
    const auto coords = model::predict(*artifact.network, set, norm);
    for (std::size_t i = 0; i < observations.size(); ++i) {
      const double t0 = observations[i].points.back().t;
      Json t = Json::array(), x = Json::array(), y = Json::array();
      for (std::size_t k = 0; k < coords[i].size(); ++k) {
        const double tk = t0 + static_cast<double>(k + 1) * data::kTimeStepS;
        t.push_back(std::round(tk * 1e9) / 1e9);
        x.push_back(coords[i][k][0]);
        y.push_back(coords[i][k][1]);
      }
      out << Json{{"id", observations[i].id}, {"t", t}, {"x", x}, {"y", y}}.dump() << '\n';
    }
  }
  r.emit("predictions.jsonl", out.str());
  r.log() << "predicted " << observations.size() << " observations\n";
}

Command predict_command() {
  Command c;
  c.name = "predict";
  c.help = "Predict the next steps of observed (partial) crossings (predictions.jsonl)";
  c.defaults = Json{{"model", ""}, {"data", ""}};
  c.flags = {{"model", "/model", FlagKind::kString, "Model artifact (model.bin)"},
             {"data", "/data", FlagKind::kString, "Observation JSONL: id, context, points"}};
  c.required = {"model", "data"};
  c.handler = run_predict;
  return c;
}

// ---- extract -------------------------------------------------------------------

void run_extract(Run& r, const std::vector<std::string>& outputs) {
  const auto scenes = data::read_scenes(r.input("/scenes"));
  const auto criteria = extractor::criteria_from_json(r.at("/criteria"));
  const auto result = extractor::extract_all(scenes, criteria, r.jobs());
  std::ostringstream events, funnel;
  extractor::write_events(events, result.events);
  extractor::write_funnel_csv(funnel, result.funnel);
  r.emit(outputs[0], events.str());
  r.emit(outputs[1].empty() ? fs::path("funnel.csv") : fs::path(outputs[1]), funnel.str());
  r.log() << result.events.size() << " events from " << result.funnel.scenes << " scenes\n";
}

Command extract_command() {
  Command c;
  c.name = "extract";
  c.help = "Mine mid-block crossing events from scene logs (events JSONL, funnel CSV)";
  c.defaults = Json{{"scenes", ""}, {"criteria", extractor::to_json(extractor::CriteriaConfig{})}};
  c.flags = {
      {"scenes", "/scenes", FlagKind::kString, "Scene log JSONL"},
      {"max-distance", "/criteria/max_distance_m", FlagKind::kDouble, "Proximity threshold (m)"},
      {"max-heading-change", "/criteria/max_heading_change_deg", FlagKind::kDouble,
       "Net heading change limit (deg)"},
      {"slack", "/criteria/slack_radius_m", FlagKind::kDouble, "Path intersection slack (m)"},
  };
  c.required = {"scenes"};
  c.out_is_file = true;
  c.outputs = {{"funnel", "Funnel CSV (default: funnel.csv next to --out)"}};
  c.normalize = [](Json& j) { extractor::criteria_from_json(j["criteria"]).validate(); };
  c.handler = run_extract;
  return c;
}

// ---- explain -------------------------------------------------------------------

void run_explain(Run& r, const std::vector<std::string>& outputs) {
  const std::uint64_t seed = r.seed_at("/seed");
  r.set_seed(seed);
  auto artifact = model::load_artifact(r.input("/model"));
  auto instances = data::read_instances(r.input("/data"));
  const auto background = data::read_instances(r.input("/background"));
  const int limit = r.integer("/max_instances");
  if (limit < 0) throw ConfigError("max_instances must be non-negative");
  if (limit > 0 && instances.size() > static_cast<std::size_t>(limit)) {
    instances.resize(static_cast<std::size_t>(limit));
  }
  const bool encoded = r.flag("/encoded_dims");

  explain::CorpusExplanation result;
  if (r.flag("/retrain")) {
    r.seed("coalition", seed);
    const auto steps = target_steps(artifact);
    const auto train_set = windowing::build_samples(background, artifact.windowing, artifact.norm, steps);
    const auto eval_set = windowing::build_samples(instances, artifact.windowing, artifact.norm, steps);
    result = explain::explain_by_retraining(artifact.network->config(), train_set, eval_set,
                                            instances, seed, encoded);
  } else {
    const int size = r.integer("/background_size");
    if (size < 1) throw ConfigError("background_size must be positive");
    r.seed("background", derive_seed(seed, "background"));
    explain::ExplainOptions options;
    options.background_size = static_cast<std::size_t>(size);
    options.seed = seed;
    options.encoded_dims = encoded;
    options.jobs = r.jobs();
    result = explain::explain_corpus(*artifact.network, artifact.windowing, artifact.norm, instances,
                                     background, options);
  }
  std::ostringstream summary, wide;
  explain::write_summary_csv(summary, result);
  explain::write_explanations_csv(wide, result);
  r.emit(outputs[0], summary.str());
  r.emit("explanations.csv", wide.str());
  r.log() << "explained " << result.explanations.size() << " instances\n";
}

Command explain_command() {
  Command c;
  c.name = "explain";
  c.help = "Shapley attribution of prediction error to scenario variables (summary CSV)";
  c.defaults = Json{{"model", ""},          {"data", ""},           {"background", ""},
                    {"background_size", 100}, {"seed", 7},          {"encoded_dims", false},
                    {"max_instances", 0},   {"retrain", false}};
  c.flags = {
      {"model", "/model", FlagKind::kString, "Model artifact (model.bin)"},
      {"data", "/data", FlagKind::kString, "Crossings to explain (JSONL)"},
      {"background", "/background", FlagKind::kString, "Background crossings (JSONL)"},
      {"background-size", "/background_size", FlagKind::kInt, "Background contexts drawn"},
      {"seed", "/seed", FlagKind::kUInt, "Background sampling seed"},
      {"encoded-dims", "/encoded_dims", FlagKind::kSetTrue, "One player per encoded dimension"},
      {"max-instances", "/max_instances", FlagKind::kInt, "Explain only the first N (0 = all)"},
      {"retrain", "/retrain", FlagKind::kSetTrue,
       "Exact variant: retrain one model per coalition on the background data"},
  };
  c.required = {"model", "data", "background"};
  c.out_is_file = true;
  c.handler = run_explain;
  return c;
}

// ---- report --------------------------------------------------------------------

std::size_t count_samples(const std::vector<data::CrossingInstance>& corpus, const WindowingSpec& spec) {
  std::size_t n = 0;
  for (const auto& inst : corpus) {
    if (spec.mode == windowing::Mode::kTimeBased) {
      n += windowing::time_window_count(inst.points.size(), spec);
      continue;
    }
    try {
      windowing::distance_split_index(inst, spec.p);
      ++n;
    } catch (const DegenerateSplitError&) {
    }
  }
  return n;
}

void emit_sample_counts(Run& r, const std::vector<data::CrossingInstance>& corpus,
                        windowing::Variant variant, int stride) {
  const char* distance[] = {"D_3", "D_5", "D_7"};
  const char* time[] = {"T_1_1", "T_1_2", "T_2_1"};
  std::ostringstream csv;
  csv << "distance_based,distance_samples,time_based,time_samples\n";
  for (int i = 0; i < 3; ++i) {
    const auto d = count_samples(corpus, windowing::parse_data_type(distance[i], variant, stride));
    const auto t = count_samples(corpus, windowing::parse_data_type(time[i], variant, stride));
    csv << distance[i] << ',' << d << ',' << time[i] << ',' << t << '\n';
  }
  r.emit("sample_counts.csv", csv.str());
}

void emit_trajectories(Run& r, const fs::path& test_path, std::size_t wanted) {
  auto aux = model::load_artifact(r.input("/aux_model"));
  auto van = model::load_artifact(r.input("/vanilla_model"));
  if (!aux.network->config().is_aux() || van.network->config().is_aux()) {
    throw SchemaError("model", "expected an aux model and a vanilla model");
  }
  if (!(aux.windowing == van.windowing) ||
      aux.network->config().output_steps != van.network->config().output_steps) {
    throw SchemaError("windowing", "the two models were trained on different data types");
  }
  const auto test = data::read_instances(test_path);
  const auto set_a = windowing::build_samples(test, aux.windowing, aux.norm, target_steps(aux));
  const auto set_v = windowing::build_samples(test, van.windowing, van.norm, target_steps(van));
  const auto pred_a = model::predict(*aux.network, set_a, aux.norm);
  const auto pred_v = model::predict(*van.network, set_v, van.norm);

  const std::size_t n = std::min(wanted, set_a.size());
  std::ostringstream index;
  index << "file,instance_id,sample\n";
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = k * set_a.size() / n;
    const auto& s = set_a.samples[i];
    std::ostringstream csv;
    csv << "t,x_true,y_true,x_pred_vanilla,y_pred_vanilla,x_pred_aux,y_pred_aux\n";
    // Observed history at t <= 0, then the predicted horizon.
    const std::size_t hist = s.input.rows();
    for (std::size_t j = 0; j < hist; ++j) {
      const double t = (static_cast<double>(j) - static_cast<double>(hist - 1)) * data::kTimeStepS;
      csv << num(t) << ',' << num(aux.norm.invert(0, s.input(j, 0))) << ','
          << num(aux.norm.invert(1, s.input(j, 1))) << ",,,,\n";
    }
    std::size_t m = 0;
    for (std::size_t j = 0; j < s.mask.size(); ++j) {
      if (s.mask[j] == 0.0) continue;
      const double t = static_cast<double>(j + 1) * data::kTimeStepS;
      csv << num(t) << ',' << num(aux.norm.invert(0, s.target(j, 0))) << ','
          << num(aux.norm.invert(1, s.target(j, 1))) << ',' << num(pred_v[i][m][0]) << ','
          << num(pred_v[i][m][1]) << ',' << num(pred_a[i][m][0]) << ',' << num(pred_a[i][m][1])
          << '\n';
      ++m;
    }
    char name[40];
    std::snprintf(name, sizeof name, "trajectory_%03zu.csv", k);
    r.emit(name, csv.str());
    index << name << ',' << s.instance_id << ',' << i << '\n';
  }
  r.emit("trajectories.csv", index.str());
  r.log() << "exported " << n << " trajectory samples\n";
}

// One row per search report found in `dir`: the selected configuration and,
// when scored, its test RMSE.
void emit_selected_models(Run& r, const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("cannot open results directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("report_", 0) == 0 && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::ostringstream csv;
  csv << "kind,data_type,variant,batch_size,dropout,nodes,lstm_layers,dense_layers,parameters,"
         "mean_val_loss,mean_val_rmse,test_rmse\n";
  for (const auto& f : files) {
    r.record_input(f);
    const Json j = Json::parse(read_file(f), nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSON in " + f.string(), 1);
    try {
      const auto spec = windowing::spec_from_json(j.at("windowing"));
      const Json& best = j.at("best");
      const auto cfg = model::config_from_json(best.at("config"));
      csv << j.at("kind").get<std::string>() << ',' << spec.data_type() << ','
          << windowing::variant_name(spec.variant) << ',' << cfg.batch_size << ','
          << num(cfg.dropout) << ',' << cfg.nodes << ',' << cfg.lstm_layers << ','
          << cfg.dense_layers << ',' << best.at("parameters").get<std::size_t>() << ','
          << num(best.at("mean_val_loss").get<double>()) << ','
          << num(best.at("mean_val_rmse").get<double>()) << ','
          << (j.at("test_rmse").is_null() ? std::string() : num(j.at("test_rmse").get<double>()))
          << '\n';
    } catch (const Json::exception& e) {
      throw SchemaError(f.string(), e.what());
    }
  }
  r.emit("selected_models.csv", csv.str());
}

void run_report(Run& r, const std::vector<std::string>&) {
  const auto corpus = data::read_instances(r.input("/data"));
  const auto variant = windowing::parse_variant(r.text("/variant"));
  emit_sample_counts(r, corpus, variant, r.integer("/stride"));

  const bool have_aux = !r.text("/aux_model").empty();
  const bool have_van = !r.text("/vanilla_model").empty();
  if (have_aux != have_van) throw UsageError("--aux-model and --vanilla-model go together");
  if (have_aux) {
    const int samples = r.integer("/samples");
    if (samples < 1) throw ConfigError("samples must be positive");
    const fs::path test = r.text("/test").empty() ? r.input("/data") : r.input("/test");
    emit_trajectories(r, test, static_cast<std::size_t>(samples));
  }
  if (!r.text("/results").empty()) emit_selected_models(r, r.text("/results"));
}

Command report_command() {
  Command c;
  c.name = "report";
  c.help = "Sample-count table, predicted-vs-true trajectory CSVs, selected-model table";
  c.defaults = Json{{"data", ""},          {"variant", "xyod"}, {"stride", 1},
                    {"aux_model", ""},     {"vanilla_model", ""}, {"test", ""},
                    {"samples", 10},       {"results", ""}};
  c.flags = {
      {"data", "/data", FlagKind::kString, "Corpus JSONL"},
      {"variant", "/variant", FlagKind::kString, "Variant used for the sample counts"},
      {"stride", "/stride", FlagKind::kInt, "Time-based window stride for the sample counts"},
      {"aux-model", "/aux_model", FlagKind::kString, "Aux model artifact"},
      {"vanilla-model", "/vanilla_model", FlagKind::kString, "Vanilla model artifact"},
      {"test", "/test", FlagKind::kString, "Crossings to draw trajectories from (default: --data)"},
      {"samples", "/samples", FlagKind::kInt, "Trajectory samples to export"},
      {"results", "/results", FlagKind::kString,
       "Directory of gridsearch/compare output to summarize"},
  };
  c.required = {"data"};
  c.handler = run_report;
  return c;
}

}  // namespace

std::vector<Command> commands() {
  return {generate_command(), window_command(),   train_command(),
          gridsearch_command(), evaluate_command(), predict_command(),
          compare_command(),  extract_command(),  explain_command(),
          report_command()};
}

}  // namespace crosspath::cli
