#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "crosspath/cli/app.h"
#include "crosspath/cli/manifest.h"
#include "crosspath/common/checksum.h"
#include "crosspath/common/errors.h"
#include "crosspath/data/io.h"
#include "support/scenes.h"

namespace fs = std::filesystem;
using namespace crosspath;
using cli::Json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "crosspath_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string p(const fs::path& path) { return path.string(); }

// A 20-instance corpus, small enough for sub-second training.
fs::path small_corpus(const fs::path& dir) {
  const auto r = cli_run({"generate", "--seed", "3", "--participants", "5", "--scenarios", "4",
                          "--out", p(dir / "corpus")});
  REQUIRE(r.code == 0);
  return dir / "corpus" / "corpus.jsonl";
}

Json read_json(const fs::path& path) { return Json::parse(read_file(path)); }

std::string counts_samples(const fs::path& counts_csv) {
  std::istringstream in(read_file(counts_csv));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  return row.substr(row.find(',', row.find(',', row.find(',') + 1) + 1) + 1);
}

}  // namespace

TEST_CASE("exit codes map error categories") {
  CHECK(cli::exit_code_for(UsageError("x")) == 2);
  CHECK(cli::exit_code_for(ConfigError("x")) == 2);
  CHECK(cli::exit_code_for(BuildError("x")) == 2);
  CHECK(cli::exit_code_for(IoError("x")) == 3);
  CHECK(cli::exit_code_for(SchemaError("f", "x")) == 4);
  CHECK(cli::exit_code_for(ParseError("x", 3)) == 4);
  CHECK(cli::exit_code_for(TrainingDivergedError("x")) == 1);
  CHECK(cli::exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("train without --data is a usage error") {
  const auto dir = scratch("usage");
  const auto r = cli_run({"train", "--out", p(dir / "t")});
  CHECK(r.code == 2);
  CHECK(r.err.find("--data") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("unknown flags and subcommands are usage errors") {
  const auto dir = scratch("unknown");
  CHECK(cli_run({"generate", "--bogus", "--out", p(dir)}).code == 2);
  CHECK(cli_run({"frobnicate"}).code == 2);
  CHECK(cli_run({}).code == 2);
  CHECK(cli_run({"generate", "--seed", "seven", "--out", p(dir)}).code == 2);
  CHECK(cli_run({"generate", "--seed", "7"}).code == 2);  // no --out
}

TEST_CASE("help exits cleanly") {
  CHECK(cli_run({"--help"}).code == 0);
  CHECK(cli_run({"train", "--help"}).code == 0);
}

TEST_CASE("missing input exits 3, malformed input exits 4") {
  const auto dir = scratch("inputs");
  CHECK(cli_run({"window", "--data", p(dir / "nope.jsonl"), "--out", p(dir / "w")}).code == 3);
  CHECK(cli_run({"train", "--config", p(dir / "nope.json"), "--out", p(dir / "t")}).code == 3);

  write_file(dir / "bad.jsonl", "{\"id\": \"a\", \"points\": [\n");
  CHECK(cli_run({"window", "--data", p(dir / "bad.jsonl"), "--out", p(dir / "w")}).code == 4);

  write_file(dir / "cfg.json", R"({"model": {"nodez": 3}})");
  const auto r = cli_run({"train", "--config", p(dir / "cfg.json"), "--out", p(dir / "t")});
  CHECK(r.code == 4);
  CHECK(r.err.find("nodez") != std::string::npos);
}

TEST_CASE("generate twice gives identical checksums") {
  const auto dir = scratch("generate");
  for (const char* name : {"a", "b"}) {
    REQUIRE(cli_run({"generate", "--seed", "7", "--participants", "6", "--scenarios", "3", "--out",
                     p(dir / name)})
                .code == 0);
  }
  const auto a = cli::read_manifest(dir / "a" / "manifest.json");
  const auto b = cli::read_manifest(dir / "b" / "manifest.json");
  REQUIRE(a.artifacts.size() == 1);
  CHECK(a.artifacts == b.artifacts);
  CHECK(a.artifacts[0].sha256 == sha256_file(dir / "a" / "corpus.jsonl"));
  CHECK(a.seed == 7);
  CHECK(a.subcommand == "generate");

  REQUIRE(cli_run({"generate", "--seed", "7", "--participants", "6", "--scenarios", "3", "--jobs",
                   "3", "--out", p(dir / "c")})
              .code == 0);
  const auto c = cli::read_manifest(dir / "c" / "manifest.json");
  CHECK(c.artifacts == a.artifacts);
  CHECK(c.jobs == 3);
}

TEST_CASE("T_1_2 and T_2_1 windows give equal sample counts") {
  const auto dir = scratch("window");
  const auto corpus = small_corpus(dir);
  REQUIRE(cli_run({"window", "--data", p(corpus), "--mode", "time", "--t1", "1", "--t2", "2",
                   "--out", p(dir / "w12")})
              .code == 0);
  REQUIRE(cli_run({"window", "--data", p(corpus), "--mode", "time", "--t1", "2", "--t2", "1",
                   "--out", p(dir / "w21")})
              .code == 0);
  const auto n12 = counts_samples(dir / "w12" / "counts.csv");
  CHECK(n12 == counts_samples(dir / "w21" / "counts.csv"));
  CHECK(std::stoul(n12.substr(0, n12.find(','))) > 0);
  CHECK(fs::exists(dir / "w12" / "samples.bin"));
}

TEST_CASE("config precedence: defaults < file < flags") {
  const auto dir = scratch("precedence");
  const auto corpus = small_corpus(dir);
  write_file(dir / "cfg.json", R"({"model": {"nodes": 20, "epochs": 1}, "data_type": "T_1_1"})");
  REQUIRE(cli_run({"train", "--config", p(dir / "cfg.json"), "--data", p(corpus), "--nodes", "12",
                   "--out", p(dir / "t")})
              .code == 0);
  const auto m = cli::read_manifest(dir / "t" / "manifest.json");
  CHECK(m.config["model"]["nodes"] == 12);    // flag beats file
  CHECK(m.config["model"]["epochs"] == 1);    // file beats default
  CHECK(m.config["model"]["dropout"] == 0.0);  // default
  CHECK(m.config["windowing"]["t1_s"] == 1.0);
  CHECK(m.config["windowing"]["t2_s"] == 1.0);
  CHECK(m.config["data"] == p(corpus));
}

TEST_CASE("every output directory holds one manifest listing its artifacts") {
  const auto dir = scratch("manifest");
  const auto corpus = small_corpus(dir);
  REQUIRE(cli_run({"train", "--data", p(corpus), "--data-type", "T_1_2", "--epochs", "2",
                   "--nodes", "8", "--seed", "5", "--out", p(dir / "t")})
              .code == 0);
  const auto m = cli::read_manifest(dir / "t" / "manifest.json");
  CHECK(m.subcommand == "train");
  CHECK(m.tool_version == cli::tool_version());
  CHECK(m.seed == 5);
  REQUIRE(m.inputs.size() == 1);
  CHECK(m.inputs[0].sha256 == sha256_file(corpus));
  std::vector<std::string> names;
  for (const auto& a : m.artifacts) {
    CHECK(a.sha256 == sha256_file(dir / "t" / a.path));
    names.push_back(a.path);
  }
  CHECK(names == std::vector<std::string>{"model.bin", "history.csv", "split.json", "train.jsonl",
                                          "test.jsonl"});
  std::vector<std::string> seeds;
  for (const auto& s : m.seeds) seeds.push_back(s.name);
  CHECK(seeds == std::vector<std::string>{"split", "init", "train", "shuffle", "dropout"});
  std::size_t manifests = 0;
  for (const auto& e : fs::directory_iterator(dir / "t")) {
    manifests += e.path().filename() == cli::kManifestName;
  }
  CHECK(manifests == 1);
}

TEST_CASE("re-running from a manifest reproduces artifacts byte for byte") {
  const auto dir = scratch("replay");
  const auto corpus = small_corpus(dir);
  REQUIRE(cli_run({"train", "--data", p(corpus), "--data-type", "T_1_1", "--epochs", "2",
                   "--nodes", "8", "--dropout", "0.2", "--out", p(dir / "t1")})
              .code == 0);
  REQUIRE(cli_run({"train", "--config", p(dir / "t1" / "manifest.json"), "--jobs", "2", "--out",
                   p(dir / "t2")})
              .code == 0);
  const auto a = cli::read_manifest(dir / "t1" / "manifest.json");
  const auto b = cli::read_manifest(dir / "t2" / "manifest.json");
  CHECK(a.config == b.config);
  CHECK(a.artifacts == b.artifacts);

  SUBCASE("against another subcommand") {
    CHECK(cli_run({"evaluate", "--config", p(dir / "t1" / "manifest.json"), "--out", p(dir / "e")})
              .code == 4);
  }
  SUBCASE("after an input changed") {
    write_file(corpus, read_file(corpus) + "\n");
    const auto r =
        cli_run({"train", "--config", p(dir / "t1" / "manifest.json"), "--out", p(dir / "t3")});
    CHECK(r.code == 4);
    CHECK(r.err.find("input changed") != std::string::npos);
  }
}

TEST_CASE("evaluate, predict, explain and report consume a trained model") {
  const auto dir = scratch("downstream");
  const auto corpus = small_corpus(dir);
  for (const char* kind : {"aux", "vanilla"}) {
    REQUIRE(cli_run({"train", "--data", p(corpus), "--data-type", "T_1_2", "--epochs", "2",
                     "--nodes", "8", "--kind", kind, "--out", p(dir / kind)})
                .code == 0);
  }
  const auto model = dir / "aux" / "model.bin";
  const auto test = dir / "aux" / "test.jsonl";

  REQUIRE(cli_run({"evaluate", "--model", p(model), "--data", p(test), "--out", p(dir / "ev")}).code ==
          0);
  const Json metrics = read_json(dir / "ev" / "metrics.json");
  CHECK(metrics["kind"] == "aux");
  CHECK(metrics["data_type"] == "T_1_2");
  CHECK(metrics["samples"].get<int>() > 0);
  CHECK(metrics["rmse_m"].get<double>() > 0.0);
  CHECK(read_file(dir / "ev" / "per_instance.csv").rfind("instance_id,samples,rmse_m\n", 0) == 0);

  SUBCASE("predict extends an observed prefix") {
    const auto instances = data::read_instances(test);
    std::ostringstream obs;
    for (const auto& inst : instances) {
      Json j = data::to_json(inst);
      auto& pts = j["points"];
      pts.erase(pts.begin() + 12, pts.end());
      obs << j.dump() << '\n';
    }
    write_file(dir / "obs.jsonl", obs.str());
    REQUIRE(cli_run({"predict", "--model", p(model), "--data", p(dir / "obs.jsonl"), "--out",
                     p(dir / "pr")})
                .code == 0);
    std::istringstream lines(read_file(dir / "pr" / "predictions.jsonl"));
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
      const Json j = Json::parse(line);
      CHECK(j["id"] == instances[n].id);
      REQUIRE(j["t"].size() == 20);
      CHECK(j["x"].size() == 20);
      CHECK(j["t"][0].get<double>() == doctest::Approx(1.2));
      ++n;
    }
    CHECK(n == instances.size());

    // Shorter than the model's input window.
    std::ostringstream tiny;
    Json j = data::to_json(instances[0]);
    j["points"].erase(j["points"].begin() + 3, j["points"].end());
    tiny << j.dump() << '\n';
    write_file(dir / "tiny.jsonl", tiny.str());
    CHECK(cli_run({"predict", "--model", p(model), "--data", p(dir / "tiny.jsonl"), "--out",
                   p(dir / "pr2")})
              .code == 4);
  }

  SUBCASE("explain writes the summary where --out points") {
    REQUIRE(cli_run({"explain", "--model", p(model), "--data", p(test), "--background",
                     p(dir / "aux" / "train.jsonl"), "--background-size", "8", "--max-instances",
                     "2", "--out", p(dir / "ex" / "shap.csv")})
                .code == 0);
    const std::string summary = read_file(dir / "ex" / "shap.csv");
    CHECK(summary.rfind("instance_id,feature,feature_value,phi\n", 0) == 0);
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 1 + 2 * 6);
    CHECK(fs::exists(dir / "ex" / "explanations.csv"));
    const auto m = cli::read_manifest(dir / "ex" / "manifest.json");
    CHECK(m.artifacts.front().path == "shap.csv");
  }

  SUBCASE("report exports trajectories for both models") {
    REQUIRE(cli_run({"report", "--data", p(corpus), "--aux-model", p(model), "--vanilla-model",
                     p(dir / "vanilla" / "model.bin"), "--test", p(test), "--samples", "3",
                     "--out", p(dir / "rep")})
                .code == 0);
    const std::string counts = read_file(dir / "rep" / "sample_counts.csv");
    CHECK(counts.rfind("distance_based,distance_samples,time_based,time_samples\nD_3,", 0) == 0);
    const std::string traj = read_file(dir / "rep" / "trajectory_000.csv");
    CHECK(traj.rfind("t,x_true,y_true,x_pred_vanilla,y_pred_vanilla,x_pred_aux,y_pred_aux\n", 0) ==
          0);
    CHECK(fs::exists(dir / "rep" / "trajectory_002.csv"));
    CHECK_FALSE(fs::exists(dir / "rep" / "trajectory_003.csv"));

    // Swapped kinds are rejected.
    CHECK(cli_run({"report", "--data", p(corpus), "--aux-model", p(dir / "vanilla" / "model.bin"),
                   "--vanilla-model", p(model), "--out", p(dir / "rep2")})
              .code == 4);
  }
}

TEST_CASE("report sample counts agree with window") {
  const auto dir = scratch("counts");
  const auto corpus = small_corpus(dir);
  REQUIRE(cli_run({"report", "--data", p(corpus), "--out", p(dir / "rep")}).code == 0);
  REQUIRE(cli_run({"window", "--data", p(corpus), "--data-type", "T_1_1", "--out", p(dir / "w")})
              .code == 0);
  const std::string counts = read_file(dir / "rep" / "sample_counts.csv");
  const std::string n = counts_samples(dir / "w" / "counts.csv");
  const std::string t11 = n.substr(0, n.find(','));
  CHECK(counts.find("T_1_1," + t11 + "\n") != std::string::npos);
  // Each distance type yields at most one sample per instance.
  CHECK(counts.find("D_5,20,") != std::string::npos);
}

TEST_CASE("gridsearch and compare write leaderboards and reports") {
  const auto dir = scratch("search");
  const auto corpus = small_corpus(dir);
  const std::vector<std::string> grid = {"--batch-sizes", "64", "--dropouts", "0", "--nodes", "6",
                                         "--lstm-layers", "1", "--epochs", "1", "--folds", "3"};
  auto args = std::vector<std::string>{"gridsearch", "--data", p(corpus), "--data-types", "T_1_1",
                                       "--dense-layers", "1,2", "--final", "--out", p(dir / "gs")};
  args.insert(args.end(), grid.begin(), grid.end());
  REQUIRE(cli_run(args).code == 0);
  const Json report = read_json(dir / "gs" / "report_aux_T_1_1_xyod.json");
  CHECK(report["configs_evaluated"] == 2);
  CHECK(report["test_rmse"].is_number());
  CHECK(fs::exists(dir / "gs" / "model_aux_T_1_1_xyod.bin"));

  args = {"compare", "--data", p(corpus), "--data-types", "T_1_2", "--dense-layers", "1",
          "--out", p(dir / "cmp")};
  args.insert(args.end(), grid.begin(), grid.end());
  REQUIRE(cli_run(args).code == 0);
  const std::string csv = read_file(dir / "cmp" / "comparison.csv");
  CHECK(csv.rfind("data_type,aux_test_rmse,vanilla_test_rmse,improvement_pct\nT_1_2,", 0) == 0);
  CHECK(fs::exists(dir / "cmp" / "report_vanilla_T_1_2_xyod.json"));

  REQUIRE(cli_run({"report", "--data", p(corpus), "--results", p(dir / "cmp"), "--out",
                   p(dir / "rep")})
              .code == 0);
  const std::string selected = read_file(dir / "rep" / "selected_models.csv");
  CHECK(std::count(selected.begin(), selected.end(), '\n') == 3);
}

TEST_CASE("extract writes events and funnel") {
  const auto dir = scratch("extract");
  std::vector<data::SceneLog> scenes;
  std::size_t positives = 0;
  for (const auto& s : testing::labeled_scene_suite()) {
    scenes.push_back(s.scene);
    positives += s.crossing;
  }
  data::write_scenes(dir / "scenes.jsonl", scenes);
  REQUIRE(cli_run({"extract", "--scenes", p(dir / "scenes.jsonl"), "--out",
                   p(dir / "out" / "events.jsonl"), "--funnel", p(dir / "out" / "funnel.csv")})
              .code == 0);
  std::istringstream events(read_file(dir / "out" / "events.jsonl"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(events, line)) n += !line.empty() && line.find("\"track_id\"") != std::string::npos;
  CHECK(n == positives);
  const std::string funnel = read_file(dir / "out" / "funnel.csv");
  CHECK(funnel.rfind("stage,criterion,tracks\n", 0) == 0);
  const auto m = cli::read_manifest(dir / "out" / "manifest.json");
  REQUIRE(m.artifacts.size() == 2);
  CHECK(m.artifacts[0].path == "events.jsonl");
  CHECK(m.artifacts[1].path == "funnel.csv");
}
