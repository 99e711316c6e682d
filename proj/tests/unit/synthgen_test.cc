#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "crosspath/common/errors.h"
#include "crosspath/data/context.h"
#include "crosspath/synthgen/generator.h"

using namespace crosspath;
using namespace crosspath::synthgen;
using data::CrossingInstance;
using data::ScenarioContext;

namespace {

const Corpus& benchmark() {
  static const Corpus corpus = benchmark_corpus();
  return corpus;
}

GeneratorConfig deterministic_config() {
  GeneratorConfig c;
  c.behavior = c.behavior.without_context_effects();
  auto& b = c.behavior;
  b.base_speed_mean = b.base_speed_min = b.base_speed_max = 1.5;
  b.base_speed_std = 0.0;
  b.speed_noise = 0.0;
  b.lateral_sigma = 0.0;
  b.head_noise_deg = 0.0;
  c.n_lanes = 1;
  return c;
}

double duration(const CrossingInstance& inst) { return inst.points.back().t; }

double mean_speed(const CrossingInstance& inst) {
  return (inst.points.back().y - inst.points.front().y) / duration(inst);
}

double lateral_spread(const CrossingInstance& inst) {
  double s = 0.0;
  for (const auto& p : inst.points) s += p.x * p.x;
  return std::sqrt(s / static_cast<double>(inst.points.size()));
}

struct Moments {
  double mean = 0.0, var = 0.0;
  std::size_t n = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  m.n = v.size();
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(m.n);
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(m.n - 1);
  return m;
}

double welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  const Moments ma = moments(a), mb = moments(b);
  return (ma.mean - mb.mean) / std::sqrt(ma.var / ma.n + mb.var / mb.n);
}

template <typename Key, typename Stat>
std::map<Key, std::vector<double>> group_by(const std::vector<CrossingInstance>& corpus, Key (*key)(const ScenarioContext&), Stat stat) {
  std::map<Key, std::vector<double>> out;
  for (const auto& inst : corpus) out[key(inst.context)].push_back(stat(inst));
  return out;
}

bool is_snow(const ScenarioContext& c) { return c.weather == data::Weather::kSnow; }
bool is_night(const ScenarioContext& c) { return c.time_of_day == data::TimeOfDay::kNight; }
double speed_limit(const ScenarioContext& c) { return c.speed_limit_kmh; }
double arrival(const ScenarioContext& c) { return c.arrival_rate_vph; }

}  // namespace

TEST_CASE("straight crossing with every noise and effect off") {
  const GeneratorConfig cfg = deterministic_config();
  ScenarioContext ctx;
  ctx.n_lanes = 1;
  ctx.lane_width_m = 3.0;
  ctx.arrival_rate_vph = 0.0;
  Rng rng = make_rng(1);
  const Participant p = sample_participant(cfg.behavior, rng);
  CHECK(p.base_speed == 1.5);

  const auto inst = generate_instance(cfg, ctx, p, 99, "fixed");
  REQUIRE(inst.points.size() == 21);
  CHECK(duration(inst) == doctest::Approx(2.0).epsilon(1e-12));
  for (std::size_t k = 0; k < inst.points.size(); ++k) {
    const auto& pt = inst.points[k];
    CHECK(pt.x == 0.0);
    CHECK(pt.y == doctest::Approx(0.15 * static_cast<double>(k)).epsilon(1e-12));
    CHECK(pt.d == data::kNoVehicleDistanceM);
  }
  CHECK_NOTHROW(data::validate(inst));
}

TEST_CASE("same seed and config give the same corpus, serial or parallel") {
  GeneratorConfig cfg;
  cfg.n_participants = 6;
  cfg.scenarios_per_participant = 10;
  const auto a = generate(cfg, 1);
  const auto b = generate(cfg, 1);
  const auto c = generate(cfg, 3);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(corpus_checksum(a) == corpus_checksum(c));
  CHECK(a.front().id == "p000_s00");
  CHECK(a.back().id == "p005_s09");

  cfg.seed = 8;
  CHECK(generate(cfg, 1) != a);
}

TEST_CASE("vehicle headways at 1100 vph match the exponential mean") {
  ScenarioContext ctx;
  ctx.n_lanes = 1;
  ctx.arrival_rate_vph = 1100.0;
  double total = 0.0;
  std::size_t gaps = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Rng rng = make_rng(derive_seed(3, "stream", i));
    const auto stream = sample_stream(ctx, 0.0, 300.0, 0.05, rng);
    const auto t = stream.arrivals(0);
    for (std::size_t k = 1; k < t.size(); ++k) {
      REQUIRE(t[k] > t[k - 1]);
      total += t[k] - t[k - 1];
      ++gaps;
    }
    for (const auto& v : stream.vehicles) REQUIRE(v.speed_mps > 0.0);
  }
  // Exp(1100 / 3600 per s) has mean 3600 / 1100 = 3.27 s.
  CHECK(std::abs(total / static_cast<double>(gaps) - 3600.0 / 1100.0) < 0.3);
}

TEST_CASE("lane layout") {
  ScenarioContext ctx;
  ctx.lane_width_m = 3.0;
  ctx.n_lanes = 2;
  ctx.road_type = data::RoadType::kOneWay;
  auto l = lane_layout(ctx);
  CHECK(l.direction == std::vector<int>{1, 1});
  CHECK(l.median_begin_y < 0.0);

  ctx.road_type = data::RoadType::kTwoWayMedian;
  l = lane_layout(ctx);
  CHECK(l.direction == std::vector<int>{1, -1});
  CHECK(l.centre_y == std::vector<double>{1.5, 6.5});
  CHECK(l.median_begin_y == 3.0);
  CHECK(l.median_end_y == 5.0);
}

TEST_CASE("benchmark corpus") {
  const Corpus& corpus = benchmark();
  const auto& inst = corpus.instances;
  REQUIRE(inst.size() == 3000);

  SUBCASE("regeneration keeps the checksum") {
    CHECK(benchmark_corpus(kBenchmarkSeed, 2).checksum == corpus.checksum);
    CHECK(corpus_checksum(inst) == corpus.checksum);
  }

  SUBCASE("every instance is schema-valid and y is monotone") {
    for (const auto& i : inst) {
      REQUIRE_NOTHROW(data::validate(i));
      CHECK(i.points.back().y >= i.context.road_width_m());
      for (std::size_t k = 1; k < i.points.size(); ++k) REQUIRE(i.points[k].y >= i.points[k - 1].y);
    }
  }

  SUBCASE("context level frequencies follow the mixture") {
    const auto& m = benchmark_config().mixture;
    const double n = static_cast<double>(inst.size());
    auto share = [&](auto pred) {
      return static_cast<double>(std::count_if(inst.begin(), inst.end(), pred)) / n;
    };
    for (std::size_t l = 0; l < 3; ++l) {
      CHECK(std::abs(share([&](const auto& i) { return i.context.road_type == data::kRoadTypes[l]; }) - m.road_type[l]) <= 0.02);
      CHECK(std::abs(share([&](const auto& i) { return i.context.speed_limit_kmh == data::kSpeedLevelsKmh[l]; }) - m.speed_limit[l]) <= 0.02);
      CHECK(std::abs(share([&](const auto& i) { return i.context.lane_width_m == data::kLaneWidthLevelsM[l]; }) - m.lane_width[l]) <= 0.02);
      CHECK(std::abs(share([&](const auto& i) { return i.context.arrival_rate_vph == data::kArrivalLevelsVph[l]; }) - m.arrival_rate[l]) <= 0.02);
    }
    CHECK(std::abs(share([](const auto& i) { return is_snow(i.context); }) - m.weather[1]) <= 0.02);
    CHECK(std::abs(share([](const auto& i) { return is_night(i.context); }) - m.time_of_day[1]) <= 0.02);
  }

  SUBCASE("distance to the nearest vehicle moves continuously") {
    // Triangle inequality: the change in d is bounded by how far the nearest
    // vehicle and the pedestrian moved in one step.
    const double vehicle_max = 1.3 * 50.0 / 3.6;
    for (const auto& i : inst) {
      for (std::size_t k = 1; k < i.points.size(); ++k) {
        const auto& a = i.points[k - 1];
        const auto& b = i.points[k];
        const double walked = std::hypot(b.x - a.x, b.y - a.y);
        REQUIRE(std::abs(b.d - a.d) <= vehicle_max * data::kTimeStepS + walked + 1e-9);
      }
    }
  }

  SUBCASE("snow lengthens crossings") {
    const auto groups = group_by<bool>(inst, is_snow, duration);
    CHECK(moments(groups.at(true)).mean > moments(groups.at(false)).mean);
  }
}

TEST_CASE("without context effects, walking does not depend on context") {
  GeneratorConfig cfg;
  cfg.behavior = cfg.behavior.without_context_effects();
  cfg.seed = 21;
  const auto corpus = generate(cfg, 1);
  // Six comparisons per statistic; 3.5 keeps the family-wise false alarm rate
  // well under 1%.
  constexpr double kCritical = 3.5;
  for (auto stat : {mean_speed, lateral_spread}) {
    auto snow = group_by<bool>(corpus, is_snow, stat);
    CHECK(std::abs(welch_t(snow[true], snow[false])) < kCritical);
    auto night = group_by<bool>(corpus, is_night, stat);
    CHECK(std::abs(welch_t(night[true], night[false])) < kCritical);
    auto speed = group_by<double>(corpus, speed_limit, stat);
    CHECK(std::abs(welch_t(speed[30.0], speed[50.0])) < kCritical);
    CHECK(std::abs(welch_t(speed[30.0], speed[40.0])) < kCritical);
    auto rate = group_by<double>(corpus, arrival, stat);
    CHECK(std::abs(welch_t(rate[530.0], rate[1100.0])) < kCritical);
    CHECK(std::abs(welch_t(rate[530.0], rate[750.0])) < kCritical);
  }

  // The same check has power with the effects on.
  const auto with = generate(benchmark_config(21), 1);
  auto snow = group_by<bool>(with, is_snow, mean_speed);
  CHECK(welch_t(snow[false], snow[true]) > kCritical);
}

TEST_CASE("unreachable crossing raises a generation error") {
  GeneratorConfig cfg;
  cfg.behavior.critical_gap_mean_s = 200.0;
  cfg.behavior.critical_gap_std_s = 0.0;
  cfg.max_attempts = 3;
  ScenarioContext ctx;
  ctx.arrival_rate_vph = 1100.0;
  Rng rng = make_rng(4);
  const Participant p = sample_participant(cfg.behavior, rng);
  CHECK_THROWS_AS(generate_instance(cfg, ctx, p, 5, "x"), GenerationError);

  cfg = GeneratorConfig{};
  cfg.max_duration_s = 0.5;
  CHECK_THROWS_AS(generate_instance(cfg, ctx, p, 5, "x"), GenerationError);
}

TEST_CASE("config validation and JSON") {
  GeneratorConfig cfg;
  cfg.behavior.median_pause_prob = 1.2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = GeneratorConfig{};
  cfg.behavior.base_speed_mean = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = GeneratorConfig{};
  cfg.mixture.weather = {0.0, 0.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = GeneratorConfig{};
  cfg.seed = 123;
  cfg.mixture.weather = {0.8, 0.2};
  cfg.behavior.lateral_sigma = 0.3;
  CHECK(config_from_json(to_json(cfg)) == cfg);
  CHECK(config_from_json(Json::object()) == GeneratorConfig{});
  Json bad = to_json(cfg);
  bad["mixture"]["weather"] = {1.0};
  CHECK_THROWS_AS(config_from_json(bad), SchemaError);
}
