#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "crosspath/common/errors.h"
#include "crosspath/windowing/splits.h"
#include "crosspath/windowing/windowing.h"
#include "support/fixtures.h"

using namespace crosspath;
using namespace crosspath::windowing;
using crosspath::testing::constant_speed_crossing;
using crosspath::testing::linear_crossing;
using crosspath::testing::random_crossing;

namespace {

// Enumerates every start index whose input and target ranges fit, stepping
// by stride. Independent of time_window_count.
std::vector<std::size_t> brute_force_starts(std::size_t n, int in, int out, int stride) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(stride)) {
    bool fits = true;
    for (int k = 0; k < in + out; ++k) {
      if (i + static_cast<std::size_t>(k) >= n) fits = false;
    }
    if (fits) starts.push_back(i);
  }
  return starts;
}

NormalizationParams fitted_identity() {
  NormalizationParams n;
  n.min = {0, 0, 0, 0};
  n.max = {1000, 1000, 1000, 1000};
  n.fitted = true;
  return n;
}

}  // namespace

TEST_CASE("data type names") {
  auto t = parse_data_type("T_1_2");
  CHECK(t.mode == Mode::kTimeBased);
  CHECK(t.input_steps() == 10);
  CHECK(t.output_steps() == 20);
  CHECK(t.data_type() == "T_1_2");
  auto d = parse_data_type("D_7");
  CHECK(d.mode == Mode::kDistanceBased);
  CHECK(d.p == doctest::Approx(0.7));
  CHECK(d.data_type() == "D_7");
  CHECK(parse_data_type("T_0.5_1").input_steps() == 5);
  CHECK_THROWS_AS(parse_data_type("X_1"), ConfigError);
  CHECK_THROWS_AS(parse_data_type("T_1"), ConfigError);
  CHECK_THROWS_AS(parse_data_type("D_10"), ConfigError);
  CHECK_THROWS_AS(parse_data_type("T_0.15_1"), ConfigError);
}

TEST_CASE("time-based window counts") {
  const auto spec = parse_data_type("T_1_1");
  CHECK(time_window_count(30, spec) == 11);
  CHECK(time_window_count(20, spec) == 1);
  CHECK(time_window_count(19, spec) == 0);
  const auto norm = fitted_identity();
  CHECK(window_time_based(linear_crossing("a", 30), spec, norm).size() == 11);
  CHECK(window_time_based(linear_crossing("b", 20), spec, norm).size() == 1);
  CHECK(window_time_based(linear_crossing("c", 12), spec, norm).empty());
}

TEST_CASE("closed-form count matches brute-force enumeration") {
  std::mt19937_64 rng(17);
  for (int stride : {1, 2, 3, 5, 7}) {
    for (const char* dt : {"T_1_1", "T_1_2", "T_2_1", "T_0.5_0.3"}) {
      auto spec = parse_data_type(dt, Variant::kXyod, stride);
      for (int k = 0; k < 100; ++k) {
        const auto inst = random_crossing(rng, "r" + std::to_string(k));
        const auto starts = brute_force_starts(inst.points.size(), spec.input_steps(),
                                               spec.output_steps(), stride);
        REQUIRE(time_window_count(inst.points.size(), spec) == starts.size());
      }
    }
  }
}

TEST_CASE("T_1_2 and T_2_1 yield equal counts") {
  std::mt19937_64 rng(5);
  for (int stride : {1, 4}) {
    std::size_t a = 0, b = 0;
    for (int k = 0; k < 200; ++k) {
      const auto n = random_crossing(rng, "x").points.size();
      a += time_window_count(n, parse_data_type("T_1_2", Variant::kXy, stride));
      b += time_window_count(n, parse_data_type("T_2_1", Variant::kXy, stride));
    }
    CHECK(a == b);
  }
}

TEST_CASE("time windows are causal and cover the right steps") {
  auto inst = linear_crossing("c", 40);
  for (std::size_t i = 0; i < inst.points.size(); ++i) inst.points[i].x = static_cast<double>(i);
  const auto spec = parse_data_type("T_1_2", Variant::kXy, 3);
  const auto samples = window_time_based(inst, spec, fitted_identity());
  REQUIRE(samples.size() == 4);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    CHECK(s.input.rows() == 10);
    CHECK(s.target.rows() == 20);
    const double first_in = s.input(0, 0) * 1000.0;
    const double last_in = s.input(9, 0) * 1000.0;
    const double first_out = s.target(0, 0) * 1000.0;
    CHECK(first_in == doctest::Approx(3.0 * k));
    CHECK(first_out == doctest::Approx(last_in + 1.0));
    CHECK(std::all_of(s.mask.begin(), s.mask.end(), [](double m) { return m == 1.0; }));
  }
}

TEST_CASE("select_features columns") {
  std::vector<data::TrajectoryPoint> pts{{0.0, 1.0, 2.0, 15.0, 20.0}, {0.1, 3.0, 4.0, -5.0, 999.0}};
  const auto xyd = select_features(pts, Variant::kXyd);
  CHECK(xyd.cols() == 3);
  CHECK(xyd(0, 0) == 1.0);
  CHECK(xyd(0, 1) == 2.0);
  CHECK(xyd(0, 2) == 20.0);
  CHECK(xyd(1, 2) == kMaxVehicleDistanceM);
  const auto all = select_features(pts, Variant::kXyod);
  CHECK(all.cols() == 4);
  const auto xy = select_features(pts, Variant::kXy);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(xy(r, 0) == all(r, 0));
    CHECK(xy(r, 1) == all(r, 1));
  }
  CHECK(select_features(pts, Variant::kXyo)(0, 2) == 15.0);
}

TEST_CASE("distance split on a 6 m road") {
  data::ScenarioContext ctx;
  ctx.lane_width_m = 3.0;
  ctx.n_lanes = 2;
  const auto inst = linear_crossing("l", 61, ctx);  // 0.1 m per step
  CHECK(inst.points[distance_split_index(inst, 0.3)].y >= 1.8 - 1e-9);
  CHECK(inst.points[distance_split_index(inst, 0.3) - 1].y < 1.8 - 1e-9);
}

TEST_CASE("distance split of a constant-speed crossing") {
  data::ScenarioContext ctx;
  ctx.lane_width_m = 3.0;
  auto inst = constant_speed_crossing("c", ctx, 1.2);
  // Simulated directly: 0.12 m per step, y_k = 0.12 k, reaches 6.0 at k = 50.
  REQUIRE(inst.points.size() == 51);
  inst.points.pop_back();  // 50 points, last y = 5.88
  inst.points.back().y = 6.0;
  auto spec = parse_data_type("D_5");
  const auto s = split_distance_based(inst, spec, fitted_identity(), 30);
  CHECK(s.input.rows() == 25);
  CHECK(std::count(s.mask.begin(), s.mask.end(), 1.0) == 25);
  CHECK(s.target.rows() == 30);
  for (std::size_t r = 25; r < 30; ++r) {
    CHECK(s.target(r, 0) == 0.0);
    CHECK(s.target(r, 1) == 0.0);
  }
  const auto full = constant_speed_crossing("c51", ctx, 1.2);
  const auto s51 = split_distance_based(full, spec, fitted_identity(), 26);
  CHECK(s51.input.rows() == 25);
  CHECK(std::count(s51.mask.begin(), s51.mask.end(), 1.0) == 26);
}

TEST_CASE("degenerate distance splits") {
  data::ScenarioContext ctx;
  auto two = linear_crossing("two", 2, ctx);
  CHECK(distance_split_index(two, 0.5) == 1);
  auto jump = linear_crossing("j", 10, ctx);
  for (auto& p : jump.points) p.y = 0.0;
  CHECK_THROWS_AS(distance_split_index(jump, 0.5), DegenerateSplitError);
  auto start = linear_crossing("s", 10, ctx);
  for (auto& p : start.points) p.y = ctx.road_width_m();
  CHECK_THROWS_AS(distance_split_index(start, 0.5), DegenerateSplitError);
  std::vector<data::CrossingInstance> corpus{linear_crossing("ok", 30, ctx), jump};
  const auto set = build_samples(corpus, parse_data_type("D_5"),
                                 fit_normalization(corpus));
  CHECK(set.size() == 1);
  CHECK(set.dropped == 1);
}

TEST_CASE("distance-based counts are independent of p") {
  std::mt19937_64 rng(11);
  std::vector<data::CrossingInstance> corpus;
  for (int k = 0; k < 150; ++k) corpus.push_back(random_crossing(rng, std::to_string(k)));
  const auto norm = fit_normalization(corpus);
  std::set<std::size_t> counts;
  for (const char* dt : {"D_3", "D_5", "D_7"}) {
    const auto set = build_samples(corpus, parse_data_type(dt), norm);
    counts.insert(set.size());
    for (const auto& s : set.samples) {
      CHECK(s.target.rows() == set.output_steps);
      CHECK(s.mask.size() == set.output_steps);
    }
  }
  CHECK(counts.size() == 1);
  CHECK(*counts.begin() == corpus.size());
}

TEST_CASE("normalization") {
  NormalizationParams n;
  CHECK_THROWS_AS(n.apply(0, 1.0), StateError);
  CHECK_THROWS_AS(fit_normalization(std::vector<data::CrossingInstance>{}), StateError);

  n.min = {0.0, 0.0, 5.0, 0.0};
  n.max = {6.0, 6.0, 5.0, 100.0};
  n.fitted = true;
  CHECK(n.apply(0, 3.0) == 0.5);
  CHECK(n.apply(2, 5.0) == 0.5);
  CHECK(n.apply(2, -3.0) == 0.5);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  NormalizationParams w;
  w.min = {-50, -50, -50, -50};
  w.max = {50, 50, 50, 50};
  w.fitted = true;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    worst = std::max(worst, std::abs(w.invert(1, w.apply(1, v)) - v));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("fit uses only the given instances and samples stay in [0,1]") {
  std::mt19937_64 rng(23);
  std::vector<data::CrossingInstance> pool, test;
  for (int k = 0; k < 40; ++k) pool.push_back(random_crossing(rng, "p" + std::to_string(k)));
  for (int k = 0; k < 10; ++k) {
    auto inst = random_crossing(rng, "t" + std::to_string(k));
    for (auto& p : inst.points) p.x += 100.0;
    test.push_back(inst);
  }
  const auto norm = fit_normalization(pool);
  CHECK(norm.max[0] < 50.0);
  std::vector<data::CrossingInstance> all = pool;
  all.insert(all.end(), test.begin(), test.end());
  CHECK(fit_normalization(all).max[0] > 50.0);

  for (const char* dt : {"T_1_1", "D_5"}) {
    const auto set = build_samples(all, parse_data_type(dt), norm);
    for (const auto& s : set.samples) {
      for (double v : s.input.storage()) CHECK((v >= 0.0 && v <= 1.0));
      for (double v : s.target.storage()) CHECK((v >= 0.0 && v <= 1.0));
    }
  }
  // Inverting training targets recovers raw coordinates.
  const auto set = build_samples(pool, parse_data_type("T_1_1"), norm);
  const auto& inst = pool.front();
  const auto& s = set.samples.front();
  REQUIRE(s.instance_id == inst.id);
  for (std::size_t r = 0; r < s.target.rows(); ++r) {
    CHECK(std::abs(norm.invert(0, s.target(r, 0)) - inst.points[10 + r].x) < 1e-9);
    CHECK(std::abs(norm.invert(1, s.target(r, 1)) - inst.points[10 + r].y) < 1e-9);
  }
}

TEST_CASE("sample sets round trip through the container") {
  std::mt19937_64 rng(2);
  std::vector<data::CrossingInstance> corpus;
  for (int k = 0; k < 20; ++k) corpus.push_back(random_crossing(rng, "i" + std::to_string(k)));
  const auto norm = fit_normalization(corpus);
  for (const char* dt : {"T_1_1", "D_3"}) {
    const auto set = build_samples(corpus, parse_data_type(dt, Variant::kXyd, 2), norm);
    const auto bytes = numkit::encode_container(to_container(set));
    const auto back = from_container(numkit::decode_container(bytes));
    CHECK(back.spec == set.spec);
    CHECK(back.norm == set.norm);
    CHECK(back.output_steps == set.output_steps);
    REQUIRE(back.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
      CHECK(back.samples[i].instance_id == set.samples[i].instance_id);
      CHECK(back.samples[i].input == set.samples[i].input);
      CHECK(back.samples[i].target == set.samples[i].target);
      CHECK(back.samples[i].mask == set.samples[i].mask);
      CHECK(back.samples[i].context == set.samples[i].context);
    }
    CHECK(numkit::encode_container(to_container(back)) == bytes);
  }
}

TEST_CASE("splits") {
  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) ids.push_back("id" + std::to_string(i));
  const auto s = make_splits(ids, 7);
  CHECK(s.test_ids.size() == 20);
  REQUIRE(s.folds.size() == 8);
  for (const auto& f : s.folds) CHECK(f.size() == 10);
  CHECK(make_splits(ids, 7) == s);
  CHECK_FALSE(make_splits(ids, 8) == s);

  std::multiset<std::string> seen(s.test_ids.begin(), s.test_ids.end());
  for (const auto& f : s.folds) seen.insert(f.begin(), f.end());
  CHECK(seen.size() == 100);
  CHECK(std::set<std::string>(seen.begin(), seen.end()).size() == 100);

  const auto train = s.train_ids(3);
  CHECK(train.size() == 70);
  for (const auto& v : s.validation_ids(3)) {
    CHECK(std::find(train.begin(), train.end(), v) == train.end());
  }
  CHECK(split_from_json(to_json(s)) == s);

  std::vector<std::string> few(ids.begin(), ids.begin() + 9);
  CHECK_THROWS_AS(make_splits(few, 1), SplitError);
  auto dup = ids;
  dup[1] = dup[0];
  CHECK_THROWS_AS(make_splits(dup, 1), SplitError);
}
