#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "crosspath/common/errors.h"
#include "crosspath/data/context.h"
#include "crosspath/data/io.h"

using namespace crosspath;
using namespace crosspath::data;

namespace {

CrossingInstance straight_crossing(const std::string& id, const ScenarioContext& ctx,
                                   double speed = 1.3) {
  CrossingInstance inst;
  inst.id = id;
  inst.context = ctx;
  const double width = ctx.road_width_m();
  double y = 0.0;
  for (int i = 0;; ++i) {
    inst.points.push_back({i * kTimeStepS, 0.01 * i, std::min(y, width), 0.0, 40.0});
    if (y >= width) break;
    y += speed * kTimeStepS;
  }
  return inst;
}

CrossingInstance random_instance(std::mt19937_64& rng, int idx) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScenarioContext c;
  c.road_type = kRoadTypes[rng() % 3];
  c.speed_limit_kmh = kSpeedLevelsKmh[rng() % 3];
  c.lane_width_m = kLaneWidthLevelsM[rng() % 3];
  c.weather = rng() % 2 ? Weather::kSnow : Weather::kClear;
  c.time_of_day = rng() % 2 ? TimeOfDay::kNight : TimeOfDay::kDay;
  c.arrival_rate_vph = kArrivalLevelsVph[rng() % 3];
  c.n_lanes = 2;
  CrossingInstance inst = straight_crossing("p" + std::to_string(idx), c, 0.8 + u(rng));
  for (auto& p : inst.points) {
    p.x = u(rng) * 3.0 - 1.5;
    p.o = wrap_degrees(u(rng) * 360.0);
    p.d = u(rng) < 0.2 ? kNoVehicleDistanceM : u(rng) * 80.0;
  }
  return inst;
}

}  // namespace

TEST_CASE("road width includes median only on two_way_median") {
  ScenarioContext c;
  c.lane_width_m = 3.0;
  c.n_lanes = 2;
  CHECK(c.road_width_m() == doctest::Approx(6.0));
  c.road_type = RoadType::kTwoWayMedian;
  CHECK(c.road_width_m() == doctest::Approx(8.0));
}

TEST_CASE("encode_context minimum levels") {
  ScenarioContext c{RoadType::kOneWay, 30, 2.5, Weather::kClear, TimeOfDay::kDay, 530, 2};
  const auto v = encode_context(c);
  const ContextVector expected{1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  CHECK(v == expected);
}

TEST_CASE("encode_context maximum levels") {
  ScenarioContext c{RoadType::kTwoWayMedian, 50, 3.0, Weather::kSnow, TimeOfDay::kNight,
                    1100, 2};
  const auto v = encode_context(c);
  const ContextVector expected{0, 0, 1, 1, 1, 1, 1, 1, 0, 0};
  CHECK(v == expected);
}

TEST_CASE("encode_context mid levels") {
  ScenarioContext c{RoadType::kTwoWay, 40, 2.75, Weather::kClear, TimeOfDay::kNight, 750, 2};
  const auto v = encode_context(c);
  CHECK(v[kCtxRoadTwoWay] == 1.0);
  CHECK(v[kCtxSpeed] == doctest::Approx(0.5));
  CHECK(v[kCtxLaneWidth] == doctest::Approx(0.5));
  CHECK(v[kCtxArrival] == doctest::Approx(0.3860).epsilon(1e-4));
  CHECK(v[kCtxSnow] == 0.0);
  CHECK(v[kCtxNight] == 1.0);
}

TEST_CASE("encode_context is injective over the scenario grid") {
  std::set<ContextVector> seen;
  for (auto r : kRoadTypes)
    for (double s : kSpeedLevelsKmh)
      for (double w : kLaneWidthLevelsM)
        for (auto we : {Weather::kClear, Weather::kSnow})
          for (auto td : {TimeOfDay::kDay, TimeOfDay::kNight})
            for (double a : kArrivalLevelsVph) seen.insert(encode_context({r, s, w, we, td, a, 2}));
  CHECK(seen.size() == 324);
}

TEST_CASE("context variables cover every encoded slot once") {
  std::set<std::size_t> dims;
  for (std::size_t i = 0; i < kContextVariableCount; ++i) {
    for (auto d : context_dims(static_cast<ContextVariable>(i))) CHECK(dims.insert(d).second);
  }
  CHECK(dims.size() == 8);
}

TEST_CASE("wrap_degrees") {
  CHECK(wrap_degrees(180.0) == -180.0);
  CHECK(wrap_degrees(-180.0) == -180.0);
  CHECK(wrap_degrees(190.0) == doctest::Approx(-170.0));
  CHECK(wrap_degrees(-190.0) == doctest::Approx(170.0));
  CHECK(wrap_degrees(720.0) == 0.0);
}

TEST_CASE("instance round trip is byte identical") {
  std::mt19937_64 rng(3);
  std::vector<CrossingInstance> insts;
  for (int i = 0; i < 100; ++i) insts.push_back(random_instance(rng, i));
  std::ostringstream first;
  write_instances(first, insts);
  std::istringstream in(first.str());
  const auto back = read_instances(in);
  REQUIRE(back.size() == insts.size());
  CHECK(back == insts);
  std::ostringstream second;
  write_instances(second, back);
  CHECK(second.str() == first.str());
}

TEST_CASE("header line is written and checked") {
  std::ostringstream out;
  write_instances(out, std::vector<CrossingInstance>{});
  CHECK(out.str() == "{\"schema\":\"crosspath/1\"}\n");
  std::istringstream bad("{\"schema\":\"crosspath/9\"}\n");
  CHECK_THROWS_AS(read_instances(bad), SchemaError);
}

TEST_CASE("empty input yields empty collection") {
  std::istringstream empty("");
  CHECK(read_instances(empty).empty());
  std::istringstream scenes("");
  CHECK(read_scenes(scenes).empty());
}

TEST_CASE("non-uniform timestep is a schema error") {
  ScenarioContext c;
  auto inst = straight_crossing("gap", c);
  for (std::size_t i = 3; i < inst.points.size(); ++i) inst.points[i].t += 0.1;
  std::ostringstream out;
  write_instances(out, std::vector<CrossingInstance>{inst});
  std::istringstream in(out.str());
  try {
    read_instances(in);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "t");
    CHECK(std::string(e.what()).find("non-uniform timestep") != std::string::npos);
  }
}

TEST_CASE("malformed line reports its line number") {
  ScenarioContext c;
  std::ostringstream out;
  write_instances(out, std::vector<CrossingInstance>{straight_crossing("a", c)});
  std::istringstream in(out.str() + "{not json\n");
  try {
    read_instances(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("missing field names the field") {
  std::istringstream in("{\"id\":\"x\",\"points\":[]}\n");
  try {
    read_instances(in);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "context");
  }
}

TEST_CASE("instance invariants") {
  ScenarioContext c;
  auto inst = straight_crossing("ok", c);
  CHECK_NOTHROW(validate(inst));

  auto short_inst = inst;
  short_inst.points.resize(1);
  CHECK_THROWS_AS(validate(short_inst), SchemaError);

  auto unfinished = inst;
  unfinished.points.resize(unfinished.points.size() / 2);
  CHECK_THROWS_AS(validate(unfinished), SchemaError);

  auto late_start = inst;
  for (auto& p : late_start.points) p.y += 0.5;
  CHECK_THROWS_AS(validate(late_start), SchemaError);

  auto bad_o = inst;
  bad_o.points[2].o = 180.0;
  CHECK_THROWS_AS(validate(bad_o), SchemaError);
}

TEST_CASE("reverse crossings are mirrored on ingest") {
  ScenarioContext c;
  auto inst = straight_crossing("rev", c);
  const auto canonical = inst;
  const double width = c.road_width_m();
  for (auto& p : inst.points) {
    p.y = width - p.y;
    p.o = wrap_degrees(-p.o + 30.0);
  }
  CHECK(normalize_direction(inst));
  for (std::size_t i = 0; i < inst.points.size(); ++i) {
    CHECK(inst.points[i].y == doctest::Approx(canonical.points[i].y));
    CHECK(inst.points[i].o == doctest::Approx(-30.0));
  }
  CHECK_FALSE(normalize_direction(inst));
  CHECK_NOTHROW(validate(inst));
}

TEST_CASE("scene log round trip and invariants") {
  SceneLog s;
  s.id = "scene-1";
  s.frame_rate_hz = 2.0;
  for (int i = 0; i < 5; ++i) {
    SceneFrame f;
    f.t = 0.5 * i;
    f.ego_pose = {1.0 * i, 0.0, 0.0};
    f.tracked.push_back({"ped-1", "pedestrian", 10.0, -5.0 + i});
    f.tracked.push_back({"car-2", "car", 20.0, 3.0});
    s.frames.push_back(f);
  }
  std::ostringstream out;
  write_scenes(out, std::vector<SceneLog>{s});
  std::istringstream in(out.str());
  const auto back = read_scenes(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == s);

  auto bad = s;
  bad.frames[2].t = bad.frames[1].t;
  CHECK_THROWS_AS(validate(bad), SchemaError);
  bad = s;
  bad.frames[0].ego_pose.heading_deg = 180.0;
  CHECK_THROWS_AS(validate(bad), SchemaError);
}

TEST_CASE("file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "crosspath_data_test";
  std::filesystem::remove_all(dir);
  std::mt19937_64 rng(9);
  std::vector<CrossingInstance> insts{random_instance(rng, 0), random_instance(rng, 1)};
  write_instances(dir / "sub" / "x.jsonl", insts);
  CHECK(read_instances(dir / "sub" / "x.jsonl") == insts);
  CHECK_THROWS_AS(read_instances(dir / "missing.jsonl"), IoError);
  std::filesystem::remove_all(dir);
}
