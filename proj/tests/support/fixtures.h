#pragma once

// Hand-built crossing instances for tests.

#include <algorithm>
#include <random>
#include <string>

#include "crosspath/data/types.h"

namespace crosspath::testing {

// Constant-speed straight crossing: y advances `speed * 0.1` per step until
// it reaches the road width, where it is clamped for the final point.
inline data::CrossingInstance constant_speed_crossing(const std::string& id,
                                                      const data::ScenarioContext& ctx,
                                                      double speed) {
  data::CrossingInstance inst;
  inst.id = id;
  inst.context = ctx;
  const double width = ctx.road_width_m();
  for (int i = 0;; ++i) {
    const double y = std::min(speed * data::kTimeStepS * i, width);
    inst.points.push_back({i * data::kTimeStepS, 0.02 * i, y, 0.0, 30.0 + i});
    if (y >= width - 1e-12) break;
  }
  return inst;
}

// Exactly `n` points, y linear from 0 to the road width.
inline data::CrossingInstance linear_crossing(const std::string& id, std::size_t n,
                                              const data::ScenarioContext& ctx = {}) {
  data::CrossingInstance inst;
  inst.id = id;
  inst.context = ctx;
  const double width = ctx.road_width_m();
  for (std::size_t i = 0; i < n; ++i) {
    const double y = width * static_cast<double>(i) / static_cast<double>(n - 1);
    inst.points.push_back({i * data::kTimeStepS, 0.0, y, 0.0, data::kNoVehicleDistanceM});
  }
  return inst;
}

inline data::CrossingInstance random_crossing(std::mt19937_64& rng, const std::string& id) {
  std::uniform_int_distribution<std::size_t> len(5, 90);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  data::ScenarioContext ctx;
  ctx.lane_width_m = 2.5 + 0.25 * static_cast<double>(rng() % 3);
  ctx.road_type = static_cast<data::RoadType>(rng() % 3);
  auto inst = linear_crossing(id, len(rng), ctx);
  for (auto& p : inst.points) {
    p.x = u(rng) * 2.0 - 1.0;
    p.o = u(rng) * 120.0 - 60.0;
    p.d = u(rng) < 0.1 ? data::kNoVehicleDistanceM : u(rng) * 90.0;
  }
  return inst;
}

}  // namespace crosspath::testing
