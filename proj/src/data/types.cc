#include "crosspath/data/types.h"

#include <cmath>
#include <string>

#include "crosspath/common/errors.h"

namespace crosspath::data {

std::string_view to_string(RoadType v) {
  switch (v) {
    case RoadType::kOneWay: return "one_way";
    case RoadType::kTwoWay: return "two_way";
    case RoadType::kTwoWayMedian: return "two_way_median";
  }
  return "one_way";
}

std::string_view to_string(Weather v) {
  return v == Weather::kSnow ? "snow" : "clear";
}

std::string_view to_string(TimeOfDay v) {
  return v == TimeOfDay::kNight ? "night" : "day";
}

RoadType parse_road_type(std::string_view s) {
  if (s == "one_way") return RoadType::kOneWay;
  if (s == "two_way") return RoadType::kTwoWay;
  if (s == "two_way_median") return RoadType::kTwoWayMedian;
  throw SchemaError("road_type", "unknown value '" + std::string(s) + "'");
}

Weather parse_weather(std::string_view s) {
  if (s == "clear") return Weather::kClear;
  if (s == "snow") return Weather::kSnow;
  throw SchemaError("weather", "unknown value '" + std::string(s) + "'");
}

TimeOfDay parse_time_of_day(std::string_view s) {
  if (s == "day") return TimeOfDay::kDay;
  if (s == "night") return TimeOfDay::kNight;
  throw SchemaError("time_of_day", "unknown value '" + std::string(s) + "'");
}

double ScenarioContext::road_width_m() const {
  double w = n_lanes * lane_width_m;
  if (road_type == RoadType::kTwoWayMedian) w += kMedianWidthM;
  return w;
}

double wrap_degrees(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  w -= 180.0;
  return w >= 180.0 ? -180.0 : w;
}

void validate(const ScenarioContext& c) {
  if (!(c.speed_limit_kmh > 0.0)) throw SchemaError("speed_limit_kmh", "must be positive");
  if (!(c.lane_width_m > 0.0)) throw SchemaError("lane_width_m", "must be positive");
  if (!(c.arrival_rate_vph >= 0.0)) {
    throw SchemaError("arrival_rate_vph", "must be non-negative");
  }
  if (c.n_lanes < 1) throw SchemaError("n_lanes", "must be a positive integer");
}

void validate(const CrossingInstance& inst) {
  validate(inst.context);
  const auto& pts = inst.points;
  if (pts.size() < 2) throw SchemaError("points", "need at least 2 points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    if (!std::isfinite(p.t) || !std::isfinite(p.x) || !std::isfinite(p.y) ||
        !std::isfinite(p.o) || !std::isfinite(p.d)) {
      throw SchemaError("points", "non-finite value at index " + std::to_string(i));
    }
    if (p.o < -180.0 || p.o >= 180.0) {
      throw SchemaError("o", "head orientation outside [-180, 180) at index " +
                                 std::to_string(i));
    }
    if (p.d < 0.0) throw SchemaError("d", "negative distance at index " + std::to_string(i));
    if (i > 0 && std::abs(p.t - pts[i - 1].t - kTimeStepS) > 1e-6) {
      throw SchemaError("t", "non-uniform timestep at index " + std::to_string(i));
    }
  }
  if (std::abs(pts.front().y) > kEndpointToleranceM) {
    throw SchemaError("y", "first point must start at the curb (y ~ 0)");
  }
  if (pts.back().y < inst.context.road_width_m() - kEndpointToleranceM) {
    throw SchemaError("y", "last point does not reach the far curb");
  }
}

void validate(const SceneLog& scene) {
  if (!(scene.frame_rate_hz > 0.0)) throw SchemaError("frame_rate_hz", "must be positive");
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    const auto& f = scene.frames[i];
    if (i > 0 && !(f.t > scene.frames[i - 1].t)) {
      throw SchemaError("t", "timestamps not strictly increasing at frame " +
                                 std::to_string(i));
    }
    const double h = f.ego_pose.heading_deg;
    if (!(h >= -180.0 && h < 180.0)) {
      throw SchemaError("heading", "ego heading outside [-180, 180) at frame " +
                                       std::to_string(i));
    }
  }
}

bool normalize_direction(CrossingInstance& inst) {
  if (inst.points.size() < 2 || inst.points.back().y >= inst.points.front().y) {
    return false;
  }
  const double width = inst.context.road_width_m();
  for (auto& p : inst.points) {
    p.y = width - p.y;
    p.o = wrap_degrees(-p.o);
  }
  return true;
}

}  // namespace crosspath::data
