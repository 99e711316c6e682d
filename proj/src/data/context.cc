#include "crosspath/data/context.h"

#include <algorithm>

namespace crosspath::data {
namespace {

template <std::size_t N>
double scale(double v, const std::array<double, N>& levels) {
  const double lo = levels.front();
  const double hi = levels.back();
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

}  // namespace

ContextVector encode_context(const ScenarioContext& c) {
  ContextVector v{};
  switch (c.road_type) {
    case RoadType::kOneWay: v[kCtxRoadOneWay] = 1.0; break;
    case RoadType::kTwoWay: v[kCtxRoadTwoWay] = 1.0; break;
    case RoadType::kTwoWayMedian: v[kCtxRoadTwoWayMedian] = 1.0; break;
  }
  v[kCtxSpeed] = scale(c.speed_limit_kmh, kSpeedLevelsKmh);
  v[kCtxLaneWidth] = scale(c.lane_width_m, kLaneWidthLevelsM);
  v[kCtxArrival] = scale(c.arrival_rate_vph, kArrivalLevelsVph);
  v[kCtxSnow] = c.weather == Weather::kSnow ? 1.0 : 0.0;
  v[kCtxNight] = c.time_of_day == TimeOfDay::kNight ? 1.0 : 0.0;
  return v;
}

const char* context_variable_name(ContextVariable v) {
  switch (v) {
    case ContextVariable::kRoadType: return "road_type";
    case ContextVariable::kSpeedLimit: return "speed_limit";
    case ContextVariable::kLaneWidth: return "lane_width";
    case ContextVariable::kWeather: return "weather";
    case ContextVariable::kTimeOfDay: return "time_of_day";
    case ContextVariable::kArrivalRate: return "arrival_rate";
  }
  return "";
}

std::vector<std::size_t> context_dims(ContextVariable v) {
  switch (v) {
    case ContextVariable::kRoadType:
      return {kCtxRoadOneWay, kCtxRoadTwoWay, kCtxRoadTwoWayMedian};
    case ContextVariable::kSpeedLimit: return {kCtxSpeed};
    case ContextVariable::kLaneWidth: return {kCtxLaneWidth};
    case ContextVariable::kWeather: return {kCtxSnow};
    case ContextVariable::kTimeOfDay: return {kCtxNight};
    case ContextVariable::kArrivalRate: return {kCtxArrival};
  }
  return {};
}

}  // namespace crosspath::data
