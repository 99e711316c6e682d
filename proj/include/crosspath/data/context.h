#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "crosspath/data/types.h"

namespace crosspath::data {

inline constexpr std::size_t kContextSize = 10;

// Layout of the encoded context vector.
inline constexpr std::size_t kCtxRoadOneWay = 0;
inline constexpr std::size_t kCtxRoadTwoWay = 1;
inline constexpr std::size_t kCtxRoadTwoWayMedian = 2;
inline constexpr std::size_t kCtxSpeed = 3;
inline constexpr std::size_t kCtxLaneWidth = 4;
inline constexpr std::size_t kCtxArrival = 5;
inline constexpr std::size_t kCtxSnow = 6;
inline constexpr std::size_t kCtxNight = 7;

// Enumerated scenario levels; numeric ranges are the scaling bounds.
inline constexpr std::array<double, 3> kSpeedLevelsKmh = {30.0, 40.0, 50.0};
inline constexpr std::array<double, 3> kLaneWidthLevelsM = {2.5, 2.75, 3.0};
inline constexpr std::array<double, 3> kArrivalLevelsVph = {530.0, 750.0, 1100.0};
inline constexpr std::array<RoadType, 3> kRoadTypes = {
    RoadType::kOneWay, RoadType::kTwoWay, RoadType::kTwoWayMedian};

using ContextVector = std::array<double, kContextSize>;

// Scaled numerics are clamped to [0, 1] so free-valued ingest data stays in
// the range the network was trained on.
ContextVector encode_context(const ScenarioContext& c);

// The six scenario variables, in the order used for attribution.
enum class ContextVariable { kRoadType, kSpeedLimit, kLaneWidth, kWeather, kTimeOfDay, kArrivalRate };
inline constexpr std::size_t kContextVariableCount = 6;

const char* context_variable_name(ContextVariable v);
// Encoded dimensions that carry the given variable.
std::vector<std::size_t> context_dims(ContextVariable v);

}  // namespace crosspath::data
