#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace crosspath::data {

inline constexpr double kTimeStepS = 0.1;
inline constexpr double kNoVehicleDistanceM = 999.0;
inline constexpr double kMedianWidthM = 2.0;
inline constexpr double kEndpointToleranceM = 0.05;
inline constexpr std::string_view kSchemaVersion = "crosspath/1";

enum class RoadType { kOneWay, kTwoWay, kTwoWayMedian };
enum class Weather { kClear, kSnow };
enum class TimeOfDay { kDay, kNight };

std::string_view to_string(RoadType v);
std::string_view to_string(Weather v);
std::string_view to_string(TimeOfDay v);
RoadType parse_road_type(std::string_view s);
Weather parse_weather(std::string_view s);
TimeOfDay parse_time_of_day(std::string_view s);

// One recorded step of a crossing in the canonical frame: x along the road
// axis, y across it (0 at the departure curb, increasing), o head orientation
// in degrees relative to the crossing direction, d distance to the nearest
// vehicle (kNoVehicleDistanceM when none).
struct TrajectoryPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double o = 0.0;
  double d = kNoVehicleDistanceM;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct ScenarioContext {
  RoadType road_type = RoadType::kOneWay;
  double speed_limit_kmh = 30.0;
  double lane_width_m = 2.5;
  Weather weather = Weather::kClear;
  TimeOfDay time_of_day = TimeOfDay::kDay;
  double arrival_rate_vph = 530.0;
  int n_lanes = 2;

  double road_width_m() const;
  friend bool operator==(const ScenarioContext&, const ScenarioContext&) = default;
};

struct CrossingInstance {
  std::string id;
  std::vector<TrajectoryPoint> points;
  ScenarioContext context;

  friend bool operator==(const CrossingInstance&, const CrossingInstance&) = default;
};

struct EgoPose {
  double x = 0.0;
  double y = 0.0;
  double heading_deg = 0.0;  // [-180, 180), 0 = +x axis, counterclockwise

  friend bool operator==(const EgoPose&, const EgoPose&) = default;
};

struct TrackedObject {
  std::string track_id;
  std::string object_class;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const TrackedObject&, const TrackedObject&) = default;
};

struct SceneFrame {
  double t = 0.0;
  EgoPose ego_pose;
  std::vector<TrackedObject> tracked;

  friend bool operator==(const SceneFrame&, const SceneFrame&) = default;
};

struct SceneLog {
  std::string id;
  double frame_rate_hz = 10.0;
  std::vector<SceneFrame> frames;

  friend bool operator==(const SceneLog&, const SceneLog&) = default;
};

// Wraps an angle in degrees into [-180, 180).
double wrap_degrees(double deg);

// Schema checks; throw SchemaError naming the offending field.
void validate(const ScenarioContext& c);
void validate(const CrossingInstance& inst);
void validate(const SceneLog& scene);

// Mirrors an instance recorded from the far curb so y increases from 0.
// Returns true when the instance was mirrored.
bool normalize_direction(CrossingInstance& inst);

}  // namespace crosspath::data
