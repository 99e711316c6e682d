#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "crosspath/data/io.h"
#include "crosspath/data/types.h"

namespace crosspath::extractor {

using data::Json;

inline constexpr std::size_t kCriteriaCount = 7;
inline constexpr std::string_view kPedestrianClass = "pedestrian";

struct CriteriaConfig {
  double angle_lo_deg = 45.0;
  double angle_hi_deg = 135.0;
  double max_heading_change_deg = 60.0;
  double max_distance_m = 50.0;
  double slack_radius_m = 3.0;
  double projection_horizon_s = 5.0;
  double min_displacement_m = 1.0;
  double min_speed_mps = 0.3;
  std::array<bool, kCriteriaCount> enabled{true, true, true, true, true, true, true};

  // Throws ConfigError.
  void validate() const;
  friend bool operator==(const CriteriaConfig&, const CriteriaConfig&) = default;
};

Json to_json(const CriteriaConfig& c);
CriteriaConfig criteria_from_json(const Json& j);

// One pedestrian track aligned with the ego pose of each frame it appears in.
struct TrackPoint {
  std::size_t frame = 0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  data::EgoPose ego;
};

struct Track {
  std::string track_id;
  std::vector<TrackPoint> points;
};

// Pedestrian tracks of a scene, ordered by first appearance.
std::vector<Track> pedestrian_tracks(const data::SceneLog& scene);

bool criterion_1_front(const Track& track);
bool criterion_2_both_sides(const Track& track);
bool criterion_3_moving(const Track& track, const CriteriaConfig& config = {});
bool criterion_4_angle(const Track& track, const CriteriaConfig& config = {});
bool criterion_5_straight_ego(const data::SceneLog& scene, const CriteriaConfig& config = {});
bool criterion_6_distance(const Track& track, const CriteriaConfig& config = {});
bool criterion_7_intersecting(const Track& track, const data::SceneLog& scene,
                              const CriteriaConfig& config = {});

// Signed angle helpers shared with tests. Heading 0 points along +x,
// counterclockwise positive.
double cross_side(const data::EgoPose& ego, double x, double y);
double forward_offset(const data::EgoPose& ego, double x, double y);

}  // namespace crosspath::extractor
