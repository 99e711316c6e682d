#include "crosspath/extractor/criteria.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "crosspath/common/errors.h"

namespace crosspath::extractor {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
// Below this ego displacement over a track span the heading stands in for the
// direction of travel.
constexpr double kEgoStillM = 0.5;

struct Vec {
  double x = 0.0, y = 0.0;
};

Vec operator-(Vec a, Vec b) { return {a.x - b.x, a.y - b.y}; }
Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.y + b.y}; }
Vec operator*(double s, Vec a) { return {s * a.x, s * a.y}; }
double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }
double cross(Vec a, Vec b) { return a.x * b.y - a.y * b.x; }
double norm(Vec a) { return std::hypot(a.x, a.y); }

Vec heading_vec(double deg) { return {std::cos(deg * kDegToRad), std::sin(deg * kDegToRad)}; }
Vec ego_pos(const data::EgoPose& e) { return {e.x, e.y}; }

double point_segment(Vec p, Vec a, Vec b) {
  const Vec ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + s * ab));
}

double segment_segment(Vec a, Vec b, Vec c, Vec d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return 0.0;
  }
  return std::min({point_segment(a, c, d), point_segment(b, c, d), point_segment(c, a, b),
                   point_segment(d, a, b)});
}

}  // namespace

void CriteriaConfig::validate() const {
  if (!(angle_lo_deg > 0.0 && angle_lo_deg < angle_hi_deg && angle_hi_deg <= 180.0)) {
    throw ConfigError("angle window must satisfy 0 < lo < hi <= 180");
  }
  if (!(max_heading_change_deg > 0.0 && max_distance_m > 0.0 && slack_radius_m > 0.0 &&
        projection_horizon_s > 0.0 && min_displacement_m > 0.0 && min_speed_mps > 0.0)) {
    throw ConfigError("criteria limits must be positive");
  }
}

Json to_json(const CriteriaConfig& c) {
  Json j;
  j["angle_lo_deg"] = c.angle_lo_deg;
  j["angle_hi_deg"] = c.angle_hi_deg;
  j["max_heading_change_deg"] = c.max_heading_change_deg;
  j["max_distance_m"] = c.max_distance_m;
  j["slack_radius_m"] = c.slack_radius_m;
  j["projection_horizon_s"] = c.projection_horizon_s;
  j["min_displacement_m"] = c.min_displacement_m;
  j["min_speed_mps"] = c.min_speed_mps;
  j["enabled"] = c.enabled;
  return j;
}

CriteriaConfig criteria_from_json(const Json& j) {
  CriteriaConfig c;
  try {
    c.angle_lo_deg = j.value("angle_lo_deg", c.angle_lo_deg);
    c.angle_hi_deg = j.value("angle_hi_deg", c.angle_hi_deg);
    c.max_heading_change_deg = j.value("max_heading_change_deg", c.max_heading_change_deg);
    c.max_distance_m = j.value("max_distance_m", c.max_distance_m);
    c.slack_radius_m = j.value("slack_radius_m", c.slack_radius_m);
    c.projection_horizon_s = j.value("projection_horizon_s", c.projection_horizon_s);
    c.min_displacement_m = j.value("min_displacement_m", c.min_displacement_m);
    c.min_speed_mps = j.value("min_speed_mps", c.min_speed_mps);
    if (j.contains("enabled")) c.enabled = j.at("enabled").get<std::array<bool, kCriteriaCount>>();
  } catch (const Json::exception& e) {
    throw SchemaError("criteria", e.what());
  }
  c.validate();
  return c;
}

std::vector<Track> pedestrian_tracks(const data::SceneLog& scene) {
  std::vector<Track> tracks;
  std::map<std::string, std::size_t> index;
  for (std::size_t f = 0; f < scene.frames.size(); ++f) {
    const auto& frame = scene.frames[f];
    for (const auto& obj : frame.tracked) {
      if (obj.object_class != kPedestrianClass) continue;
      auto [it, fresh] = index.try_emplace(obj.track_id, tracks.size());
      if (fresh) tracks.push_back({obj.track_id, {}});
      tracks[it->second].points.push_back({f, frame.t, obj.x, obj.y, frame.ego_pose});
    }
  }
  return tracks;
}

double cross_side(const data::EgoPose& ego, double x, double y) {
  return cross(heading_vec(ego.heading_deg), Vec{x, y} - ego_pos(ego));
}

double forward_offset(const data::EgoPose& ego, double x, double y) {
  return dot(heading_vec(ego.heading_deg), Vec{x, y} - ego_pos(ego));
}

bool criterion_1_front(const Track& track) {
  return std::any_of(track.points.begin(), track.points.end(), [](const TrackPoint& p) {
    return forward_offset(p.ego, p.x, p.y) >= 0.0;
  });
}

bool criterion_2_both_sides(const Track& track) {
  bool left = false, right = false;
  for (const auto& p : track.points) {
    const double s = cross_side(p.ego, p.x, p.y);
    left = left || s > 0.0;
    right = right || s < 0.0;
  }
  return left && right;
}

bool criterion_3_moving(const Track& track, const CriteriaConfig& config) {
  if (track.points.size() < 2) return false;
  const auto& a = track.points.front();
  const auto& b = track.points.back();
  const double dt = b.t - a.t;
  if (!(dt > 0.0)) return false;
  const double net = std::hypot(b.x - a.x, b.y - a.y);
  return net >= config.min_displacement_m && net / dt >= config.min_speed_mps;
}

bool criterion_4_angle(const Track& track, const CriteriaConfig& config) {
  if (track.points.size() < 2) return false;
  const auto& a = track.points.front();
  const auto& b = track.points.back();
  const Vec ped{b.x - a.x, b.y - a.y};
  Vec ego = ego_pos(b.ego) - ego_pos(a.ego);
  if (norm(ego) < kEgoStillM) ego = heading_vec(a.ego.heading_deg);
  if (norm(ped) == 0.0) return false;
  const double c = std::clamp(dot(ped, ego) / (norm(ped) * norm(ego)), -1.0, 1.0);
  const double angle = std::acos(c) / kDegToRad;
  return angle >= config.angle_lo_deg && angle <= config.angle_hi_deg;
}

bool criterion_5_straight_ego(const data::SceneLog& scene, const CriteriaConfig& config) {
  double total = 0.0;
  for (std::size_t f = 1; f < scene.frames.size(); ++f) {
    total += data::wrap_degrees(scene.frames[f].ego_pose.heading_deg -
                                scene.frames[f - 1].ego_pose.heading_deg);
  }
  return std::abs(total) < config.max_heading_change_deg;
}

bool criterion_6_distance(const Track& track, const CriteriaConfig& config) {
  return std::any_of(track.points.begin(), track.points.end(), [&](const TrackPoint& p) {
    return std::hypot(p.x - p.ego.x, p.y - p.ego.y) < config.max_distance_m;
  });
}

// The ego path is its observed polyline plus, from every frame, a
// constant-velocity projection over the horizon. Projections from each frame
// (not only the last) keep a vehicle that brakes for the pedestrian eligible.
bool criterion_7_intersecting(const Track& track, const data::SceneLog& scene,
                              const CriteriaConfig& config) {
  const auto& frames = scene.frames;
  if (track.points.empty() || frames.empty()) return false;
  std::vector<std::pair<Vec, Vec>> ego_segments;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Vec p = ego_pos(frames[f].ego_pose);
    if (f + 1 < frames.size()) ego_segments.emplace_back(p, ego_pos(frames[f + 1].ego_pose));
    if (frames.size() < 2) break;
    const std::size_t a = f == 0 ? 0 : f - 1;
    const std::size_t b = f == 0 ? 1 : f;
    const double dt = frames[b].t - frames[a].t;
    const Vec v = (1.0 / dt) * (ego_pos(frames[b].ego_pose) - ego_pos(frames[a].ego_pose));
    ego_segments.emplace_back(p, p + config.projection_horizon_s * v);
  }
  if (ego_segments.empty()) ego_segments.emplace_back(ego_pos(frames[0].ego_pose),
                                                      ego_pos(frames[0].ego_pose));
  const auto& pts = track.points;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Vec a{pts[k].x, pts[k].y};
    const Vec b = k + 1 < pts.size() ? Vec{pts[k + 1].x, pts[k + 1].y} : a;
    for (const auto& [c, d] : ego_segments) {
      if (segment_segment(a, b, c, d) <= config.slack_radius_m) return true;
    }
  }
  return false;
}

}  // namespace crosspath::extractor
