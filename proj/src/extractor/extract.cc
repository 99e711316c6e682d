#include "crosspath/extractor/extract.h"

#include <ostream>

#include "crosspath/common/errors.h"
#include "crosspath/common/parallel.h"

namespace crosspath::extractor {

FunnelReport& FunnelReport::operator+=(const FunnelReport& other) {
  scenes += other.scenes;
  for (std::size_t k = 0; k < tracks.size(); ++k) tracks[k] += other.tracks[k];
  return *this;
}

std::array<bool, kCriteriaCount> evaluate_track(const Track& track, const data::SceneLog& scene,
                                                const CriteriaConfig& config) {
  return {criterion_1_front(track),
          criterion_2_both_sides(track),
          criterion_3_moving(track, config),
          criterion_4_angle(track, config),
          criterion_5_straight_ego(scene, config),
          criterion_6_distance(track, config),
          criterion_7_intersecting(track, scene, config)};
}

Extraction extract(const data::SceneLog& scene, const CriteriaConfig& config) {
  config.validate();
  data::validate(scene);
  Extraction out;
  out.funnel.scenes = 1;
  for (const auto& track : pedestrian_tracks(scene)) {
    const auto flags = evaluate_track(track, scene, config);
    ++out.funnel.tracks[0];
    bool alive = true;
    for (std::size_t k = 0; k < kCriteriaCount; ++k) {
      alive = alive && (!config.enabled[k] || flags[k]);
      if (alive) ++out.funnel.tracks[k + 1];
    }
    if (!alive) continue;
    CandidateEvent e;
    e.scene_id = scene.id;
    e.track_id = track.track_id;
    e.first_frame = track.points.front().frame;
    e.last_frame = track.points.back().frame;
    e.passed = flags;
    for (const auto& p : track.points) {
      e.trajectory.push_back(
          {p.t, p.x, p.y, forward_offset(p.ego, p.x, p.y), cross_side(p.ego, p.x, p.y)});
    }
    out.events.push_back(std::move(e));
  }
  return out;
}

Extraction extract_all(const std::vector<data::SceneLog>& scenes, const CriteriaConfig& config,
                       int jobs) {
  std::vector<Extraction> parts(scenes.size());
  parallel_for(scenes.size(), jobs, [&](std::size_t i) { parts[i] = extract(scenes[i], config); });
  Extraction out;
  for (auto& p : parts) {
    out.funnel += p.funnel;
    for (auto& e : p.events) out.events.push_back(std::move(e));
  }
  return out;
}

Json to_json(const CandidateEvent& e) {
  Json j;
  j["scene_id"] = e.scene_id;
  j["track_id"] = e.track_id;
  j["first_frame"] = e.first_frame;
  j["last_frame"] = e.last_frame;
  j["criteria"] = e.passed;
  Json pts = Json::array();
  for (const auto& p : e.trajectory) pts.push_back({p.t, p.x, p.y, p.forward, p.left});
  j["trajectory_columns"] = {"t", "x", "y", "forward", "left"};
  j["trajectory"] = std::move(pts);
  return j;
}

void write_events(std::ostream& out, const std::vector<CandidateEvent>& events) {
  for (const auto& e : events) out << to_json(e).dump() << '\n';
  if (!out) throw IoError("failed writing events");
}

void write_events(const std::string& path, const std::vector<CandidateEvent>& events) {
  auto out = data::open_output(path);
  write_events(out, events);
}

void write_funnel_csv(std::ostream& out, const FunnelReport& report) {
  out << "stage,criterion,tracks\n";
  out << "0,all_pedestrian_tracks," << report.tracks[0] << '\n';
  static constexpr const char* kNames[kCriteriaCount] = {
      "front", "both_sides", "moving", "angle", "straight_ego", "distance", "intersecting"};
  for (std::size_t k = 0; k < kCriteriaCount; ++k) {
    out << k + 1 << ',' << kNames[k] << ',' << report.tracks[k + 1] << '\n';
  }
  if (!out) throw IoError("failed writing funnel");
}

void write_funnel_csv(const std::string& path, const FunnelReport& report) {
  auto out = data::open_output(path);
  write_funnel_csv(out, report);
}

}  // namespace crosspath::extractor
