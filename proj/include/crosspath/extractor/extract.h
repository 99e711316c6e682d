#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "crosspath/extractor/criteria.h"

namespace crosspath::extractor {

struct EventPoint {
  double t = 0.0;
  double x = 0.0;        // global frame
  double y = 0.0;
  double forward = 0.0;  // ego frame: along the ego heading
  double left = 0.0;     // ego frame: to the ego's left

  friend bool operator==(const EventPoint&, const EventPoint&) = default;
};

struct CandidateEvent {
  std::string scene_id;
  std::string track_id;
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;
  std::array<bool, kCriteriaCount> passed{};
  std::vector<EventPoint> trajectory;

  friend bool operator==(const CandidateEvent&, const CandidateEvent&) = default;
};

// tracks[0] counts every pedestrian track; tracks[k] the tracks still in after
// criterion k (criteria applied in order, disabled ones pass everything).
struct FunnelReport {
  std::size_t scenes = 0;
  std::array<std::size_t, kCriteriaCount + 1> tracks{};

  FunnelReport& operator+=(const FunnelReport& other);
  friend bool operator==(const FunnelReport&, const FunnelReport&) = default;
};

struct Extraction {
  std::vector<CandidateEvent> events;
  FunnelReport funnel;
};

// Flags for every criterion of one track, evaluated independently.
std::array<bool, kCriteriaCount> evaluate_track(const Track& track, const data::SceneLog& scene,
                                                const CriteriaConfig& config);

// Validates the scene (SchemaError) and applies the criteria to each track.
Extraction extract(const data::SceneLog& scene, const CriteriaConfig& config = {});
// Scenes in parallel; events keep scene order.
Extraction extract_all(const std::vector<data::SceneLog>& scenes, const CriteriaConfig& config,
                       int jobs = 1);

Json to_json(const CandidateEvent& e);
void write_events(std::ostream& out, const std::vector<CandidateEvent>& events);
void write_events(const std::string& path, const std::vector<CandidateEvent>& events);
void write_funnel_csv(std::ostream& out, const FunnelReport& report);
void write_funnel_csv(const std::string& path, const FunnelReport& report);

}  // namespace crosspath::extractor
