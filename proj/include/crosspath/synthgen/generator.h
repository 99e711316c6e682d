#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "crosspath/common/seeds.h"
#include "crosspath/data/io.h"
#include "crosspath/data/types.h"

namespace crosspath::synthgen {

using data::Json;

// Level weights per scenario variable, in the order of the enumerated levels
// (see data/context.h).
struct Mixture {
  std::array<double, 3> road_type{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::array<double, 3> speed_limit{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::array<double, 3> lane_width{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::array<double, 2> weather{0.5, 0.5};      // clear, snow
  std::array<double, 2> time_of_day{0.5, 0.5};  // day, night
  std::array<double, 3> arrival_rate{1.0 / 3, 1.0 / 3, 1.0 / 3};

  friend bool operator==(const Mixture&, const Mixture&) = default;
};

// Behavioral coefficients. Fractional effects are relative speed changes at
// the top level of the scaled variable (speed limit 50, arrival 1100).
struct BehaviorParams {
  double base_speed_mean = 1.3;
  double base_speed_std = 0.15;
  double base_speed_min = 0.6;
  double base_speed_max = 2.2;
  double critical_gap_mean_s = 4.0;
  double critical_gap_std_s = 0.8;

  double speed_limit_effect = 0.10;
  double snow_speed_effect = -0.08;
  // Speed-up once past the road centre line: base + arrival and speed-limit
  // terms, blended in over transition_width_m.
  double far_half_speedup = 0.10;
  double far_half_arrival_effect = 0.35;
  double far_half_speed_limit_effect = 0.15;
  double transition_width_m = 0.25;

  double speed_noise = 0.03;      // AR(1) fractional speed jitter
  double speed_noise_rho = 0.9;
  double lateral_theta = 1.0;     // OU mean reversion, 1/s
  double lateral_sigma = 0.15;    // OU diffusion, m/sqrt(s)
  double night_noise_multiplier = 2.0;
  double snow_noise_multiplier = 2.0;

  double median_pause_prob = 0.5;
  double median_pause_min_s = 1.0;
  double median_pause_max_s = 3.0;

  // Per-crossing probability of one hesitation (slow-down) event.
  double hesitation_prob_snow = 0.25;
  double hesitation_prob_night = 0.2;
  double hesitation_speed_factor = 0.2;
  double hesitation_min_s = 0.6;
  double hesitation_max_s = 1.5;

  double head_amplitude_deg = 25.0;
  double head_proximity_gain_deg = 45.0;
  double head_proximity_scale_m = 20.0;
  double head_frequency_hz = 0.5;
  double head_noise_deg = 3.0;

  double vehicle_response = 0.15;  // speed-up when a vehicle is near
  double vehicle_response_distance_m = 15.0;
  double vehicle_speed_cv = 0.05;

  // Copy with every context-dependent coefficient neutralized.
  BehaviorParams without_context_effects() const;

  friend bool operator==(const BehaviorParams&, const BehaviorParams&) = default;
};

struct GeneratorConfig {
  int n_participants = 100;
  int scenarios_per_participant = 30;
  int n_lanes = 2;
  Mixture mixture;
  BehaviorParams behavior;
  std::uint64_t seed = 7;
  int max_attempts = 20;
  double max_duration_s = 60.0;
  // Horizon (s) over which vehicle arrivals are searched for an accepted gap.
  double gap_search_s = 120.0;

  std::size_t instance_count() const {
    return static_cast<std::size_t>(n_participants) *
           static_cast<std::size_t>(scenarios_per_participant);
  }
  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

Json to_json(const GeneratorConfig& c);
GeneratorConfig config_from_json(const Json& j);

struct Vehicle {
  int lane = 0;
  int direction = 1;        // +1 travels toward +x, -1 toward -x
  double lane_y = 0.0;      // lane centre, across-road coordinate
  double arrival_s = 0.0;   // time the vehicle crosses x = 0
  double speed_mps = 0.0;

  double x_at(double t) const { return direction * speed_mps * (t - arrival_s); }
};

// Poisson arrivals per lane over [t_begin, t_end). Per-lane arrivals are
// strictly increasing.
struct VehicleStream {
  std::vector<Vehicle> vehicles;  // grouped by lane, each lane in arrival order
  int n_lanes = 0;

  std::vector<double> arrivals(int lane) const;
  // Distance from (x, y) to the nearest vehicle at time t, or the no-vehicle
  // sentinel for an empty stream.
  double nearest_distance(double t, double x, double y) const;
};

// Lane geometry: centre line y of each lane and its travel direction.
struct LaneLayout {
  std::vector<double> centre_y;
  std::vector<int> direction;
  double median_begin_y = -1.0;  // first median edge, two_way_median only
  double median_end_y = -1.0;
};
LaneLayout lane_layout(const data::ScenarioContext& ctx);

VehicleStream sample_stream(const data::ScenarioContext& ctx, double t_begin, double t_end,
                            double speed_cv, Rng& rng);

struct Participant {
  double base_speed = 1.3;
  double critical_gap_s = 4.0;
};

Participant sample_participant(const BehaviorParams& b, Rng& rng);

// One crossing. Throws GenerationError when no acceptable crossing is found
// within config.max_attempts.
data::CrossingInstance generate_instance(const GeneratorConfig& config,
                                         const data::ScenarioContext& ctx,
                                         const Participant& participant, std::uint64_t seed,
                                         const std::string& id);

// Balanced scenario assignment: each variable's levels appear in exact
// proportion (to rounding) and are paired at random across variables.
std::vector<data::ScenarioContext> assign_contexts(const GeneratorConfig& config);

std::vector<data::CrossingInstance> generate(const GeneratorConfig& config, int jobs = 1);

// SHA-256 of the corpus's canonical JSONL serialization.
std::string corpus_checksum(const std::vector<data::CrossingInstance>& corpus);

inline constexpr std::uint64_t kBenchmarkSeed = 7;
GeneratorConfig benchmark_config(std::uint64_t seed = kBenchmarkSeed);

struct Corpus {
  std::vector<data::CrossingInstance> instances;
  std::string checksum;
};
Corpus benchmark_corpus(std::uint64_t seed = kBenchmarkSeed, int jobs = 1);

}  // namespace crosspath::synthgen
