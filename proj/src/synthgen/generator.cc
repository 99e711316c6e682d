#include "crosspath/synthgen/generator.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "crosspath/common/checksum.h"
#include "crosspath/common/errors.h"
#include "crosspath/common/parallel.h"
#include "crosspath/data/context.h"

namespace crosspath::synthgen {
namespace {

constexpr double kDt = data::kTimeStepS;
constexpr double kClearanceS = 1.0;     // a passed vehicle no longer blocks the gap
constexpr double kStreamMarginS = 60.0;

double scaled(double v, const std::array<double, 3>& levels) {
  return std::clamp((v - levels.front()) / (levels.back() - levels.front()), 0.0, 1.0);
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

template <std::size_t N>
void check_weights(const std::array<double, N>& w, const char* name) {
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw ConfigError(std::string("mixture.") + name + " has a negative weight");
    sum += v;
  }
  if (!(sum > 0.0)) throw ConfigError(std::string("mixture.") + name + " weights sum to zero");
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

// Exact level counts by largest remainder, then a seeded shuffle.
template <typename T, std::size_t N>
std::vector<T> balanced_levels(const std::array<double, N>& weights, const std::array<T, N>& levels,
                               std::size_t n, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::array<std::size_t, N> counts{};
  std::array<double, N> rest{};
  std::size_t used = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const double exact = weights[i] / total * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    rest[i] = exact - std::floor(exact);
    used += counts[i];
  }
  while (used < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < N; ++i) {
      if (rest[i] > rest[best]) best = i;
    }
    ++counts[best];
    rest[best] = -1.0;
    ++used;
  }
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < N; ++i) out.insert(out.end(), counts[i], levels[i]);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

template <std::size_t N>
Json array_json(const std::array<double, N>& a) {
  Json j = Json::array();
  for (double v : a) j.push_back(v);
  return j;
}

template <std::size_t N>
void read_array(const Json& j, const char* key, std::array<double, N>& out) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != N) throw SchemaError(key, "expected " + std::to_string(N) + " weights");
  std::copy(v.begin(), v.end(), out.begin());
}

// Earliest start time in [0, horizon] at which every lane met before the
// road centre is free for the participant's critical gap. Negative when no
// such time exists.
double accepted_gap_start(const VehicleStream& stream, const LaneLayout& layout,
                          double critical_gap, double horizon) {
  std::vector<int> lanes;
  for (std::size_t l = 0; l < layout.direction.size(); ++l) {
    if (layout.direction[l] == layout.direction.front()) lanes.push_back(static_cast<int>(l));
  }
  std::vector<double> candidates{0.0};
  for (const auto& v : stream.vehicles) {
    if (std::find(lanes.begin(), lanes.end(), v.lane) == lanes.end()) continue;
    if (v.arrival_s + kClearanceS >= 0.0 && v.arrival_s + kClearanceS <= horizon) {
      candidates.push_back(v.arrival_s + kClearanceS);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  for (double tau : candidates) {
    bool free = true;
    for (const auto& v : stream.vehicles) {
      if (std::find(lanes.begin(), lanes.end(), v.lane) == lanes.end()) continue;
      if (v.arrival_s > tau - kClearanceS && v.arrival_s < tau + critical_gap) {
        free = false;
        break;
      }
    }
    if (free) return tau;
  }
  return -1.0;
}

}  // namespace

BehaviorParams BehaviorParams::without_context_effects() const {
  BehaviorParams b = *this;
  b.speed_limit_effect = 0.0;
  b.snow_speed_effect = 0.0;
  b.far_half_speedup = 0.0;
  b.far_half_arrival_effect = 0.0;
  b.far_half_speed_limit_effect = 0.0;
  b.night_noise_multiplier = 1.0;
  b.snow_noise_multiplier = 1.0;
  b.median_pause_prob = 0.0;
  b.hesitation_prob_snow = 0.0;
  b.hesitation_prob_night = 0.0;
  b.vehicle_response = 0.0;
  b.head_proximity_gain_deg = 0.0;
  return b;
}

void GeneratorConfig::validate() const {
  if (n_participants < 1) throw ConfigError("n_participants must be positive");
  if (scenarios_per_participant < 1) throw ConfigError("scenarios_per_participant must be positive");
  if (n_lanes < 1) throw ConfigError("n_lanes must be positive");
  if (max_attempts < 1) throw ConfigError("max_attempts must be positive");
  if (!(max_duration_s > 0.0)) throw ConfigError("max_duration_s must be positive");
  if (!(gap_search_s >= 0.0)) throw ConfigError("gap_search_s must be non-negative");
  check_weights(mixture.road_type, "road_type");
  check_weights(mixture.speed_limit, "speed_limit");
  check_weights(mixture.lane_width, "lane_width");
  check_weights(mixture.weather, "weather");
  check_weights(mixture.time_of_day, "time_of_day");
  check_weights(mixture.arrival_rate, "arrival_rate");
  const auto& b = behavior;
  if (!(b.base_speed_mean > 0.0)) throw ConfigError("base_speed_mean must be positive");
  if (!(b.base_speed_std >= 0.0)) throw ConfigError("base_speed_std must be non-negative");
  if (!(b.base_speed_min > 0.0 && b.base_speed_min <= b.base_speed_max)) {
    throw ConfigError("base speed bounds must satisfy 0 < min <= max");
  }
  if (!(b.critical_gap_std_s >= 0.0)) throw ConfigError("critical_gap_std_s must be non-negative");
  check_probability(b.median_pause_prob, "median_pause_prob");
  check_probability(b.hesitation_prob_snow, "hesitation_prob_snow");
  check_probability(b.hesitation_prob_night, "hesitation_prob_night");
  check_probability(b.speed_noise_rho, "speed_noise_rho");
  if (!(b.hesitation_speed_factor >= 0.0 && b.hesitation_speed_factor <= 1.0)) {
    throw ConfigError("hesitation_speed_factor must lie in [0, 1]");
  }
  if (!(b.median_pause_min_s >= 0.0 && b.median_pause_min_s <= b.median_pause_max_s)) {
    throw ConfigError("median pause bounds must satisfy 0 <= min <= max");
  }
  if (!(b.hesitation_min_s >= 0.0 && b.hesitation_min_s <= b.hesitation_max_s)) {
    throw ConfigError("hesitation bounds must satisfy 0 <= min <= max");
  }
  if (!(b.speed_noise >= 0.0 && b.lateral_sigma >= 0.0 && b.head_noise_deg >= 0.0 &&
        b.vehicle_speed_cv >= 0.0)) {
    throw ConfigError("noise scales must be non-negative");
  }
  if (!(b.lateral_theta >= 0.0)) throw ConfigError("lateral_theta must be non-negative");
  if (!(b.transition_width_m > 0.0)) throw ConfigError("transition_width_m must be positive");
  if (!(b.head_proximity_scale_m > 0.0 && b.vehicle_response_distance_m > 0.0)) {
    throw ConfigError("distance scales must be positive");
  }
  if (!(b.night_noise_multiplier >= 0.0 && b.snow_noise_multiplier >= 0.0)) {
    throw ConfigError("noise multipliers must be non-negative");
  }
}

Json to_json(const GeneratorConfig& c) {
  const auto& b = c.behavior;
  Json beh;
  beh["base_speed_mean"] = b.base_speed_mean;
  beh["base_speed_std"] = b.base_speed_std;
  beh["base_speed_min"] = b.base_speed_min;
  beh["base_speed_max"] = b.base_speed_max;
  beh["critical_gap_mean_s"] = b.critical_gap_mean_s;
  beh["critical_gap_std_s"] = b.critical_gap_std_s;
  beh["speed_limit_effect"] = b.speed_limit_effect;
  beh["snow_speed_effect"] = b.snow_speed_effect;
  beh["far_half_speedup"] = b.far_half_speedup;
  beh["far_half_arrival_effect"] = b.far_half_arrival_effect;
  beh["far_half_speed_limit_effect"] = b.far_half_speed_limit_effect;
  beh["transition_width_m"] = b.transition_width_m;
  beh["speed_noise"] = b.speed_noise;
  beh["speed_noise_rho"] = b.speed_noise_rho;
  beh["lateral_theta"] = b.lateral_theta;
  beh["lateral_sigma"] = b.lateral_sigma;
  beh["night_noise_multiplier"] = b.night_noise_multiplier;
  beh["snow_noise_multiplier"] = b.snow_noise_multiplier;
  beh["median_pause_prob"] = b.median_pause_prob;
  beh["median_pause_min_s"] = b.median_pause_min_s;
  beh["median_pause_max_s"] = b.median_pause_max_s;
  beh["hesitation_prob_snow"] = b.hesitation_prob_snow;
  beh["hesitation_prob_night"] = b.hesitation_prob_night;
  beh["hesitation_speed_factor"] = b.hesitation_speed_factor;
  beh["hesitation_min_s"] = b.hesitation_min_s;
  beh["hesitation_max_s"] = b.hesitation_max_s;
  beh["head_amplitude_deg"] = b.head_amplitude_deg;
  beh["head_proximity_gain_deg"] = b.head_proximity_gain_deg;
  beh["head_proximity_scale_m"] = b.head_proximity_scale_m;
  beh["head_frequency_hz"] = b.head_frequency_hz;
  beh["head_noise_deg"] = b.head_noise_deg;
  beh["vehicle_response"] = b.vehicle_response;
  beh["vehicle_response_distance_m"] = b.vehicle_response_distance_m;
  beh["vehicle_speed_cv"] = b.vehicle_speed_cv;

  Json mix;
  mix["road_type"] = array_json(c.mixture.road_type);
  mix["speed_limit"] = array_json(c.mixture.speed_limit);
  mix["lane_width"] = array_json(c.mixture.lane_width);
  mix["weather"] = array_json(c.mixture.weather);
  mix["time_of_day"] = array_json(c.mixture.time_of_day);
  mix["arrival_rate"] = array_json(c.mixture.arrival_rate);

  Json j;
  j["n_participants"] = c.n_participants;
  j["scenarios_per_participant"] = c.scenarios_per_participant;
  j["n_lanes"] = c.n_lanes;
  j["seed"] = c.seed;
  j["max_attempts"] = c.max_attempts;
  j["max_duration_s"] = c.max_duration_s;
  j["gap_search_s"] = c.gap_search_s;
  j["mixture"] = std::move(mix);
  j["behavior"] = std::move(beh);
  return j;
}

GeneratorConfig config_from_json(const Json& j) {
  GeneratorConfig c;
  try {
    c.n_participants = j.value("n_participants", c.n_participants);
    c.scenarios_per_participant = j.value("scenarios_per_participant", c.scenarios_per_participant);
    c.n_lanes = j.value("n_lanes", c.n_lanes);
    c.seed = j.value("seed", c.seed);
    c.max_attempts = j.value("max_attempts", c.max_attempts);
    c.max_duration_s = j.value("max_duration_s", c.max_duration_s);
    c.gap_search_s = j.value("gap_search_s", c.gap_search_s);
    if (j.contains("mixture")) {
      const Json& m = j.at("mixture");
      read_array(m, "road_type", c.mixture.road_type);
      read_array(m, "speed_limit", c.mixture.speed_limit);
      read_array(m, "lane_width", c.mixture.lane_width);
      read_array(m, "weather", c.mixture.weather);
      read_array(m, "time_of_day", c.mixture.time_of_day);
      read_array(m, "arrival_rate", c.mixture.arrival_rate);
    }
    if (j.contains("behavior")) {
      const Json& v = j.at("behavior");
      auto& b = c.behavior;
      b.base_speed_mean = v.value("base_speed_mean", b.base_speed_mean);
      b.base_speed_std = v.value("base_speed_std", b.base_speed_std);
      b.base_speed_min = v.value("base_speed_min", b.base_speed_min);
      b.base_speed_max = v.value("base_speed_max", b.base_speed_max);
      b.critical_gap_mean_s = v.value("critical_gap_mean_s", b.critical_gap_mean_s);
      b.critical_gap_std_s = v.value("critical_gap_std_s", b.critical_gap_std_s);
      b.speed_limit_effect = v.value("speed_limit_effect", b.speed_limit_effect);
      b.snow_speed_effect = v.value("snow_speed_effect", b.snow_speed_effect);
      b.far_half_speedup = v.value("far_half_speedup", b.far_half_speedup);
      b.far_half_arrival_effect = v.value("far_half_arrival_effect", b.far_half_arrival_effect);
      b.far_half_speed_limit_effect =
          v.value("far_half_speed_limit_effect", b.far_half_speed_limit_effect);
      b.transition_width_m = v.value("transition_width_m", b.transition_width_m);
      b.speed_noise = v.value("speed_noise", b.speed_noise);
      b.speed_noise_rho = v.value("speed_noise_rho", b.speed_noise_rho);
      b.lateral_theta = v.value("lateral_theta", b.lateral_theta);
      b.lateral_sigma = v.value("lateral_sigma", b.lateral_sigma);
      b.night_noise_multiplier = v.value("night_noise_multiplier", b.night_noise_multiplier);
      b.snow_noise_multiplier = v.value("snow_noise_multiplier", b.snow_noise_multiplier);
      b.median_pause_prob = v.value("median_pause_prob", b.median_pause_prob);
      b.median_pause_min_s = v.value("median_pause_min_s", b.median_pause_min_s);
      b.median_pause_max_s = v.value("median_pause_max_s", b.median_pause_max_s);
      b.hesitation_prob_snow = v.value("hesitation_prob_snow", b.hesitation_prob_snow);
      b.hesitation_prob_night = v.value("hesitation_prob_night", b.hesitation_prob_night);
      b.hesitation_speed_factor = v.value("hesitation_speed_factor", b.hesitation_speed_factor);
      b.hesitation_min_s = v.value("hesitation_min_s", b.hesitation_min_s);
      b.hesitation_max_s = v.value("hesitation_max_s", b.hesitation_max_s);
      b.head_amplitude_deg = v.value("head_amplitude_deg", b.head_amplitude_deg);
      b.head_proximity_gain_deg = v.value("head_proximity_gain_deg", b.head_proximity_gain_deg);
      b.head_proximity_scale_m = v.value("head_proximity_scale_m", b.head_proximity_scale_m);
      b.head_frequency_hz = v.value("head_frequency_hz", b.head_frequency_hz);
      b.head_noise_deg = v.value("head_noise_deg", b.head_noise_deg);
      b.vehicle_response = v.value("vehicle_response", b.vehicle_response);
      b.vehicle_response_distance_m =
          v.value("vehicle_response_distance_m", b.vehicle_response_distance_m);
      b.vehicle_speed_cv = v.value("vehicle_speed_cv", b.vehicle_speed_cv);
    }
  } catch (const Json::exception& e) {
    throw SchemaError("generator", e.what());
  }
  c.validate();
  return c;
}

std::vector<double> VehicleStream::arrivals(int lane) const {
  std::vector<double> out;
  for (const auto& v : vehicles) {
    if (v.lane == lane) out.push_back(v.arrival_s);
  }
  return out;
}

double VehicleStream::nearest_distance(double t, double x, double y) const {
  if (vehicles.empty()) return data::kNoVehicleDistanceM;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : vehicles) {
    best = std::min(best, std::hypot(v.x_at(t) - x, v.lane_y - y));
  }
  return best;
}

LaneLayout lane_layout(const data::ScenarioContext& ctx) {
  LaneLayout out;
  const int n = ctx.n_lanes;
  const double w = ctx.lane_width_m;
  const bool two_way = ctx.road_type != data::RoadType::kOneWay;
  const int near_lanes = two_way ? (n + 1) / 2 : n;
  for (int l = 0; l < n; ++l) {
    double y = (l + 0.5) * w;
    if (ctx.road_type == data::RoadType::kTwoWayMedian && l >= near_lanes) y += data::kMedianWidthM;
    out.centre_y.push_back(y);
    out.direction.push_back(l < near_lanes ? 1 : -1);
  }
  if (ctx.road_type == data::RoadType::kTwoWayMedian) {
    out.median_begin_y = near_lanes * w;
    out.median_end_y = out.median_begin_y + data::kMedianWidthM;
  }
  return out;
}

VehicleStream sample_stream(const data::ScenarioContext& ctx, double t_begin, double t_end,
                            double speed_cv, Rng& rng) {
  VehicleStream s;
  s.n_lanes = ctx.n_lanes;
  if (!(ctx.arrival_rate_vph > 0.0)) return s;
  const LaneLayout layout = lane_layout(ctx);
  const double rate = ctx.arrival_rate_vph / 3600.0;
  const double v_mean = ctx.speed_limit_kmh / 3.6;
  std::exponential_distribution<double> headway(rate);
  std::normal_distribution<double> speed(v_mean, speed_cv * v_mean);
  for (int l = 0; l < ctx.n_lanes; ++l) {
    double t = t_begin + headway(rng);
    while (t < t_end) {
      Vehicle v;
      v.lane = l;
      v.direction = layout.direction[static_cast<std::size_t>(l)];
      v.lane_y = layout.centre_y[static_cast<std::size_t>(l)];
      v.arrival_s = t;
      v.speed_mps = std::max(0.2 * v_mean, speed(rng));
      s.vehicles.push_back(v);
      t += headway(rng);
    }
  }
  return s;
}

Participant sample_participant(const BehaviorParams& b, Rng& rng) {
  std::normal_distribution<double> speed(b.base_speed_mean, b.base_speed_std);
  std::normal_distribution<double> gap(b.critical_gap_mean_s, b.critical_gap_std_s);
  Participant p;
  p.base_speed = std::clamp(speed(rng), b.base_speed_min, b.base_speed_max);
  p.critical_gap_s = std::max(0.5, gap(rng));
  return p;
}

data::CrossingInstance generate_instance(const GeneratorConfig& config,
                                         const data::ScenarioContext& ctx,
                                         const Participant& participant, std::uint64_t seed,
                                         const std::string& id) {
  const BehaviorParams& b = config.behavior;
  const double width = ctx.road_width_m();
  const LaneLayout layout = lane_layout(ctx);
  const bool snow = ctx.weather == data::Weather::kSnow;
  const bool night = ctx.time_of_day == data::TimeOfDay::kNight;
  const bool two_way = ctx.road_type != data::RoadType::kOneWay;
  const double speed_scaled = scaled(ctx.speed_limit_kmh, data::kSpeedLevelsKmh);
  const double arrival_scaled = scaled(ctx.arrival_rate_vph, data::kArrivalLevelsVph);
  const double noise_mult =
      (night ? b.night_noise_multiplier : 1.0) * (snow ? b.snow_noise_multiplier : 1.0);
  const double ctx_mult =
      1.0 + b.speed_limit_effect * speed_scaled + (snow ? b.snow_speed_effect : 0.0);
  const double far_gain = b.far_half_speedup + b.far_half_arrival_effect * arrival_scaled +
                          b.far_half_speed_limit_effect * speed_scaled;
  const double p_hesitate = 1.0 - (1.0 - (snow ? b.hesitation_prob_snow : 0.0)) *
                                      (1.0 - (night ? b.hesitation_prob_night : 0.0));
  const auto max_steps = static_cast<std::size_t>(std::ceil(config.max_duration_s / kDt));
  const double ou_decay = 1.0 - b.lateral_theta * kDt;
  const double ou_scale = b.lateral_sigma * noise_mult * std::sqrt(kDt);
  const double speed_innov = b.speed_noise * noise_mult * std::sqrt(1.0 - b.speed_noise_rho * b.speed_noise_rho);

  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    Rng rng = make_rng(derive_seed(seed, "attempt", static_cast<std::uint64_t>(attempt)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const VehicleStream stream =
        sample_stream(ctx, -kStreamMarginS,
                      config.gap_search_s + config.max_duration_s + kStreamMarginS,
                      b.vehicle_speed_cv, rng);
    const double start = accepted_gap_start(stream, layout, participant.critical_gap_s,
                                            config.gap_search_s);
    if (start < 0.0) continue;

    const bool pause_at_median = layout.median_begin_y >= 0.0 && uniform(rng) < b.median_pause_prob;
    const auto pause_steps = static_cast<int>(std::lround(
        (b.median_pause_min_s + uniform(rng) * (b.median_pause_max_s - b.median_pause_min_s)) / kDt));
    const bool hesitate = uniform(rng) < p_hesitate;
    const double hesitate_y = (0.15 + 0.7 * uniform(rng)) * width;
    const auto hesitate_steps = static_cast<int>(std::lround(
        (b.hesitation_min_s + uniform(rng) * (b.hesitation_max_s - b.hesitation_min_s)) / kDt));
    const double head_phase = 2.0 * std::numbers::pi * uniform(rng);

    data::CrossingInstance inst;
    inst.id = id;
    inst.context = ctx;
    double x = 0.0, y = 0.0, jitter = 0.0;
    int pausing = 0, hesitating = 0;
    bool paused = false, hesitated = false;
    bool finished = false;
    for (std::size_t k = 0; k <= max_steps; ++k) {
      const double t = static_cast<double>(k) * kDt;
      const double d = stream.nearest_distance(start + t, x, y);
      const double side = two_way && y >= 0.5 * width ? -1.0 : 1.0;
      const double amplitude =
          b.head_amplitude_deg + b.head_proximity_gain_deg * std::exp(-d / b.head_proximity_scale_m);
      const double swing = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * b.head_frequency_hz * t + head_phase);
      const double o = data::wrap_degrees(side * amplitude * swing +
                                          b.head_noise_deg * noise_mult * normal(rng));
      inst.points.push_back({t, x, y, o, d});
      if (y >= width - 1e-9) {
        finished = true;
        break;
      }

      double v = participant.base_speed * ctx_mult;
      v *= 1.0 + far_gain * logistic((y - 0.5 * width) / b.transition_width_m);
      v *= 1.0 + b.vehicle_response * std::max(0.0, 1.0 - d / b.vehicle_response_distance_m);
      v *= std::max(0.0, 1.0 + jitter);
      if (hesitating > 0) {
        v *= b.hesitation_speed_factor;
        --hesitating;
      }
      if (pausing > 0) {
        v = 0.0;
        --pausing;
      }
      double y_next = y + v * kDt;
      if (pause_at_median && !paused && y < layout.median_begin_y &&
          y_next >= layout.median_begin_y) {
        y_next = layout.median_begin_y;
        paused = true;
        pausing = pause_steps;
      }
      if (hesitate && !hesitated && y < hesitate_y && y_next >= hesitate_y) {
        hesitated = true;
        hesitating = hesitate_steps;
      }
      y = y_next;
      x = ou_decay * x + ou_scale * normal(rng);
      jitter = b.speed_noise_rho * jitter + speed_innov * normal(rng);
    }
    if (finished) return inst;
  }
  throw GenerationError("instance " + id + ": no complete crossing after " +
                        std::to_string(config.max_attempts) + " attempts");
}

std::vector<data::ScenarioContext> assign_contexts(const GeneratorConfig& config) {
  const std::size_t n = config.instance_count();
  const auto& m = config.mixture;
  Rng r_road = make_rng(derive_seed(config.seed, "mixture/road_type"));
  Rng r_speed = make_rng(derive_seed(config.seed, "mixture/speed_limit"));
  Rng r_lane = make_rng(derive_seed(config.seed, "mixture/lane_width"));
  Rng r_weather = make_rng(derive_seed(config.seed, "mixture/weather"));
  Rng r_tod = make_rng(derive_seed(config.seed, "mixture/time_of_day"));
  Rng r_arrival = make_rng(derive_seed(config.seed, "mixture/arrival_rate"));
  const auto roads = balanced_levels(m.road_type, data::kRoadTypes, n, r_road);
  const auto speeds = balanced_levels(m.speed_limit, data::kSpeedLevelsKmh, n, r_speed);
  const auto lanes = balanced_levels(m.lane_width, data::kLaneWidthLevelsM, n, r_lane);
  const auto weather = balanced_levels(
      m.weather, std::array<data::Weather, 2>{data::Weather::kClear, data::Weather::kSnow}, n,
      r_weather);
  const auto tod = balanced_levels(
      m.time_of_day, std::array<data::TimeOfDay, 2>{data::TimeOfDay::kDay, data::TimeOfDay::kNight},
      n, r_tod);
  const auto arrivals = balanced_levels(m.arrival_rate, data::kArrivalLevelsVph, n, r_arrival);
  std::vector<data::ScenarioContext> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {roads[i], speeds[i], lanes[i], weather[i], tod[i], arrivals[i], config.n_lanes};
  }
  return out;
}

std::vector<data::CrossingInstance> generate(const GeneratorConfig& config, int jobs) {
  config.validate();
  const auto contexts = assign_contexts(config);
  const auto per = static_cast<std::size_t>(config.scenarios_per_participant);
  std::vector<Participant> participants;
  for (int p = 0; p < config.n_participants; ++p) {
    Rng rng = make_rng(derive_seed(config.seed, "participant", static_cast<std::uint64_t>(p)));
    participants.push_back(sample_participant(config.behavior, rng));
  }
  std::vector<data::CrossingInstance> out(contexts.size());
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    char id[32];
    std::snprintf(id, sizeof id, "p%03zu_s%02zu", i / per, i % per);
    out[i] = generate_instance(config, contexts[i], participants[i / per],
                               derive_seed(config.seed, "instance", i), id);
  });
  return out;
}

std::string corpus_checksum(const std::vector<data::CrossingInstance>& corpus) {
  std::ostringstream os;
  data::write_instances(os, corpus);
  return sha256_hex(os.str());
}

GeneratorConfig benchmark_config(std::uint64_t seed) {
  GeneratorConfig c;
  c.seed = seed;
  return c;
}

Corpus benchmark_corpus(std::uint64_t seed, int jobs) {
  Corpus c;
  c.instances = generate(benchmark_config(seed), jobs);
  c.checksum = corpus_checksum(c.instances);
  return c;
}

}  // namespace crosspath::synthgen
