#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "crosspath/data/context.h"
#include "crosspath/data/io.h"
#include "crosspath/data/types.h"
#include "crosspath/numkit/container.h"
#include "crosspath/numkit/tensor.h"

namespace crosspath::windowing {

using data::Json;

// Distances are clipped here before normalization; the "no vehicle"
// sentinel therefore lands on the top of the range.
inline constexpr double kMaxVehicleDistanceM = 100.0;

enum class Mode { kTimeBased, kDistanceBased };
enum class Variant { kXy, kXyo, kXyd, kXyod };

inline constexpr std::array<Variant, 4> kVariants = {Variant::kXy, Variant::kXyo,
                                                     Variant::kXyd, Variant::kXyod};

const char* variant_name(Variant v);
Variant parse_variant(const std::string& s);
std::size_t feature_count(Variant v);
// Raw feature columns (0=x, 1=y, 2=o, 3=d) used by a variant, in order.
std::vector<std::size_t> variant_columns(Variant v);

struct WindowingSpec {
  Mode mode = Mode::kTimeBased;
  double t1_s = 1.0;
  double t2_s = 1.0;
  double p = 0.5;
  Variant variant = Variant::kXyod;
  int stride_steps = 1;

  int input_steps() const;   // time-based only
  int output_steps() const;  // time-based only
  // "T_1_2" or "D_5".
  std::string data_type() const;
  void validate() const;

  friend bool operator==(const WindowingSpec&, const WindowingSpec&) = default;
};

// Builds a spec from a data type name such as "T_1_2" or "D_3".
WindowingSpec parse_data_type(const std::string& name, Variant variant = Variant::kXyod,
                              int stride_steps = 1);

Json to_json(const WindowingSpec& s);
WindowingSpec spec_from_json(const Json& j);

// Raw feature rows (x, y, o, clipped d) for the chosen variant.
numkit::Tensor select_features(std::span<const data::TrajectoryPoint> points, Variant variant);

// Per-raw-feature min/max over (x, y, o, d).
struct NormalizationParams {
  std::array<double, 4> min{};
  std::array<double, 4> max{};
  bool fitted = false;

  double apply(std::size_t feature, double v) const;
  double invert(std::size_t feature, double v) const;
  // Meters per normalized unit for x or y; 0 for constant features.
  double range(std::size_t feature) const;

  friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

// Fitted on training instances only. Throws StateError when empty.
NormalizationParams fit_normalization(std::span<const data::CrossingInstance> train);
Json to_json(const NormalizationParams& n);
NormalizationParams norm_from_json(const Json& j);

struct SequenceSample {
  std::string instance_id;
  numkit::Tensor input;    // [T_in x F], normalized
  data::ContextVector context{};
  numkit::Tensor target;   // [T_out x 2], normalized, zero where masked
  std::vector<double> mask;  // [T_out], 1 valid / 0 padding
};

// Time-based windows for one instance, unnormalized targets included.
// Too-short instances yield no samples.
std::size_t time_window_count(std::size_t n, const WindowingSpec& spec);
std::vector<SequenceSample> window_time_based(const data::CrossingInstance& inst,
                                              const WindowingSpec& spec,
                                              const NormalizationParams& norm);

// First index with y >= p * road width. Throws DegenerateSplitError when the
// split would leave an empty input or an empty target.
std::size_t distance_split_index(const data::CrossingInstance& inst, double p);
SequenceSample split_distance_based(const data::CrossingInstance& inst,
                                    const WindowingSpec& spec,
                                    const NormalizationParams& norm,
                                    std::size_t target_steps);

struct SampleSet {
  WindowingSpec spec;
  NormalizationParams norm;
  std::size_t input_steps = 0;   // maximum input length
  std::size_t output_steps = 0;  // target length (padded)
  std::size_t features = 0;
  std::vector<SequenceSample> samples;
  std::size_t dropped = 0;       // degenerate distance splits

  std::size_t size() const { return samples.size(); }
};

// Longest remaining (post-split) length over a corpus; degenerate splits
// are ignored.
std::size_t max_remaining_steps(std::span<const data::CrossingInstance> corpus, double p);

// Windows every instance. For distance-based specs `target_steps` fixes the
// padded target length; 0 means the maximum over `instances`. Longer targets
// are truncated to it. Degenerate splits are counted in `dropped`.
SampleSet build_samples(std::span<const data::CrossingInstance> instances,
                        const WindowingSpec& spec, const NormalizationParams& norm,
                        std::size_t target_steps = 0);

numkit::Container to_container(const SampleSet& set);
SampleSet from_container(const numkit::Container& c);

}  // namespace crosspath::windowing
