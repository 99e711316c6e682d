#include "crosspath/windowing/windowing.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crosspath/common/errors.h"

namespace crosspath::windowing {
namespace {

int tenths(double seconds) { return static_cast<int>(std::lround(seconds * 10.0)); }

bool is_tenth_multiple(double seconds) {
  return std::abs(seconds * 10.0 - std::round(seconds * 10.0)) < 1e-9;
}

double raw_feature(const data::TrajectoryPoint& p, std::size_t f) {
  switch (f) {
    case 0: return p.x;
    case 1: return p.y;
    case 2: return p.o;
    default: return std::min(p.d, kMaxVehicleDistanceM);
  }
}

numkit::Tensor normalized_input(std::span<const data::TrajectoryPoint> pts, Variant variant,
                                const NormalizationParams& norm) {
  const auto cols = variant_columns(variant);
  numkit::Tensor t = numkit::Tensor::matrix(pts.size(), cols.size());
  for (std::size_t r = 0; r < pts.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      t(r, c) = norm.apply(cols[c], raw_feature(pts[r], cols[c]));
    }
  }
  return t;
}

void fill_target(SequenceSample& s, std::span<const data::TrajectoryPoint> pts,
                 std::size_t steps, const NormalizationParams& norm) {
  s.target = numkit::Tensor::matrix(steps, 2);
  s.mask.assign(steps, 0.0);
  const std::size_t n = std::min(steps, pts.size());
  for (std::size_t r = 0; r < n; ++r) {
    s.target(r, 0) = norm.apply(0, pts[r].x);
    s.target(r, 1) = norm.apply(1, pts[r].y);
    s.mask[r] = 1.0;
  }
}

std::string format_seconds(double s) {
  std::ostringstream os;
  os << std::round(s * 10.0) / 10.0;
  return os.str();
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kXy: return "xy";
    case Variant::kXyo: return "xyo";
    case Variant::kXyd: return "xyd";
    case Variant::kXyod: return "xyod";
  }
  return "xyod";
}

Variant parse_variant(const std::string& s) {
  for (auto v : kVariants) {
    if (s == variant_name(v)) return v;
  }
  throw ConfigError("unknown feature variant '" + s + "'");
}

std::size_t feature_count(Variant v) { return variant_columns(v).size(); }

std::vector<std::size_t> variant_columns(Variant v) {
  switch (v) {
    case Variant::kXy: return {0, 1};
    case Variant::kXyo: return {0, 1, 2};
    case Variant::kXyd: return {0, 1, 3};
    case Variant::kXyod: return {0, 1, 2, 3};
  }
  return {0, 1, 2, 3};
}

int WindowingSpec::input_steps() const { return tenths(t1_s); }
int WindowingSpec::output_steps() const { return tenths(t2_s); }

std::string WindowingSpec::data_type() const {
  if (mode == Mode::kTimeBased) return "T_" + format_seconds(t1_s) + "_" + format_seconds(t2_s);
  return "D_" + std::to_string(static_cast<int>(std::lround(p * 10.0)));
}

void WindowingSpec::validate() const {
  if (stride_steps < 1) throw ConfigError("stride_steps must be a positive integer");
  if (mode == Mode::kTimeBased) {
    if (!(t1_s > 0.0) || !(t2_s > 0.0)) throw ConfigError("t1 and t2 must be positive");
    if (!is_tenth_multiple(t1_s) || !is_tenth_multiple(t2_s)) {
      throw ConfigError("t1 and t2 must be multiples of 0.1 s");
    }
  } else if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("distance split p must lie in (0, 1)");
  }
}

WindowingSpec parse_data_type(const std::string& name, Variant variant, int stride_steps) {
  WindowingSpec s;
  s.variant = variant;
  s.stride_steps = stride_steps;
  try {
    if (name.size() > 2 && name[0] == 'T' && name[1] == '_') {
      const auto sep = name.find('_', 2);
      if (sep == std::string::npos) throw ConfigError("");
      std::size_t used = 0;
      const std::string a = name.substr(2, sep - 2), b = name.substr(sep + 1);
      s.mode = Mode::kTimeBased;
      s.t1_s = std::stod(a, &used);
      if (used != a.size()) throw ConfigError("");
      s.t2_s = std::stod(b, &used);
      if (used != b.size()) throw ConfigError("");
    } else if (name.size() > 2 && name[0] == 'D' && name[1] == '_') {
      const std::string a = name.substr(2);
      std::size_t used = 0;
      const int tenth = std::stoi(a, &used);
      if (used != a.size()) throw ConfigError("");
      s.mode = Mode::kDistanceBased;
      s.p = tenth / 10.0;
    } else {
      throw ConfigError("");
    }
  } catch (const std::exception&) {
    throw ConfigError("unknown data type '" + name + "' (expected T_<t1>_<t2> or D_<p*10>)");
  }
  s.validate();
  return s;
}

Json to_json(const WindowingSpec& s) {
  Json j;
  j["mode"] = s.mode == Mode::kTimeBased ? "time_based" : "distance_based";
  j["t1_s"] = s.t1_s;
  j["t2_s"] = s.t2_s;
  j["p"] = s.p;
  j["variant"] = variant_name(s.variant);
  j["stride_steps"] = s.stride_steps;
  return j;
}

WindowingSpec spec_from_json(const Json& j) {
  WindowingSpec s;
  try {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "time_based") {
      s.mode = Mode::kTimeBased;
    } else if (mode == "distance_based") {
      s.mode = Mode::kDistanceBased;
    } else {
      throw SchemaError("mode", "unknown windowing mode '" + mode + "'");
    }
    s.t1_s = j.at("t1_s").get<double>();
    s.t2_s = j.at("t2_s").get<double>();
    s.p = j.at("p").get<double>();
    s.variant = parse_variant(j.at("variant").get<std::string>());
    s.stride_steps = j.at("stride_steps").get<int>();
  } catch (const Json::exception& e) {
    throw SchemaError("windowing", e.what());
  }
  s.validate();
  return s;
}

numkit::Tensor select_features(std::span<const data::TrajectoryPoint> points, Variant variant) {
  const auto cols = variant_columns(variant);
  numkit::Tensor t = numkit::Tensor::matrix(points.size(), cols.size());
  for (std::size_t r = 0; r < points.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) t(r, c) = raw_feature(points[r], cols[c]);
  }
  return t;
}

double NormalizationParams::apply(std::size_t feature, double v) const {
  if (!fitted) throw StateError("normalization parameters are not fitted");
  const double lo = min[feature], hi = max[feature];
  if (!(hi > lo)) return 0.5;
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

double NormalizationParams::invert(std::size_t feature, double v) const {
  if (!fitted) throw StateError("normalization parameters are not fitted");
  const double lo = min[feature], hi = max[feature];
  if (!(hi > lo)) return lo;
  return lo + v * (hi - lo);
}

double NormalizationParams::range(std::size_t feature) const {
  if (!fitted) throw StateError("normalization parameters are not fitted");
  return max[feature] > min[feature] ? max[feature] - min[feature] : 0.0;
}

NormalizationParams fit_normalization(std::span<const data::CrossingInstance> train) {
  NormalizationParams n;
  bool any = false;
  for (const auto& inst : train) {
    for (const auto& p : inst.points) {
      for (std::size_t f = 0; f < 4; ++f) {
        const double v = raw_feature(p, f);
        if (!any) {
          n.min[f] = n.max[f] = v;
        } else {
          n.min[f] = std::min(n.min[f], v);
          n.max[f] = std::max(n.max[f], v);
        }
      }
      any = true;
    }
  }
  if (!any) throw StateError("cannot fit normalization on an empty training set");
  n.fitted = true;
  return n;
}

Json to_json(const NormalizationParams& n) {
  Json j;
  j["min"] = n.min;
  j["max"] = n.max;
  j["fitted"] = n.fitted;
  return j;
}

NormalizationParams norm_from_json(const Json& j) {
  NormalizationParams n;
  try {
    n.min = j.at("min").get<std::array<double, 4>>();
    n.max = j.at("max").get<std::array<double, 4>>();
    n.fitted = j.at("fitted").get<bool>();
  } catch (const Json::exception& e) {
    throw SchemaError("norm", e.what());
  }
  return n;
}

std::size_t time_window_count(std::size_t n, const WindowingSpec& spec) {
  const std::size_t span = static_cast<std::size_t>(spec.input_steps() + spec.output_steps());
  if (n < span) return 0;
  return (n - span) / static_cast<std::size_t>(spec.stride_steps) + 1;
}

std::vector<SequenceSample> window_time_based(const data::CrossingInstance& inst,
                                              const WindowingSpec& spec,
                                              const NormalizationParams& norm) {
  spec.validate();
  const std::size_t t_in = static_cast<std::size_t>(spec.input_steps());
  const std::size_t t_out = static_cast<std::size_t>(spec.output_steps());
  const std::size_t count = time_window_count(inst.points.size(), spec);
  const auto context = data::encode_context(inst.context);
  const std::span<const data::TrajectoryPoint> pts(inst.points);
  std::vector<SequenceSample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = k * static_cast<std::size_t>(spec.stride_steps);
    SequenceSample s;
    s.instance_id = inst.id;
    s.input = normalized_input(pts.subspan(i, t_in), spec.variant, norm);
    s.context = context;
    fill_target(s, pts.subspan(i + t_in, t_out), t_out, norm);
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t distance_split_index(const data::CrossingInstance& inst, double p) {
  const double threshold = p * inst.context.road_width_m() - 1e-9;
  const auto& pts = inst.points;
  std::size_t idx = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].y >= threshold) {
      idx = i;
      break;
    }
  }
  if (idx == 0 || idx == pts.size()) {
    throw DegenerateSplitError("instance " + inst.id + ": split index " + std::to_string(idx) +
                               " leaves an empty input or target");
  }
  return idx;
}

SequenceSample split_distance_based(const data::CrossingInstance& inst,
                                    const WindowingSpec& spec,
                                    const NormalizationParams& norm,
                                    std::size_t target_steps) {
  const std::size_t idx = distance_split_index(inst, spec.p);
  const std::span<const data::TrajectoryPoint> pts(inst.points);
  SequenceSample s;
  s.instance_id = inst.id;
  s.input = normalized_input(pts.first(idx), spec.variant, norm);
  s.context = data::encode_context(inst.context);
  fill_target(s, pts.subspan(idx), target_steps, norm);
  return s;
}

std::size_t max_remaining_steps(std::span<const data::CrossingInstance> corpus, double p) {
  std::size_t best = 0;
  for (const auto& inst : corpus) {
    try {
      best = std::max(best, inst.points.size() - distance_split_index(inst, p));
    } catch (const DegenerateSplitError&) {
    }
  }
  return best;
}

SampleSet build_samples(std::span<const data::CrossingInstance> instances,
                        const WindowingSpec& spec, const NormalizationParams& norm,
                        std::size_t target_steps) {
  spec.validate();
  if (!norm.fitted) throw StateError("normalization parameters are not fitted");
  SampleSet set;
  set.spec = spec;
  set.norm = norm;
  set.features = feature_count(spec.variant);
  if (spec.mode == Mode::kTimeBased) {
    set.input_steps = static_cast<std::size_t>(spec.input_steps());
    set.output_steps = static_cast<std::size_t>(spec.output_steps());
    for (const auto& inst : instances) {
      auto s = window_time_based(inst, spec, norm);
      std::move(s.begin(), s.end(), std::back_inserter(set.samples));
    }
    return set;
  }
  set.output_steps = target_steps ? target_steps : max_remaining_steps(instances, spec.p);
  for (const auto& inst : instances) {
    try {
      set.samples.push_back(split_distance_based(inst, spec, norm, set.output_steps));
      set.input_steps = std::max(set.input_steps, set.samples.back().input.rows());
    } catch (const DegenerateSplitError&) {
      ++set.dropped;
    }
  }
  return set;
}

numkit::Container to_container(const SampleSet& set) {
  const std::size_t n = set.size();
  const std::size_t t_in = set.input_steps, t_out = set.output_steps, f = set.features;
  numkit::Tensor lengths({n});
  numkit::Tensor inputs({n, t_in, f});
  numkit::Tensor contexts({n, data::kContextSize});
  numkit::Tensor targets({n, t_out, 2});
  numkit::Tensor masks({n, t_out});
  Json ids = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = set.samples[i];
    const std::size_t len = s.input.rows();
    lengths[i] = static_cast<double>(len);
    // Left-padded so the last input step always sits at index t_in - 1.
    for (std::size_t r = 0; r < len; ++r) {
      for (std::size_t c = 0; c < f; ++c) {
        inputs[(i * t_in + (t_in - len + r)) * f + c] = s.input(r, c);
      }
    }
    std::copy(s.context.begin(), s.context.end(), contexts.storage().begin() + i * data::kContextSize);
    std::copy(s.target.storage().begin(), s.target.storage().end(),
              targets.storage().begin() + i * t_out * 2);
    std::copy(s.mask.begin(), s.mask.end(), masks.storage().begin() + i * t_out);
    ids.push_back(s.instance_id);
  }
  Json meta;
  meta["schema"] = std::string(data::kSchemaVersion);
  meta["kind"] = "samples";
  meta["windowing"] = to_json(set.spec);
  meta["norm"] = to_json(set.norm);
  meta["dropped"] = set.dropped;
  meta["instance_ids"] = std::move(ids);
  numkit::Container c;
  c.metadata = meta.dump();
  c.tensors = {{"input_lengths", lengths}, {"inputs", inputs}, {"contexts", contexts},
               {"targets", targets}, {"masks", masks}};
  return c;
}

SampleSet from_container(const numkit::Container& c) {
  Json meta;
  try {
    meta = Json::parse(c.metadata);
  } catch (const Json::parse_error& e) {
    throw SchemaError("metadata", e.what());
  }
  if (meta.value("kind", "") != "samples") throw SchemaError("kind", "not a sample set");
  SampleSet set;
  set.spec = spec_from_json(meta.at("windowing"));
  set.norm = norm_from_json(meta.at("norm"));
  set.dropped = meta.value("dropped", std::size_t{0});
  const auto& lengths = c.get("input_lengths");
  const auto& inputs = c.get("inputs");
  const auto& contexts = c.get("contexts");
  const auto& targets = c.get("targets");
  const auto& masks = c.get("masks");
  if (inputs.rank() != 3 || targets.rank() != 3 || masks.rank() != 2) {
    throw SchemaError("tensors", "unexpected tensor ranks in sample set");
  }
  const std::size_t n = lengths.size();
  const std::size_t t_in = inputs.shape()[1], f = inputs.shape()[2];
  const std::size_t t_out = targets.shape()[1];
  const auto& ids = meta.at("instance_ids");
  if (ids.size() != n || inputs.shape()[0] != n || targets.shape()[0] != n ||
      contexts.size() != n * data::kContextSize || masks.size() != n * t_out) {
    throw SchemaError("tensors", "inconsistent sample counts");
  }
  set.input_steps = t_in;
  set.output_steps = t_out;
  set.features = f;
  for (std::size_t i = 0; i < n; ++i) {
    SequenceSample s;
    s.instance_id = ids[i].get<std::string>();
    const auto len = static_cast<std::size_t>(lengths[i]);
    if (len > t_in) throw SchemaError("input_lengths", "length exceeds padded size");
    s.input = numkit::Tensor::matrix(len, f);
    for (std::size_t r = 0; r < len; ++r) {
      for (std::size_t col = 0; col < f; ++col) {
        s.input(r, col) = inputs[(i * t_in + (t_in - len + r)) * f + col];
      }
    }
    std::copy_n(contexts.storage().begin() + i * data::kContextSize, data::kContextSize,
                s.context.begin());
    s.target = numkit::Tensor({t_out, 2}, std::vector<double>(
        targets.storage().begin() + i * t_out * 2, targets.storage().begin() + (i + 1) * t_out * 2));
    s.mask.assign(masks.storage().begin() + i * t_out, masks.storage().begin() + (i + 1) * t_out);
    set.samples.push_back(std::move(s));
  }
  return set;
}

}  // namespace crosspath::windowing
