#include "crosspath/data/io.h"

#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "crosspath/common/errors.h"

namespace crosspath::data {
namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw SchemaError(name, "record is not an object");
  auto it = j.find(name);
  if (it == j.end()) throw SchemaError(name, "missing field");
  return *it;
}

double number(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number()) throw SchemaError(name, "expected a number");
  return v.get<double>();
}

std::string text(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) throw SchemaError(name, "expected a string");
  return v.get<std::string>();
}

const Json& array(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_array()) throw SchemaError(name, "expected an array");
  return v;
}

std::string id_of(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw SchemaError("id", "expected a string");
}

template <typename T>
std::vector<T> read_jsonl(std::istream& in, const std::function<T(const Json&)>& convert) {
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(e.what(), lineno);
    }
    if (first_record && j.is_object() && j.size() == 1 && j.contains("schema")) {
      first_record = false;
      if (!j["schema"].is_string() || j["schema"].get<std::string>() != kSchemaVersion) {
        throw SchemaError("schema", "unsupported schema version " + j["schema"].dump());
      }
      continue;
    }
    first_record = false;
    try {
      out.push_back(convert(j));
    } catch (const SchemaError& e) {
      throw SchemaError(e.field(), std::string(e.what()) + " (line " +
                                       std::to_string(lineno) + ")");
    }
  }
  return out;
}

void write_header(std::ostream& out) {
  Json h;
  h["schema"] = std::string(kSchemaVersion);
  out << h.dump() << '\n';
}

}  // namespace

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

Json to_json(const ScenarioContext& c) {
  Json j;
  j["road_type"] = std::string(to_string(c.road_type));
  j["speed_limit_kmh"] = c.speed_limit_kmh;
  j["lane_width_m"] = c.lane_width_m;
  j["weather"] = std::string(to_string(c.weather));
  j["time_of_day"] = std::string(to_string(c.time_of_day));
  j["arrival_rate_vph"] = c.arrival_rate_vph;
  j["n_lanes"] = c.n_lanes;
  return j;
}

Json to_json(const CrossingInstance& inst) {
  Json j;
  j["id"] = inst.id;
  Json pts = Json::array();
  for (const auto& p : inst.points) {
    pts.push_back(Json{{"t", p.t}, {"x", p.x}, {"y", p.y}, {"o", p.o}, {"d", p.d}});
  }
  j["points"] = std::move(pts);
  j["context"] = to_json(inst.context);
  return j;
}

Json to_json(const SceneLog& scene) {
  Json j;
  j["id"] = scene.id;
  j["frame_rate_hz"] = scene.frame_rate_hz;
  Json frames = Json::array();
  for (const auto& f : scene.frames) {
    Json jf;
    jf["t"] = f.t;
    jf["ego_pose"] = Json{{"x", f.ego_pose.x}, {"y", f.ego_pose.y},
                          {"heading", f.ego_pose.heading_deg}};
    Json tracked = Json::array();
    for (const auto& o : f.tracked) {
      tracked.push_back(
          Json{{"track_id", o.track_id}, {"class", o.object_class}, {"x", o.x}, {"y", o.y}});
    }
    jf["tracked"] = std::move(tracked);
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  return j;
}

ScenarioContext context_from_json(const Json& j) {
  ScenarioContext c;
  c.road_type = parse_road_type(text(j, "road_type"));
  c.speed_limit_kmh = number(j, "speed_limit_kmh");
  c.lane_width_m = number(j, "lane_width_m");
  c.weather = parse_weather(text(j, "weather"));
  c.time_of_day = parse_time_of_day(text(j, "time_of_day"));
  c.arrival_rate_vph = number(j, "arrival_rate_vph");
  const Json& lanes = field(j, "n_lanes");
  if (!lanes.is_number_integer()) throw SchemaError("n_lanes", "expected an integer");
  c.n_lanes = lanes.get<int>();
  return c;
}

CrossingInstance instance_from_json(const Json& j) {
  CrossingInstance inst;
  inst.id = id_of(field(j, "id"));
  for (const Json& p : array(j, "points")) {
    inst.points.push_back(TrajectoryPoint{number(p, "t"), number(p, "x"), number(p, "y"),
                                          number(p, "o"), number(p, "d")});
  }
  inst.context = context_from_json(field(j, "context"));
  return inst;
}

SceneLog scene_from_json(const Json& j) {
  SceneLog scene;
  scene.id = id_of(field(j, "id"));
  scene.frame_rate_hz = number(j, "frame_rate_hz");
  for (const Json& f : array(j, "frames")) {
    SceneFrame frame;
    frame.t = number(f, "t");
    const Json& pose = field(f, "ego_pose");
    frame.ego_pose = EgoPose{number(pose, "x"), number(pose, "y"), number(pose, "heading")};
    for (const Json& o : array(f, "tracked")) {
      frame.tracked.push_back(TrackedObject{id_of(field(o, "track_id")), text(o, "class"),
                                            number(o, "x"), number(o, "y")});
    }
    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

std::vector<CrossingInstance> read_instances(std::istream& in) {
  return read_jsonl<CrossingInstance>(in, [](const Json& j) {
    CrossingInstance inst = instance_from_json(j);
    normalize_direction(inst);
    validate(inst);
    return inst;
  });
}

std::vector<CrossingInstance> read_instances(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_instances(in);
}

std::vector<SceneLog> read_scenes(std::istream& in) {
  return read_jsonl<SceneLog>(in, [](const Json& j) {
    SceneLog scene = scene_from_json(j);
    validate(scene);
    return scene;
  });
}

std::vector<SceneLog> read_scenes(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_scenes(in);
}

void write_instances(std::ostream& out, std::span<const CrossingInstance> instances) {
  write_header(out);
  for (const auto& inst : instances) out << to_json(inst).dump() << '\n';
}

void write_instances(const std::filesystem::path& path,
                     std::span<const CrossingInstance> instances) {
  auto out = open_output(path);
  write_instances(out, instances);
  if (!out) throw IoError("write failed: " + path.string());
}

void write_scenes(std::ostream& out, std::span<const SceneLog> scenes) {
  write_header(out);
  for (const auto& s : scenes) out << to_json(s).dump() << '\n';
}

void write_scenes(const std::filesystem::path& path, std::span<const SceneLog> scenes) {
  auto out = open_output(path);
  write_scenes(out, scenes);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace crosspath::data
