#include "crosspath/cli/manifest.h"

#include <iomanip>

#include "crosspath/common/checksum.h"
#include "crosspath/common/errors.h"

namespace crosspath::cli {

namespace {

Json digests_json(const std::vector<FileDigest>& files) {
  Json a = Json::array();
  for (const auto& f : files) a.push_back(Json{{"path", f.path}, {"sha256", f.sha256}});
  return a;
}

std::vector<FileDigest> digests_from(const Json& a) {
  std::vector<FileDigest> out;
  for (const Json& f : a) {
    out.push_back(FileDigest{f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
  }
  return out;
}

}  // namespace

Json to_json(const RunManifest& m) {
  Json seeds = Json::object();
  for (const auto& s : m.seeds) seeds[s.name] = s.value;
  Json j;
  j["manifest"] = kManifestSchema;
  j["subcommand"] = m.subcommand;
  j["tool_version"] = m.tool_version;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["seeds"] = std::move(seeds);
  j["inputs"] = digests_json(m.inputs);
  j["artifacts"] = digests_json(m.artifacts);
  j["jobs"] = m.jobs;
  j["wall_clock_s"] = m.wall_clock_s;
  return j;
}

bool is_manifest(const Json& j) { return j.is_object() && j.contains("manifest"); }

RunManifest manifest_from_json(const Json& j) {
  if (!is_manifest(j) || !j.at("manifest").is_string() ||
      j.at("manifest").get<std::string>() != kManifestSchema) {
    throw SchemaError("manifest", std::string("expected schema ") + kManifestSchema);
  }
  RunManifest m;
  try {
    m.subcommand = j.at("subcommand").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [name, value] : j.at("seeds").items()) {
      m.seeds.push_back(NamedSeed{name, value.get<std::uint64_t>()});
    }
    m.inputs = digests_from(j.at("inputs"));
    m.artifacts = digests_from(j.at("artifacts"));
    m.jobs = j.at("jobs").get<int>();
    m.wall_clock_s = j.at("wall_clock_s").get<double>();
  } catch (const Json::exception& e) {
    throw SchemaError("manifest", e.what());
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  auto out = data::open_output(path);
  out << std::setw(2) << to_json(m) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

RunManifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed JSON in " + path.string(), 1);
  return manifest_from_json(j);
}

std::vector<std::string> changed_inputs(const RunManifest& m) {
  std::vector<std::string> changed;
  for (const auto& f : m.inputs) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(f.path, ec) || sha256_file(f.path) != f.sha256) {
      changed.push_back(f.path);
    }
  }
  return changed;
}

}  // namespace crosspath::cli
