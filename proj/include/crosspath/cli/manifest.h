#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crosspath/data/io.h"

namespace crosspath::cli {

using data::Json;

inline constexpr const char* kManifestSchema = "crosspath/manifest/1";
inline constexpr const char* kManifestName = "manifest.json";

struct FileDigest {
  std::string path;
  std::string sha256;

  friend bool operator==(const FileDigest&, const FileDigest&) = default;
};

struct NamedSeed {
  std::string name;
  std::uint64_t value = 0;

  friend bool operator==(const NamedSeed&, const NamedSeed&) = default;
};

// Record of one CLI run. `config` is the fully resolved configuration; fed
// back through --config it reproduces the run.
struct RunManifest {
  std::string subcommand;
  std::string tool_version;
  Json config = Json::object();
  std::uint64_t seed = 0;
  std::vector<NamedSeed> seeds;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> artifacts;  // paths relative to the manifest
  int jobs = 1;
  double wall_clock_s = 0.0;
};

Json to_json(const RunManifest& m);
// Throws SchemaError on a missing field or a foreign schema tag.
RunManifest manifest_from_json(const Json& j);
bool is_manifest(const Json& j);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

// Every input whose current digest differs from the recorded one.
std::vector<std::string> changed_inputs(const RunManifest& m);

}  // namespace crosspath::cli
