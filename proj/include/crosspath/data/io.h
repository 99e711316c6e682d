#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "crosspath/data/types.h"

namespace crosspath::data {

using Json = nlohmann::ordered_json;

// Throw IoError when the file cannot be opened. open_output creates missing
// parent directories and truncates.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

Json to_json(const ScenarioContext& c);
Json to_json(const CrossingInstance& inst);
Json to_json(const SceneLog& scene);

// Field-level conversions; throw SchemaError on missing or mistyped fields.
ScenarioContext context_from_json(const Json& j);
CrossingInstance instance_from_json(const Json& j);
SceneLog scene_from_json(const Json& j);

// JSONL readers. A leading {"schema": ...} header is checked when present;
// blank lines are skipped. Instances are mirrored into the canonical frame
// and validated. Malformed JSON raises ParseError carrying the line number.
std::vector<CrossingInstance> read_instances(std::istream& in);
std::vector<CrossingInstance> read_instances(const std::filesystem::path& path);
std::vector<SceneLog> read_scenes(std::istream& in);
std::vector<SceneLog> read_scenes(const std::filesystem::path& path);

// Writers emit the header line followed by one record per line.
void write_instances(std::ostream& out, std::span<const CrossingInstance> instances);
void write_instances(const std::filesystem::path& path,
                     std::span<const CrossingInstance> instances);
void write_scenes(std::ostream& out, std::span<const SceneLog> scenes);
void write_scenes(const std::filesystem::path& path, std::span<const SceneLog> scenes);

}  // namespace crosspath::data
