#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "crosspath/cli/manifest.h"

namespace crosspath::cli {

enum class FlagKind { kString, kInt, kUInt, kDouble, kSetTrue, kSetFalse, kStringList, kIntList, kDoubleList };

// A command-line flag bound to a JSON pointer into the command's config.
struct Flag {
  std::string name;  // without leading dashes
  std::string key;   // JSON pointer, e.g. "/model/nodes"
  FlagKind kind = FlagKind::kString;
  std::string help;
};

// State of one invocation shared with the command handler.
class Run {
 public:
  Run(Json config, std::filesystem::path out_dir, int jobs, std::ostream& log);

  const Json& config() const { return config_; }
  const Json& at(std::string_view pointer) const;
  std::string text(std::string_view pointer) const;
  int integer(std::string_view pointer) const;
  std::uint64_t seed_at(std::string_view pointer) const;
  double number(std::string_view pointer) const;
  bool flag(std::string_view pointer) const;

  int jobs() const { return jobs_; }
  std::ostream& log() { return log_; }
  const std::filesystem::path& out_dir() const { return out_dir_; }

  // Records an input file (digest taken now) and returns its path.
  std::filesystem::path input(std::string_view pointer);
  void record_input(const std::filesystem::path& path);
  // Writes `bytes` to `path` (relative paths resolve against the output
  // directory) and records it as an artifact.
  void emit(const std::filesystem::path& path, std::string_view bytes);
  void set_seed(std::uint64_t master) { manifest_.seed = master; }
  void seed(std::string name, std::uint64_t value);

  RunManifest& manifest() { return manifest_; }

 private:
  Json config_;
  std::filesystem::path out_dir_;
  int jobs_ = 1;
  std::ostream& log_;
  RunManifest manifest_;
};

struct Command {
  std::string name;
  std::string help;
  Json defaults;
  std::vector<Flag> flags;
  std::vector<std::string> required;  // flag names
  // --out names a file whose directory receives the manifest, rather than a
  // directory.
  bool out_is_file = false;
  // Extra output path flags (name, help); stored outside the config.
  std::vector<std::pair<std::string, std::string>> outputs;
  // Canonicalizes the merged config (aliases, derived fields) before it is
  // echoed; may throw.
  std::function<void(Json&)> normalize;
  std::function<void(Run&, const std::vector<std::string>& outputs)> handler;
};

std::vector<Command> commands();

}  // namespace crosspath::cli
