#include "crosspath/cli/app.h"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <ostream>

#include "command.h"
#include "crosspath/common/checksum.h"
#include "crosspath/common/errors.h"
#include "crosspath/common/parallel.h"

#ifndef CROSSPATH_VERSION
#define CROSSPATH_VERSION "0.0.0"
#endif

namespace crosspath::cli {

namespace fs = std::filesystem;

const char* tool_version() { return CROSSPATH_VERSION; }

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const BuildError*>(&e)) {
    return kExitUsage;
  }
  if (dynamic_cast<const IoError*>(&e)) return kExitMissingInput;
  if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ParseError*>(&e)) {
    return kExitSchema;
  }
  return kExitFailure;
}

// ---- Run ------------------------------------------------------------------

Run::Run(Json config, fs::path out_dir, int jobs, std::ostream& log)
    : config_(std::move(config)), out_dir_(std::move(out_dir)), jobs_(jobs), log_(log) {}

const Json& Run::at(std::string_view pointer) const {
  const Json::json_pointer p{std::string(pointer)};
  if (!config_.contains(p)) throw SchemaError(std::string(pointer), "missing from config");
  return config_.at(p);
}

namespace {

template <typename T>
T get_as(const Json& j, std::string_view pointer) {
  try {
    return j.get<T>();
  } catch (const Json::exception& e) {
    throw SchemaError(std::string(pointer), e.what());
  }
}

}  // namespace

std::string Run::text(std::string_view pointer) const {
  return get_as<std::string>(at(pointer), pointer);
}
int Run::integer(std::string_view pointer) const { return get_as<int>(at(pointer), pointer); }
std::uint64_t Run::seed_at(std::string_view pointer) const {
  return get_as<std::uint64_t>(at(pointer), pointer);
}
double Run::number(std::string_view pointer) const {
  return get_as<double>(at(pointer), pointer);
}
bool Run::flag(std::string_view pointer) const { return get_as<bool>(at(pointer), pointer); }

fs::path Run::input(std::string_view pointer) {
  const fs::path path = text(pointer);
  record_input(path);
  return path;
}

void Run::record_input(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw IoError("cannot open input " + path.string());
  const std::string digest = sha256_file(path);
  const std::string name = path.string();
  auto& inputs = manifest_.inputs;
  if (std::none_of(inputs.begin(), inputs.end(), [&](const auto& f) { return f.path == name; })) {
    inputs.push_back(FileDigest{name, digest});
  }
}

void Run::emit(const fs::path& path, std::string_view bytes) {
  const fs::path full = path.is_absolute() ? path : out_dir_ / path;
  auto out = data::open_output(full);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("failed writing " + full.string());
  const std::string rel = fs::proximate(full, out_dir_).generic_string();
  auto& arts = manifest_.artifacts;
  const std::string digest = sha256_hex(bytes);
  auto it = std::find_if(arts.begin(), arts.end(), [&](const auto& f) { return f.path == rel; });
  if (it != arts.end()) {
    it->sha256 = digest;
  } else {
    arts.push_back(FileDigest{rel, digest});
  }
}

void Run::seed(std::string name, std::uint64_t value) {
  manifest_.seeds.push_back(NamedSeed{std::move(name), value});
}

// ---- config resolution ----------------------------------------------------

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t begin = 0;
  while (true) {
    const auto comma = s.find(',', begin);
    parts.push_back(s.substr(begin, comma - begin));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return parts;
}

long long parse_integer(const std::string& flag, const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw UsageError("--" + flag + ": expected an integer, got '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& flag, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw UsageError("--" + flag + ": expected a number, got '" + s + "'");
  }
  return v;
}

Json convert(const Flag& f, const std::string& s) {
  switch (f.kind) {
    case FlagKind::kString:
      return s;
    case FlagKind::kInt:
      return parse_integer(f.name, s);
    case FlagKind::kUInt: {
      const long long v = parse_integer(f.name, s);
      if (v < 0) throw UsageError("--" + f.name + ": must be non-negative");
      return static_cast<std::uint64_t>(v);
    }
    case FlagKind::kDouble:
      return parse_double(f.name, s);
    case FlagKind::kSetTrue:
      return true;
    case FlagKind::kSetFalse:
      return false;
    case FlagKind::kStringList: {
      Json a = Json::array();
      for (const auto& p : split_list(s)) a.push_back(p);
      return a;
    }
    case FlagKind::kIntList: {
      Json a = Json::array();
      for (const auto& p : split_list(s)) a.push_back(parse_integer(f.name, p));
      return a;
    }
    case FlagKind::kDoubleList: {
      Json a = Json::array();
      for (const auto& p : split_list(s)) a.push_back(parse_double(f.name, p));
      return a;
    }
  }
  return s;
}

// Rejects keys the command does not know, so typos in config files fail
// loudly instead of silently falling back to defaults.
void check_known(const Json& given, const Json& defaults, const std::string& path) {
  for (const auto& [key, value] : given.items()) {
    const std::string where = path + "/" + key;
    if (!defaults.contains(key)) throw SchemaError(where, "unknown configuration key");
    const Json& d = defaults.at(key);
    if (d.is_object()) {
      if (!value.is_object()) throw SchemaError(where, "expected an object");
      check_known(value, d, where);
    }
  }
}

Json read_json_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw IoError("cannot open config " + path.string());
  Json j = Json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ParseError("config " + path.string() + " is not a JSON object", 1);
  }
  return j;
}

// Config from a file: either a plain config object or a manifest of an
// earlier run of the same subcommand, whose inputs must be unchanged.
Json load_config_file(const fs::path& path, const Command& cmd) {
  Json j = read_json_file(path);
  if (!is_manifest(j)) return j;
  const RunManifest m = manifest_from_json(j);
  if (m.subcommand != cmd.name) {
    throw SchemaError("subcommand", "manifest was written by '" + m.subcommand + "', not '" +
                                        cmd.name + "'");
  }
  const auto changed = changed_inputs(m);
  if (!changed.empty()) {
    throw SchemaError("inputs", "input changed since the manifest was written: " + changed.front());
  }
  return m.config;
}

struct Bound {
  const Command* command = nullptr;
  CLI::App* app = nullptr;
  std::string config_path;
  std::string out;
  int jobs = 0;
  std::vector<std::string> values;   // per flag
  std::vector<CLI::Option*> options;  // per flag
  std::vector<std::string> outputs;   // per extra output
};

const char* type_name(FlagKind k) {
  switch (k) {
    case FlagKind::kInt: return "INT";
    case FlagKind::kUInt: return "UINT";
    case FlagKind::kDouble: return "FLOAT";
    case FlagKind::kStringList: return "LIST";
    case FlagKind::kIntList: return "INT,...";
    case FlagKind::kDoubleList: return "FLOAT,...";
    default: return "TEXT";
  }
}

void bind(Bound& b) {
  const Command& cmd = *b.command;
  CLI::App& sub = *b.app;
  sub.add_option("--config", b.config_path, "JSON config file or manifest of an earlier run");
  sub.add_option("--out", b.out,
                 cmd.out_is_file ? "Output file; the manifest goes next to it"
                                 : "Output directory");
  sub.add_option("--jobs", b.jobs, "Worker threads (default: CROSSPATH_JOBS, else 1)");
  b.values.resize(cmd.flags.size());
  for (std::size_t i = 0; i < cmd.flags.size(); ++i) {
    const Flag& f = cmd.flags[i];
    const bool is_switch = f.kind == FlagKind::kSetTrue || f.kind == FlagKind::kSetFalse;
    if (is_switch) {
      b.options.push_back(sub.add_flag("--" + f.name, f.help));
      continue;
    }
    auto* opt = sub.add_option("--" + f.name, b.values[i], f.help);
    opt->type_name(type_name(f.kind));
    b.options.push_back(opt);
  }
  b.outputs.resize(cmd.outputs.size());
  for (std::size_t i = 0; i < cmd.outputs.size(); ++i) {
    sub.add_option("--" + cmd.outputs[i].first, b.outputs[i], cmd.outputs[i].second);
  }
}

Json resolve(const Bound& b) {
  const Command& cmd = *b.command;
  Json config = cmd.defaults;
  if (!b.config_path.empty()) {
    const Json file = load_config_file(b.config_path, cmd);
    check_known(file, cmd.defaults, "");
    config.merge_patch(file);
  }
  for (std::size_t i = 0; i < cmd.flags.size(); ++i) {
    if (b.options[i]->count() == 0) continue;
    const Flag& f = cmd.flags[i];
    config[Json::json_pointer(f.key)] = convert(f, b.values[i]);
  }
  for (const auto& name : cmd.required) {
    const auto it = std::find_if(cmd.flags.begin(), cmd.flags.end(),
                                 [&](const Flag& f) { return f.name == name; });
    const Json::json_pointer p(it->key);
    if (!config.contains(p) || (config.at(p).is_string() && config.at(p).get<std::string>().empty())) {
      throw UsageError("missing required option --" + name);
    }
  }
  if (cmd.normalize) cmd.normalize(config);
  return config;
}

void print_error(std::ostream& err, const std::exception& e, int code) {
  const char* category = "error";
  switch (code) {
    case kExitUsage: category = "usage error"; break;
    case kExitMissingInput: category = "missing input"; break;
    case kExitSchema: category = "schema mismatch"; break;
    default: break;
  }
  err << "crosspath: " << category << ": " << e.what() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto cmds = commands();
  CLI::App app{"Context-aware pedestrian trajectory prediction toolkit", "crosspath"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", tool_version());

  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& cmd : cmds) {
    auto b = std::make_unique<Bound>();
    b->command = &cmd;
    b->app = app.add_subcommand(cmd.name, cmd.help);
    bind(*b);
    bound.push_back(std::move(b));
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Bound* active = nullptr;
  for (const auto& b : bound) {
    if (b->app->parsed()) active = b.get();
  }
  const Command& cmd = *active->command;

  try {
    if (active->out.empty()) throw UsageError("missing required option --out");
    const auto start = std::chrono::steady_clock::now();
    Json config = resolve(*active);

    const fs::path out_path = active->out;
    const fs::path out_dir = cmd.out_is_file
                                 ? (out_path.has_parent_path() ? out_path.parent_path() : ".")
                                 : out_path;
    fs::create_directories(out_dir);

    const int jobs = resolve_jobs(active->jobs);
    Run r(config, out_dir, jobs, out);
    RunManifest& m = r.manifest();
    m.subcommand = cmd.name;
    m.tool_version = tool_version();
    m.config = config;
    m.jobs = jobs;

    std::vector<std::string> outputs;
    // Output file paths are taken relative to the working directory.
    for (std::size_t i = 0; i < cmd.outputs.size(); ++i) {
      const auto& o = active->outputs[i];
      outputs.push_back(o.empty() ? o : fs::absolute(o).string());
    }
    if (cmd.out_is_file) outputs.insert(outputs.begin(), fs::absolute(out_path).string());
    cmd.handler(r, outputs);

    m.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out_dir / kManifestName, m);
    out << "manifest: " << (out_dir / kManifestName).string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    print_error(err, e, code);
    if (code == kExitUsage) err << active->app->help();
    return code;
  }
}

}  // namespace crosspath::cli
