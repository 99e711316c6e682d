#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace crosspath::cli {

// Process exit codes. Stable; scripts may depend on them.
//   0  success
//   1  runtime failure (diverged training, generation failure, ...)
//   2  usage: unknown flag, missing required option, invalid value
//   3  missing input: a file could not be opened or read
//   4  schema mismatch: malformed JSON/JSONL/container, wrong fields,
//      manifest replayed against changed inputs or another subcommand
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitMissingInput = 3,
  kExitSchema = 4,
};

const char* tool_version();

// Maps a caught exception to its exit code.
int exit_code_for(const std::exception& e);

// Runs one invocation. `args` excludes the program name. Progress goes to
// `out`, diagnostics and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crosspath::cli
