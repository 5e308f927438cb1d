#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sdjls::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,            // success / Feasible
  kIoError = 1,       // unreadable file, malformed JSON
  kInvalid = 2,       // model validation failure or bad command-line usage
  kUndetermined = 3,  // LMI solver exhausted its budget
  kNumeric = 4,       // numerical failure
};

inline constexpr const char* kVersion = "0.1.0";

/// Runs the command line (args excludes the program name). Exactly one JSON
/// run report is written to `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdjls::cli
