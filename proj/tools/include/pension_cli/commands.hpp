#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pension::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 1,
  kNumericalError = 2,
  kComparisonFailure = 3,
};

struct RunOptions {
  std::string command;  // solve-marital | value | simulate | compare | g82-check
  std::filesystem::path config;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<double> step;
  bool quiet = false;
};

/// |z| above which compare reports a failure.
inline constexpr double kZLimit = 4.0;
/// f bins whose expected count under the analytic density is smaller than
/// this are reported but not tested.
inline constexpr double kMinExpectedCount = 5.0;

/// Runs one command; exceptions are mapped to exit codes and reported on `err`.
int execute(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Parses `args` (without the program name) and runs the command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pension::cli
