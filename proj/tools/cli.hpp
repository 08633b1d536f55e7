#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tiltbound/model.hpp"

namespace tiltbound::cli {

enum class Command { validate, spectrum, rate, constants, bound, simulate, ergodic };
enum class Format { text, machine, csv };

std::string_view to_string(Command command);
std::string_view to_string(Format format);
Format parse_format(std::string_view text);

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;    ///< bad input or failed assumptions
inline constexpr int kExitNumerical = 2;  ///< solver failure

struct RunConfig {
  Command command = Command::validate;
  std::filesystem::path model_path;
  /// Unset means: both tails for `validate`, upper everywhere else.
  std::optional<Side> side;
  std::vector<double> mu;
  std::optional<std::pair<double, double>> interval;
  std::vector<std::int64_t> n;
  std::vector<double> theta;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  Format format = Format::text;
  std::optional<std::filesystem::path> out;
};

/// "lo:hi:count", a comma list, or a single value. Sorted, duplicates removed.
std::vector<double> parse_real_grid(std::string_view text);
/// "lo:hi" (inclusive), a comma list, or a single value. Sorted, unique.
std::vector<std::int64_t> parse_int_range(std::string_view text);
/// "LO,HI" with LO <= HI.
std::pair<double, double> parse_interval(std::string_view text);

/// Throws InputError when a command's required parameters are missing or a
/// format is not available for it.
void check_config(const RunConfig& config);

/// Executes one command and writes its report to `out` (or to config.out).
/// Diagnostics go to `err`. Returns the exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses arguments (argv[0] is the program name) and runs.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tiltbound::cli
