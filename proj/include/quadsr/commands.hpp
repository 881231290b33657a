#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "quadsr/config.hpp"
#include "quadsr/metrics.hpp"
#include "quadsr/plant.hpp"

namespace quadsr {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitNumerical = 3 };

/// Command-line overrides applied on top of the loaded configuration.
struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> channel;
};

RunConfig resolve_config(const CliOverrides& o);

/// Per-range seed used by generate-data and by in-memory fitting data.
std::uint64_t range_seed(std::uint64_t seed, std::size_t range_index);

/// Plant data for configured range `range_index`.
std::vector<Sample> make_training_data(const RunConfig& c, std::size_t range_index);
std::string dataset_filename(const std::pair<double, double>& range);

/// Each command writes under c.output_dir and logs progress to `log`.
/// Failures raise; run_command maps them to exit codes.
void cmd_generate_data(const RunConfig& c, std::ostream& log);
void cmd_fit(const RunConfig& c, std::ostream& log);
ValidationReport cmd_validate(const RunConfig& c, std::ostream& log);
/// Returns false if the closed loop aborted; the artifacts are written either way.
bool cmd_track(const RunConfig& c, std::ostream& log);

/// Dispatches `name` (generate-data, fit, validate, track) and returns the exit code.
int run_command(const std::string& name, const CliOverrides& o, std::ostream& log, std::ostream& err);

}  // namespace quadsr
