#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "quadsr/controller.hpp"
#include "quadsr/plant.hpp"
#include "quadsr/sr_engine.hpp"

namespace quadsr {

/// Invalid, unparsable or unknown configuration content.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scenario { Case1, Case2, Custom };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// Scalar reference given by kind and parameters.
struct TrajectorySpec {
  std::string kind = "constant";  // constant | ramp | sine
  double value = 0;               // constant value, ramp/sine offset
  double rate = 0;                // ramp slope
  double amplitude = 0, omega = 0, phase = 0;

  Trajectory build() const;
  bool operator==(const TrajectorySpec&) const = default;
};

struct DataConfig {
  std::vector<std::pair<double, double>> ranges = {{0, 300}, {0, 700}, {0, 800}, {0, 1000}};
  double duration = 10.0;
  double sample_dt = 0.005;
  /// Hold time of each random speed draw.
  double dwell = 0.05;
  double noise_sigma = 0.0;
  double tilt_envelope = 1.0;
  double speed_envelope = 30.0;
  bool operator==(const DataConfig&) const = default;
};

struct FitConfig {
  std::string channel = "dwz";
  /// Dataset CSV; empty generates the last configured range in memory.
  std::string data;
  bool operator==(const FitConfig&) const = default;
};

struct ValidateConfig {
  double duration = 10.0;
  double sample_dt = 0.005;
  bool operator==(const ValidateConfig&) const = default;
};

struct TrackConfig {
  double duration = 30.0;
  /// Custom scenario only.
  std::array<TrajectorySpec, 4> custom{};
  std::array<double, 12> initial{};
  bool operator==(const TrackConfig&) const = default;
};

struct RunConfig {
  Scenario scenario = Scenario::Case1;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  PlantModel plant;
  GainSet gains = GainSet::defaults();
  ControllerConfig controller = ControllerConfig::tuned();
  double plant_dt = 0.001;
  DataConfig data;
  sr::SRConfig sr;
  FitConfig fit;
  ValidateConfig validate;
  TrackConfig track;

  /// Throws ConfigError on any inconsistency.
  void check() const;
  Reference reference() const;
  State initial_state() const;

  bool operator==(const RunConfig& o) const;
};

/// Parses JSON text on top of the defaults. Unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& c);

}  // namespace quadsr
