#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadsr/controller.hpp"

namespace quadsr {

/// Truth series with zero variance, R^2 undefined.
class UndefinedVarianceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Root mean squared error. Throws std::invalid_argument on length mismatch or empty input.
double rmse(std::span<const double> pred, std::span<const double> truth);
/// Mean absolute error.
double mae(std::span<const double> pred, std::span<const double> truth);
/// Coefficient of determination against the truth-mean baseline; may be negative.
double r2(std::span<const double> pred, std::span<const double> truth);

struct FitMetrics {
  double rmse = 0, mae = 0, r2 = 0;
  bool operator==(const FitMetrics&) const = default;
};

FitMetrics fit_metrics(std::span<const double> pred, std::span<const double> truth);

/// Per-channel fit of a model against labelled data, Table-I layout:
/// xdd, ydd, zdd, wxdot, wydot, wzdot.
struct ValidationReport {
  static constexpr std::array<const char*, 6> kChannels = {"ax", "ay", "az", "dwx", "dwy", "dwz"};

  std::array<FitMetrics, 6> channels{};
  std::size_t samples = 0;
  std::string excitation;

  const FitMetrics& channel(std::string_view name) const;
  std::string to_json() const;
  static ValidationReport from_json(const std::string& text);
  bool operator==(const ValidationReport&) const = default;
};

/// Tracking quality of one channel.
struct AxisSummary {
  /// max |e| over t >= settle_after
  double max_error_after = 0;
  /// mean |e| over the final 10% of the run
  double steady_state = 0;
  /// Earliest time after which |e| stays within the band; empty if never.
  std::optional<double> settling_time;
};

struct TrackingSummary {
  static constexpr std::array<const char*, 4> kChannels = {"x", "y", "z", "psi"};

  std::array<AxisSummary, 4> axes{};
  double settle_after = 4.0;
  double position_band = 0.05;
  double yaw_band = 0.02;

  const AxisSummary& axis(std::string_view name) const;
  std::string to_json() const;
};

/// Summarizes a closed-loop run. Requires the run to outlast `settle_after`.
TrackingSummary tracking_summary(const std::vector<TrackRecord>& records, double settle_after = 4.0,
                                 double position_band = 0.05, double yaw_band = 0.02);

}  // namespace quadsr
