#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadsr/controller.hpp"
#include "quadsr/expr.hpp"
#include "quadsr/plant.hpp"
#include "quadsr/sr_engine.hpp"

namespace quadsr {

/// Malformed or unreadable input file, or an unwritable output path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column order of dataset files.
const std::vector<std::string>& dataset_columns();

void write_dataset_csv(std::ostream& os, const std::vector<Sample>& samples);
/// Columns may appear in any order; Euler-rate labels are rebuilt from the
/// state since they are kinematic.
std::vector<Sample> read_dataset_csv(std::istream& is);
std::vector<Sample> read_dataset_csv(const std::filesystem::path& path);

/// Regression targets stored in dataset files.
const std::vector<std::string>& label_channels();

/// Features searched for a channel when none are configured.
std::vector<std::string> default_features(const std::string& channel, bool squared_inputs);

/// Feature matrix and target column for one label channel. Features are
/// named state columns, u1..u4, or u1sq..u4sq.
sr::Dataset build_channel_dataset(const std::vector<Sample>& samples, const std::string& channel,
                                  const std::vector<std::string>& features);

/// Pareto front as a JSON array of {expr, complexity, fitness, r2, rmse, mae},
/// complexity ascending, with metrics measured on `data`.
std::string fit_report_json(const sr::ParetoFront& front, const sr::Dataset& data);

void write_track_csv(std::ostream& os, const std::vector<TrackRecord>& records);
void write_diagnostics_csv(std::ostream& os, const std::vector<TrackRecord>& records);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& content);

/// %.17g, exact round trip for doubles.
std::string format_exact(double v);

}  // namespace quadsr
