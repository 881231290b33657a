#include "quadsr/commands.hpp"

#include <filesystem>
#include <ostream>
#include <sstream>

#include "quadsr/io.hpp"
#include "quadsr/learned_model.hpp"

namespace quadsr {

namespace fs = std::filesystem;

namespace {

std::size_t steps_per(double interval, double dt) { return static_cast<std::size_t>(std::llround(interval / dt)); }

}  // namespace

RunConfig resolve_config(const CliOverrides& o) {
  RunConfig c = o.config_path ? load_config(*o.config_path) : RunConfig{};
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.channel) c.fit.channel = *o.channel;
  c.check();
  return c;
}

std::uint64_t range_seed(std::uint64_t seed, std::size_t range_index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (range_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<Sample> make_training_data(const RunConfig& c, std::size_t range_index) {
  const auto [lo, hi] = c.data.ranges.at(range_index);
  const std::uint64_t seed = range_seed(c.seed, range_index);
  const RandomUniform excitation(lo, hi, seed, c.data.dwell, c.data.duration + 1.0);
  DatasetOptions opts;
  opts.duration = c.data.duration;
  opts.sample_dt = c.data.sample_dt;
  opts.dt = c.plant_dt;
  opts.seed = seed;
  opts.noise_sigma = c.data.noise_sigma;
  opts.tilt_envelope = c.data.tilt_envelope;
  opts.speed_envelope = c.data.speed_envelope;
  return generate_dataset(c.plant, excitation, opts);
}

std::string dataset_filename(const std::pair<double, double>& range) {
  return "data_" + sr::format_number(range.first) + "_" + sr::format_number(range.second) + ".csv";
}

void cmd_generate_data(const RunConfig& c, std::ostream& log) {
  for (std::size_t i = 0; i < c.data.ranges.size(); ++i) {
    const auto samples = make_training_data(c, i);
    std::ostringstream csv;
    write_dataset_csv(csv, samples);
    const fs::path path = fs::path(c.output_dir) / dataset_filename(c.data.ranges[i]);
    write_file(path, csv.str());
    log << "wrote " << path.string() << " (" << samples.size() << " rows)\n";
  }
}

void cmd_fit(const RunConfig& c, std::ostream& log) {
  std::vector<Sample> samples;
  if (!c.fit.data.empty()) {
    samples = read_dataset_csv(fs::path(c.fit.data));
  } else {
    samples = make_training_data(c, c.data.ranges.size() - 1);
  }
  if (samples.empty()) throw std::invalid_argument("dataset has no rows");

  sr::SRConfig cfg = c.sr;
  cfg.seed = c.seed;
  if (cfg.features.empty()) cfg.features = default_features(c.fit.channel, cfg.squared_inputs);
  const sr::Dataset data = build_channel_dataset(samples, c.fit.channel, cfg.features);

  const sr::EvolutionResult result = sr::evolve(cfg, data);
  if (result.front.empty()) throw DomainError("search produced no finite candidate");
  const sr::Candidate& chosen = result.front.select(cfg.sifting_tolerance);
  const std::string expr = sr::render(chosen.tree, data.names);

  const fs::path dir(c.output_dir);
  write_file(dir / ("fit_" + c.fit.channel + ".json"), fit_report_json(result.front, data));
  write_file(dir / ("fit_" + c.fit.channel + ".txt"), expr + "\n");
  log << "channel " << c.fit.channel << ": " << result.generations_run << " generations, front of "
      << result.front.members().size() << "\nselected: " << expr << "\n";
}

ValidationReport cmd_validate(const RunConfig& c, std::ostream& log) {
  const TestSinusoid excitation;
  const State start = horizon_trim_state(c.plant, excitation, c.validate.duration);
  const auto trace = integrate(
      c.plant, start, [&](double t) { return excitation(t); }, c.validate.duration, c.plant_dt);

  const std::size_t stride = steps_per(c.validate.sample_dt, c.plant_dt);
  const LearnedModel model;
  const std::array<int, 6> rows = {0, 1, 2, 6, 7, 8};
  std::array<std::vector<double>, 6> truth, pred;
  std::ostringstream series;
  series << "t";
  for (const char* ch : ValidationReport::kChannels) series << ',' << ch << ',' << ch << "_pred";
  series << '\n';
  for (std::size_t k = 0; k + 1 < trace.size(); k += stride) {
    const Sample& s = trace[k];
    const Vec9 learned = derivative_labels(model.derivative(s.state, s.input));
    series << format_exact(s.t);
    for (std::size_t ch = 0; ch < 6; ++ch) {
      truth[ch].push_back(s.derivs(rows[ch]));
      pred[ch].push_back(learned(rows[ch]));
      series << ',' << format_exact(truth[ch].back()) << ',' << format_exact(pred[ch].back());
    }
    series << '\n';
  }

  ValidationReport report;
  report.samples = truth[0].size();
  report.excitation = "u_i = 300 + 300 sin(10 t + p_i), p = (0, pi/4, pi/3, pi/6), " +
                      sr::format_number(c.validate.duration) + " s";
  for (std::size_t ch = 0; ch < 6; ++ch) report.channels[ch] = fit_metrics(pred[ch], truth[ch]);

  std::ostringstream learned;
  for (int i = 4; i <= 12; ++i) learned << "zeta" << i << " = " << LearnedModel::expression(i) << '\n';

  const fs::path dir(c.output_dir);
  write_file(dir / "validation.json", report.to_json());
  write_file(dir / "validation_series.csv", series.str());
  write_file(dir / "learned_model.txt", learned.str());
  for (std::size_t ch = 0; ch < 6; ++ch) {
    const auto& m = report.channels[ch];
    log << ValidationReport::kChannels[ch] << ": rmse " << m.rmse << ", mae " << m.mae << ", r2 " << m.r2 << '\n';
  }
  return report;
}

bool cmd_track(const RunConfig& c, std::ostream& log) {
  HierarchicalController controller(c.gains, c.controller);
  const PlantModel plant = c.plant;
  const Dynamics dyn = [&plant](const Vec12& x, const RotorCommand& u) { return plant.derivative(x, u); };
  const Reference ref = c.reference();
  const TrackResult result = simulate_tracking(dyn, controller, ref, c.initial_state(), c.track.duration, c.plant_dt);

  const fs::path dir(c.output_dir);
  std::ostringstream track, diag;
  write_track_csv(track, result.records);
  write_diagnostics_csv(diag, result.records);
  write_file(dir / "track.csv", track.str());
  write_file(dir / "diagnostics.csv", diag.str());

  if (result.failed) {
    log << "closed loop failed: " << result.error << '\n';
    return false;
  }
  if (!result.records.empty() && result.records.back().t > 4.0) {
    const TrackingSummary summary = tracking_summary(result.records);
    write_file(dir / "summary.json", summary.to_json());
    for (std::size_t a = 0; a < 4; ++a) {
      const auto& s = summary.axes[a];
      log << TrackingSummary::kChannels[a] << ": max after 4 s " << s.max_error_after << ", steady " << s.steady_state
          << ", settles " << (s.settling_time ? sr::format_number(*s.settling_time) : std::string("never")) << '\n';
    }
  }
  log << "wrote " << (dir / "track.csv").string() << " (" << result.records.size() << " rows)\n";
  return true;
}

int run_command(const std::string& name, const CliOverrides& o, std::ostream& log, std::ostream& err) {
  RunConfig c;
  try {
    c = resolve_config(o);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    if (name == "generate-data") {
      cmd_generate_data(c, log);
    } else if (name == "fit") {
      cmd_fit(c, log);
    } else if (name == "validate") {
      cmd_validate(c, log);
    } else if (name == "track") {
      if (!cmd_track(c, log)) return kExitNumerical;
    } else {
      err << "unknown command: " << name << '\n';
      return kExitConfig;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace quadsr
