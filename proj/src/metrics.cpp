#include "quadsr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace quadsr {

namespace {

void check_lengths(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("series lengths differ");
  if (pred.empty()) throw std::invalid_argument("series are empty");
}

template <std::size_t N>
std::size_t channel_index(const std::array<const char*, N>& names, std::string_view name) {
  for (std::size_t i = 0; i < N; ++i)
    if (name == names[i]) return i;
  throw std::out_of_range("unknown channel: " + std::string(name));
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  double ss = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

double r2(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  const auto n = static_cast<double>(truth.size());
  double mean = 0;
  for (double v : truth) mean += v;
  mean /= n;
  double ss_tot = 0, ss_res = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
    ss_res += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  }
  if (!(ss_tot > 0)) throw UndefinedVarianceError("R^2 undefined for constant truth");
  return 1.0 - ss_res / ss_tot;
}

FitMetrics fit_metrics(std::span<const double> pred, std::span<const double> truth) {
  return {rmse(pred, truth), mae(pred, truth), r2(pred, truth)};
}

const FitMetrics& ValidationReport::channel(std::string_view name) const {
  return channels[channel_index(kChannels, name)];
}

std::string ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["excitation"] = excitation;
  j["samples"] = samples;
  nlohmann::ordered_json ch = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kChannels.size(); ++i) {
    ch[kChannels[i]] = {{"rmse", channels[i].rmse}, {"mae", channels[i].mae}, {"r2", channels[i].r2}};
  }
  j["channels"] = ch;
  return j.dump(2) + "\n";
}

ValidationReport ValidationReport::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ValidationReport r;
  r.excitation = j.at("excitation").get<std::string>();
  r.samples = j.at("samples").get<std::size_t>();
  const auto& ch = j.at("channels");
  for (std::size_t i = 0; i < kChannels.size(); ++i) {
    const auto& c = ch.at(kChannels[i]);
    r.channels[i] = {c.at("rmse").get<double>(), c.at("mae").get<double>(), c.at("r2").get<double>()};
  }
  return r;
}

const AxisSummary& TrackingSummary::axis(std::string_view name) const { return axes[channel_index(kChannels, name)]; }

std::string TrackingSummary::to_json() const {
  nlohmann::ordered_json j;
  j["settle_after"] = settle_after;
  j["position_band"] = position_band;
  j["yaw_band"] = yaw_band;
  nlohmann::ordered_json ax = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kChannels.size(); ++i) {
    ax[kChannels[i]] = {{"max_error_after", axes[i].max_error_after},
                        {"steady_state", axes[i].steady_state},
                        {"settling_time", optional_json(axes[i].settling_time)}};
  }
  j["axes"] = ax;
  return j.dump(2) + "\n";
}

TrackingSummary tracking_summary(const std::vector<TrackRecord>& records, double settle_after, double position_band,
                                 double yaw_band) {
  if (records.size() < 2 || !(records.back().t > settle_after)) {
    throw std::invalid_argument("trajectory must outlast the settle window");
  }
  TrackingSummary out;
  out.settle_after = settle_after;
  out.position_band = position_band;
  out.yaw_band = yaw_band;

  const std::size_t n = records.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  for (std::size_t a = 0; a < 4; ++a) {
    const double band = a == 3 ? yaw_band : position_band;
    auto err = [&](const TrackRecord& r) {
      switch (a) {
        case 0: return std::abs(r.xd - r.state.x);
        case 1: return std::abs(r.yd - r.state.y);
        case 2: return std::abs(r.zd - r.state.z);
        default: return std::abs(wrap_angle(r.psid - r.state.psi()));
      }
    };
    AxisSummary& s = out.axes[a];
    std::optional<double> last_outside;
    double ss = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double e = err(records[k]);
      if (records[k].t >= settle_after) s.max_error_after = std::max(s.max_error_after, e);
      if (k >= n - tail) ss += e;
      if (!(e <= band)) last_outside = static_cast<double>(k);
    }
    s.steady_state = ss / static_cast<double>(tail);
    if (!last_outside) {
      s.settling_time = records.front().t;
    } else if (*last_outside + 1 < static_cast<double>(n)) {
      s.settling_time = records[static_cast<std::size_t>(*last_outside) + 1].t;
    }
  }
  return out;
}

}  // namespace quadsr
