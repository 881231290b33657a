#include "quadsr/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "quadsr/metrics.hpp"

namespace quadsr {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) {
    throw IoError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
  }
  return v;
}

/// Named feature of one sample.
double feature_value(const Sample& s, const std::string& name) {
  const State& x = s.state;
  if (name == "x") return x.x;
  if (name == "y") return x.y;
  if (name == "z") return x.z;
  if (name == "vx") return x.vx;
  if (name == "vy") return x.vy;
  if (name == "vz") return x.vz;
  if (name == "phi") return x.phi();
  if (name == "theta") return x.theta();
  if (name == "psi") return x.psi();
  if (name == "wx") return x.wx;
  if (name == "wy") return x.wy;
  if (name == "wz") return x.wz;
  if (name.size() >= 2 && name[0] == 'u' && name[1] >= '1' && name[1] <= '4') {
    const double u = s.input[static_cast<std::size_t>(name[1] - '1')];
    if (name.size() == 2) return u;
    if (name.substr(2) == "sq") return u * u;
  }
  throw std::invalid_argument("unknown feature: " + name);
}

int label_index(const std::string& channel) {
  static const std::map<std::string, int> idx = {{"ax", 0}, {"ay", 1}, {"az", 2}, {"dwx", 6}, {"dwy", 7}, {"dwz", 8}};
  const auto it = idx.find(channel);
  if (it == idx.end()) throw std::invalid_argument("unknown channel: " + channel);
  return it->second;
}

}  // namespace

std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& dataset_columns() {
  static const std::vector<std::string> cols = {"t",   "x",   "y",  "z",  "vx", "vy", "vz", "phi",
                                                "theta", "psi", "wx", "wy", "wz", "u1", "u2", "u3",
                                                "u4",  "ax",  "ay", "az", "dwx", "dwy", "dwz"};
  return cols;
}

const std::vector<std::string>& label_channels() {
  static const std::vector<std::string> ch = {"ax", "ay", "az", "dwx", "dwy", "dwz"};
  return ch;
}

void write_dataset_csv(std::ostream& os, const std::vector<Sample>& samples) {
  const auto& cols = dataset_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const Sample& s : samples) {
    const Vec12 x = s.state.to_vector();
    os << format_exact(s.t);
    for (int i = 0; i < 12; ++i) os << ',' << format_exact(x(i));
    for (std::size_t i = 0; i < 4; ++i) os << ',' << format_exact(s.input[i]);
    for (int i : {0, 1, 2, 6, 7, 8}) os << ',' << format_exact(s.derivs(i));
    os << '\n';
  }
}

std::vector<Sample> read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("dataset is empty");
  const auto header = split_csv(line);
  std::vector<std::size_t> where;
  for (const auto& c : dataset_columns()) {
    const auto it = std::find(header.begin(), header.end(), c);
    if (it == header.end()) throw IoError("dataset is missing column '" + c + "'");
    where.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  std::vector<Sample> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw IoError("line " + std::to_string(lineno) + ": wrong cell count");
    std::array<double, 23> v{};
    for (std::size_t i = 0; i < where.size(); ++i) v[i] = parse_double(cells[where[i]], lineno);

    Sample s;
    s.t = v[0];
    Vec12 x;
    for (int i = 0; i < 12; ++i) x(i) = v[static_cast<std::size_t>(i) + 1];
    try {
      s.state = State::from_vector(x);
    } catch (const DomainError& e) {
      throw IoError("line " + std::to_string(lineno) + ": " + e.what());
    }
    for (std::size_t i = 0; i < 4; ++i) s.input[i] = v[13 + i];
    const Vec3 rates = euler_rate_transform(s.state.phi(), s.state.theta()) * Vec3(s.state.wx, s.state.wy, s.state.wz);
    s.derivs << v[17], v[18], v[19], rates(0), rates(1), rates(2), v[20], v[21], v[22];
    out.push_back(s);
  }
  return out;
}

std::vector<Sample> read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_dataset_csv(in);
}

std::vector<std::string> default_features(const std::string& channel, bool squared_inputs) {
  std::vector<std::string> f;
  label_index(channel);
  if (channel == "ax" || channel == "ay") {
    f = {"phi", "theta", "psi"};
  } else if (channel == "az") {
    f = {"phi", "theta", "vz"};
  } else {
    f = {"wx", "wy", "wz"};
  }
  for (const char* u : {"u1", "u2", "u3", "u4"}) f.emplace_back(u);
  if (squared_inputs) {
    for (const char* u : {"u1sq", "u2sq", "u3sq", "u4sq"}) f.emplace_back(u);
  }
  return f;
}

sr::Dataset build_channel_dataset(const std::vector<Sample>& samples, const std::string& channel,
                                  const std::vector<std::string>& features) {
  if (samples.empty()) throw std::invalid_argument("dataset has no rows");
  if (features.empty()) throw std::invalid_argument("no features selected");
  const int target = label_index(channel);
  sr::Dataset d;
  d.names = features;
  const auto n = static_cast<Eigen::Index>(samples.size());
  d.X.resize(n, static_cast<Eigen::Index>(features.size()));
  d.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Sample& s = samples[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < features.size(); ++c) d.X(r, static_cast<Eigen::Index>(c)) = feature_value(s, features[c]);
    d.y(r) = s.derivs(target);
  }
  return d;
}

std::string fit_report_json(const sr::ParetoFront& front, const sr::Dataset& data) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  std::span<const double> truth(data.y.data(), static_cast<std::size_t>(data.y.size()));
  for (const auto& c : front.members()) {
    const Eigen::ArrayXd pred = sr::eval_batch(c.tree, data.X);
    std::span<const double> p(pred.data(), static_cast<std::size_t>(pred.size()));
    const FitMetrics m = fit_metrics(p, truth);
    arr.push_back({{"expr", sr::render(c.tree, data.names)},
                   {"complexity", c.complexity()},
                   {"fitness", c.fitness},
                   {"r2", m.r2},
                   {"rmse", m.rmse},
                   {"mae", m.mae}});
  }
  return arr.dump(2) + "\n";
}

void write_track_csv(std::ostream& os, const std::vector<TrackRecord>& records) {
  os << "t,x,xd,y,yd,z,zd,psi,psid\n";
  for (const auto& r : records) {
    os << format_exact(r.t) << ',' << format_exact(r.state.x) << ',' << format_exact(r.xd) << ','
       << format_exact(r.state.y) << ',' << format_exact(r.yd) << ',' << format_exact(r.state.z) << ','
       << format_exact(r.zd) << ',' << format_exact(r.state.psi()) << ',' << format_exact(r.psid) << '\n';
  }
}

void write_diagnostics_csv(std::ostream& os, const std::vector<TrackRecord>& records) {
  os << "t,ex,ey,ez,epsi,phid,thetad,f1,f2,f3,f4,u1,u2,u3,u4,W1,W2,W3,W4,flags\n";
  for (const auto& r : records) {
    const Diagnostics& d = r.diag;
    os << format_exact(d.t);
    for (double v : {d.ex, d.ey, d.ez, d.epsi, d.phi_d, d.theta_d, d.f.f1, d.f.f2, d.f.f3, d.f.f4}) {
      os << ',' << format_exact(v);
    }
    for (double v : d.u.u) os << ',' << format_exact(v);
    for (double v : d.lyapunov.W) os << ',' << format_exact(v);
    os << ',' << d.flags << '\n';
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace quadsr
