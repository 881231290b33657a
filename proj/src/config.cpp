#include "quadsr/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace quadsr {

using Json = nlohmann::ordered_json;

namespace {

/// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& field) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      field = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where() + "." + key + " has the wrong type");
    }
  }

  /// null maps to +infinity.
  void read_unbounded(const char* key, double& field) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      field = std::numeric_limits<double>::infinity();
    } else if (it->is_number()) {
      field = it->get<double>();
    } else {
      throw ConfigError(where() + "." + key + " must be a number or null");
    }
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key " + where() + "." + k);
    }
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Json unbounded(double v) { return std::isinf(v) ? Json(nullptr) : Json(v); }

Json trajectory_json(const TrajectorySpec& t) {
  Json j;
  j["kind"] = t.kind;
  if (t.kind == "constant") {
    j["value"] = t.value;
  } else if (t.kind == "ramp") {
    j["value"] = t.value;
    j["rate"] = t.rate;
  } else {
    j["amplitude"] = t.amplitude;
    j["omega"] = t.omega;
    j["phase"] = t.phase;
    j["value"] = t.value;
  }
  return j;
}

TrajectorySpec trajectory_from(const Json& j, const std::string& path) {
  TrajectorySpec t;
  Section s(j, path);
  s.read("kind", t.kind);
  s.read("value", t.value);
  s.read("rate", t.rate);
  s.read("amplitude", t.amplitude);
  s.read("omega", t.omega);
  s.read("phase", t.phase);
  s.finish();
  if (t.kind != "constant" && t.kind != "ramp" && t.kind != "sine") {
    throw ConfigError(path + ".kind must be constant, ramp or sine");
  }
  return t;
}

constexpr std::array<const char*, 4> kRefAxes = {"x", "y", "z", "psi"};

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Case1: return "case1";
    case Scenario::Case2: return "case2";
    case Scenario::Custom: return "custom";
  }
  return "custom";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "case1") return Scenario::Case1;
  if (s == "case2") return Scenario::Case2;
  if (s == "custom") return Scenario::Custom;
  throw ConfigError("scenario must be case1, case2 or custom, got '" + s + "'");
}

Trajectory TrajectorySpec::build() const {
  if (kind == "constant") return Trajectory::constant(value);
  if (kind == "ramp") return Trajectory::ramp(value, rate);
  if (kind == "sine") return Trajectory::sine(amplitude, omega, phase, value);
  throw ConfigError("unknown trajectory kind '" + kind + "'");
}

bool RunConfig::operator==(const RunConfig& o) const {
  return scenario == o.scenario && seed == o.seed && output_dir == o.output_dir && plant.params == o.plant.params &&
         plant.vertical_drag == o.plant.vertical_drag && plant.lateral_bias == o.plant.lateral_bias &&
         plant.gyro_sign == o.plant.gyro_sign && gains == o.gains && controller == o.controller &&
         plant_dt == o.plant_dt && data == o.data && sr == o.sr && fit == o.fit && validate == o.validate &&
         track == o.track;
}

void RunConfig::check() const {
  try {
    plant.params.validate();
    controller.validate();
    sr.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (plant.gyro_sign != 1 && plant.gyro_sign != -1) throw ConfigError("plant.gyro_sign must be +1 or -1");
  if (!(plant.vertical_drag >= 0)) throw ConfigError("plant.vertical_drag must be nonnegative");
  if (!(plant_dt > 0)) throw ConfigError("integrator.dt must be positive");
  const double ratio = controller.dt / plant_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1) {
    throw ConfigError("controller.dt must be an integer multiple of integrator.dt");
  }
  if (data.ranges.empty()) throw ConfigError("data.ranges is empty");
  for (const auto& [lo, hi] : data.ranges) {
    if (!(lo >= 0) || !(hi <= kMaxRotorSpeed) || !(lo <= hi)) {
      throw ConfigError("data range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                        "] outside the rotor limits [0, 1000]");
    }
  }
  if (!(data.duration > 0) || !(data.sample_dt > 0) || !(data.dwell > 0)) {
    throw ConfigError("data durations must be positive");
  }
  if (!(data.noise_sigma >= 0)) throw ConfigError("data.noise_sigma must be nonnegative");
  const double per = data.sample_dt / plant_dt;
  if (std::abs(per - std::round(per)) > 1e-9 || per < 1) {
    throw ConfigError("data.sample_dt must be an integer multiple of integrator.dt");
  }
  const double vper = validate.sample_dt / plant_dt;
  if (!(validate.duration > 0) || std::abs(vper - std::round(vper)) > 1e-9 || vper < 1) {
    throw ConfigError("validate.sample_dt must be an integer multiple of integrator.dt");
  }
  static const std::set<std::string> channels = {"ax", "ay", "az", "dwx", "dwy", "dwz"};
  if (!channels.count(fit.channel)) throw ConfigError("fit.channel '" + fit.channel + "' is not a label channel");
  if (!(track.duration > 0)) throw ConfigError("track.duration must be positive");
  if (std::abs(track.initial[6]) >= kPi / 2 || std::abs(track.initial[7]) >= kPi / 2) {
    throw ConfigError("track.initial roll and pitch must lie in (-pi/2, pi/2)");
  }
}

Reference RunConfig::reference() const {
  switch (scenario) {
    case Scenario::Case1: return Reference::case1();
    case Scenario::Case2: return Reference::case2();
    case Scenario::Custom: break;
  }
  return Reference{track.custom[0].build(), track.custom[1].build(), track.custom[2].build(),
                   track.custom[3].build()};
}

State RunConfig::initial_state() const {
  if (scenario != Scenario::Custom) return State{};
  Vec12 v;
  for (int i = 0; i < 12; ++i) v(i) = track.initial[static_cast<std::size_t>(i)];
  return State::from_vector(v);
}

RunConfig parse_config(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig c;
  Section top(root, "");
  std::string scenario = to_string(c.scenario);
  top.read("scenario", scenario);
  c.scenario = scenario_from_string(scenario);
  top.read("seed", c.seed);
  top.read("output_dir", c.output_dir);

  if (const Json* j = top.child("plant")) {
    Section s(*j, "plant");
    PlantParams& p = c.plant.params;
    s.read("m", p.m);
    s.read("g", p.g);
    s.read("Jxx", p.Jxx);
    s.read("Jyy", p.Jyy);
    s.read("Jzz", p.Jzz);
    s.read("d", p.d);
    s.read("Ct", p.Ct);
    s.read("Cm", p.Cm);
    s.read("vertical_drag", c.plant.vertical_drag);
    s.read("lateral_bias", c.plant.lateral_bias);
    s.read("gyro_sign", c.plant.gyro_sign);
    s.finish();
  }
  if (const Json* j = top.child("gains")) {
    Section s(*j, "gains");
    double kpx = c.gains.kpx(), kix = c.gains.kix(), kpy = c.gains.kpy(), kiy = c.gains.kiy();
    std::array<double, 8> cc = c.gains.c_all();
    s.read("kpx", kpx);
    s.read("kix", kix);
    s.read("kpy", kpy);
    s.read("kiy", kiy);
    s.read("c", cc);
    s.finish();
    try {
      c.gains = GainSet(kpx, kix, kpy, kiy, cc);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (const Json* j = top.child("controller")) {
    Section s(*j, "controller");
    s.read("dt", c.controller.dt);
    s.read("tilt_limit", c.controller.tilt_limit);
    s.read_unbounded("tilt_rate_limit", c.controller.tilt_rate_limit);
    s.read("filter_cutoff", c.controller.filter_cutoff);
    s.read("filter_damping", c.controller.filter_damping);
    s.read("denominator_eps", c.controller.denominator_eps);
    s.finish();
  }
  if (const Json* j = top.child("integrator")) {
    Section s(*j, "integrator");
    s.read("dt", c.plant_dt);
    s.finish();
  }
  if (const Json* j = top.child("data")) {
    Section s(*j, "data");
    s.read("ranges", c.data.ranges);
    s.read("duration", c.data.duration);
    s.read("sample_dt", c.data.sample_dt);
    s.read("dwell", c.data.dwell);
    s.read("noise_sigma", c.data.noise_sigma);
    s.read("tilt_envelope", c.data.tilt_envelope);
    s.read("speed_envelope", c.data.speed_envelope);
    s.finish();
  }
  if (const Json* j = top.child("sr")) {
    Section s(*j, "sr");
    sr::SRConfig& r = c.sr;
    s.read("population", r.population);
    s.read("generations", r.generations);
    s.read("tournament", r.tournament);
    s.read("crossover", r.crossover);
    s.read("mutation", r.mutation);
    s.read("constant_jitter", r.constant_jitter);
    s.read("max_depth", r.max_depth);
    s.read("init_min_depth", r.init_min_depth);
    s.read("init_max_depth", r.init_max_depth);
    s.read("constant_fit_rate", r.constant_fit_rate);
    s.read("constant_fit_rows", r.constant_fit_rows);
    s.read("constant_fit_iterations", r.constant_fit_iterations);
    s.read("stop_fitness", r.stop_fitness);
    s.read("sifting_tolerance", r.sifting_tolerance);
    s.read("elite_fraction", r.elite_fraction);
    s.read("allow_sqrt", r.allow_sqrt);
    s.read("threads", r.threads);
    s.read("features", r.features);
    s.read("squared_inputs", r.squared_inputs);
    s.finish();
  }
  if (const Json* j = top.child("fit")) {
    Section s(*j, "fit");
    s.read("channel", c.fit.channel);
    s.read("data", c.fit.data);
    s.finish();
  }
  if (const Json* j = top.child("validate")) {
    Section s(*j, "validate");
    s.read("duration", c.validate.duration);
    s.read("sample_dt", c.validate.sample_dt);
    s.finish();
  }
  if (const Json* j = top.child("track")) {
    Section s(*j, "track");
    s.read("duration", c.track.duration);
    s.read("initial", c.track.initial);
    if (const Json* r = s.child("reference")) {
      Section rs(*r, "track.reference");
      for (std::size_t i = 0; i < 4; ++i) {
        if (const Json* a = rs.child(kRefAxes[i])) {
          c.track.custom[i] = trajectory_from(*a, "track.reference." + std::string(kRefAxes[i]));
        }
      }
      rs.finish();
    }
    s.finish();
  }
  top.finish();
  c.check();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  Json j;
  j["scenario"] = to_string(c.scenario);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  const PlantParams& p = c.plant.params;
  j["plant"] = {{"m", p.m},
                {"g", p.g},
                {"Jxx", p.Jxx},
                {"Jyy", p.Jyy},
                {"Jzz", p.Jzz},
                {"d", p.d},
                {"Ct", p.Ct},
                {"Cm", p.Cm},
                {"vertical_drag", c.plant.vertical_drag},
                {"lateral_bias", c.plant.lateral_bias},
                {"gyro_sign", c.plant.gyro_sign}};
  j["gains"] = {{"kpx", c.gains.kpx()},
                {"kix", c.gains.kix()},
                {"kpy", c.gains.kpy()},
                {"kiy", c.gains.kiy()},
                {"c", c.gains.c_all()}};
  j["controller"] = {{"dt", c.controller.dt},
                     {"tilt_limit", c.controller.tilt_limit},
                     {"tilt_rate_limit", unbounded(c.controller.tilt_rate_limit)},
                     {"filter_cutoff", c.controller.filter_cutoff},
                     {"filter_damping", c.controller.filter_damping},
                     {"denominator_eps", c.controller.denominator_eps}};
  j["integrator"] = {{"dt", c.plant_dt}};
  j["data"] = {{"ranges", c.data.ranges},
               {"duration", c.data.duration},
               {"sample_dt", c.data.sample_dt},
               {"dwell", c.data.dwell},
               {"noise_sigma", c.data.noise_sigma},
               {"tilt_envelope", c.data.tilt_envelope},
               {"speed_envelope", c.data.speed_envelope}};
  const sr::SRConfig& r = c.sr;
  j["sr"] = {{"population", r.population},
             {"generations", r.generations},
             {"tournament", r.tournament},
             {"crossover", r.crossover},
             {"mutation", r.mutation},
             {"constant_jitter", r.constant_jitter},
             {"max_depth", r.max_depth},
             {"init_min_depth", r.init_min_depth},
             {"init_max_depth", r.init_max_depth},
             {"constant_fit_rate", r.constant_fit_rate},
             {"constant_fit_rows", r.constant_fit_rows},
             {"constant_fit_iterations", r.constant_fit_iterations},
             {"stop_fitness", r.stop_fitness},
             {"sifting_tolerance", r.sifting_tolerance},
             {"elite_fraction", r.elite_fraction},
             {"allow_sqrt", r.allow_sqrt},
             {"threads", r.threads},
             {"features", r.features},
             {"squared_inputs", r.squared_inputs}};
  j["fit"] = {{"channel", c.fit.channel}, {"data", c.fit.data}};
  j["validate"] = {{"duration", c.validate.duration}, {"sample_dt", c.validate.sample_dt}};
  Json refs = Json::object();
  for (std::size_t i = 0; i < 4; ++i) refs[kRefAxes[i]] = trajectory_json(c.track.custom[i]);
  j["track"] = {{"duration", c.track.duration}, {"initial", c.track.initial}, {"reference", refs}};
  return j.dump(2) + "\n";
}

}  // namespace quadsr
