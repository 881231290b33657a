#include <gtest/gtest.h>

#include <cmath>

#include "quadsr/config.hpp"

using namespace quadsr;

namespace {

RunConfig parse_checked(const std::string& text) {
  RunConfig c = parse_config(text);
  c.check();
  return c;
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  const RunConfig c;
  EXPECT_NO_THROW(c.check());
  EXPECT_EQ(c.controller, ControllerConfig::tuned());
  EXPECT_EQ(c.data.ranges.size(), 4u);
}

TEST(Config, EmptyObjectGivesDefaults) { EXPECT_EQ(parse_config("{}"), RunConfig{}); }

TEST(Config, SerializeParseIsIdempotent) {
  RunConfig c;
  c.scenario = Scenario::Custom;
  c.seed = 77;
  c.output_dir = "runs/a";
  c.plant.gyro_sign = -1;
  c.controller.tilt_rate_limit = std::numeric_limits<double>::infinity();
  c.sr.features = {"wx", "wy"};
  c.sr.population = 123;
  c.track.custom[0] = {"sine", 1.0, 0.0, 2.0, 0.5, 0.25};
  c.track.custom[2] = {"ramp", -1.0, -0.3, 0, 0, 0};
  c.track.initial[6] = 0.2;
  c.data.ranges = {{100, 200}};
  const std::string text = serialize_config(c);
  const RunConfig back = parse_config(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_EQ(serialize_config(parse_config(serialize_config(RunConfig{}))), serialize_config(RunConfig{}));
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(parse_config(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"plant": {"mass": 1.4}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"sr": {"population": 10, "popsize": 3}})"), ConfigError);
}

TEST(Config, WrongTypesRejected) {
  EXPECT_THROW(parse_config(R"({"seed": "one"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"data": {"ranges": 5}})"), ConfigError);
  EXPECT_THROW(parse_config("not json"), ConfigError);
}

TEST(Config, RangeBeyondRotorLimitRejected) {
  EXPECT_THROW(parse_checked(R"({"data": {"ranges": [[0, 1200]]}})"), ConfigError);
  EXPECT_THROW(parse_checked(R"({"data": {"ranges": [[500, 100]]}})"), ConfigError);
  EXPECT_NO_THROW(parse_checked(R"({"data": {"ranges": [[0, 1000]]}})"));
}

TEST(Config, ScenarioNames) {
  EXPECT_EQ(parse_config(R"({"scenario": "case2"})").scenario, Scenario::Case2);
  EXPECT_THROW(parse_config(R"({"scenario": "case3"})"), ConfigError);
  for (Scenario s : {Scenario::Case1, Scenario::Case2, Scenario::Custom})
    EXPECT_EQ(scenario_from_string(to_string(s)), s);
}

TEST(Config, InconsistentStepsRejected) {
  EXPECT_THROW(parse_checked(R"({"integrator": {"dt": 0.003}})"), ConfigError);
  EXPECT_THROW(parse_checked(R"({"fit": {"channel": "psi"}})"), ConfigError);
  EXPECT_THROW(parse_checked(R"({"track": {"initial": [0,0,0,0,0,0,1.6,0,0,0,0,0]}})"), ConfigError);
  EXPECT_THROW(parse_checked(R"({"gains": {"c": [1,1,1,1,1,1,1,0]}})"), ConfigError);
}

TEST(Config, NullRateLimitMeansUnlimited) {
  const RunConfig c = parse_config(R"({"controller": {"tilt_rate_limit": null}})");
  EXPECT_TRUE(std::isinf(c.controller.tilt_rate_limit));
}

TEST(Config, ScenarioReferences) {
  RunConfig c;
  c.scenario = Scenario::Case2;
  EXPECT_DOUBLE_EQ(c.reference().x(10).value, 2.0);
  c.scenario = Scenario::Custom;
  c.track.custom[1] = {"ramp", 1.0, 0.5, 0, 0, 0};
  EXPECT_DOUBLE_EQ(c.reference().y(2).value, 2.0);
  c.track.initial[0] = 3.0;
  EXPECT_DOUBLE_EQ(c.initial_state().x, 3.0);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/cfg.json"), ConfigError); }
