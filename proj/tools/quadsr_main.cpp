#include <iostream>

#include "CLI11.hpp"
#include "quadsr/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Symbolic-regression quadrotor identification and backstepping tracking"};
  app.require_subcommand(1);

  quadsr::CliOverrides o;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string channel;

  for (const char* name : {"generate-data", "fit", "validate", "track"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run configuration");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--channel", channel, "Fit target: ax, ay, az, dwx, dwy, dwz");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : quadsr::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--config")) o.config_path = config;
  if (sub->count("--seed")) o.seed = seed;
  if (sub->count("--out")) o.out = out;
  if (sub->count("--channel")) o.channel = channel;
  return quadsr::run_command(sub->get_name(), o, std::cout, std::cerr);
}
