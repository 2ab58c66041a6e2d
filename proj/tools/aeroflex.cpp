#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "aeroflex/io.hpp"

using namespace aeroflex;

int main(int argc, char** argv) {
  CLI::App app{"Coupled aeroelastic and flight-dynamics analysis of flexible wings"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  std::string basis;

  for (const char* name : {"modal", "static", "trim", "flutter", "gust", "sweep", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--jobs", jobs, "worker threads for sweep points")->check(CLI::PositiveNumber);
    if (std::string(name) == "flutter" || std::string(name) == "sweep") {
      sub->add_option("--basis", basis, "flutter linearization basis")
          ->check(CLI::IsMember({"undeformed", "prestressed"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: usage: " << e.what() << '\n';
    return io::kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  io::RunConfig config;
  try {
    config = io::parse_config(config_path);
  } catch (const Error& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return io::kConfigError;
  }

  io::CommandOptions options;
  options.jobs = jobs;
  if (!basis.empty()) {
    options.basis = basis == "undeformed" ? analysis::FlutterBasis::undeformed
                                          : analysis::FlutterBasis::prestressed;
  }
  if (const char* env = std::getenv("AEROFLEX_OUT"); env && *env) {
    options.out_dir = env;
  } else if (!out_dir.empty()) {
    options.out_dir = out_dir;
  } else if (!config.output_dir.empty()) {
    options.out_dir = config.output_dir;
  }
  return io::run_command(command, config, options, std::cout, std::cerr);
}
