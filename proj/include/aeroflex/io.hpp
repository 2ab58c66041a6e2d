#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aeroflex/analysis.hpp"

namespace aeroflex::io {

/// Malformed, unknown or out-of-range configuration entry. The message
/// starts with the offending key path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  coupled::ModelOptions model;  // sigma, geometry, section, flight condition
  std::vector<double> sigma_list{0.001, 0.01, 0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  coupled::SolverSettings solver;
  aero::GustSpec gust;
  double gust_horizon = 6.0;
  analysis::FlutterOptions flutter;
  analysis::TrimMode trim_mode = analysis::TrimMode::flexible;
  // Uniform upward load per unit span for the static command, N/m.
  double static_load = 22.7;
  int modal_elements = 64;
  int modal_count = 6;
  bool sweep_flutter = true;
  bool sweep_gust = true;
  std::string output_dir;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Plain decimal with 9 significant digits.
std::string format_number(double v);

void write_timehistory_csv(const coupled::TimeHistory& history,
                           const std::filesystem::path& path);

extern const char* const kSweepHeader;
std::string sweep_csv_row(const analysis::SweepRecord& record);

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string name;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool markers = false;
};

std::string render_svg(const Plot& plot);

/// Tip deflection and root moment against time. Returns the files written;
/// an empty history writes nothing.
std::vector<std::filesystem::path> emit_svg_plots(const coupled::TimeHistory& history,
                                                  const std::filesystem::path& dir);

/// Trim incidence and flutter speeds against sigma.
std::vector<std::filesystem::path> emit_svg_plots(const std::vector<analysis::SweepRecord>& sweep,
                                                  const std::filesystem::path& dir);

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  int jobs = 1;
  std::optional<analysis::FlutterBasis> basis;
};

enum ExitCode { kSuccess = 0, kAnalysisFailure = 1, kConfigError = 2 };

/// Runs one subcommand, writing artifacts under options.out_dir and a
/// summary to out. Errors are reported as one line on err.
int run_command(const std::string& subcommand, const RunConfig& config,
                const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace aeroflex::io
