#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "aeroflex/io.hpp"

namespace aeroflex::io {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aeroflex::analysis;

namespace {

std::ofstream create(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out = create(path);
  out << j.dump(2) << '\n';
}

const char* basis_name(FlutterBasis b) {
  return b == FlutterBasis::undeformed ? "undeformed" : "prestressed";
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

int modal(const RunConfig& c, const CommandOptions& o, std::ostream& out) {
  const auto mesh = beam::BeamMesh::cantilever(c.model.semi_span, c.modal_elements + 1, c.model.section);
  const auto modes = beam::modal_frequencies(mesh, c.model.sigma, c.modal_count);
  std::ofstream csv = create(o.out_dir / "modal.csv");
  csv << "mode,omega,label\n";
  out << fmt::format("{:>4}  {:>12}  {}\n", "mode", "omega[rad/s]", "label");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    csv << i + 1 << ',' << format_number(modes[i].omega) << ',' << modes[i].label << '\n';
    out << fmt::format("{:>4}  {:>12.4f}  {}\n", i + 1, modes[i].omega, modes[i].label);
  }
  return kSuccess;
}

int static_deflection(const RunConfig& c, const CommandOptions& o, std::ostream& out) {
  const auto mesh =
      beam::BeamMesh::cantilever(c.model.semi_span, c.model.elements_per_semispan + 1, c.model.section);
  const double q = c.static_load;
  beam::DistributedLoad load{[q](const Vec3&) { return Vec3(0, 0, -q); },
                             [](const Vec3&) { return Vec3::Zero(); }};
  beam::StaticOptions lin;
  lin.linear = true;
  const auto linear = beam::static_solve(mesh, load, c.model.sigma, lin);
  const auto nonlinear = beam::static_solve(mesh, load, c.model.sigma);
  std::ofstream csv = create(o.out_dir / "static.csv");
  csv << "y,u3_linear,u3_nonlinear,u2_nonlinear\n";
  for (int i = 0; i < mesh.node_count(); ++i) {
    csv << format_number(mesh.nodes[i](1)) << ',' << format_number(-linear.states[i].u(2)) << ','
        << format_number(-nonlinear.states[i].u(2)) << ',' << format_number(nonlinear.states[i].u(1))
        << '\n';
  }
  const double tl = -linear.states.back().u(2), tn = -nonlinear.states.back().u(2);
  out << fmt::format("load {} N/m  tip deflection: linear {:.6f} m ({:.4f} L), nonlinear {:.6f} m "
                     "({:.4f} L), nonlinear/linear {:.4f}\n",
                     q, tl, tl / c.model.semi_span, tn, tn / c.model.semi_span, tn / tl);
  return kSuccess;
}

int trim(const RunConfig& c, const CommandOptions& o, std::ostream& out) {
  const TrimResult r = trim_solve(c.model, c.trim_mode);
  const json j = {{"sigma", c.model.sigma},
                  {"U", c.model.U},
                  {"mode", c.trim_mode == TrimMode::rigid ? "rigid" : "flexible"},
                  {"converged", r.converged},
                  {"alpha_trim", r.alpha_trim},
                  {"thrust_trim", r.thrust_trim},
                  {"tail_load", r.tail_load},
                  {"tip_deflection", r.tip_deflection},
                  {"required_cl", r.required_cl},
                  {"cl_limit_exceeded", r.cl_limit_exceeded},
                  {"residual_lift", r.residual_lift},
                  {"residual_moment", r.residual_moment},
                  {"iterations", r.iterations}};
  write_json(j, o.out_dir / "trim.json");
  out << fmt::format("alpha_trim {:.6f} rad  thrust {:.4f} N  tail load {:.4f} N  tip {:.4f} m{}\n",
                     r.alpha_trim, r.thrust_trim, r.tail_load, r.tip_deflection,
                     r.cl_limit_exceeded ? "  (required CL beyond limit)" : "");
  if (!r.converged) throw ConvergenceError("trim did not converge");
  return kSuccess;
}

int flutter(const RunConfig& c, const CommandOptions& o, std::ostream& out) {
  FlutterOptions f = c.flutter;
  if (o.basis) f.basis = *o.basis;
  const FlutterResult r = flutter_speed(flutter_options(c.model), f);
  json trace = json::array();
  std::ofstream csv = create(o.out_dir / "damping_trace.csv");
  csv << "V,max_real,frequency\n";
  for (const auto& s : r.damping_trace) {
    csv << format_number(s.V) << ',' << format_number(s.max_real) << ',' << format_number(s.frequency)
        << '\n';
    trace.push_back({s.V, s.max_real});
  }
  csv.close();
  json j = {{"sigma", c.model.sigma},
            {"basis", basis_name(r.basis)},
            {"found", r.found},
            {"unstable_at_start", r.unstable_at_start},
            {"V_f", r.found ? json(r.V_f) : json(nullptr)},
            {"flutter_frequency", r.found ? json(r.flutter_frequency) : json(nullptr)},
            {"critical_mode_id", r.critical_mode_id},
            {"critical_mode", r.critical_mode},
            {"alpha_root", r.alpha_root},
            {"damping_trace", trace}};
  write_json(j, o.out_dir / "flutter.json");
  if (!r.found) throw ConvergenceError("no flutter in range");
  out << fmt::format("V_f {:.4f} m/s  frequency {:.4f} rad/s  basis {}  mode {}\n", r.V_f,
                     r.flutter_frequency, basis_name(r.basis), r.critical_mode);
  return kSuccess;
}

int gust(const RunConfig& c, const CommandOptions& o, std::ostream& out) {
  GustOptions g{c.gust, c.gust_horizon, c.solver};
  const GustRun run = gust_response(c.model, g);
  write_timehistory_csv(run.history, o.out_dir / "gust.csv");
  emit_svg_plots(run.history, o.out_dir);
  out << fmt::format("steps {}  peak |root M_x| {:.4f} N m  peak tip deflection {:.6f} m\n",
                     run.history.size() - 1, run.peak_root_moment, run.peak_tip_deflection);
  return kSuccess;
}

int sweep(const RunConfig& c, const CommandOptions& o, std::ostream& out) {
  SweepOptions s;
  s.sigmas = c.sigma_list;
  s.flutter = c.flutter;
  if (o.basis) s.flutter.basis = *o.basis;
  s.gust = {c.gust, c.gust_horizon, c.solver};
  s.run_flutter = c.sweep_flutter;
  s.run_gust = c.sweep_gust;
  s.jobs = o.jobs;
  std::ofstream csv = create(o.out_dir / "sweep.csv");
  csv << kSweepHeader << '\n' << std::flush;
  int failures = 0;
  const auto records = sigma_sweep(c.model, s, [&](const SweepRecord& r) {
    csv << sweep_csv_row(r) << '\n' << std::flush;
    for (const auto* st : {&r.trim, &r.modes, &r.flutter_undeformed, &r.flutter_prestressed, &r.gust}) {
      if (!st->ok && st->error.rfind("skipped", 0) != 0) {
        ++failures;
        out << fmt::format("sigma {}: {}\n", format_number(r.sigma), st->error);
      }
    }
    out << fmt::format("sigma {} done\n", format_number(r.sigma)) << std::flush;
  });
  emit_svg_plots(records, o.out_dir);
  out << fmt::format("{} records, {} stage failures\n", records.size(), failures);
  return kSuccess;
}

int validate(const RunConfig& c, std::ostream& out) {
  bool all = true;
  auto line = [&](bool ok, const std::string& text) {
    all = all && ok;
    out << (ok ? "PASS  " : "FAIL  ") << text << '\n';
  };
  const auto mesh = beam::BeamMesh::cantilever(c.model.semi_span, c.modal_elements + 1, c.model.section);
  const auto modes = beam::modal_frequencies(mesh, 1.0, 5);
  struct Ref {
    const char* name;
    double value;
    double tolerance;
  };
  const Ref table[] = {{"1st bending", 2.24, 0.01},
                       {"2nd bending", 14.07, 0.01},
                       {"1st torsion", 31.04, 0.01},
                       {"1st in-plane bending", 31.71, 0.01},
                       {"3rd bending (exact beam theory)", 39.35, 0.015}};
  for (int i = 0; i < 5; ++i) {
    const double err = modes[i].omega / table[i].value - 1.0;
    line(std::abs(err) <= table[i].tolerance,
         fmt::format("mode {} {:<32} {:8.3f} rad/s  reference {:6.2f}  error {:+.2f}%  ({})", i + 1,
                     table[i].name, modes[i].omega, table[i].value, 100 * err, modes[i].label));
  }
  coupled::ModelOptions wing = flutter_options(c.model);
  wing.sigma = 1.0;
  FlutterOptions f = c.flutter;
  f.basis = FlutterBasis::undeformed;
  const FlutterResult r = flutter_speed(wing, f);
  line(r.found && std::abs(r.V_f / 31.2 - 1.0) <= 0.05,
       fmt::format("flutter speed {:8.3f} m/s  reference 31.2 +/- 5%", r.V_f));
  line(r.found && std::abs(r.flutter_frequency - 22.0) <= 3.0,
       fmt::format("flutter frequency {:8.3f} rad/s  reference 22 +/- 3", r.flutter_frequency));
  return all ? kSuccess : kAnalysisFailure;
}

}  // namespace

int run_command(const std::string& sub, const RunConfig& config, const CommandOptions& options,
                std::ostream& out, std::ostream& err) {
  try {
    if (sub == "modal") return modal(config, options, out);
    if (sub == "static") return static_deflection(config, options, out);
    if (sub == "trim") return trim(config, options, out);
    if (sub == "flutter") return flutter(config, options, out);
    if (sub == "gust") return gust(config, options, out);
    if (sub == "sweep") return sweep(config, options, out);
    if (sub == "validate") return validate(config, out);
    err << "error: config: unknown subcommand '" << sub << "'\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "error: config: " << one_line(e.what()) << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: analysis: " << one_line(e.what()) << '\n';
    return kAnalysisFailure;
  }
}

}  // namespace aeroflex::io
