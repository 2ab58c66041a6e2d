#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <iostream>

#include "aeroflex/io.hpp"

namespace aeroflex::io {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (v == 0.0) return "0";
  // The exponent after rounding to 9 significant digits fixes the decimals.
  const std::string sci = fmt::format("{:.8e}", v);
  const int exponent = std::stoi(sci.substr(sci.find('e') + 1));
  std::string s = fmt::format("{:.{}f}", std::stod(sci), std::max(0, 8 - exponent));
  if (s.find('.') != std::string::npos) {
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
  }
  return s == "-0" ? "0" : s;
}

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_timehistory_csv(const coupled::TimeHistory& h, const fs::path& path) {
  if (h.size() == 0) throw RangeError("time history is empty");
  std::ofstream out = open_output(path);
  out << "t,tip_defl,root_Mx,alpha_eff_root,pitch,u,w,q_rate,altitude\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double row[] = {h.t[i], h.tip_defl[i], h.root_Mx[i], h.alpha_eff_root[i], h.pitch[i],
                          h.u[i], h.w[i],        h.q_rate[i],  h.altitude[i]};
    for (std::size_t k = 0; k < std::size(row); ++k) {
      out << (k ? "," : "") << format_number(row[k]);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

const char* const kSweepHeader =
    "sigma,alpha_trim,tip_deflection_over_span,V_f_undeformed,V_f_prestressed,"
    "phugoid_re,phugoid_im,short_period_re,short_period_im,gust_peak_root_moment,"
    "gust_peak_tip_deflection,trim_status,modes_status,flutter_undeformed_status,"
    "flutter_prestressed_status,gust_status";

std::string sweep_csv_row(const analysis::SweepRecord& r) {
  auto value = [](const analysis::StageStatus& s, double v) {
    return s.ok ? format_number(v) : std::string();
  };
  auto status = [](const analysis::StageStatus& s) {
    if (s.ok) return "ok";
    return s.error.rfind("skipped", 0) == 0 ? "skipped" : "failed";
  };
  std::string row = format_number(r.sigma);
  for (const std::string& cell :
       {value(r.trim, r.alpha_trim), value(r.trim, r.tip_deflection_over_span),
        value(r.flutter_undeformed, r.V_f_undeformed),
        value(r.flutter_prestressed, r.V_f_prestressed),
        value(r.modes, r.phugoid_eigenvalue.real()), value(r.modes, r.phugoid_eigenvalue.imag()),
        value(r.modes, r.short_period_eigenvalue.real()),
        value(r.modes, r.short_period_eigenvalue.imag()),
        value(r.gust, r.gust_peak_root_moment), value(r.gust, r.gust_peak_tip_deflection)}) {
    row += "," + cell;
  }
  for (const auto* s : {&r.trim, &r.modes, &r.flutter_undeformed, &r.flutter_prestressed, &r.gust}) {
    row += std::string(",") + status(*s);
  }
  return row;
}

// ------------------------------------------------------------------- svg

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fixed(double v) { return fmt::format("{:.2f}", v); }

std::string tick(double v) {
  std::string s = fmt::format("{:.4g}", v);
  return s == "-0" ? "0" : s;
}

// Round axis ticks in [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  }
  return out;
}

}  // namespace

std::string render_svg(const Plot& p) {
  const double W = 640, H = 420, left = 80, right = 20, top = 40, bottom = 60;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : p.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  auto widen = [](double& lo, double& hi) {
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
      const double d = std::max(1.0, std::abs(hi)) * 0.05;
      lo -= d;
      hi += d;
    } else {
      const double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  };
  widen(x0, x1);
  widen(y0, y1);
  const double pw = W - left - right, ph = H - top - bottom;
  auto X = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto Y = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      W, H, W, H);
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                   fixed(W / 2), escape(p.title));
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                   fixed(left), fixed(top), fixed(pw), fixed(ph));
  for (double t : ticks(x0, x1)) {
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", fixed(X(t)),
                     fixed(top), fixed(top + ph));
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", fixed(X(t)),
                     fixed(top + ph + 16), tick(t));
  }
  for (double t : ticks(y0, y1)) {
    s += fmt::format("<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"#ddd\"/>\n", fixed(Y(t)),
                     fixed(left), fixed(left + pw));
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", fixed(left - 6),
                     fixed(Y(t) + 4), tick(t));
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", fixed(left + pw / 2),
                   fixed(H - 18), escape(p.x_label));
  s += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
      fixed(top + ph / 2), escape(p.y_label));
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& ser = p.series[k];
    const char* color = colors[k % std::size(colors)];
    std::string points;
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      points += (points.empty() ? "" : " ") + fixed(X(ser.x[i])) + "," + fixed(Y(ser.y[i]));
      if (p.markers) {
        s += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3.5\" fill=\"{}\"/>\n", fixed(X(ser.x[i])),
                         fixed(Y(ser.y[i])), color);
      }
    }
    s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color,
                     points);
    if (!ser.name.empty()) {
      const double ly = top + 16 + 16 * static_cast<double>(k);
      s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       fixed(left + pw - 150), fixed(ly - 4), fixed(left + pw - 130), fixed(ly - 4), color);
      s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", fixed(left + pw - 124), fixed(ly),
                       escape(ser.name));
    }
  }
  s += "</svg>\n";
  return s;
}

namespace {

fs::path write_svg(const Plot& p, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << render_svg(p);
  if (!out) throw Error("write failed: " + path.string());
  return path;
}

}  // namespace

std::vector<fs::path> emit_svg_plots(const coupled::TimeHistory& h, const fs::path& dir) {
  if (h.size() == 0) {
    std::cerr << "warning: empty time history, no plots written\n";
    return {};
  }
  return {
      write_svg({"Wing-tip deflection", "t [s]", "tip deflection (up) [m]", {{h.t, h.tip_defl, ""}}},
                dir / "tip_deflection.svg"),
      write_svg({"Root bending moment", "t [s]", "root M_x [N m]", {{h.t, h.root_Mx, ""}}},
                dir / "root_moment.svg")};
}

std::vector<fs::path> emit_svg_plots(const std::vector<analysis::SweepRecord>& sweep,
                                     const fs::path& dir) {
  if (sweep.empty()) {
    std::cerr << "warning: empty sweep, no plots written\n";
    return {};
  }
  Series alpha{{}, {}, ""}, vu{{}, {}, "undeformed"}, vp{{}, {}, "prestressed"};
  const double nan = std::nan("");
  for (const auto& r : sweep) {
    alpha.x.push_back(r.sigma);
    alpha.y.push_back(r.trim.ok ? r.alpha_trim : nan);
    vu.x.push_back(r.sigma);
    vu.y.push_back(r.flutter_undeformed.ok ? r.V_f_undeformed : nan);
    vp.x.push_back(r.sigma);
    vp.y.push_back(r.flutter_prestressed.ok ? r.V_f_prestressed : nan);
  }
  return {write_svg({"Trim angle of attack", "sigma [-]", "alpha_trim [rad]", {alpha}, true},
                    dir / "alpha_trim.svg"),
          write_svg({"Flutter speed", "sigma [-]", "V_f [m/s]", {vu, vp}, true}, dir / "flutter_speed.svg")};
}

}  // namespace aeroflex::io
