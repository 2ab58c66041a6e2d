#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aeroflex/io.hpp"

namespace aeroflex::io {

using nlohmann::json;

namespace {

enum class Bound { any, positive, nonnegative };

// Typed access to one JSON object; every key must be consumed.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(name() + ": expected an object");
  }

  void number(const char* key, double& out, Bound bound = Bound::positive) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number()) throw ConfigError(name(key) + ": expected a number");
    const double x = v->get<double>();
    check(key, x, bound);
    out = x;
  }

  void integer(const char* key, int& out, int min) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number_integer()) throw ConfigError(name(key) + ": expected an integer");
    const auto x = v->get<long long>();
    if (x < min || x > 1000000) {
      throw ConfigError(name(key) + ": out of range (must be >= " + std::to_string(min) + ")");
    }
    out = static_cast<int>(x);
  }

  void boolean(const char* key, bool& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_boolean()) throw ConfigError(name(key) + ": expected true or false");
    out = v->get<bool>();
  }

  template <class E>
  void choice(const char* key, E& out, std::initializer_list<std::pair<const char*, E>> options) {
    const json* v = take(key);
    if (!v) return;
    std::string allowed;
    if (v->is_string()) {
      for (const auto& [text, value] : options) {
        if (v->get<std::string>() == text) {
          out = value;
          return;
        }
      }
    }
    for (const auto& [text, value] : options) allowed += std::string(allowed.empty() ? "" : ", ") + text;
    throw ConfigError(name(key) + ": expected one of " + allowed);
  }

  void text(const char* key, std::string& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_string()) throw ConfigError(name(key) + ": expected a string");
    out = v->get<std::string>();
  }

  void numbers(const char* key, std::vector<double>& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_array() || v->empty()) throw ConfigError(name(key) + ": expected a non-empty array");
    std::vector<double> xs;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      const std::string item = std::string(key) + "[" + std::to_string(i) + "]";
      if (!e.is_number()) throw ConfigError(name(item.c_str()) + ": expected a number");
      check(item.c_str(), e.get<double>(), Bound::positive);
      xs.push_back(e.get<double>());
    }
    out = std::move(xs);
  }

  template <class F>
  void block(const char* key, F&& body) {
    const json* v = take(key);
    if (!v) return;
    Block b(*v, name(key));
    body(b);
    b.finish();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(name(it.key().c_str()) + ": unknown key");
    }
  }

 private:
  const json* take(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void check(const char* key, double x, Bound bound) const {
    if (!std::isfinite(x)) throw ConfigError(name(key) + ": must be finite");
    if (bound == Bound::positive && !(x > 0.0)) throw ConfigError(name(key) + ": must be > 0");
    if (bound == Bound::nonnegative && !(x >= 0.0)) throw ConfigError(name(key) + ": must be >= 0");
  }

  std::string name(const char* key = nullptr) const {
    if (!key) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read(Block& root, RunConfig& c) {
  auto& m = c.model;
  root.block("aircraft", [&](Block& b) {
    b.number("semi_span", m.semi_span);
    b.number("chord", m.chord);
    b.number("elastic_axis", m.elastic_axis, Bound::any);
    b.number("fuselage_mass", m.fuselage_mass, Bound::nonnegative);
    b.integer("elements_per_semispan", m.elements_per_semispan, 1);
    b.number("tail_arm", m.tail_arm);
    b.number("tail_area", m.tail_area, Bound::nonnegative);
    b.block("section", [&](Block& s) {
      auto& x = m.section;
      s.number("EA", x.EA);
      s.number("GA2", x.GA2);
      s.number("GA3", x.GA3);
      s.number("GJ", x.GJ);
      s.number("EI2", x.EI2);
      s.number("EI3", x.EI3);
      s.number("mu", x.mu);
      double j_t = x.j_t;
      s.number("j_t", j_t);
      if (j_t != x.j_t) {
        x.j_t = j_t;
        x.J_rho = Vec3(j_t, j_t / 100.0, j_t / 100.0).asDiagonal();
      }
    });
  });
  root.block("flight", [&](Block& b) {
    b.number("U", m.U);
    b.number("rho", m.rho);
    b.number("altitude", m.altitude, Bound::nonnegative);
    b.boolean("gravity", m.gravity);
  });
  root.block("aero", [&](Block& b) {
    b.number("cl_alpha", m.aero.cl_alpha);
    b.number("cd0", m.aero.cd0, Bound::nonnegative);
    b.number("e0", m.aero.e0);
  });
  root.number("sigma", m.sigma);
  root.numbers("sigma_list", c.sigma_list);
  root.block("solver", [&](Block& b) {
    auto& s = c.solver;
    b.number("dt", s.dt);
    b.number("beta", s.beta);
    b.number("gamma", s.gamma);
    b.number("newton_rel_tol", s.newton_rel_tol);
    b.number("newton_abs_tol", s.newton_abs_tol);
    b.integer("max_newton_iter", s.max_newton_iter, 1);
    b.integer("max_halvings", s.max_halvings, 0);
    b.integer("jacobian_refresh", s.jacobian_refresh, 1);
  });
  root.block("gust", [&](Block& b) {
    b.number("w_g0", c.gust.w_g0, Bound::nonnegative);
    b.number("H_g", c.gust.H_g);
    b.number("t0", c.gust.t0, Bound::nonnegative);
    b.number("horizon", c.gust_horizon);
  });
  root.block("flutter", [&](Block& b) {
    auto& f = c.flutter;
    b.choice("basis", f.basis, {{"undeformed", analysis::FlutterBasis::undeformed},
                                {"prestressed", analysis::FlutterBasis::prestressed}});
    b.number("v_start", f.v_start);
    b.number("v_step", f.v_step);
    b.number("v_max", f.v_max);
    b.number("tolerance", f.tolerance);
    b.number("max_frequency", f.max_frequency);
    b.boolean("gravity", f.gravity);
    double alpha = std::nan("");
    b.number("alpha_root", alpha, Bound::any);
    if (!std::isnan(alpha)) f.alpha_root = alpha;
  });
  root.block("trim", [&](Block& b) {
    b.choice("mode", c.trim_mode, {{"rigid", analysis::TrimMode::rigid},
                                   {"flexible", analysis::TrimMode::flexible}});
  });
  root.block("static", [&](Block& b) { b.number("load", c.static_load, Bound::any); });
  root.block("modal", [&](Block& b) {
    b.integer("elements", c.modal_elements, 1);
    b.integer("count", c.modal_count, 1);
  });
  root.block("analysis", [&](Block& b) {
    b.boolean("flutter", c.sweep_flutter);
    b.boolean("gust", c.sweep_gust);
  });
  root.text("output", c.output_dir);
  root.finish();
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  RunConfig c;
  Block root(j, "");
  read(root, c);
  if (c.flutter.v_max <= c.flutter.v_start) {
    throw ConfigError("flutter.v_max: must exceed flutter.v_start");
  }
  c.model.aero.aspect_ratio = 2.0 * c.model.semi_span / c.model.chord;
  try {
    c.model.validate();
    c.solver.validate();
    c.gust.validate();
  } catch (const RangeError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace aeroflex::io
