#pragma once

// Run configuration read from a flat TOML subset: one `key = value` per
// line, `#` comments, numbers, booleans and double-quoted strings.

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "pff/nonlinear.hpp"
#include "pff/sneddon.hpp"

namespace pff {

class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& key, int line, const std::string& what)
      : std::runtime_error(format(key, line, what)), key_(key), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

private:
  static std::string format(const std::string& key, int line, const std::string& what) {
    std::string s = "config";
    if (line > 0) s += " line " + std::to_string(line);
    if (!key.empty()) s += " key '" + key + "'";
    return s + ": " + what;
  }
  std::string key_;
  int line_;
};

struct RunConfig {
  SneddonConfig sneddon;
  SolverConfig solver;
  /// Number of rows in the refinement study; row i uses local_refines + i.
  int levels = 1;
  std::string out_dir = "out";
  bool vtk = false;

  void validate() const {
    sneddon.validate();
    MaterialParams m = sneddon.params;
    m.pressure = sneddon.pressure;
    m.validate();
    solver.newton.validate();
    solver.gmres.validate();
    solver.mg.validate();
    if (levels < 1) throw std::invalid_argument("levels must be >= 1");
    if (solver.threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (out_dir.empty()) throw std::invalid_argument("out_dir must not be empty");
  }
};

namespace detail {

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

/// Shortest representation that parses back to the same value.
inline std::string format_real(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline double parse_real(const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
  if (!std::isfinite(x)) throw std::invalid_argument("value must be finite");
  return x;
}

inline long parse_integer(const std::string& v) {
  long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
  if (x > 1000000000L || x < -1000000000L) throw std::invalid_argument("integer out of range");
  return x;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

inline std::string parse_text(const std::string& v) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') throw std::invalid_argument("expected a quoted string");
  const std::string inner = v.substr(1, v.size() - 2);
  if (inner.find_first_of("\"\\") != std::string::npos) throw std::invalid_argument("escapes are not supported");
  return inner;
}

template <class T>
Field real_field(T RunConfig::*outer, double T::*member) {
  return {[=](RunConfig& c, const std::string& v) { (c.*outer).*member = parse_real(v); },
          [=](const RunConfig& c) { return format_real((c.*outer).*member); }};
}

template <class T, class I>
Field int_field(T RunConfig::*outer, I T::*member) {
  return {[=](RunConfig& c, const std::string& v) { (c.*outer).*member = static_cast<I>(parse_integer(v)); },
          [=](const RunConfig& c) { return std::to_string((c.*outer).*member); }};
}

inline const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    using S = SneddonConfig;
    auto param = [](double MaterialParams::*m) {
      return Field{[=](RunConfig& c, const std::string& v) { c.sneddon.params.*m = parse_real(v); },
                   [=](const RunConfig& c) { return format_real(c.sneddon.params.*m); }};
    };
    f.emplace("mu", param(&MaterialParams::mu));
    f.emplace("lambda", param(&MaterialParams::lambda));
    f.emplace("G_c", param(&MaterialParams::G_c));
    f.emplace("kappa", param(&MaterialParams::kappa));
    f.emplace("pressure", real_field(&RunConfig::sneddon, &S::pressure));
    f.emplace("half_length", real_field(&RunConfig::sneddon, &S::half_length));
    f.emplace("young", real_field(&RunConfig::sneddon, &S::young));
    f.emplace("poisson", real_field(&RunConfig::sneddon, &S::poisson));
    f.emplace("margin", real_field(&RunConfig::sneddon, &S::margin));
    f.emplace("base_subdivisions", int_field(&RunConfig::sneddon, &S::base_subdivisions));
    f.emplace("global_refines", int_field(&RunConfig::sneddon, &S::global_refines));
    f.emplace("local_refines", int_field(&RunConfig::sneddon, &S::local_refines));

    auto newton_real = [](double NewtonConfig::*m) {
      return Field{[=](RunConfig& c, const std::string& v) { c.solver.newton.*m = parse_real(v); },
                   [=](const RunConfig& c) { return format_real(c.solver.newton.*m); }};
    };
    auto newton_int = [](int NewtonConfig::*m) {
      return Field{[=](RunConfig& c, const std::string& v) { c.solver.newton.*m = static_cast<int>(parse_integer(v)); },
                   [=](const RunConfig& c) { return std::to_string(c.solver.newton.*m); }};
    };
    f.emplace("newton_tol", newton_real(&NewtonConfig::tol));
    f.emplace("newton_max_iterations", newton_int(&NewtonConfig::max_newton));
    f.emplace("line_search_omega", newton_real(&NewtonConfig::omega));
    f.emplace("line_search_max_steps", newton_int(&NewtonConfig::l_max));
    f.emplace("active_set_c0_factor", newton_real(&NewtonConfig::c0_factor));

    auto gmres_real = [](double GmresConfig::*m) {
      return Field{[=](RunConfig& c, const std::string& v) { c.solver.gmres.*m = parse_real(v); },
                   [=](const RunConfig& c) { return format_real(c.solver.gmres.*m); }};
    };
    auto gmres_int = [](int GmresConfig::*m) {
      return Field{[=](RunConfig& c, const std::string& v) { c.solver.gmres.*m = static_cast<int>(parse_integer(v)); },
                   [=](const RunConfig& c) { return std::to_string(c.solver.gmres.*m); }};
    };
    f.emplace("gmres_rel_tol", gmres_real(&GmresConfig::rel_tol));
    f.emplace("gmres_abs_tol", gmres_real(&GmresConfig::abs_tol));
    f.emplace("gmres_max_iterations", gmres_int(&GmresConfig::max_iter));
    f.emplace("gmres_restart", gmres_int(&GmresConfig::restart_length));

    auto mg_real = [](double MgConfig::*m) {
      return Field{[=](RunConfig& c, const std::string& v) { c.solver.mg.*m = parse_real(v); },
                   [=](const RunConfig& c) { return format_real(c.solver.mg.*m); }};
    };
    auto mg_int = [](int MgConfig::*m) {
      return Field{[=](RunConfig& c, const std::string& v) { c.solver.mg.*m = static_cast<int>(parse_integer(v)); },
                   [=](const RunConfig& c) { return std::to_string(c.solver.mg.*m); }};
    };
    f.emplace("smoother_degree", mg_int(&MgConfig::smoother_degree));
    f.emplace("smoothing_range", mg_real(&MgConfig::alpha_range));
    f.emplace("eig_safety", mg_real(&MgConfig::eig_safety));
    f.emplace("eig_iterations", mg_int(&MgConfig::eig_iterations));
    f.emplace("coarse_eig_iterations", mg_int(&MgConfig::coarse_eig_iterations));
    f.emplace("coarse_reduction", mg_real(&MgConfig::coarse_reduction));

    f.emplace("levels", Field{[](RunConfig& c, const std::string& v) { c.levels = static_cast<int>(parse_integer(v)); },
                              [](const RunConfig& c) { return std::to_string(c.levels); }});
    f.emplace("threads",
              Field{[](RunConfig& c, const std::string& v) { c.solver.threads = static_cast<int>(parse_integer(v)); },
                    [](const RunConfig& c) { return std::to_string(c.solver.threads); }});
    f.emplace("out_dir", Field{[](RunConfig& c, const std::string& v) { c.out_dir = parse_text(v); },
                               [](const RunConfig& c) { return "\"" + c.out_dir + "\""; }});
    f.emplace("vtk", Field{[](RunConfig& c, const std::string& v) { c.vtk = parse_bool(v); },
                           [](const RunConfig& c) { return std::string(c.vtk ? "true" : "false"); }});
    f.emplace("verbose",
              Field{[](RunConfig& c, const std::string& v) { c.solver.verbose = parse_bool(v); },
                    [](const RunConfig& c) { return std::string(c.solver.verbose ? "true" : "false"); }});
    return f;
  }();
  return table;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace detail

inline RunConfig parse_config_stream(std::istream& in) {
  RunConfig cfg;
  std::map<std::string, std::pair<int, std::string>> seen;  // key -> line, value
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("", line_no, "missing key");
    const auto it = detail::fields().find(key);
    if (it == detail::fields().end()) throw ConfigError(key, line_no, "unknown key");
    if (seen.count(key))
      throw ConfigError(key, line_no, "duplicate key (first set on line " + std::to_string(seen[key].first) + ")");
    seen[key] = {line_no, value};
    try {
      it->second.set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, line_no, e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    // blame the first key that violates an invariant on its own
    for (const auto& [key, entry] : seen) {
      RunConfig single;
      detail::fields().at(key).set(single, entry.second);
      try {
        single.validate();
      } catch (const std::invalid_argument& alone) {
        throw ConfigError(key, entry.first, alone.what());
      }
    }
    throw ConfigError("", 0, e.what());
  }
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config_stream(in);
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open '" + path + "'");
  return parse_config_stream(in);
}

/// Effective configuration in the input format, one key per line.
inline void write_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& [name, field] : detail::fields()) out << name << " = " << field.get(cfg) << '\n';
}

}  // namespace pff
