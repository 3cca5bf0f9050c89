#include "skewdim/cli.hpp"

#include "skewdim/boettcher.hpp"
#include "skewdim/checks.hpp"
#include "skewdim/deformation.hpp"
#include "skewdim/expansion.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace skewdim {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

// Field readers: each records a violation and leaves the default in place.
class Reader {
 public:
  Reader(const json& doc, std::vector<std::string>& errors) : doc_(doc), errors_(errors) {}

  bool has(const char* key) const { return doc_.contains(key); }

  template <class T>
  void number(const char* key, T& out) {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_number()) {
      errors_.push_back(std::string(key) + ": expected a number");
      return;
    }
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) {
        errors_.push_back(std::string(key) + ": expected an integer");
        return;
      }
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
          out = v.get<T>();
        } else {
          errors_.push_back(std::string(key) + ": must be non-negative");
        }
      } else {
        out = v.get<T>();
      }
    } else {
      out = v.get<T>();
    }
  }

  void boolean(const char* key, bool& out) {
    if (!has(key)) return;
    if (!doc_.at(key).is_boolean()) {
      errors_.push_back(std::string(key) + ": expected true or false");
      return;
    }
    out = doc_.at(key).get<bool>();
  }

  void string(const char* key, std::string& out) {
    if (!has(key)) return;
    if (!doc_.at(key).is_string()) {
      errors_.push_back(std::string(key) + ": expected a string");
      return;
    }
    out = doc_.at(key).get<std::string>();
  }

  static bool complex_value(const json& v, cplx& out) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) return false;
    out = {v[0].get<double>(), v[1].get<double>()};
    return std::isfinite(out.real()) && std::isfinite(out.imag());
  }

  void complex(const char* key, cplx& out) {
    if (!has(key)) return;
    if (!complex_value(doc_.at(key), out)) {
      errors_.push_back(std::string(key) + ": expected a [re, im] pair of finite numbers");
    }
  }

  void complex_list(const char* key, std::vector<cplx>& out) {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_array()) {
      errors_.push_back(std::string(key) + ": expected a list of [re, im] pairs");
      return;
    }
    std::vector<cplx> vals;
    for (std::size_t i = 0; i < v.size(); ++i) {
      cplx c;
      if (!complex_value(v[i], c)) {
        errors_.push_back(std::string(key) + "[" + std::to_string(i) + "]: expected a [re, im] pair");
        return;
      }
      vals.push_back(c);
    }
    out = std::move(vals);
  }

  void int_list(const char* key, std::vector<int>& out) {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); })) {
      errors_.push_back(std::string(key) + ": expected a list of integers");
      return;
    }
    out = v.get<std::vector<int>>();
  }

 private:
  const json& doc_;
  std::vector<std::string>& errors_;
};

std::vector<std::string> validation_errors(const RunConfig& c) {
  std::vector<std::string> e;
  if (!c.command.empty() && std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end()) {
    e.push_back("command: unknown command '" + c.command + "'");
  }
  if (c.d < 2) e.push_back("d must be >= 2");
  if (c.d_prime < 2) e.push_back("d_prime must be >= 2");
  if (c.d > 64) e.push_back("d must be <= 64");
  if (c.d >= 2 && static_cast<int>(c.coefficients.size()) != c.d) {
    e.push_back("family.coefficients must have exactly d = " + std::to_string(c.d) + " entries, got " +
                std::to_string(c.coefficients.size()));
  }
  if (c.n_max < 3) e.push_back("n_max must be >= 3");
  if (!(c.tol > 0.0)) e.push_back("tol must be positive");
  if (c.basepoint_period < 0) e.push_back("basepoint_period must be >= 0");
  if (c.t_grid.empty()) e.push_back("t_grid must not be empty");
  if (c.samples < 10000) e.push_back("samples must be >= 10000");
  if (c.n_values.size() < 2) e.push_back("n_values needs at least two entries");
  for (int n : c.n_values) {
    if (n < 10) {
      e.push_back("n_values entries must be >= 10");
      break;
    }
  }
  if (c.m_min < 4 || c.m_max > 40 || c.m_max <= c.m_min) e.push_back("m_range must satisfy 4 <= m_min < m_max <= 40");
  if (c.z_samples < 100) e.push_back("z_samples must be >= 100");
  if (c.truncation < 1) e.push_back("truncation must be >= 1");
  if (!(c.tolerance > 0.0)) e.push_back("tolerance must be positive");
  if (!(c.escape_radius > 10.0)) e.push_back("escape_radius must exceed 10");
  if (c.max_iters < 1) e.push_back("max_iters must be >= 1");
  const auto& g = c.green_grid;
  if (g.nx < 1 || g.ny < 1) e.push_back("green_grid.nx and green_grid.ny must be >= 1");
  if (!(g.re_max >= g.re_min) || !(g.im_max >= g.im_min)) e.push_back("green_grid ranges must be ordered");
  const bool stochastic = c.command == "energy" || c.command == "variance" || c.command == "check" ||
                          (c.command == "expansion" && c.diagnostics && c.d == c.d_prime);
  if (stochastic && !c.seed) e.push_back("seed is required for the '" + c.command + "' command");
  return e;
}

}  // namespace

SkewFamily RunConfig::family() const {
  std::vector<CoeffPoly> polys;
  for (const auto& c : coefficients) polys.emplace_back(c);
  return SkewFamily(d, d_prime, std::move(polys));
}

ConfigError::ConfigError(ErrorCode code, std::vector<std::string> details)
    : Error(code, join(details)), details_(std::move(details)) {}

RunConfig parse_config(const std::string& text, const std::string& command_override) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ErrorCode::kParseError, {std::string("invalid JSON: ") + e.what()});
  }
  if (!doc.is_object()) throw ConfigError(ErrorCode::kParseError, {"config must be a JSON object"});

  RunConfig c;
  std::vector<std::string> errors;
  Reader r(doc, errors);
  r.string("command", c.command);
  if (!command_override.empty()) c.command = command_override;

  if (!doc.contains("family") || !doc["family"].is_object()) {
    errors.push_back("family: required object with d, d_prime, coefficients");
  } else {
    const json& fam = doc["family"];
    Reader fr(fam, errors);
    if (!fam.contains("d")) errors.push_back("family.d is required");
    if (!fam.contains("d_prime")) errors.push_back("family.d_prime is required");
    fr.number("d", c.d);
    fr.number("d_prime", c.d_prime);
    if (!fam.contains("coefficients") || !fam["coefficients"].is_array()) {
      errors.push_back("family.coefficients: required list of d lists of [re, im] pairs");
    } else {
      const json& cs = fam["coefficients"];
      for (std::size_t k = 0; k < cs.size(); ++k) {
        std::vector<cplx> poly;
        bool ok = cs[k].is_array();
        if (ok) {
          for (const auto& a : cs[k]) {
            cplx v;
            if (!Reader::complex_value(a, v)) {
              ok = false;
              break;
            }
            poly.push_back(v);
          }
        }
        if (!ok) {
          errors.push_back("family.coefficients[" + std::to_string(k) + "]: expected a list of [re, im] pairs");
        }
        c.coefficients.push_back(std::move(poly));
      }
    }
  }

  r.complex("t", c.t);
  r.complex_list("t_grid", c.t_grid);
  r.number("n_max", c.n_max);
  if (r.has("method")) {
    std::string m;
    r.string("method", m);
    if (m == "periodic" || m == "preimage") {
      c.method = parse_method(m);
    } else if (!m.empty()) {
      errors.push_back("method: expected 'periodic' or 'preimage'");
    }
  }
  r.number("basepoint_period", c.basepoint_period);
  r.number("tol", c.tol);
  r.number("s", c.s);
  if (r.has("seed")) {
    std::uint64_t seed = 0;
    const std::size_t before = errors.size();
    r.number("seed", seed);
    if (errors.size() == before) c.seed = seed;
  }
  r.number("samples", c.samples);
  r.int_list("n_values", c.n_values);
  if (r.has("m_range")) {
    std::vector<int> mr;
    r.int_list("m_range", mr);
    if (mr.size() == 2) {
      c.m_min = mr[0];
      c.m_max = mr[1];
    } else {
      errors.push_back("m_range: expected [m_min, m_max]");
    }
  }
  r.number("z_samples", c.z_samples);
  r.number("truncation", c.truncation);
  r.number("tolerance", c.tolerance);
  r.boolean("cubic", c.cubic);
  r.boolean("diagnostics", c.diagnostics);
  r.number("escape_radius", c.escape_radius);
  r.number("max_iters", c.max_iters);
  r.number("threads", c.threads);
  r.string("out", c.out);
  if (doc.contains("green_grid")) {
    const json& g = doc["green_grid"];
    if (!g.is_object()) {
      errors.push_back("green_grid: expected an object");
    } else {
      Reader gr(g, errors);
      gr.complex("z", c.green_grid.z);
      std::vector<double> range;
      for (const char* key : {"re", "im"}) {
        if (!g.contains(key)) continue;
        const json& v = g[key];
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
          errors.push_back(std::string("green_grid.") + key + ": expected [min, max]");
          continue;
        }
        (key[0] == 'r' ? c.green_grid.re_min : c.green_grid.im_min) = v[0].get<double>();
        (key[0] == 'r' ? c.green_grid.re_max : c.green_grid.im_max) = v[1].get<double>();
      }
      gr.number("nx", c.green_grid.nx);
      gr.number("ny", c.green_grid.ny);
    }
  }
  static const std::vector<std::string> known{
      "command", "family", "t", "t_grid", "n_max", "method", "basepoint_period", "tol", "s",
      "seed", "samples", "n_values", "m_range", "z_samples", "truncation", "tolerance", "cubic",
      "diagnostics", "escape_radius", "max_iters", "threads", "out", "green_grid"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      errors.push_back("unknown field '" + key + "'");
    }
  }

  for (auto& e : validation_errors(c)) errors.push_back(std::move(e));
  if (c.command.empty()) errors.push_back("command: missing (config field or command line)");
  if (!errors.empty()) throw ConfigError(ErrorCode::kValidationError, errors);
  return c;
}

void validate_config(const RunConfig& cfg) {
  auto errors = validation_errors(cfg);
  if (!errors.empty()) throw ConfigError(ErrorCode::kValidationError, errors);
}

std::string error_json(std::string_view code, const std::string& message,
                       const std::vector<std::string>& details) {
  json j;
  j["error"]["code"] = code;
  j["error"]["message"] = message;
  if (!details.empty()) j["error"]["details"] = details;
  return j.dump();
}

namespace {

json pair(cplx z) { return json::array({z.real(), z.imag()}); }

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json family_json(const RunConfig& c) {
  json coeffs = json::array();
  for (const auto& poly : c.coefficients) {
    json p = json::array();
    for (const cplx& a : poly) p.push_back(pair(a));
    coeffs.push_back(p);
  }
  return {{"d", c.d}, {"d_prime", c.d_prime}, {"coefficients", coeffs}};
}

PressureConfig pressure_config(const RunConfig& c) {
  PressureConfig pc;
  pc.method = c.method;
  pc.basepoint_period = c.basepoint_period;
  pc.threads = c.threads;
  pc.continuation.threads = 1;
  return pc;
}

json delta_json(const DeltaResult& r) {
  return {{"delta", r.delta}, {"vd", r.vd}, {"err_proxy", r.err_proxy}, {"n_max", r.n_max},
          {"method", method_name(r.method)}, {"t", pair(r.t)}, {"iterations", r.iterations}};
}

json hyperbolicity_json(const HyperbolicityDiagnostic& h) {
  return {{"min_vertical_derivative", h.min_vertical_derivative},
          {"critical_orbit_max_modulus", h.critical_orbit_max_modulus},
          {"fiberwise_connected", h.fiberwise_connected},
          {"verdict", h.verdict}};
}

json fit_json(const FitResult& f) {
  return {{"a_fit", f.a_fit}, {"b_cubic", f.b_cubic}, {"residual", f.residual},
          {"a_stderr", f.a_stderr}, {"cubic", f.cubic}, {"points", f.points}};
}

json energy_json(const EnergyEstimate& e) {
  json levels = json::array();
  for (const auto& l : e.levels) levels.push_back({{"m", l.m}, {"r", l.r}, {"E", l.E}, {"N", l.N}});
  return {{"estimate", e.I_est}, {"stderr", e.std_error}, {"z_samples", e.z_samples}, {"levels", levels}};
}

json variance_json(const VarianceEstimate& v) {
  json levels = json::array();
  for (const auto& l : v.levels) levels.push_back({{"n", l.n}, {"mean", l.mean}, {"stderr", l.std_error}});
  return {{"estimate", v.var_est}, {"stderr", v.std_error}, {"samples", v.samples}, {"levels", levels}};
}

EnergyConfig energy_config(const RunConfig& c) {
  EnergyConfig e;
  e.m_min = c.m_min;
  e.m_max = c.m_max;
  e.z_samples = c.z_samples;
  e.seed = c.seed.value_or(0);
  e.threads = c.threads;
  return e;
}

VarianceConfig variance_config(const RunConfig& c) {
  VarianceConfig v;
  v.n_values = c.n_values;
  v.samples = c.samples;
  v.seed = c.seed.value_or(0);
  v.trunc.N = c.truncation;
  v.threads = c.threads;
  return v;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kInvalidArgument, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) fail(ErrorCode::kInvalidArgument, "failed writing '" + path + "'");
}

std::string companion_csv(const RunOptions& o) {
  if (!o.csv_path.empty()) return o.csv_path;
  if (o.out_path.empty()) return "";
  const auto dot = o.out_path.rfind('.');
  const auto slash = o.out_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return o.out_path + ".csv";
  return o.out_path.substr(0, dot) + ".csv";
}

int run_command(const RunConfig& c, const RunOptions& o, std::ostream& out) {
  const SkewFamily fam = c.family();
  const std::string out_path = o.out_path.empty() ? c.out : o.out_path;
  json report;
  report["command"] = c.command;
  report["family"] = family_json(c);
  int status = 0;

  if (c.command == "delta") {
    const PressureConfig pc = pressure_config(c);
    const DeltaResult r = solve_delta(fam, c.t, c.n_max, c.tol, pc);
    report["result"] = delta_json(r);
    if (c.method == PressureMethod::kPreimage) {
      report["result"]["basepoints"] = r.basepoints;
      report["result"]["basepoint_period"] = r.basepoint_period;
    }
    if (!o.dump_periodic.empty()) {
      ContinuationConfig cc;
      cc.threads = c.threads;
      std::ostringstream csv;
      csv << "n,base_index,fiber_index,z_re,z_im,w_re,w_im,multiplier_re,multiplier_im\n";
      for (const auto& p : continue_lattice(fam, c.n_max, c.t, cc)) {
        csv << p.n << ',' << p.base_index << ',' << p.fiber_index << ',' << g17(p.z.real()) << ','
            << g17(p.z.imag()) << ',' << g17(p.w.real()) << ',' << g17(p.w.imag()) << ','
            << g17(p.multiplier.real()) << ',' << g17(p.multiplier.imag()) << '\n';
      }
      write_text(o.dump_periodic, csv.str(), out);
    }
  } else if (c.command == "pressure") {
    const auto e = pressure_estimate(fam, c.t, c.s, c.n_max, pressure_config(c));
    json lz = json::array();
    for (const auto& l : e.log_Z) lz.push_back({{"n", l.n}, {"raw", l.raw}, {"normalized", l.normalized}});
    report["result"] = {{"s", e.s}, {"t", pair(e.t)}, {"method", method_name(e.method)}, {"log_Z", lz},
                        {"P", e.P}, {"err_proxy", e.err_proxy}, {"basepoints", e.basepoints}};
  } else if (c.command == "expansion") {
    ExpansionConfig ec;
    ec.t_grid = c.t_grid;
    ec.sweep.n_max = c.n_max;
    ec.sweep.tol = c.tol;
    ec.sweep.pressure = pressure_config(c);
    ec.sweep.hyperbolicity.seed = c.seed.value_or(0);
    ec.tolerance = c.tolerance;
    ec.cubic = c.cubic;
    ec.diagnostics = c.diagnostics;
    ec.energy = energy_config(c);
    ec.variance = variance_config(c);
    const auto rep = verify_expansion(fam, ec);
    json rows = json::array();
    std::ostringstream csv;
    csv << "t_re,t_im,delta,vd,err_proxy\n";
    for (const auto& e : rep.entries) {
      json row = {{"t", pair(e.t)}, {"ok", e.ok}, {"hyperbolicity", hyperbolicity_json(e.hyperbolicity)}};
      if (e.ok) {
        row["result"] = delta_json(e.result);
        csv << g17(e.t.real()) << ',' << g17(e.t.imag()) << ',' << g17(e.result.delta) << ','
            << g17(e.result.vd) << ',' << g17(e.result.err_proxy) << '\n';
      } else {
        row["error"] = {{"code", e.error_code}, {"message", e.error_message}};
      }
      rows.push_back(row);
    }
    json r = {{"deltas", rows},
              {"a_theory", rep.a_theory},
              {"a_theory_with_cross", rep.a_theory_with_cross},
              {"vd_coefficient_theory", rep.vd_coefficient_theory},
              {"tolerance", rep.tolerance},
              {"verdict", rep.verdict},
              {"theory",
               {{"S", rep.theory.S}, {"I_theory", rep.theory.I_theory}, {"var_theory", rep.theory.var_theory},
                {"ddot_delta", rep.theory.ddot_delta}, {"vd_coefficient", rep.theory.vd_coefficient},
                {"cross_term", rep.theory.cross_term}}}};
    if (rep.fit_ok) {
      r["fit"] = fit_json(rep.fit);
      r["fit_quadratic_only"] = fit_json(rep.fit_quadratic);
      r["a_fit"] = rep.fit.a_fit;
      r["fit_residual"] = rep.fit.residual;
      r["vd_coefficient_fit"] = rep.vd_coefficient_fit;
      r["relative_error"] = rep.relative_error;
    } else {
      r["fit_error"] = rep.fit_error;
    }
    if (rep.energy) {
      const double closed = energy_closed_form(fam, false);
      r["diagnostics"]["energy"] = energy_json(*rep.energy);
      r["diagnostics"]["energy"]["theory"] = closed;
      r["diagnostics"]["energy"]["ratio"] = closed > 0.0 ? rep.energy->I_est / closed : 0.0;
    }
    if (rep.variance) {
      r["diagnostics"]["variance"] = variance_json(*rep.variance);
      r["diagnostics"]["variance"]["theory"] = rep.theory.var_theory;
      r["diagnostics"]["variance"]["ratio"] =
          rep.theory.var_theory > 0.0 ? rep.variance->var_est / rep.theory.var_theory : 0.0;
    }
    if (!rep.diagnostics_error.empty()) r["diagnostics"]["error"] = rep.diagnostics_error;
    report["result"] = r;
    const std::string csv_path = companion_csv({out_path, o.csv_path, ""});
    if (!csv_path.empty()) write_text(csv_path, csv.str(), out);
  } else if (c.command == "energy") {
    const auto e = energy_quadrature(fam, energy_config(c));
    json r = energy_json(e);
    const double base = energy_closed_form(fam, false);
    const double cross = energy_closed_form(fam, true);
    r["theory"] = base;
    r["theory_with_cross"] = cross;
    r["ratio"] = base > 0.0 ? e.I_est / base : 0.0;
    r["ratio_with_cross"] = cross > 0.0 ? e.I_est / cross : 0.0;
    // Candidates outside the 3-sigma interval of the estimate.
    json excluded = json::array();
    if (std::abs(e.I_est - base) > 3.0 * e.std_error) excluded.push_back("closed_form");
    if (std::abs(e.I_est - cross) > 3.0 * e.std_error) excluded.push_back("closed_form_with_cross");
    r["excluded_at_3_sigma"] = excluded;
    report["result"] = r;
  } else if (c.command == "variance") {
    const auto v = variance_mc(fam, variance_config(c));
    json r = variance_json(v);
    const double theory = theoretical_quantities(fam).var_theory;
    r["theory"] = theory;
    r["ratio"] = theory > 0.0 ? v.var_est / theory : 0.0;
    report["result"] = r;
  } else if (c.command == "green-grid") {
    GreenParams gp;
    gp.escape_radius = c.escape_radius;
    gp.max_iters = c.max_iters;
    const auto& g = c.green_grid;
    std::ostringstream csv;
    csv << "re_w,im_w,green\n";
    for (int j = 0; j < g.ny; ++j) {
      const double im = g.ny == 1 ? g.im_min : g.im_min + (g.im_max - g.im_min) * j / (g.ny - 1);
      for (int i = 0; i < g.nx; ++i) {
        const double re = g.nx == 1 ? g.re_min : g.re_min + (g.re_max - g.re_min) * i / (g.nx - 1);
        const double G = green(fam, c.t, {unit(g.z), {re, im}}, gp);
        csv << g17(re) << ',' << g17(im) << ',' << g17(G) << '\n';
      }
    }
    write_text(out_path, csv.str(), out);
    return 0;
  } else if (c.command == "check") {
    CheckSuiteConfig sc;
    sc.seed = c.seed.value_or(0);
    sc.threads = c.threads;
    const auto results = run_invariant_suite(fam, sc);
    json arr = json::array();
    bool all = true;
    for (const auto& r : results) {
      arr.push_back({{"module", r.module}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
      all = all && r.passed;
    }
    report["result"] = {{"t_check", pair(check_parameter(fam))}, {"checks", arr}, {"passed", all}};
    status = all ? 0 : 1;
  }
  write_text(out_path, report.dump(2) + "\n", out);
  return status;
}

}  // namespace

int run(const RunConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    err << error_json(code_name(e.code()), "invalid configuration", e.details()) << '\n';
    return 2;
  }
  try {
    return run_command(cfg, opts, out);
  } catch (const Error& e) {
    err << error_json(code_name(e.code()), e.what()) << '\n';
    return e.code() == ErrorCode::kInvalidArgument ? 2 : 1;
  } catch (const std::exception& e) {
    err << error_json("internal_error", e.what()) << '\n';
    return 1;
  }
}

}  // namespace skewdim
