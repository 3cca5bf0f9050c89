#include "skewdim/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr const char* kFooter = R"(Config: a JSON document. Complex inputs (t, t_grid entries, coefficients,
green_grid.z) are [re, im] pairs; family.coefficients lists d polynomials,
entry j of each being the coefficient of z^j. Seeds are required for
energy, variance, check and expansion (when d' = d).

CSV outputs (numbers with 17 significant digits):
  expansion   t_re,t_im,delta,vd,err_proxy   (next to --out, or --csv)
  green-grid  re_w,im_w,green
  --dump-periodic  n,base_index,fiber_index,z_re,z_im,w_re,w_im,multiplier_re,multiplier_im

Exit status: 0 success, 1 computation error, 2 configuration error.
Errors are printed to stderr as {"error": {"code", "message", "details"}}.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volume dimension of Julia sets of polynomial skew products"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  unsigned threads = 0;
  std::string out_path;
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--threads", threads, "worker threads (0: hardware concurrency)");
  app.add_option("--out", out_path, "output path (default: stdout)");

  double t_re = 0.0;
  double t_im = 0.0;
  int n_max = 0;
  std::string method;
  double tol = 0.0;
  std::string csv_path;
  std::string dump_periodic;

  auto* delta = app.add_subcommand("delta", "solve P(delta phi_t) = 0; JSON {delta, vd, err_proxy, n_max, method}");
  auto* t_re_opt = delta->add_option("--t-re", t_re, "real part of t");
  auto* t_im_opt = delta->add_option("--t-im", t_im, "imaginary part of t");
  auto* n_opt = delta->add_option("--n-max", n_max, "top period / tree depth");
  auto* m_opt = delta->add_option("--method", method, "periodic or preimage");
  auto* tol_opt = delta->add_option("--tol", tol, "root tolerance on P");
  delta->add_option("--dump-periodic", dump_periodic, "CSV dump of the continued period-n_max points");
  app.add_subcommand("pressure", "difference estimate of P(s phi_t)");
  auto* expansion = app.add_subcommand("expansion", "delta sweep, quadratic fit and theory comparison");
  expansion->add_option("--csv", csv_path, "companion CSV path");
  app.add_subcommand("energy", "asymptotic energy of dw v with both closed forms");
  app.add_subcommand("variance", "Monte Carlo variance of dot phi_0");
  app.add_subcommand("green-grid", "CSV grid of the fiberwise Green function");
  app.add_subcommand("check", "run the invariant suite; exit 0 only if every check passes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << skewdim::error_json("usage_error", e.what()) << '\n';
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << skewdim::error_json("parse_error", "cannot read config '" + config_path + "'") << '\n';
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();

  skewdim::RunConfig cfg;
  try {
    cfg = skewdim::parse_config(text.str(), command);
  } catch (const skewdim::ConfigError& e) {
    std::cerr << skewdim::error_json(skewdim::code_name(e.code()), "invalid configuration", e.details()) << '\n';
    return 2;
  }
  if (*t_re_opt || *t_im_opt) {
    cfg.t = {*t_re_opt ? t_re : cfg.t.real(), *t_im_opt ? t_im : cfg.t.imag()};
  }
  if (*n_opt) cfg.n_max = n_max;
  if (*m_opt) {
    if (method != "periodic" && method != "preimage") {
      std::cerr << skewdim::error_json("validation_error", "--method must be periodic or preimage") << '\n';
      return 2;
    }
    cfg.method = skewdim::parse_method(method);
  }
  if (*tol_opt) cfg.tol = tol;
  if (app.get_option("--threads")->count() > 0) cfg.threads = threads;

  skewdim::RunOptions opts;
  opts.out_path = out_path;
  opts.csv_path = csv_path;
  opts.dump_periodic = dump_periodic;
  return skewdim::run(cfg, opts, std::cout, std::cerr);
}
