#pragma once

#include "skewdim/error.hpp"
#include "skewdim/family.hpp"
#include "skewdim/pressure.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace skewdim {

struct GreenGridConfig {
  cplx z{1.0, 0.0};
  double re_min = -2.0;
  double re_max = 2.0;
  double im_min = -2.0;
  double im_max = 2.0;
  int nx = 41;
  int ny = 41;
};

struct RunConfig {
  std::string command;
  int d = 2;
  int d_prime = 2;
  std::vector<std::vector<cplx>> coefficients;

  cplx t{0.0, 0.0};
  std::vector<cplx> t_grid{0.02, 0.04, 0.06, 0.08, 0.10};
  int n_max = 9;
  PressureMethod method = PressureMethod::kPeriodic;
  int basepoint_period = 0;
  double tol = 1e-10;
  double s = 1.0;
  std::optional<std::uint64_t> seed;
  int samples = 100000;
  std::vector<int> n_values{20, 40};
  int m_min = 12;
  int m_max = 20;
  int z_samples = 2000;
  int truncation = 60;
  double tolerance = 0.15;
  bool cubic = true;
  bool diagnostics = true;
  GreenGridConfig green_grid;
  double escape_radius = 1e6;
  int max_iters = 200;
  unsigned threads = 0;
  std::string out;

  SkewFamily family() const;
};

// Thrown by parse_config; carries every violation, not only the first.
class ConfigError : public Error {
 public:
  ConfigError(ErrorCode code, std::vector<std::string> details);
  const std::vector<std::string>& details() const { return details_; }

 private:
  std::vector<std::string> details_;
};

inline const std::vector<std::string> kCommands{"delta",    "pressure",   "expansion", "energy",
                                                "variance", "green-grid", "check"};

// Parses and validates a JSON config. An empty `command_override` keeps the
// config's own "command" field.
RunConfig parse_config(const std::string& text, const std::string& command_override = "");

// Re-runs the validation after command-line overrides were applied.
void validate_config(const RunConfig& cfg);

struct RunOptions {
  std::string out_path;  // empty: standard output
  std::string csv_path;  // expansion companion CSV; empty: derived from out_path
  std::string dump_periodic;  // CSV dump of continued points (delta, periodic)
};

// Executes a validated config. Returns 0 on success, 1 on computation
// errors, 2 on configuration errors; errors go to `err` as JSON.
int run(const RunConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err);

// JSON error document with a stable code.
std::string error_json(std::string_view code, const std::string& message,
                       const std::vector<std::string>& details = {});

}  // namespace skewdim
