#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "polygrow/potential.hpp"
#include "polygrow/solver.hpp"

namespace polygrow {

// Invalid configuration, malformed JSON, or a run directory that does not
// hold what a command needs: the "exit code 2" class of failure.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything a construct run needs, normalized: radii holds the continuation
// ladder (a single entry means a direct solve), ntheta_sector the angular
// intervals of the principal sector, so the disk carries 2*d*ntheta_sector.
struct RunConfig {
  std::string potential_kind = "sine_gordon";
  std::vector<double> potential_coefficients;
  int d = 2;
  std::vector<double> radii;
  int Nr = 256;
  int ntheta_sector = 0;
  double r_min = -1.0;  // absolute inner radius; -1 selects factor grading
  double r_min_factor = 0.0009765625;
  SolveOptions solve;
  int j_max = 0;                        // 0 -> Ntheta_disk/2 - 1 at analyze time
  double fit_r_a = 0.0, fit_r_b = 0.0;  // 0 -> [R/20, R/2]
  std::string out_dir;
  unsigned long seed = 0;

  double R() const { return radii.back(); }
  int ntheta_disk() const { return 2 * d * ntheta_sector; }
  double r_min_abs() const { return r_min > 0.0 ? r_min : r_min_factor * R(); }
  PeriodicPotential potential() const;
};

// Parse + cross-field validation. Unknown keys are rejected so a typo cannot
// silently fall back to a default. Throws ConfigError.
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& config_file);

// Canonical echo: every field, one canonical key order, floats at 17
// significant digits. parse(echo(c)) reproduces c exactly.
std::string run_config_to_json(const RunConfig& config);

void validate(const RunConfig& config);

// Result of a construct run; fields mirror report.json.
struct ConstructResult {
  std::filesystem::path dir;
  SolveReport final_report;
  double sup_u_minus_phi = 0.0;
  std::vector<SolveReport> stage_reports;
  std::vector<double> cauchy_deltas;
  std::vector<double> stage_radii;
};

// Drives the continuation ladder and writes the run directory:
// config.json echo, solution_sector.csv, solution_disk.csv, report.json.
// The directory is append-only: an existing solution is refused, never
// overwritten. On convergence failure the best iterate and a
// converged=false report are still written, then the failure propagates.
ConstructResult construct_run(const RunConfig& config);

// A run directory read back: grids are rebuilt from the config echo and the
// CSV coordinates are checked against them.
struct LoadedRun {
  RunConfig config;
  ScalarField sector;
  ScalarField disk;
};
LoadedRun load_run(const std::filesystem::path& run_dir);

// analyze subcommands; each augments the run directory and never touches
// the solution files. Returns the path of the primary file written.
std::filesystem::path analyze_lemmas(const std::filesystem::path& run_dir,
                                     const std::vector<double>& radii);
std::filesystem::path analyze_modes(const std::filesystem::path& run_dir, int j_max = 0);
std::filesystem::path analyze_growth(const std::filesystem::path& run_dir);

// 1D driver: profile.csv (s,v), report.json (mean_slope, period, deviation,
// ode_residual), config.json echo.
struct OnedConfig {
  std::string potential_kind = "sine_gordon";
  std::vector<double> potential_coefficients;
  double E = 2.0;
  double kappa = 1.0;
  int samples_per_period = 10000;
  std::string out_dir;
};
std::filesystem::path oned_run(const OnedConfig& config);

// Deterministic serialization helpers shared by every emitter: floats at 17
// significant digits, keys in insertion order, newline-terminated.
std::string format_double(double x);

}  // namespace polygrow
