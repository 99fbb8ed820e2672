#include "polygrow/run_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "json_io.hpp"
#include "polygrow/analysis.hpp"
#include "polygrow/grid.hpp"
#include "polygrow/harmonic.hpp"
#include "polygrow/oned.hpp"

namespace polygrow {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using detail::dump17;
using detail::read_json_file;
using detail::write_text_file;

// ---------------------------------------------------------------------------
// serialization: one number formatter for every file we emit

void dump17_impl(const json& j, std::string& out, int depth) {
  const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
  const std::string pad_in(2 * static_cast<std::size_t>(depth + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) { out += "{}"; return; }
      out += "{\n";
      std::size_t n = 0;
      for (const auto& [key, value] : j.items()) {
        out += pad_in + json(key).dump() + ": ";
        dump17_impl(value, out, depth + 1);
        out += (++n < j.size()) ? ",\n" : "\n";
      }
      out += pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) { out += "[]"; return; }
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        dump17_impl(j[i], out, depth + 1);
      }
      out += "]";
      return;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

// ---------------------------------------------------------------------------
// config parsing

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("key \"") + key + "\" has the wrong type");
  }
}

void parse_potential_spec(const json& node, std::string& kind, std::vector<double>& coeffs) {
  if (node.is_string()) {
    kind = node.get<std::string>();
    coeffs.clear();
    return;
  }
  if (!node.is_object()) throw ConfigError("\"potential\" must be a name or an object");
  reject_unknown_keys(node, {"kind", "coefficients"}, "potential");
  if (!node.contains("kind")) throw ConfigError("potential needs a \"kind\"");
  kind = node.at("kind").get<std::string>();
  coeffs = get_or<std::vector<double>>(node, "coefficients", {});
}

json potential_spec_json(const std::string& kind, const std::vector<double>& coeffs) {
  json p;
  p["kind"] = kind;
  p["coefficients"] = coeffs;
  return p;
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

PeriodicPotential RunConfig::potential() const {
  return make_potential(potential_kind, potential_coefficients);
}

RunConfig run_config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(root,
                      {"potential", "d", "R", "radii", "Nr", "ntheta_sector", "ntheta_disk",
                       "r_min", "r_min_factor", "solver", "analysis", "out_dir", "seed"},
                      "config");

  RunConfig c;
  if (root.contains("potential"))
    parse_potential_spec(root.at("potential"), c.potential_kind, c.potential_coefficients);
  c.d = get_or(root, "d", c.d);

  if (root.contains("R") && root.contains("radii"))
    throw ConfigError("give either \"R\" or \"radii\", not both");
  if (root.contains("radii"))
    c.radii = root.at("radii").get<std::vector<double>>();
  else if (root.contains("R"))
    c.radii = {root.at("R").get<double>()};

  c.Nr = get_or(root, "Nr", c.Nr);
  c.r_min = get_or(root, "r_min", c.r_min);
  c.r_min_factor = get_or(root, "r_min_factor", c.r_min_factor);

  const int s_given = get_or(root, "ntheta_sector", 0);
  const int disk_given = get_or(root, "ntheta_disk", 0);
  if (s_given > 0 && disk_given > 0 && disk_given != 2 * c.d * s_given)
    throw ConfigError("ntheta_disk must equal 2*d*ntheta_sector");
  if (s_given > 0) {
    c.ntheta_sector = s_given;
  } else if (disk_given > 0) {
    if (c.d < 1 || disk_given % (2 * c.d) != 0)
      throw ConfigError("ntheta_disk must be a multiple of 2*d");
    c.ntheta_sector = disk_given / (2 * c.d);
  }

  if (root.contains("solver")) {
    const json& s = root.at("solver");
    reject_unknown_keys(s,
                        {"newton_tol", "max_newton_iters", "line_search", "flow_fallback",
                         "flow_step", "positivity_projection"},
                        "solver");
    c.solve.newton_tol = get_or(s, "newton_tol", c.solve.newton_tol);
    c.solve.max_newton_iters = get_or(s, "max_newton_iters", c.solve.max_newton_iters);
    c.solve.line_search = get_or(s, "line_search", c.solve.line_search);
    c.solve.flow_fallback = get_or(s, "flow_fallback", c.solve.flow_fallback);
    c.solve.flow_step = get_or(s, "flow_step", c.solve.flow_step);
    c.solve.positivity_projection =
        get_or(s, "positivity_projection", c.solve.positivity_projection);
  }
  if (root.contains("analysis")) {
    const json& a = root.at("analysis");
    reject_unknown_keys(a, {"j_max", "fit_r_a", "fit_r_b"}, "analysis");
    c.j_max = get_or(a, "j_max", c.j_max);
    c.fit_r_a = get_or(a, "fit_r_a", c.fit_r_a);
    c.fit_r_b = get_or(a, "fit_r_b", c.fit_r_b);
  }
  c.out_dir = get_or<std::string>(root, "out_dir", "");
  c.seed = get_or(root, "seed", c.seed);

  validate(c);
  return c;
}

RunConfig load_run_config(const fs::path& config_file) {
  std::ifstream is(config_file, std::ios::binary);
  if (!is) throw ConfigError("cannot open config: " + config_file.string());
  std::ostringstream text;
  text << is.rdbuf();
  return run_config_from_json(text.str());
}

std::string run_config_to_json(const RunConfig& c) {
  json root;
  root["potential"] = potential_spec_json(c.potential_kind, c.potential_coefficients);
  root["d"] = c.d;
  root["radii"] = c.radii;
  root["Nr"] = c.Nr;
  root["ntheta_sector"] = c.ntheta_sector;
  root["r_min"] = c.r_min;
  root["r_min_factor"] = c.r_min_factor;
  root["solver"] = {{"newton_tol", c.solve.newton_tol},
                    {"max_newton_iters", c.solve.max_newton_iters},
                    {"line_search", c.solve.line_search},
                    {"flow_fallback", c.solve.flow_fallback},
                    {"flow_step", c.solve.flow_step},
                    {"positivity_projection", c.solve.positivity_projection}};
  root["analysis"] = {{"j_max", c.j_max}, {"fit_r_a", c.fit_r_a}, {"fit_r_b", c.fit_r_b}};
  root["out_dir"] = c.out_dir;
  root["seed"] = c.seed;
  return dump17(root);
}

void validate(const RunConfig& c) {
  try {
    (void)c.potential();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.d < 1) throw ConfigError("d must be >= 1");
  if (c.radii.empty()) throw ConfigError("config needs \"R\" or a \"radii\" ladder");
  for (std::size_t i = 0; i < c.radii.size(); ++i) {
    if (!(c.radii[i] > 0.0)) throw ConfigError("radii must be positive");
    if (i > 0 && !(c.radii[i] > c.radii[i - 1]))
      throw ConfigError("radii must be strictly increasing");
  }
  if (c.Nr < 8) throw ConfigError("Nr must be >= 8");
  if (c.ntheta_sector < 4) throw ConfigError("config needs ntheta_sector >= 4 (or ntheta_disk)");
  // disk angular count 2*d*S must be a multiple of 4d, i.e. S even
  if (c.ntheta_sector % 2 != 0)
    throw ConfigError("ntheta_sector must be even (disk count a multiple of 4*d)");
  if (c.r_min > 0.0 && !(c.r_min < c.radii.front()))
    throw ConfigError("r_min must be below the smallest radius");
  if (c.r_min > 0.0 && c.radii.size() > 1)
    throw ConfigError("a radii ladder grades by r_min_factor; drop the absolute r_min");
  if (!(c.r_min_factor > 0.0 && c.r_min_factor < 1.0))
    throw ConfigError("r_min_factor must lie in (0, 1)");
  if (!(c.solve.newton_tol > 0.0)) throw ConfigError("newton_tol must be positive");
  if (c.solve.max_newton_iters < 1) throw ConfigError("max_newton_iters must be >= 1");
  if (!(c.solve.flow_step > 0.0)) throw ConfigError("flow_step must be positive");
  if (c.j_max < 0 || c.j_max > c.d * c.ntheta_sector - 1)
    throw ConfigError("j_max aliases: it must stay below ntheta_disk/2");
  if (c.fit_r_a != 0.0 || c.fit_r_b != 0.0) {
    if (!(c.fit_r_a > 0.0 && c.fit_r_a < c.fit_r_b && c.fit_r_b <= c.R()))
      throw ConfigError("fit window must satisfy 0 < fit_r_a < fit_r_b <= R");
  }
  if (c.out_dir.empty()) throw ConfigError("config needs an out_dir");
}

// ---------------------------------------------------------------------------
// construct

namespace {

json report_entry(double R, const SolveReport& rep) {
  json e;
  e["R"] = R;
  e["converged"] = rep.converged;
  e["iterations"] = rep.iterations;
  e["final_residual"] = rep.final_residual;
  e["energy"] = rep.energy;
  e["min_value_interior"] = rep.min_value_interior;
  return e;
}

void write_field_file(const fs::path& path, const ScalarField& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open for writing: " + path.string());
  write_field_csv(u, os);
  if (!os) throw ConfigError("write failed: " + path.string());
}

void write_run_outputs(const fs::path& dir, const RunConfig& c, const ScalarField& sector,
                       const ConstructResult& result) {
  write_field_file(dir / "solution_sector.csv", sector);
  auto disk_grid = std::make_shared<PolarGrid>(
      make_disk_grid(c.d, c.R(), c.Nr, c.ntheta_disk(), c.r_min_abs()));
  write_field_file(dir / "solution_disk.csv", extend_by_symmetry(sector, c.d, disk_grid));

  json rep = report_entry(c.R(), result.final_report);
  rep["sup_u_minus_phi"] = result.sup_u_minus_phi;
  json stages = json::array();
  for (std::size_t i = 0; i < result.stage_reports.size(); ++i)
    stages.push_back(report_entry(result.stage_radii[i], result.stage_reports[i]));
  rep["stages"] = stages;
  rep["cauchy_deltas"] = result.cauchy_deltas;
  write_text_file(dir / "report.json", dump17(rep));
}

double sup_abs_diff(const ScalarField& u, const ScalarField& phi) {
  double sup = 0.0;
  for (std::size_t n = 0; n < u.values.size(); ++n)
    sup = std::max(sup, std::abs(u.values[n] - phi.values[n]));
  return sup;
}

}  // namespace

ConstructResult construct_run(const RunConfig& c) {
  validate(c);
  const fs::path dir(c.out_dir);
  if (fs::exists(dir / "solution_sector.csv"))
    throw ConfigError("run directory already holds a solution: " + dir.string());
  fs::create_directories(dir);
  // echo first, so even a failed run is reproducible
  write_text_file(dir / "config.json", run_config_to_json(c));

  ConstructResult result;
  result.dir = dir;
  const auto pot = c.potential();

  auto finish = [&](const ScalarField& sector) {
    const auto phi = harmonic_polynomial(c.d, sector.grid);
    result.sup_u_minus_phi = sup_abs_diff(sector, phi);
    write_run_outputs(dir, c, sector, result);
  };

  if (c.radii.size() == 1 && c.r_min > 0.0) {
    auto grid = std::make_shared<PolarGrid>(
        make_sector_grid(c.d, c.R(), c.Nr, c.ntheta_sector, c.r_min));
    result.stage_radii = c.radii;
    try {
      auto [u, rep] = solve_sector(pot, SectorDomain{c.d, c.R()}, grid, c.solve);
      result.final_report = rep;
      result.stage_reports = {rep};
      finish(u);
    } catch (const ConvergenceFailure& e) {
      result.final_report = e.report;
      result.stage_reports = {e.report};
      finish(e.best);
      throw;
    }
    return result;
  }

  try {
    auto cont = continuation(pot, c.d, c.radii, c.Nr, c.ntheta_sector, c.solve, c.r_min_factor);
    result.final_report = cont.reports.back();
    result.stage_reports = cont.reports;
    result.stage_radii = c.radii;
    result.cauchy_deltas = cont.cauchy.deltas;
    finish(cont.fields.back());
  } catch (const ContinuationFailure& e) {
    result.final_report = e.report;
    result.stage_reports = e.partial.reports;
    result.stage_reports.push_back(e.report);
    result.stage_radii.assign(c.radii.begin(),
                              c.radii.begin() + static_cast<long>(result.stage_reports.size()));
    result.cauchy_deltas = e.partial.cauchy.deltas;
    finish(e.best);
    throw;
  }
  return result;
}

// ---------------------------------------------------------------------------
// loading a run back

LoadedRun load_run(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir))
    throw ConfigError("not a run directory: " + run_dir.string());
  LoadedRun run;
  run.config = load_run_config(run_dir / "config.json");
  const RunConfig& c = run.config;
  auto sector_grid = std::make_shared<PolarGrid>(
      make_sector_grid(c.d, c.R(), c.Nr, c.ntheta_sector, c.r_min_abs()));
  auto disk_grid = std::make_shared<PolarGrid>(
      make_disk_grid(c.d, c.R(), c.Nr, c.ntheta_disk(), c.r_min_abs()));

  auto read_field = [&](const char* name, std::shared_ptr<const PolarGrid> grid) {
    const fs::path path = run_dir / name;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("run is missing " + path.string() + " (construct first)");
    try {
      return read_field_csv(is, std::move(grid));
    } catch (const std::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  };
  run.sector = read_field("solution_sector.csv", sector_grid);
  run.disk = read_field("solution_disk.csv", disk_grid);
  return run;
}

// ---------------------------------------------------------------------------
// analyze

namespace {

void merge_into_fits(const fs::path& run_dir, const json& updates) {
  const fs::path path = run_dir / "fits.json";
  json fits = fs::exists(path) ? read_json_file(path) : json::object();
  for (const auto& [key, value] : updates.items()) fits[key] = value;
  write_text_file(path, dump17(fits));
}

json fit_json(const DecayFit& fit) {
  json f;
  f["exponent"] = fit.lambda;
  f["constant"] = fit.log_constant;
  f["window"] = {fit.t_a, fit.t_b};
  f["residual"] = fit.residual;
  f["floor"] = fit.noise_floor;
  f["samples_used"] = fit.samples_used;
  return f;
}

json below_floor_json(double floor, const std::string& why) {
  json f;
  f["below_floor"] = true;
  f["floor"] = floor;
  f["note"] = why;
  return f;
}

// fit after moving the window start to the series' peak; a series still at
// the floor is reported, not an error
json guarded_fit(const std::vector<double>& t, const std::vector<double>& y, double t_a,
                 double t_b, double floor) {
  try {
    const double start = fit_window_start(t, y, t_a, t_b);
    return fit_json(decay_fit(t, y, start, t_b, floor));
  } catch (const SignalBelowFloor& e) {
    return below_floor_json(floor, e.what());
  }
}

struct ModeDiagnostics {
  std::vector<ModeSeries> modes;
  ModeSeries g_d;         // forcing series for j = d
  PolarProfile profile;
  double t_a = 0.0, t_b = 0.0;  // default fit window
};

ModeDiagnostics mode_diagnostics(const LoadedRun& run, int j_max) {
  ModeDiagnostics md;
  const RunConfig& c = run.config;
  md.profile = to_polar_profile(run.disk, c.d);
  md.modes = fourier_modes(md.profile, j_max);
  md.g_d = oscillatory_integral(md.profile, c.potential(), c.d);
  const double lo = md.profile.t.front(), hi = md.profile.t.back();
  md.t_a = c.fit_r_a > 0.0 ? std::log(c.fit_r_a) : std::max(lo, std::log(c.R() / 20.0));
  md.t_b = c.fit_r_b > 0.0 ? std::log(c.fit_r_b) : std::min(hi, std::log(c.R() / 2.0));
  return md;
}

// zero-potential oracle on the run's own grids: the discretization floor for
// every mode diagnostic
struct OracleFloors {
  double dev_from_cos = 0.0;
  double c_d_minus_1 = 0.0;
  std::vector<double> ring_sup;  // per-ring sup |u0 - phi| on the sector grid
};

OracleFloors oracle_floors(const LoadedRun& run, double t_a, double t_b) {
  const RunConfig& c = run.config;
  OracleFloors fl;
  const auto w0 = zero_potential_oracle(run.sector.grid);
  const auto& g = *w0.grid;
  fl.ring_sup.assign(static_cast<std::size_t>(g.nr()), 0.0);
  for (int i = 0; i < g.nr(); ++i)
    for (int k = 0; k < g.nth(); ++k)
      fl.ring_sup[static_cast<std::size_t>(i)] =
          std::max(fl.ring_sup[static_cast<std::size_t>(i)], std::abs(w0.at(i, k)));

  auto disk0 = make_field(run.disk.grid);
  {
    ScalarField u0 = w0;
    const auto phi = harmonic_polynomial(c.d, w0.grid);
    for (std::size_t n = 0; n < u0.values.size(); ++n) u0.values[n] += phi.values[n];
    disk0 = extend_by_symmetry(u0, c.d, run.disk.grid);
  }
  const auto prof0 = to_polar_profile(disk0, c.d);
  const auto modes0 = fourier_modes(prof0, c.d);
  const auto& cd0 = modes0.back().c;
  for (int i = 0; i < prof0.nt(); ++i) {
    if (prof0.t[i] < t_a || prof0.t[i] > t_b) continue;
    double dev = 0.0;
    for (int k = 0; k < prof0.nth(); ++k)
      dev = std::max(dev, std::abs(prof0.at(i, k) - std::cos(c.d * prof0.thetas[k])));
    fl.dev_from_cos = std::max(fl.dev_from_cos, dev);
    fl.c_d_minus_1 =
        std::max(fl.c_d_minus_1, std::abs(cd0[static_cast<std::size_t>(i)] - 1.0));
  }
  return fl;
}

// limit of c_d(t): intercept of the OLS of c_d against x = e^{(2-3d/2)t},
// restricted to the outer half of the floor-gated window where the next-order
// corrections are smallest
json fit_c_d_limit(const ModeSeries& mode, int d, double t_a, double t_b, double floor) {
  std::vector<double> ts;
  for (std::size_t i = 0; i < mode.t.size(); ++i) {
    if (mode.t[i] < t_a || mode.t[i] > t_b) continue;
    if (std::abs(mode.c[i] - 1.0) > 10.0 * floor) ts.push_back(mode.t[i]);
  }
  if (ts.size() < 5) return below_floor_json(floor, "c_d sits at the discretization floor");
  const double mid = 0.5 * (ts.front() + ts.back());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < mode.t.size(); ++i) {
    if (mode.t[i] < mid || mode.t[i] > t_b) continue;
    const double x = std::exp((2.0 - 1.5 * d) * mode.t[i]);
    const double y = mode.c[i];
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  const double det = n * sxx - sx * sx;
  json out;
  out["limit"] = (sy * sxx - sx * sxy) / det;
  out["slope"] = (n * sxy - sx * sy) / det;
  out["window"] = {mid, t_b};
  out["samples_used"] = n;
  out["floor"] = floor;
  return out;
}

json envelope_fit(const ModeSeries& series, const std::vector<double>& values, double t_a,
                  double t_b) {
  // envelope of an oscillatory series, flagged rows excluded
  std::vector<double> t, v;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    if (!series.flagged.empty() && series.flagged[i]) continue;
    if (series.t[i] < t_a || series.t[i] > t_b) continue;
    t.push_back(series.t[i]);
    v.push_back(values[i]);
  }
  std::vector<double> tp, vp;
  abs_envelope(t, v, tp, vp);
  if (tp.size() < 5) return below_floor_json(0.0, "too few envelope peaks in the window");
  try {
    return fit_json(decay_fit(tp, vp, tp.front(), tp.back(), 0.0));
  } catch (const SignalBelowFloor& e) {
    return below_floor_json(0.0, e.what());
  }
}

}  // namespace

fs::path analyze_lemmas(const fs::path& run_dir, const std::vector<double>& radii) {
  if (radii.empty()) throw ConfigError("analyze lemmas needs at least one radius");
  const auto run = load_run(run_dir);
  const auto pot = run.config.potential();
  for (double r : radii)
    if (!(r > 0.0 && r <= run.config.R()))
      throw ConfigError("lemma radius outside the domain: " + format_double(r));

  std::ostringstream os;
  os << "r,lhs,rhs_identity,bound,lemma32_sup,phi_diff_sup,hessian_diff\n";
  for (double r : radii) {
    const auto ext = harmonic_extension(run.disk, r);
    const auto l31 = lemma31_check(run.disk, ext, pot, ext.r);
    const double l32 = lemma32_check(run.disk, ext, ext.r);
    const auto pvp = phi_r_vs_phi_check(ext, run.config.d, ext.r);
    os << format_double(ext.r) << ',' << format_double(l31.lhs) << ','
       << format_double(l31.rhs_identity) << ',' << format_double(l31.bound) << ','
       << format_double(l32) << ',' << format_double(pvp.sup_diff) << ','
       << format_double(pvp.hessian_diff) << '\n';
  }
  const fs::path out = run_dir / "lemmas.csv";
  write_text_file(out, os.str());

  json params;
  params["lemmas"] = {{"radii", radii}};
  merge_into_fits(run_dir, params);
  return out;
}

fs::path analyze_modes(const fs::path& run_dir, int j_max) {
  const auto run = load_run(run_dir);
  const RunConfig& c = run.config;
  if (j_max <= 0) j_max = c.j_max;
  if (j_max <= 0) j_max = std::max(3 * c.d + 1, 16);
  if (j_max > c.d * c.ntheta_sector - 1)
    throw ConfigError("j_max aliases: it must stay below ntheta_disk/2");

  const auto md = mode_diagnostics(run, j_max);
  const auto floors = oracle_floors(run, md.t_a, md.t_b);

  // modes.csv: long form, one row per (t, j)
  std::ostringstream os;
  os << "t,j,c_j,g_j\n";
  std::vector<ModeSeries> gs;
  for (int j = 0; j <= j_max; ++j)
    gs.push_back(oscillatory_integral(md.profile, c.potential(), j));
  for (int i = 0; i < md.profile.nt(); ++i)
    for (int j = 0; j <= j_max; ++j)
      os << format_double(md.profile.t[i]) << ',' << j << ','
         << format_double(md.modes[static_cast<std::size_t>(j)].c[static_cast<std::size_t>(i)])
         << ','
         << format_double(gs[static_cast<std::size_t>(j)].g[static_cast<std::size_t>(i)])
         << '\n';
  const fs::path out = run_dir / "modes.csv";
  write_text_file(out, os.str());

  json fits;
  fits["analyze_modes"] = {{"j_max", j_max}};
  fits["selection_rule"] = {{"ratio", selection_rule_check(md.modes, c.d)},
                            {"bound", 1e-8}};

  std::vector<double> dev(static_cast<std::size_t>(md.profile.nt()), 0.0);
  for (int i = 0; i < md.profile.nt(); ++i) {
    double s = 0.0;
    for (int k = 0; k < md.profile.nth(); ++k)
      s = std::max(s, std::abs(md.profile.at(i, k) - std::cos(c.d * md.profile.thetas[k])));
    dev[static_cast<std::size_t>(i)] = s;
  }
  fits["dev_from_cos"] = guarded_fit(md.profile.t, dev, md.t_a, md.t_b, floors.dev_from_cos);

  const auto& cd = md.modes[static_cast<std::size_t>(c.d)];
  std::vector<double> cd_err(cd.c.size());
  for (std::size_t i = 0; i < cd.c.size(); ++i) cd_err[i] = std::abs(cd.c[i] - 1.0);
  fits["c_d_minus_1"] = guarded_fit(cd.t, cd_err, md.t_a, md.t_b, floors.c_d_minus_1);
  fits["B_d"] = fit_c_d_limit(cd, c.d, md.t_a, md.t_b, floors.c_d_minus_1);

  std::vector<double> gabs(md.g_d.g.size());
  for (std::size_t i = 0; i < gabs.size(); ++i) gabs[i] = std::abs(md.g_d.g[i]);
  fits["g_d_envelope"] = envelope_fit(md.g_d, gabs, md.t_a, md.t_b);

  {
    ModeSeries fine = md.g_d;  // t, g, flagged from the forcing; c from the DFT
    fine.c = cd.c;
    ModeSeries coarse;
    coarse.j = fine.j;
    for (std::size_t i = 0; i < fine.t.size(); i += 2) {
      coarse.t.push_back(fine.t[i]);
      coarse.c.push_back(fine.c[i]);
      coarse.g.push_back(fine.g[i]);
      coarse.flagged.push_back(fine.flagged[i]);
    }
    const double rf = mode_ode_residual(fine, c.d);
    const double rc = mode_ode_residual(coarse, c.d);
    fits["mode_ode"] = {{"residual", rf},
                        {"residual_coarse", rc},
                        {"refinement_ratio", rc / rf},
                        {"floor_estimate", (rc - rf) / 3.0}};
  }
  merge_into_fits(run_dir, fits);
  return out;
}

fs::path analyze_growth(const fs::path& run_dir) {
  const auto run = load_run(run_dir);
  const RunConfig& c = run.config;
  const auto phi = harmonic_polynomial(c.d, run.disk.grid);
  const auto& g = *run.disk.grid;

  std::ostringstream os;
  os << "r,sup_err\n";
  for (int i = 0; i < g.nr(); ++i) {
    double sup = 0.0;
    for (int k = 0; k < g.nth(); ++k)
      sup = std::max(sup, std::abs(run.disk.at(i, k) - phi.at(i, k)));
    os << format_double(g.radii[static_cast<std::size_t>(i)]) << ',' << format_double(sup)
       << '\n';
  }
  const fs::path out = run_dir / "growth.csv";
  write_text_file(out, os.str());

  const double r_a = c.fit_r_a > 0.0 ? c.fit_r_a : std::max(c.R() / 20.0, g.r_min());
  const double r_b = c.fit_r_b > 0.0 ? c.fit_r_b : c.R() / 2.0;
  double floor = 0.0;
  {
    const auto w0 = zero_potential_oracle(run.sector.grid);
    const auto& sg = *w0.grid;
    for (int i = 0; i < sg.nr(); ++i) {
      const double r = sg.radii[static_cast<std::size_t>(i)];
      if (r < r_a || r > r_b) continue;
      for (int k = 0; k < sg.nth(); ++k) floor = std::max(floor, std::abs(w0.at(i, k)));
    }
  }
  json fits;
  try {
    fits["growth"] = fit_json(growth_exponent(run.disk, c.d, r_a, r_b, floor));
  } catch (const SignalBelowFloor& e) {
    fits["growth"] = below_floor_json(floor, e.what());
  }
  merge_into_fits(run_dir, fits);
  return out;
}

// ---------------------------------------------------------------------------
// oned

fs::path oned_run(const OnedConfig& c) {
  if (c.out_dir.empty()) throw ConfigError("oned needs an out_dir");
  PeriodicPotential pot;
  try {
    pot = make_potential(c.potential_kind, c.potential_coefficients);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const fs::path dir(c.out_dir);
  if (fs::exists(dir / "profile.csv"))
    throw ConfigError("run directory already holds a profile: " + dir.string());
  fs::create_directories(dir);

  json echo;
  echo["command"] = "oned";
  echo["potential"] = potential_spec_json(c.potential_kind, c.potential_coefficients);
  echo["E"] = c.E;
  echo["kappa"] = c.kappa;
  echo["samples_per_period"] = c.samples_per_period;
  echo["out_dir"] = c.out_dir;
  write_text_file(dir / "config.json", dump17(echo));

  const auto sol = quadrature_solution(pot, c.E, c.kappa, c.samples_per_period);

  std::ostringstream os;
  os << "s,v\n";
  for (std::size_t j = 0; j < sol.s.size(); ++j)
    os << format_double(sol.s[j]) << ',' << format_double(sol.v[j]) << '\n';
  write_text_file(dir / "profile.csv", os.str());

  json rep;
  rep["mean_slope"] = sol.mean_slope;
  rep["period"] = sol.period;
  rep["deviation"] = sol.deviation;
  rep["ode_residual"] = verify_ode(sol);
  write_text_file(dir / "report.json", dump17(rep));
  return dir;
}

}  // namespace polygrow

namespace polygrow::detail {

std::string dump17(const nlohmann::ordered_json& j) {
  std::string out;
  dump17_impl(j, out, 0);
  out += '\n';
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw ConfigError("write failed: " + path.string());
}

nlohmann::ordered_json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open: " + path.string());
  try {
    return nlohmann::ordered_json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace polygrow::detail
