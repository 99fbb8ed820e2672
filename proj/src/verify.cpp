#include "polygrow/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json_io.hpp"
#include "polygrow/analysis.hpp"
#include "polygrow/grid.hpp"
#include "polygrow/oned.hpp"
#include "polygrow/run_io.hpp"
#include "polygrow/solver.hpp"

namespace polygrow {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

double elapsed(clock_type::time_point since) {
  return std::chrono::duration<double>(clock_type::now() - since).count();
}

// ---------------------------------------------------------------------------
// check helpers

CriterionCheck check_le(const std::string& name, double measured, double bound) {
  return {name, measured, bound, "<=", std::isfinite(measured) && measured <= bound};
}

CriterionCheck check_lt(const std::string& name, double measured, double bound) {
  return {name, measured, bound, "<", std::isfinite(measured) && measured < bound};
}

CriterionCheck check_ge(const std::string& name, double measured, double bound) {
  return {name, measured, bound, ">=", std::isfinite(measured) && measured >= bound};
}

CriterionCheck check_near(const std::string& name, double measured, double center,
                          double half_width) {
  CriterionCheck c{name, measured, center, "within " + format_double(half_width) + " of",
                   false};
  c.pass = std::isfinite(measured) && std::abs(measured - center) <= half_width;
  return c;
}

void finish(CriterionResult& r) {
  r.pass = true;
  for (const auto& c : r.checks) r.pass = r.pass && c.pass;
}

// a fits.json block either carries the fitted exponent or got gated at the
// discretization floor; gated diagnostics fail the bound honestly
double fit_exponent(const json& fits, const char* key) {
  if (!fits.contains(key) || !fits.at(key).contains("exponent"))
    return std::numeric_limits<double>::quiet_NaN();
  return fits.at(key).at("exponent").get<double>();
}

double fit_field(const json& fits, const char* key, const char* field) {
  if (!fits.contains(key) || !fits.at(key).contains(field))
    return std::numeric_limits<double>::quiet_NaN();
  return fits.at(key).at(field).get<double>();
}

struct LemmaRow {
  double r, lhs, rhs_identity, bound, lemma32_sup, phi_diff_sup, hessian_diff;
};

std::vector<LemmaRow> read_lemmas_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("missing " + path.string());
  std::string line;
  std::getline(is, line);  // header
  std::vector<LemmaRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    LemmaRow row{};
    double* fields[] = {&row.r,           &row.lhs,          &row.rhs_identity, &row.bound,
                        &row.lemma32_sup, &row.phi_diff_sup, &row.hessian_diff};
    std::stringstream ss(line);
    std::string cell;
    for (double* f : fields) {
      if (!std::getline(ss, cell, ',')) throw ConfigError("short row in " + path.string());
      *f = std::stod(cell);
    }
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[static_cast<std::size_t>(i)]);
    const double ly = std::log(y[static_cast<std::size_t>(i)]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string read_all(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("missing " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------
// the run directories the full suite constructs

struct Workspace {
  fs::path root;
  fs::path d2_ladder, d3, d4, d6, d2_small, d2_twin;

  json fits(const fs::path& run) const { return detail::read_json_file(run / "fits.json"); }
};

RunConfig base_config(const std::string& kind, int d, std::vector<double> radii, int Nr,
                      int S, const fs::path& out) {
  RunConfig c;
  c.potential_kind = kind;
  c.d = d;
  c.radii = std::move(radii);
  c.Nr = Nr;
  c.ntheta_sector = S;
  c.out_dir = out.string();
  return c;
}

Workspace build_workspace(const fs::path& root, bool full) {
  Workspace w;
  w.root = root;
  fs::remove_all(root);
  fs::create_directories(root);

  w.d2_small = root / "d2_r10";
  w.d2_twin = root / "d2_r10_twin";
  construct_run(base_config("sine_gordon", 2, {10.0}, 256, 128, w.d2_small));
  construct_run(base_config("sine_gordon", 2, {10.0}, 256, 128, w.d2_twin));
  if (!full) return w;

  analyze_modes(w.d2_small, 7);
  analyze_growth(w.d2_small);

  w.d2_ladder = root / "d2_r200";
  construct_run(
      base_config("sine_gordon", 2, {25.0, 50.0, 100.0, 200.0}, 1024, 256, w.d2_ladder));
  analyze_lemmas(w.d2_ladder, {10.0, 20.0, 40.0, 80.0});

  w.d3 = root / "d3_r8";
  construct_run(base_config("sine_gordon", 3, {8.0}, 1024, 256, w.d3));
  analyze_modes(w.d3, 10);

  w.d4 = root / "d4_r16";
  {
    auto c = base_config("sine_gordon", 4, {16.0}, 1024, 256, w.d4);
    c.r_min = 0.4;
    construct_run(c);
  }
  analyze_modes(w.d4, 13);
  analyze_growth(w.d4);

  w.d6 = root / "d6_r12";
  {
    auto c = base_config("sine_gordon", 6, {12.0}, 1024, 512, w.d6);
    c.r_min = 0.6;
    construct_run(c);
  }
  analyze_growth(w.d6);
  return w;
}

// ---------------------------------------------------------------------------
// criteria

// 1: the zero-potential solve is the oracle; its defect from phi is pure
// discretization error and must shrink at second order
CriterionResult criterion_harmonic_oracle() {
  CriterionResult r{1, "harmonic oracle at second order", {}, true, 0.0};
  const double R = 50.0;
  for (int d : {2, 4}) {
    auto coarse = std::make_shared<PolarGrid>(make_sector_grid(d, R, 256, 128));
    auto fine = std::make_shared<PolarGrid>(make_sector_grid(d, R, 512, 256));
    double sup_c = 0.0, sup_f = 0.0;
    for (double v : zero_potential_oracle(coarse).values) sup_c = std::max(sup_c, std::abs(v));
    for (double v : zero_potential_oracle(fine).values) sup_f = std::max(sup_f, std::abs(v));
    const std::string tag = "d=" + std::to_string(d);
    r.checks.push_back(
        check_le(tag + " sup|u-phi| (512x256)", sup_f, 1e-8 * std::pow(R, d) * 4.0));
    r.checks.push_back(check_near(tag + " refinement ratio", sup_c / sup_f, 4.0, 0.8));
  }
  finish(r);
  return r;
}

// 2: the energy identity behind the comparison lemma, row by row
CriterionResult criterion_green_identity(const std::vector<LemmaRow>& rows) {
  CriterionResult r{2, "Green identity on the d=2 run", {}, true, 0.0};
  for (const auto& row : rows) {
    if (row.r > 41.0) continue;  // identity rows: r in {10, 20, 40}
    const double tol = 1e-3 * std::max(row.lhs, row.r * row.r);
    r.checks.push_back(check_le("|lhs-rhs| at r=" + format_double(row.r),
                                std::abs(row.lhs - row.rhs_identity), tol));
  }
  finish(r);
  return r;
}

// 3: the explicit constant chain 2 osc(F) pi r^2
CriterionResult criterion_energy_bound(const std::vector<LemmaRow>& rows) {
  CriterionResult r{3, "energy comparison bound", {}, true, 0.0};
  for (const auto& row : rows)
    r.checks.push_back(check_le("lhs at r=" + format_double(row.r), row.lhs, row.bound));
  finish(r);
  return r;
}

// 4: sup_{B_{r/2}} |phi^r - u| grows no faster than r^1.6
CriterionResult criterion_harmonic_approach(const std::vector<LemmaRow>& rows) {
  CriterionResult r{4, "harmonic approximation exponent", {}, true, 0.0};
  std::vector<double> rs, sups;
  for (const auto& row : rows) {
    rs.push_back(row.r);
    sups.push_back(row.lemma32_sup);
  }
  r.checks.push_back(check_le("slope of log sup vs log r", loglog_slope(rs, sups), 1.6));
  finish(r);
  return r;
}

CriterionResult criterion_growth(const Workspace& w) {
  CriterionResult r{5, "growth exponents of u - phi", {}, true, 0.0};
  r.checks.push_back(
      check_le("d=2 exponent", fit_exponent(w.fits(w.d2_small), "growth"), 1.6));
  r.checks.push_back(check_le("d=4 exponent", fit_exponent(w.fits(w.d4), "growth"), 0.15));
  r.checks.push_back(check_le("d=6 exponent", fit_exponent(w.fits(w.d6), "growth"), -0.7));
  finish(r);
  return r;
}

CriterionResult criterion_selection(const Workspace& w) {
  CriterionResult r{6, "angular mode selection rule", {}, true, 0.0};
  r.checks.push_back(check_lt(
      "d=2 ratio", fit_field(w.fits(w.d2_small), "selection_rule", "ratio"), 1e-8));
  r.checks.push_back(
      check_lt("d=3 ratio", fit_field(w.fits(w.d3), "selection_rule", "ratio"), 1e-8));
  r.checks.push_back(
      check_lt("d=4 ratio", fit_field(w.fits(w.d4), "selection_rule", "ratio"), 1e-8));
  finish(r);
  return r;
}

CriterionResult criterion_profile_decay(const Workspace& w) {
  CriterionResult r{7, "profile approach to cos(d theta)", {}, true, 0.0};
  r.checks.push_back(check_le("d=3 exponent", fit_exponent(w.fits(w.d3), "dev_from_cos"),
                              (1.5 - 3.0) + 0.4));
  r.checks.push_back(check_le("d=4 exponent", fit_exponent(w.fits(w.d4), "dev_from_cos"),
                              (1.5 - 4.0) + 0.4));
  finish(r);
  return r;
}

CriterionResult criterion_mode_limit(const Workspace& w) {
  CriterionResult r{8, "principal mode limit B_d", {}, true, 0.0};
  for (int d : {3, 4}) {
    const json fits = w.fits(d == 3 ? w.d3 : w.d4);
    const std::string tag = "d=" + std::to_string(d);
    r.checks.push_back(
        check_near(tag + " limit of c_d", fit_field(fits, "B_d", "limit"), 1.0, 0.02));
    r.checks.push_back(check_le(tag + " |c_d-1| exponent", fit_exponent(fits, "c_d_minus_1"),
                                -(1.5 * d - 2.0) + 0.5));
  }
  finish(r);
  return r;
}

// 9a: stationary phase on a frozen profile, where the rate -d/2 is exact
CriterionCheck frozen_profile_check() {
  const int d = 4, nt = 600, nth = 2048;
  PolarProfile p;
  p.d = d;
  p.t.resize(nt);
  for (int i = 0; i < nt; ++i) p.t[i] = 1.2 * i / (nt - 1);
  p.thetas.resize(nth);
  const double dth = 2.0 * std::numbers::pi / nth;
  for (int k = 0; k < nth; ++k) p.thetas[k] = (k - nth / 2) * dth;
  p.values.resize(static_cast<std::size_t>(nt) * nth);
  for (int i = 0; i < nt; ++i)
    for (int k = 0; k < nth; ++k) p.at(i, k) = std::cos(d * p.thetas[k]);

  const auto series = oscillatory_integral(p, make_sine_gordon(), d);
  std::vector<double> iabs(series.I.size());
  for (std::size_t i = 0; i < iabs.size(); ++i) iabs[i] = std::abs(series.I[i]);
  std::vector<double> tp, vp;
  abs_envelope(series.t, iabs, tp, vp);
  const auto fit = decay_fit(tp, vp, tp.front(), tp.back(), 0.0);
  return check_le("frozen-profile I_d envelope exponent", fit.lambda, -0.5 * d + 0.4);
}

CriterionResult criterion_oscillatory(const Workspace& w) {
  CriterionResult r{9, "oscillatory integral decay", {}, true, 0.0};
  r.checks.push_back(frozen_profile_check());
  r.checks.push_back(check_le("converged d=4 g_d envelope exponent",
                              fit_exponent(w.fits(w.d4), "g_d_envelope"),
                              -(1.5 * 4.0 - 2.0) + 0.5));
  finish(r);
  return r;
}

CriterionResult criterion_mode_ode(const Workspace& w) {
  CriterionResult r{10, "mode ODE residual", {}, true, 0.0};
  const json fits = w.fits(w.d4);
  const double res = fit_field(fits, "mode_ode", "residual");
  const double floor = fit_field(fits, "mode_ode", "floor_estimate");
  r.checks.push_back(check_le("residual vs 10x floor", res, 10.0 * floor));
  r.checks.push_back(check_near("refinement ratio",
                                fit_field(fits, "mode_ode", "refinement_ratio"), 4.0, 1.2));
  finish(r);
  return r;
}

CriterionResult criterion_oned() {
  CriterionResult r{11, "1D rotating solution and planar extension", {}, true, 0.0};
  const auto sol = quadrature_solution(make_sine_gordon(), 2.0, 0.5, 10000);

  double fi = 0.0;
  for (std::size_t j = 0; j + 1 < sol.s.size(); ++j) {
    const double vp = (sol.v[j + 1] - sol.v[j]) / (sol.s[j + 1] - sol.s[j]);
    const double vm = 0.5 * (sol.v[j] + sol.v[j + 1]);
    fi = std::max(fi,
                  std::abs(0.5 * vp * vp - (sol.E - sol.kappa * sol.potential.F(vm))));
  }
  r.checks.push_back(check_le("first-integral defect", fi, 1e-6));
  r.checks.push_back(check_lt("deviation vs T/2", sol.deviation, std::numbers::pi));

  auto gc = std::make_shared<PolarGrid>(make_disk_grid(2, 10.0, 64, 64));
  auto gf = std::make_shared<PolarGrid>(make_disk_grid(2, 10.0, 128, 128));
  const auto pc = planar_extension_check(sol, {1.0, 0.0}, gc);
  const auto pf = planar_extension_check(sol, {1.0, 0.0}, gf);
  r.checks.push_back(check_le("planar pde residual (64x64)", pc.pde_residual, 0.5));
  r.checks.push_back(
      check_le("planar pde residual refinement", pf.pde_residual, 0.6 * pc.pde_residual));
  r.checks.push_back(check_le("linear bound vs deviation", pc.linear_bound,
                              sol.deviation + std::abs(sol.offset) + 1e-9));
  r.checks.push_back(check_ge("directional derivative min (e.a>0)", pc.monotonicity_min,
                              -1e-6));
  r.checks.push_back(check_le("orthogonal derivative sup", pc.orthogonal_sup, 1e-6));
  finish(r);
  return r;
}

CriterionResult criterion_determinism(const Workspace& w) {
  CriterionResult r{12, "bit-identical reruns", {}, true, 0.0};
  for (const char* name : {"solution_sector.csv", "solution_disk.csv"}) {
    const bool same = read_all(w.d2_small / name) == read_all(w.d2_twin / name);
    CriterionCheck c{std::string(name) + " byte-identical", same ? 1.0 : 0.0, 1.0, "==",
                     same};
    r.checks.push_back(c);
  }
  finish(r);
  return r;
}

}  // namespace

Verdict run_acceptance(const std::string& suite, const fs::path& workdir,
                       const std::function<void(const CriterionResult&)>& progress) {
  if (suite != "fast" && suite != "full")
    throw ConfigError("suite must be \"fast\" or \"full\"");
  const bool full = suite == "full";
  const auto start = clock_type::now();

  Verdict verdict;
  verdict.suite = suite;

  auto w = build_workspace(workdir, full);
  std::vector<LemmaRow> lemmas;
  if (full) lemmas = read_lemmas_csv(w.d2_ladder / "lemmas.csv");

  auto add = [&](CriterionResult (*make)(), int) {
    const auto t0 = clock_type::now();
    auto r = make();
    r.seconds = elapsed(t0);
    if (progress) progress(r);
    verdict.criteria.push_back(std::move(r));
  };
  auto add_r = [&](CriterionResult r, clock_type::time_point t0) {
    r.seconds = elapsed(t0);
    if (progress) progress(r);
    verdict.criteria.push_back(std::move(r));
  };

  add(criterion_harmonic_oracle, 1);
  if (full) {
    auto t0 = clock_type::now();
    add_r(criterion_green_identity(lemmas), t0);
    t0 = clock_type::now();
    add_r(criterion_energy_bound(lemmas), t0);
    t0 = clock_type::now();
    add_r(criterion_harmonic_approach(lemmas), t0);
    t0 = clock_type::now();
    add_r(criterion_growth(w), t0);
    t0 = clock_type::now();
    add_r(criterion_selection(w), t0);
    t0 = clock_type::now();
    add_r(criterion_profile_decay(w), t0);
    t0 = clock_type::now();
    add_r(criterion_mode_limit(w), t0);
    t0 = clock_type::now();
    add_r(criterion_oscillatory(w), t0);
    t0 = clock_type::now();
    add_r(criterion_mode_ode(w), t0);
  }
  {
    const auto t0 = clock_type::now();
    add_r(criterion_oned(), t0);
  }
  {
    const auto t0 = clock_type::now();
    add_r(criterion_determinism(w), t0);
  }

  verdict.pass = true;
  for (const auto& c : verdict.criteria) verdict.pass = verdict.pass && c.pass;
  verdict.seconds = elapsed(start);
  return verdict;
}

std::string verdict_to_json(const Verdict& verdict) {
  json root;
  root["suite"] = verdict.suite;
  root["pass"] = verdict.pass;
  root["seconds"] = verdict.seconds;
  json arr = json::array();
  for (const auto& c : verdict.criteria) {
    json jc;
    jc["id"] = c.id;
    jc["title"] = c.title;
    jc["pass"] = c.pass;
    jc["seconds"] = c.seconds;
    json checks = json::array();
    for (const auto& k : c.checks) {
      json jk;
      jk["name"] = k.name;
      jk["measured"] = k.measured;
      jk["relation"] = k.relation;
      jk["bound"] = k.bound;
      jk["pass"] = k.pass;
      checks.push_back(jk);
    }
    jc["checks"] = checks;
    arr.push_back(jc);
  }
  root["criteria"] = arr;
  return detail::dump17(root);
}

}  // namespace polygrow
