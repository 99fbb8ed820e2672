#include "polygrow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace polygrow {
namespace {

constexpr double kPi = std::numbers::pi;

void check_uniform(const std::vector<double>& t, const char* what) {
  const int n = static_cast<int>(t.size());
  if (n < 2) throw std::invalid_argument(std::string(what) + ": need at least two samples");
  const double dt = (t.back() - t.front()) / (n - 1);
  for (int i = 0; i + 1 < n; ++i)
    if (std::abs(t[i + 1] - t[i] - dt) > 1e-10)
      throw std::invalid_argument(std::string(what) + ": samples are not uniform in t");
}

}  // namespace

PolarProfile to_polar_profile(const ScalarField& u, int d) {
  const PolarGrid& g = *u.grid;
  if (!g.is_disk()) throw std::invalid_argument("to_polar_profile expects a disk-mode field");
  if (g.d != d) throw std::invalid_argument("degree mismatch between field and argument");

  PolarProfile p;
  p.d = d;
  p.thetas = g.thetas;
  p.t.resize(g.nr());
  for (int i = 0; i < g.nr(); ++i) p.t[i] = std::log(g.radii[i]);
  check_uniform(p.t, "to_polar_profile");

  p.values.resize(u.values.size());
  const int nth = g.nth();
  for (int i = 0; i < g.nr(); ++i) {
    const double rd = std::pow(g.radii[i], d);
    for (int k = 0; k < nth; ++k) p.at(i, k) = u.at(i, k) / rd;
  }
  return p;
}

std::vector<ModeSeries> fourier_modes(const PolarProfile& profile, int j_max) {
  const int nth = profile.nth();
  const int nt = profile.nt();
  if (j_max < 0 || j_max > nth / 2 - 1)
    throw std::invalid_argument("fourier_modes: j_max beyond Ntheta/2 - 1 aliases");
  const double dth = profile.thetas[1] - profile.thetas[0];

  double vmax = 0.0;
  for (const double v : profile.values) vmax = std::max(vmax, std::abs(v));

  std::vector<ModeSeries> out(j_max + 1);
  std::vector<double> ctab(nth), stab(nth);
  double bmax = 0.0;
  for (int j = 0; j <= j_max; ++j) {
    ModeSeries& m = out[j];
    m.j = j;
    m.t = profile.t;
    m.c.resize(nt);
    for (int k = 0; k < nth; ++k) {
      ctab[k] = std::cos(j * profile.thetas[k]);
      stab[k] = std::sin(j * profile.thetas[k]);
    }
    const double scale = (j == 0 ? dth / (2.0 * kPi) : dth / kPi);
    for (int i = 0; i < nt; ++i) {
      double ac = 0.0, as = 0.0;
      for (int k = 0; k < nth; ++k) {
        const double v = profile.at(i, k);
        ac += v * ctab[k];
        as += v * stab[k];
      }
      m.c[i] = scale * ac;
      bmax = std::max(bmax, std::abs(scale * as));
    }
  }
  if (bmax > 1e-10 * vmax)
    throw std::runtime_error("fourier_modes: profile has odd angular content (sine "
                             "coefficients above 1e-10 of the amplitude)");
  return out;
}

double selection_rule_check(const std::vector<ModeSeries>& modes, int d) {
  int j_top = -1;
  const ModeSeries* cd = nullptr;
  for (const auto& m : modes) {
    j_top = std::max(j_top, m.j);
    if (m.j == d) cd = &m;
  }
  if (j_top < 3 * d)
    throw std::invalid_argument("selection_rule_check: modes must reach j >= 3d");
  if (!cd) throw std::invalid_argument("selection_rule_check: mode j = d missing");

  double denom = 0.0;
  for (const double v : cd->c) denom = std::max(denom, std::abs(v));
  double worst = 0.0;
  for (const auto& m : modes) {
    const bool allowed = m.j % d == 0 && (m.j / d) % 2 == 1;
    if (allowed) continue;
    for (const double v : m.c) worst = std::max(worst, std::abs(v));
  }
  if (denom == 0.0)
    return worst == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return worst / denom;
}

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& values,
                   double t_a, double t_b, double noise_floor) {
  if (t.size() != values.size()) throw std::invalid_argument("decay_fit: size mismatch");
  if (!(t_a < t_b)) throw std::invalid_argument("decay_fit: empty window");
  if (noise_floor < 0.0) throw std::invalid_argument("decay_fit: negative noise floor");

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_a || t[i] > t_b) continue;
    if (!(std::abs(values[i]) > 10.0 * noise_floor)) continue;
    xs.push_back(t[i]);
    ys.push_back(std::log(std::abs(values[i])));
  }
  if (xs.size() < 5)
    throw SignalBelowFloor("decay_fit: fewer than 5 samples above 10x the noise floor "
                           "in the window");

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = n * sxx - sx * sx;
  const double lambda = (n * sxy - sx * sy) / det;
  const double intercept = (sy * sxx - sx * sxy) / det;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + lambda * xs[i]);
    ss += e * e;
  }

  DecayFit fit;
  fit.t_a = xs.front();
  fit.t_b = xs.back();
  fit.lambda = lambda;
  fit.log_constant = intercept;
  fit.residual = std::sqrt(ss / n);
  fit.noise_floor = noise_floor;
  fit.samples_used = static_cast<int>(xs.size());
  return fit;
}

double fit_window_start(const std::vector<double>& t, const std::vector<double>& values,
                        double t_a, double t_b) {
  if (t.size() != values.size())
    throw std::invalid_argument("fit_window_start: size mismatch");
  double best = t_a, peak = -1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_a || t[i] > t_b) continue;
    if (std::abs(values[i]) > peak) {
      peak = std::abs(values[i]);
      best = t[i];
    }
  }
  return best;
}

void abs_envelope(const std::vector<double>& t, const std::vector<double>& values,
                  std::vector<double>& t_peaks, std::vector<double>& peaks) {
  if (t.size() != values.size()) throw std::invalid_argument("abs_envelope: size mismatch");
  t_peaks.clear();
  peaks.clear();
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    const double v = std::abs(values[i]);
    if (v > 0.0 && v >= std::abs(values[i - 1]) && v >= std::abs(values[i + 1])) {
      t_peaks.push_back(t[i]);
      peaks.push_back(v);
    }
  }
}

ModeSeries oscillatory_integral(const PolarProfile& profile, const PeriodicPotential& pot,
                                int j) {
  if (j < 0) throw std::invalid_argument("oscillatory_integral: negative mode index");
  const int nth = profile.nth();
  const int nt = profile.nt();
  if (nth < 4) throw std::invalid_argument("oscillatory_integral: too few angular nodes");
  const double dth = profile.thetas[1] - profile.thetas[0];
  const int d = profile.d;

  ModeSeries m;
  m.j = j;
  m.t = profile.t;
  m.I.resize(nt);
  m.g.resize(nt);
  m.flagged.assign(nt, 0);

  std::vector<double> ctab(nth);
  for (int k = 0; k < nth; ++k) ctab[k] = std::cos(j * profile.thetas[k]);

  const double dth2 = dth * dth;
  const double degeneracy_gate = 0.1 * d * d;
  for (int i = 0; i < nt; ++i) {
    const double edt = std::exp(d * profile.t[i]);
    double acc = 0.0;
    for (int k = 0; k < nth; ++k) acc += pot.f(edt * profile.at(i, k)) * ctab[k];
    m.I[i] = acc * dth;
    m.g[i] = std::exp((2.0 - d) * profile.t[i]) * m.I[i] / kPi;

    // Stationary-phase rates assume non-degenerate angular critical points;
    // rows failing the curvature gate are flagged for exclusion from fits.
    double min_curv = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nth; ++k) {
      const int km = (k + nth - 1) % nth, kp = (k + 1) % nth;
      const double dm = profile.at(i, k) - profile.at(i, km);
      const double dp = profile.at(i, kp) - profile.at(i, k);
      if (dm * dp <= 0.0) {
        const double curv = std::abs((dp - dm) / dth2);
        min_curv = std::min(min_curv, curv);
      }
    }
    if (!(min_curv > degeneracy_gate)) m.flagged[i] = 1;
  }
  return m;
}

double mode_ode_residual(const ModeSeries& mode, int d) {
  const std::size_t n = mode.t.size();
  if (mode.g.size() != n)
    throw std::invalid_argument("mode_ode_residual: forcing g_j is not attached");
  if (mode.c.size() != n)
    throw std::invalid_argument("mode_ode_residual: coefficient samples missing");
  if (n < 3) throw std::invalid_argument("mode_ode_residual: need at least 3 samples");
  check_uniform(mode.t, "mode_ode_residual");
  const double dt = (mode.t.back() - mode.t.front()) / (static_cast<int>(n) - 1);

  const double kj = static_cast<double>(d) * d - static_cast<double>(mode.j) * mode.j;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!mode.flagged.empty() &&
        (mode.flagged[i - 1] || mode.flagged[i] || mode.flagged[i + 1]))
      continue;
    const double cpp = (mode.c[i + 1] - 2.0 * mode.c[i] + mode.c[i - 1]) / (dt * dt);
    const double cp = (mode.c[i + 1] - mode.c[i - 1]) / (2.0 * dt);
    worst = std::max(worst, std::abs(cpp + 2.0 * d * cp + kj * mode.c[i] + mode.g[i]));
  }
  return worst;
}

DecayFit growth_exponent(const ScalarField& u, int d, double r_a, double r_b,
                         double noise_floor) {
  const PolarGrid& g = *u.grid;
  if (!g.is_disk()) throw std::invalid_argument("growth_exponent expects a disk-mode field");
  if (g.d != d) throw std::invalid_argument("degree mismatch between field and argument");
  const double R = g.R();
  if (!(r_a < r_b) || r_a < R / 20.0 * (1.0 - 1e-9) || r_b > R / 2.0 * (1.0 + 1e-9))
    throw std::invalid_argument(
        "growth_exponent: window must sit inside [R/20, R/2] (the Dirichlet boundary "
        "layer deflates u - phi outside it)");

  const ScalarField phi = harmonic_polynomial(d, u.grid);
  std::vector<double> ts, sup_err;
  double phi_scale = 0.0;
  const int nth = g.nth();
  for (int i = 0; i < g.nr(); ++i) {
    const double r = g.radii[i];
    if (r < r_a || r > r_b) continue;
    double s = 0.0, ps = 0.0;
    for (int k = 0; k < nth; ++k) {
      s = std::max(s, std::abs(u.at(i, k) - phi.at(i, k)));
      ps = std::max(ps, std::abs(phi.at(i, k)));
    }
    ts.push_back(std::log(r));
    sup_err.push_back(s);
    phi_scale = std::max(phi_scale, ps);
  }
  if (ts.empty()) throw std::invalid_argument("growth_exponent: no rings in the window");
  // default floor: a few hundred ulps of the background's own scale, so a
  // field that equals phi to roundoff reads as signal-free
  const double floor = noise_floor > 0.0 ? noise_floor : 1e-13 * phi_scale;
  DecayFit fit = decay_fit(ts, sup_err, ts.front(), ts.back(), floor);
  return fit;
}

}  // namespace polygrow
