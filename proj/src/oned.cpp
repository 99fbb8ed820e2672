#include "polygrow/oned.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace polygrow {
namespace {

// Gauss 7 / Kronrod 15 pair on [-1, 1] (QUADPACK dqk15 constants)
constexpr double kXgk[8] = {0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
                            0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
                            0.2077849550078985, 0.0};
constexpr double kWgk[8] = {0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
                            0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
                            0.2044329400752989, 0.2094821410847278};
constexpr double kWg[4] = {0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
                           0.4179591836734694};

template <class Fn>
void gk15(const Fn& f, double a, double b, double& kronrod, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = kWgk[7] * fc, resg = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double x = h * kXgk[i];
    const double s = f(c - x) + f(c + x);
    resk += kWgk[i] * s;
    if (i % 2 == 1) resg += kWg[i / 2] * s;
  }
  kronrod = resk * h;
  err = std::abs((resk - resg) * h);
}

// adaptive bisection to relative tolerance; the integrands here are smooth
// and bounded away from singularities, so depth stays shallow
template <class Fn>
double adapt(const Fn& f, double a, double b, double tol_abs, int depth = 0) {
  double k, e;
  gk15(f, a, b, k, e);
  if (e <= tol_abs || depth >= 48) return k;
  const double c = 0.5 * (a + b);
  return adapt(f, a, c, 0.5 * tol_abs, depth + 1) +
         adapt(f, c, b, 0.5 * tol_abs, depth + 1);
}

double located_max_F(const PeriodicPotential& pot) {
  const double T = pot.period;
  double best = pot.F(0.0), at = 0.0;
  const int n = 4096;
  for (int k = 1; k < n; ++k) {
    const double u = T * k / n;
    const double val = pot.F(u);
    if (val > best) {
      best = val;
      at = u;
    }
  }
  // polish the sampled maximum: Newton on f = F' (guarded to the bracket)
  double u = at;
  for (int it = 0; it < 4; ++it) {
    const double fp = pot.fprime(u);
    if (fp == 0.0) break;
    const double step = pot.f(u) / fp;
    if (!std::isfinite(step) || std::abs(step) > T / n) break;
    u -= step;
    best = std::max(best, pot.F(u));
  }
  return best;
}

}  // namespace

double RotatingSolution::value(double s_query) const {
  const double T = potential.period;
  const double m = std::floor(s_query / period);
  double sq = s_query - m * period;
  int lo = 0;
  // knots of the first period are s[0..spp]; locate by binary search
  const int spp = static_cast<int>(tangents.size()) - 1;
  int hi = spp;
  if (sq <= s[0]) {
    lo = 0;
  } else if (sq >= s[spp]) {
    lo = spp - 1;
  } else {
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (s[mid] <= sq ? lo : hi) = mid;
    }
  }
  const double h = s[lo + 1] - s[lo];
  const double x = (sq - s[lo]) / h;
  const double x2 = x * x, x3 = x2 * x;
  const double h00 = 2 * x3 - 3 * x2 + 1, h10 = x3 - 2 * x2 + x;
  const double h01 = -2 * x3 + 3 * x2, h11 = x3 - x2;
  const double val =
      h00 * v[lo] + h * h10 * tangents[lo] + h01 * v[lo + 1] + h * h11 * tangents[lo + 1];
  return val + m * T;
}

RotatingSolution quadrature_solution(const PeriodicPotential& pot, double E, double kappa,
                                     int samples_per_period) {
  if (samples_per_period < 8)
    throw std::invalid_argument("quadrature_solution: need at least 8 samples per period");
  if (!(kappa > 0.0))
    throw std::invalid_argument("quadrature_solution: kappa must be positive");
  if (!(pot.period > 0.0))
    throw std::invalid_argument("quadrature_solution: potential must be periodic");
  const double max_F = located_max_F(pot);
  if (!(E > kappa * max_F + 1e-9))
    throw std::domain_error(
        "quadrature_solution: E <= kappa max F + 1e-9, outside the rotation regime "
        "(librational solutions are out of scope)");

  RotatingSolution sol;
  sol.potential = pot;
  sol.E = E;
  sol.kappa = kappa;

  const double T = pot.period;
  const int spp = samples_per_period;
  const int n = 4 * spp + 1;
  sol.v.resize(n);
  sol.s.resize(n);
  const auto ds_dv = [&](double w) { return 1.0 / std::sqrt(2.0 * (E - kappa * pot.F(w))); };
  // absolute tolerance per step derived from the 1e-12 relative target and
  // the crude whole-period scale T * max integrand
  const double scale = T / std::sqrt(2.0 * (E - kappa * max_F));
  const double tol = 1e-12 * scale / (4 * spp);
  sol.s[0] = 0.0;
  for (int j = 0; j < n; ++j) sol.v[j] = T * j / spp;
  for (int j = 1; j < n; ++j)
    sol.s[j] = sol.s[j - 1] + adapt(ds_dv, sol.v[j - 1], sol.v[j], tol);

  sol.period = sol.s[spp];
  sol.mean_slope = T / sol.period;

  double rmin = 0.0, rmax = 0.0;
  for (int j = 0; j < n; ++j) {
    const double r = sol.v[j] - sol.mean_slope * sol.s[j];
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  sol.offset = 0.5 * (rmax + rmin);
  sol.deviation = 0.5 * (rmax - rmin);

  // Fritsch-Carlson monotone tangents on the first period
  sol.tangents.resize(spp + 1);
  std::vector<double> delta(spp);
  for (int j = 0; j < spp; ++j) delta[j] = (sol.v[j + 1] - sol.v[j]) / (sol.s[j + 1] - sol.s[j]);
  sol.tangents[0] = delta[0];
  sol.tangents[spp] = delta[spp - 1];
  for (int j = 1; j < spp; ++j) sol.tangents[j] = 0.5 * (delta[j - 1] + delta[j]);
  for (int j = 0; j < spp; ++j) {
    if (delta[j] == 0.0) {
      sol.tangents[j] = sol.tangents[j + 1] = 0.0;
      continue;
    }
    const double a = sol.tangents[j] / delta[j], b = sol.tangents[j + 1] / delta[j];
    const double r2 = a * a + b * b;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      sol.tangents[j] = tau * a * delta[j];
      sol.tangents[j + 1] = tau * b * delta[j];
    }
  }
  return sol;
}

double verify_ode(const RotatingSolution& sol) {
  const int n = static_cast<int>(sol.s.size());
  // difference v - mean_slope s instead of v: the three-point formula kills
  // the linear part exactly, and the bounded remainder avoids the eps |v|/h^2
  // cancellation that would otherwise swamp the truncation error
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = sol.v[i] - sol.mean_slope * sol.s[i];
  double worst = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    const double hm = sol.s[i] - sol.s[i - 1];
    const double hp = sol.s[i + 1] - sol.s[i];
    const double vpp =
        2.0 * (q[i - 1] * hp - q[i] * (hm + hp) + q[i + 1] * hm) / (hm * hp * (hm + hp));
    worst = std::max(worst, std::abs(vpp + sol.kappa * sol.potential.f(sol.v[i])));
  }
  return worst;
}

PlanarCheck planar_extension_check(const RotatingSolution& sol,
                                   std::array<double, 2> direction,
                                   std::shared_ptr<const PolarGrid> grid) {
  const PolarGrid& g = *grid;
  if (!g.is_disk())
    throw std::invalid_argument("planar_extension_check expects a disk-mode grid");
  const double elen = std::hypot(direction[0], direction[1]);
  if (std::abs(elen - 1.0) > 1e-12)
    throw std::invalid_argument("planar_extension_check: direction must be unit length");

  const double amag = 1.0 / std::sqrt(sol.kappa);
  const double ax = direction[0] * amag, ay = direction[1] * amag;
  const int nr = g.nr(), nth = g.nth();

  ScalarField u = make_field(grid);
  std::vector<double> sdot(g.size());
  for (int i = 0; i < nr; ++i)
    for (int k = 0; k < nth; ++k) {
      const double x = g.radii[i] * std::cos(g.thetas[k]);
      const double y = g.radii[i] * std::sin(g.thetas[k]);
      const double sd = ax * x + ay * y;
      sdot[g.index(i, k)] = sd;
      u.at(i, k) = sol.value(sd);
    }

  PlanarCheck out;

  const ScalarField lap = laplacian(u);
  for (int i = 1; i + 1 < nr; ++i)
    for (int k = 0; k < nth; ++k)
      out.pde_residual = std::max(
          out.pde_residual, std::abs(lap.at(i, k) + sol.potential.f(u.at(i, k))));

  for (std::size_t c = 0; c < u.values.size(); ++c)
    out.linear_bound =
        std::max(out.linear_bound, std::abs(u.values[c] - sol.mean_slope * sdot[c]));

  // symmetric differences of u along probe directions, evaluated through the
  // interpolant; the step moves a.x by half a knot spacing
  const double knot = sol.period / (static_cast<int>(sol.tangents.size()) - 1);
  const auto probe = [&](double ex, double ey, int i, int k) {
    const double ea = ex * ax + ey * ay;
    const double delta = (ea == 0.0) ? 0.5 * knot * amag : 0.5 * knot / std::abs(ea);
    const double sp = sdot[g.index(i, k)] + delta * ea;
    const double sm = sdot[g.index(i, k)] - delta * ea;
    return (sol.value(sp) - sol.value(sm)) / (2.0 * delta);
  };

  const double fan[3] = {0.0, 0.7853981633974483, -0.7853981633974483};
  out.monotonicity_min = std::numeric_limits<double>::infinity();
  const double cth = direction[0], sth = direction[1];
  for (const double ang : fan) {
    const double ex = std::cos(ang) * cth - std::sin(ang) * sth;
    const double ey = std::sin(ang) * cth + std::cos(ang) * sth;
    for (int i = 0; i < nr; ++i)
      for (int k = 0; k < nth; ++k)
        out.monotonicity_min = std::min(out.monotonicity_min, probe(ex, ey, i, k));
  }
  for (int i = 0; i < nr; ++i)
    for (int k = 0; k < nth; ++k)
      out.orthogonal_sup =
          std::max(out.orthogonal_sup, std::abs(probe(-sth, cth, i, k)));
  return out;
}

}  // namespace polygrow
