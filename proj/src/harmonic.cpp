#include "polygrow/harmonic.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace polygrow {

namespace {

// trapezoid quadrature of |grad_h w|^2 r dr dtheta over rings [0, i1] of a
// disk grid; same stencils as the energy quadrature so Green-identity
// residuals stay pure discretization error
double grad2_disk(const ScalarField& w, int i1) {
  const PolarGrid& g = *w.grid;
  const int nth = g.nth();
  const double dth = g.dtheta();
  double total = 0.0;
  for (int i = 0; i <= i1; ++i) {
    const double r = g.radii[i];
    const double wr = (i == 0)    ? 0.5 * (g.radii[1] - g.radii[0])
                      : (i == i1) ? 0.5 * (g.radii[i] - g.radii[i - 1])
                                  : 0.5 * (g.radii[i + 1] - g.radii[i - 1]);
    double ring = 0.0;
    for (int k = 0; k < nth; ++k) {
      double gr;
      if (i == 0)
        gr = (w.at(1, k) - w.at(0, k)) / (g.radii[1] - g.radii[0]);
      else if (i == i1)
        gr = (w.at(i, k) - w.at(i - 1, k)) / (g.radii[i] - g.radii[i - 1]);
      else
        gr = (w.at(i + 1, k) - w.at(i - 1, k)) / (g.radii[i + 1] - g.radii[i - 1]);
      const int km = (k == 0) ? nth - 1 : k - 1;
      const int kp = (k == nth - 1) ? 0 : k + 1;
      const double gt = (w.at(i, kp) - w.at(i, km)) / (2.0 * dth);
      ring += gr * gr + gt * gt / (r * r);
    }
    total += ring * r * wr * dth;
  }
  return total;
}

ScalarField sample_extension(const HarmonicExtension& ext,
                             std::shared_ptr<const PolarGrid> grid, int i1) {
  ScalarField v = make_field(grid);
  const PolarGrid& g = *grid;
  for (int i = 0; i <= i1; ++i)
    for (int k = 0; k < g.nth(); ++k) v.at(i, k) = ext.value(g.radii[i], g.thetas[k]);
  return v;
}

}  // namespace

double HarmonicExtension::value(double rho, double theta) const {
  // Chebyshev recurrences for cos/sin(j theta); incremental powers of rho/r
  const double c1 = std::cos(theta), s1 = std::sin(theta);
  double cjm = 1.0, cj = c1;  // cos((j-1) theta), cos(j theta)
  double sjm = 0.0, sj = s1;
  const double x = rho / r;
  double p = x;
  double acc = a[0];
  for (int j = 1; j <= J(); ++j) {
    acc += p * (a[j] * cj + b[j] * sj);
    const double cn = 2.0 * c1 * cj - cjm;
    const double sn = 2.0 * c1 * sj - sjm;
    cjm = cj; cj = cn;
    sjm = sj; sj = sn;
    p *= x;
  }
  return acc;
}

HarmonicExtension::Hessian HarmonicExtension::hessian_minus_monomial(
    double rho, double theta, int d) const {
  // terms are Re(C_j z^j) with C_j = (a_j - i b_j)/r^j; second derivatives
  //   u_xx = Re(C j (j-1) z^{j-2}), u_xy = -Im(...), u_yy = -u_xx
  const std::complex<double> z = std::polar(rho, theta);
  std::complex<double> h = 0.0;
  std::complex<double> zp = 1.0;  // z^{j-2} for j = 2
  double rj = r * r;
  for (int j = 2; j <= J(); ++j) {
    std::complex<double> C(a[j] / rj, -b[j] / rj);
    if (j == d) C -= 1.0;  // subtract the phi = Re(z^d) term (C = 1/r^d * r^d)
    h += C * (static_cast<double>(j) * (j - 1)) * zp;
    zp *= z;
    rj *= r;
  }
  Hessian out;
  out.xx = h.real();
  out.xy = -h.imag();
  return out;
}

HarmonicExtension::Hessian HarmonicExtension::hessian(double rho, double theta) const {
  return hessian_minus_monomial(rho, theta, -1);
}

HarmonicExtension harmonic_extension(const ScalarField& disk_field, double r, int J) {
  const PolarGrid& g = *disk_field.grid;
  if (!g.is_disk()) throw std::invalid_argument("extension needs a disk-mode field");
  const int N = g.nth();
  if (J < 0) J = N / 2 - 1;
  if (J > N / 2 - 1)
    throw std::invalid_argument("mode count exceeds the angular resolution");
  HarmonicExtension ext;
  ext.ring = g.nearest_ring(r);
  ext.r = g.radii[ext.ring];
  ext.a.assign(J + 1, 0.0);
  ext.b.assign(J + 1, 0.0);
  for (int j = 0; j <= J; ++j) {
    double ca = 0.0, cb = 0.0;
    for (int k = 0; k < N; ++k) {
      const double v = disk_field.at(ext.ring, k);
      ca += v * std::cos(j * g.thetas[k]);
      cb += v * std::sin(j * g.thetas[k]);
    }
    ext.a[j] = ca * (j == 0 ? 1.0 : 2.0) / N;
    ext.b[j] = (j == 0) ? 0.0 : cb * 2.0 / N;
  }
  return ext;
}

Lemma31 lemma31_check(const ScalarField& u, const HarmonicExtension& ext,
                      const PeriodicPotential& pot, double r) {
  const PolarGrid& g = *u.grid;
  if (!g.is_disk()) throw std::invalid_argument("lemma checks need a disk-mode field");
  const int i1 = g.nearest_ring(r);
  if (i1 < 1) throw std::out_of_range("radius below the grid range");
  const ScalarField v = sample_extension(ext, u.grid, i1);
  ScalarField diff = make_field(u.grid);
  for (int i = 0; i <= i1; ++i)
    for (int k = 0; k < g.nth(); ++k) diff.at(i, k) = v.at(i, k) - u.at(i, k);
  Lemma31 out;
  out.lhs = grad2_disk(diff, i1);
  out.rhs_identity = grad2_disk(u, i1) - grad2_disk(v, i1);
  const double rr = g.radii[i1];
  out.bound = 2.0 * pot.osc * std::numbers::pi * rr * rr;
  return out;
}

double lemma32_check(const ScalarField& u, const HarmonicExtension& ext, double r) {
  const PolarGrid& g = *u.grid;
  const int ihalf = g.nearest_ring(r / 2);
  double sup = 0.0;
  for (int i = 0; i <= ihalf; ++i)
    for (int k = 0; k < g.nth(); ++k)
      sup = std::max(sup,
                     std::abs(ext.value(g.radii[i], g.thetas[k]) - u.at(i, k)));
  return sup;
}

PhiRVsPhi phi_r_vs_phi_check(const HarmonicExtension& ext, int d, double r) {
  // fixed polar sampling of B_{r/2}: dense enough for the smooth truncated
  // series ((rho/r)^j <= 2^-j damps high modes), deterministic by order
  constexpr int kRings = 64, kAngles = 256;
  PhiRVsPhi out;
  for (int i = 1; i <= kRings; ++i) {
    const double rho = (r / 2) * i / kRings;
    const double rd = std::pow(rho, d);
    for (int k = 0; k < kAngles; ++k) {
      const double th = 2.0 * std::numbers::pi * k / kAngles;
      const double phi = rd * std::cos(d * th);
      out.sup_diff = std::max(out.sup_diff, std::abs(ext.value(rho, th) - phi));
      const auto h = ext.hessian_minus_monomial(rho, th, d);
      out.hessian_diff =
          std::max({out.hessian_diff, std::abs(h.xx), std::abs(h.xy)});
    }
  }
  return out;
}

}  // namespace polygrow
