#pragma once

#include <vector>

#include "polygrow/grid.hpp"
#include "polygrow/potential.hpp"

namespace polygrow {

// Harmonic extension of a circle trace in truncated Fourier form:
//   value(rho, theta) = a0 + sum_j (rho/r)^j (a_j cos j theta + b_j sin j theta)
// Exactly harmonic with exact analytic derivatives of any order.
struct HarmonicExtension {
  double r = 0.0;          // trace radius actually used (grid circle)
  int ring = -1;           // source ring index
  std::vector<double> a;   // cosine coefficients, j = 0..J
  std::vector<double> b;   // sine coefficients, b[0] unused (= 0)

  int J() const { return static_cast<int>(a.size()) - 1; }
  double value(double rho, double theta) const;

  struct Hessian {
    double xx = 0.0, xy = 0.0;  // yy = -xx (harmonic)
  };
  Hessian hessian(double rho, double theta) const;
  // second derivatives of value - phi_offset * Re(z^d): used for the
  // phi^r vs phi comparison where the degree-d term is shifted by 1
  Hessian hessian_minus_monomial(double rho, double theta, int d) const;
};

// DFT of the trace on the grid circle nearest r. J < 0 selects the default
// Ntheta/2 - 1; J > Ntheta/2 - 1 throws (aliasing).
HarmonicExtension harmonic_extension(const ScalarField& disk_field, double r,
                                     int J = -1);

struct Lemma31 {
  double lhs = 0.0;           // integral over B_r of |grad phi^r - grad u|^2
  double rhs_identity = 0.0;  // integral of |grad u|^2 - |grad phi^r|^2
  double bound = 0.0;         // 2 osc(F) pi r^2
};

Lemma31 lemma31_check(const ScalarField& u, const HarmonicExtension& ext,
                      const PeriodicPotential& pot, double r);

// sup over grid nodes with rho <= r/2 of |phi^r - u|
double lemma32_check(const ScalarField& u, const HarmonicExtension& ext, double r);

struct PhiRVsPhi {
  double sup_diff = 0.0;      // sup_{B_{r/2}} |phi^r - phi|
  double hessian_diff = 0.0;  // sup_{B_{r/2}} max-entry |H(phi^r) - H(phi)|
};

PhiRVsPhi phi_r_vs_phi_check(const HarmonicExtension& ext, int d, double r);

}  // namespace polygrow
