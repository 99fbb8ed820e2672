#pragma once

#include <array>
#include <memory>
#include <vector>

#include "polygrow/grid.hpp"
#include "polygrow/potential.hpp"

namespace polygrow {

// Rotating solution of the pendulum reduction: v'' + kappa f(v) = 0 with
// first integral (1/2) v'^2 + kappa F(v) = E, in the regime E > kappa max F
// where v' = sqrt(2(E - kappa F(v))) stays positive and v grows linearly.
// The planar solution it induces is u(x) = v(a.x) with kappa = 1/|a|^2.
//
// Samples are uniform in value (v_j = j T / spp over four value-periods) and
// nonuniform in s, produced by quadrature of s(v) = int dv / v'(v). period is
// the s-advance per value-period T, mean_slope = T / period, and deviation is
// the half-width of v - mean_slope s about its optimal offset; v - mean_slope s
// is period-periodic in s, so the deviation bounds |v(s) - mean_slope s -
// offset| for every s, not just sampled ones.
struct RotatingSolution {
  PeriodicPotential potential;
  double E = 0.0;
  double kappa = 0.0;
  std::vector<double> s;
  std::vector<double> v;
  double period = 0.0;
  double mean_slope = 0.0;
  double deviation = 0.0;
  double offset = 0.0;
  // Fritsch-Carlson tangents on the first period; value() interpolates there
  // and reaches every other s through v(s + period) = v(s) + T exactly.
  std::vector<double> tangents;

  // v at arbitrary s: monotone cubic on the sampled knots plus exact
  // periodicity. Nondecreasing by construction of the tangents.
  double value(double s_query) const;
};

// Samples the rotating solution at the given energy level. samples_per_period
// counts value-space steps per period T (at least 8). Throws
// std::domain_error when E <= kappa max F + 1e-9: below that the first
// integral vanishes somewhere, the quadrature diverges, and the solution is
// librational rather than rotating. max F is located by dense sampling plus a
// few Newton steps on f, so hand-built potentials are handled too.
RotatingSolution quadrature_solution(const PeriodicPotential& pot, double E, double kappa,
                                     int samples_per_period);

// max over interior samples of |v'' + kappa f(v)| with the three-point
// second difference on the nonuniform s-samples. Pure finite-difference
// truncation for a correct solution; refinement in samples_per_period drops
// it at second order.
double verify_ode(const RotatingSolution& sol);

struct PlanarCheck {
  // max over stencil-interior grid nodes of |Delta_h u + f(u)| for the planar
  // field u(x) = v(a.x); grid-Laplacian truncation error for a correct v
  double pde_residual = 0.0;
  // sup over nodes of |u - mean_slope (a.x)|; bounded by |offset| + deviation
  // plus interpolation error
  double linear_bound = 0.0;
  // min over nodes and a fan of directions e with e.a > 0 of the symmetric
  // difference of u along e; nonnegative up to roundoff because the
  // interpolant is monotone
  double monotonicity_min = 0.0;
  // sup over nodes of the same difference along the direction orthogonal to
  // a, for which a.x does not move and u is constant
  double orthogonal_sup = 0.0;
};

// Evaluates the planar extension u(x) = v(a.x), a = direction / sqrt(kappa),
// on a disk grid and reports the checks above. direction must be unit length
// to 1e-12.
PlanarCheck planar_extension_check(const RotatingSolution& sol,
                                   std::array<double, 2> direction,
                                   std::shared_ptr<const PolarGrid> grid);

}  // namespace polygrow
