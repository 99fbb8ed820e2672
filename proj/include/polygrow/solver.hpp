#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polygrow/grid.hpp"
#include "polygrow/potential.hpp"

namespace polygrow {

struct SolveOptions {
  double newton_tol = 1e-9;  // max-norm of the discrete residual K w + f(u)
  int max_newton_iters = 200;
  bool line_search = true;   // Armijo backtracking on the discrete energy
  bool flow_fallback = true; // semi-implicit gradient flow when Newton stalls
  double flow_step = 1.0;
  bool positivity_projection = true;  // keep iterates in u >= 0 (even F)
  bool allow_uneven = false;          // experimental: accept uneven potentials
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;
  double energy = 0.0;
  bool converged = false;
  double min_value_interior = 0.0;
};

// Thrown when Newton and its fallbacks exhaust their budgets; carries the
// best iterate seen so callers can inspect or resume.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, ScalarField best_field, SolveReport rep)
      : std::runtime_error(what), best(std::move(best_field)), report(rep) {}

  ScalarField best;
  SolveReport report;
};

// Minimizes E(w) = a(w,w)/2 - sum_i W_i F(phi_i + w_i) over fields w that
// vanish on the boundary, where a is the quadratic form of the flux Laplacian
// K under the volume weights W and u = phi + w. Stationarity is the discrete
// system K w + f(u) = 0 on interior nodes, so with a zero potential the
// returned field is phi exactly. Boundary rows of the result carry phi on the
// arc and the innermost ring and exact zeros on the rays. With
// positivity_projection on, the returned interior is kept in u >= 0 whenever
// that is compatible with the residual certificate; at nodes whose value is
// within roundoff of zero a sign flip can be amplified past any tolerance by
// the stencil, and the certificate wins there.
std::pair<ScalarField, SolveReport> solve_sector(const PeriodicPotential& pot,
                                                 const SectorDomain& domain,
                                                 std::shared_ptr<const PolarGrid> grid,
                                                 const SolveOptions& opts,
                                                 const ScalarField* initial_guess = nullptr);

// Value of the functional solve_sector minimizes, evaluated at an arbitrary
// sector field (the quadratic part is taken in u - phi; boundary values are
// read as-is). SolveReport.energy is this number for the returned field.
double discrete_energy(const PeriodicPotential& pot, const ScalarField& u);

/// Odd extension across the nodal rays: every disk value is a sign-flipped
// copy of a principal-sector value, never recomputed, so u(Gz) = -u(z) holds
// node-exact. Requires disk Ntheta = 2d * sector intervals and identical
// radii.
ScalarField extend_by_symmetry(const ScalarField& sector_field, int d,
                               std::shared_ptr<const PolarGrid> disk_grid);

// u0 - phi for the discrete-harmonic field u0 carrying phi's boundary data
// (the zero-potential oracle). Everything in it is discretization error,
// which is what makes it the noise floor for the decay diagnostics.
ScalarField zero_potential_oracle(std::shared_ptr<const PolarGrid> grid);

struct CauchyTable {
  // deltas[m] = sup over the ball of radius radii[0]/2 of the difference
  // between consecutive continuation stages (phi subtracted analytically, the
  // later stage interpolated in t onto the earlier lattice).
  std::vector<double> deltas;
};

struct ContinuationResult {
  std::vector<ScalarField> fields;  // sector solutions, one per radius
  std::vector<SolveReport> reports;
  CauchyTable cauchy;
};

// Thrown when a continuation stage fails to converge; carries the stages
// completed so far alongside the failing solve's best iterate.
class ContinuationFailure : public ConvergenceFailure {
 public:
  ContinuationFailure(const ConvergenceFailure& cause, ContinuationResult done)
      : ConvergenceFailure(cause), partial(std::move(done)) {}

  ContinuationResult partial;
};

// Solves at each radius in turn, warm-starting from the previous stage
// (w interpolated per theta column in t; phi on the fresh annulus). r_min
// scales as r_min_factor * R, so stage lattices are rigid translates in t.
// The default is 2^-10 (the power of two nearest 1e-3): with r_min_factor =
// 2^-K and Nr a multiple of K, consecutive radii at ratio 2 share their
// radial lattice exactly, so stage differences are free of the O(h^2)
// interpolation noise an offset lattice would add where the solution is
// steep.
ContinuationResult continuation(const PeriodicPotential& pot, int d,
                                const std::vector<double>& radii, int Nr,
                                int Ntheta_sector, const SolveOptions& opts,
                                double r_min_factor = 0.0009765625);

}  // namespace polygrow
