#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "polygrow/potential.hpp"

namespace polygrow {

// Sector D_R = {0 < r < R, |theta| < pi/(2d)}.
struct SectorDomain {
  int d = 2;
  double R = 1.0;
};

enum class GridMode { sector, disk };

// interior: stencil node; ray: theta on a nodal ray (u = 0 there); arc: outer
// circle r = R (Dirichlet data); origin: innermost ring, standing in for the
// origin vertex of the sector (the grid never carries r = 0 itself).
enum class NodeTag : std::uint8_t { interior, ray, arc, origin };

// Polar grid with geometric radial grading (uniform in t = log r) and uniform
// angles. Sector mode spans [-pi/(2d), pi/(2d)] including both rays (Ntheta
// intervals, Ntheta even); disk mode spans [-pi, pi) periodically (Ntheta
// nodes, Ntheta a multiple of 4d so nodal rays and the rotation by pi/d land
// on nodes). Angles are stored as exact integer multiples of the spacing, so
// a sector grid and a disk grid with matching resolution share bit-identical
// theta values on the principal sector.
struct PolarGrid {
  GridMode mode = GridMode::sector;
  int d = 2;
  std::vector<double> radii;
  std::vector<double> thetas;

  int nr() const { return static_cast<int>(radii.size()); }
  int nth() const { return static_cast<int>(thetas.size()); }
  std::size_t size() const { return radii.size() * thetas.size(); }
  std::size_t index(int i, int k) const { return static_cast<std::size_t>(i) * thetas.size() + k; }
  double dtheta() const { return thetas[1] - thetas[0]; }
  double R() const { return radii.back(); }
  double r_min() const { return radii.front(); }
  bool is_disk() const { return mode == GridMode::disk; }

  NodeTag tag(int i, int k) const;
  // Ring whose radius is closest to r; throws std::out_of_range if r is
  // outside [0, R] beyond roundoff.
  int nearest_ring(double r) const;
};

// Radii r_min * q^i, capped at R (the generic contract form). The factories
// below instead choose q = (R/r_min)^(1/Nr) so both endpoints are exact and
// no cap is needed.
std::vector<double> graded_radii(double r_min, double q, double R);

// Ntheta counts sector intervals (nodes = Ntheta + 1); must be even.
// r_min < 0 selects the default R * 1e-3.
PolarGrid make_sector_grid(int d, double R, int Nr, int Ntheta, double r_min = -1.0);
// Ntheta counts disk nodes over [0, 2pi); must be a multiple of 4d.
PolarGrid make_disk_grid(int d, double R, int Nr, int Ntheta, double r_min = -1.0);

struct ScalarField {
  std::shared_ptr<const PolarGrid> grid;
  std::vector<double> values;

  double& at(int i, int k) { return values[grid->index(i, k)]; }
  double at(int i, int k) const { return values[grid->index(i, k)]; }
  NodeTag tag(int i, int k) const { return grid->tag(i, k); }
};

ScalarField make_field(std::shared_ptr<const PolarGrid> grid, double fill = 0.0);

// phi = r^d cos(d theta), evaluated in closed form at every node. Nodal-ray
// nodes carry exactly 0, and on disk grids the evaluation is folded through
// the principal sector so the antisymmetry under rotation by pi/d is
// node-exact rather than cos-roundoff-exact.
ScalarField harmonic_polynomial(int d, std::shared_ptr<const PolarGrid> grid);

// Coefficients of the Laplacian stencil on ring i (0 < i < Nr), in the
// difference form the field operator applies: cw and ce multiply the inner
// and outer radial neighbour differences, ct each angular one.
struct LaplacianRow {
  double cw, ce, ct;
};
LaplacianRow laplacian_row(const PolarGrid& g, int i);

// Quadrature weight r_i * (h- + h+)/2 * dtheta of ring i (0 < i < Nr); the
// Laplacian is self-adjoint under these weights.
double volume_weight(const PolarGrid& g, int i);

// Flux-form polar Laplacian: three-point nonuniform stencil in r, standard
// three-point in theta (periodic wrap in disk mode). Exact on constants,
// second order on smooth fields, self-adjoint under the volume weights
// r_i * (h- + h+)/2 * dtheta. Defined on nodes with radial neighbours on both
// sides (0 < i < Nr); elsewhere the output is 0.
ScalarField laplacian(const ScalarField& u);

// Quadrature of (|grad u|^2 / 2 + F(u)) r dr dtheta between the circles,
// restricted to the field's angular span. Centered-difference gradients,
// trapezoidal weights in both directions. r_in = 0 means "from the innermost
// ring".
double dirichlet_energy_annulus(const ScalarField& u, const PeriodicPotential& pot,
                                double r_in, double r_out);

struct CircleSup {
  double value = 0.0;
  double radius = 0.0;  // grid radius actually used
  int ring = -1;
};

// max |u| over the grid circle nearest to r (no radial interpolation).
CircleSup sup_on_circle(const ScalarField& u, double r);

// CSV export: header "r,theta,value", row-major over (ring, angle), floats
// with 17 significant digits.
void write_field_csv(const ScalarField& u, std::ostream& os);

// Reads values written by write_field_csv back onto `grid`, checking that the
// node coordinates match to 1e-12 relative.
ScalarField read_field_csv(std::istream& is, std::shared_ptr<const PolarGrid> grid);

}  // namespace polygrow
