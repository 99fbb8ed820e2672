#include "polygrow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace polygrow {

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> exact_geometric_radii(double r_min, double R, int Nr) {
  if (Nr < 2) throw std::invalid_argument("need at least 2 radial intervals");
  if (!(r_min > 0.0 && r_min < R)) throw std::invalid_argument("r_min must lie in (0, R)");
  const double L = std::log(R / r_min);
  std::vector<double> r(Nr + 1);
  for (int i = 0; i <= Nr; ++i) r[i] = R * std::exp((i - Nr) * L / Nr);
  r.front() = r_min;
  r.back() = R;
  return r;
}
}  // namespace

NodeTag PolarGrid::tag(int i, int k) const {
  if (mode == GridMode::sector) {
    if (k == 0 || k == nth() - 1) return NodeTag::ray;
    if (i == nr() - 1) return NodeTag::arc;
    if (i == 0) return NodeTag::origin;
    return NodeTag::interior;
  }
  // disk: nodal rays theta = (2j+1) pi / (2d) are grid nodes (Ntheta % 4d == 0)
  if (i == nr() - 1) return NodeTag::arc;
  if (i == 0) return NodeTag::origin;
  const int nth4d = nth() / (4 * d);        // nodes per half nodal sector
  if ((k - nth4d) % (2 * nth4d) == 0) return NodeTag::ray;
  return NodeTag::interior;
}

int PolarGrid::nearest_ring(double r) const {
  if (r < -1e-12 || r > radii.back() * (1.0 + 1e-12))
    throw std::out_of_range("radius outside grid range");
  const auto it = std::lower_bound(radii.begin(), radii.end(), r);
  if (it == radii.begin()) return 0;
  if (it == radii.end()) return nr() - 1;
  const int hi = static_cast<int>(it - radii.begin());
  return (r - radii[hi - 1] <= radii[hi] - r) ? hi - 1 : hi;
}

std::vector<double> graded_radii(double r_min, double q, double R) {
  if (!(r_min > 0.0 && r_min < R)) throw std::invalid_argument("r_min must lie in (0, R)");
  if (!(q > 1.0)) throw std::invalid_argument("grading ratio must exceed 1");
  std::vector<double> r{r_min};
  while (r.back() * q < R * (1.0 - 1e-12)) r.push_back(r.back() * q);
  r.push_back(R);
  return r;
}

PolarGrid make_sector_grid(int d, double R, int Nr, int Ntheta, double r_min) {
  if (d < 2) throw std::invalid_argument("degree d must be >= 2");
  if (Ntheta < 4 || Ntheta % 2 != 0)
    throw std::invalid_argument("sector Ntheta must be even and >= 4");
  if (r_min <= 0.0) r_min = R * 1e-3;
  PolarGrid g;
  g.mode = GridMode::sector;
  g.d = d;
  g.radii = exact_geometric_radii(r_min, R, Nr);
  // Every angle is the same integer multiple of dth a matching disk grid would
  // use (2 pi / (2 d Ntheta) rounds to the same double), so sector and disk
  // nodes share bit-identical theta values and the symmetry axis is exactly 0.
  const double dth = kPi / (static_cast<double>(d) * Ntheta);
  g.thetas.resize(Ntheta + 1);
  for (int k = 0; k <= Ntheta; ++k) g.thetas[k] = (k - Ntheta / 2) * dth;
  return g;
}

PolarGrid make_disk_grid(int d, double R, int Nr, int Ntheta, double r_min) {
  if (d < 2) throw std::invalid_argument("degree d must be >= 2");
  if (Ntheta < 4 * d || Ntheta % (4 * d) != 0)
    throw std::invalid_argument("disk Ntheta must be a multiple of 4d");
  if (r_min <= 0.0) r_min = R * 1e-3;
  PolarGrid g;
  g.mode = GridMode::disk;
  g.d = d;
  g.radii = exact_geometric_radii(r_min, R, Nr);
  g.thetas.resize(Ntheta);
  const double dth = 2.0 * kPi / Ntheta;
  for (int k = 0; k < Ntheta; ++k) g.thetas[k] = (k - Ntheta / 2) * dth;
  return g;
}

ScalarField make_field(std::shared_ptr<const PolarGrid> grid, double fill) {
  ScalarField u;
  u.values.assign(grid->size(), fill);
  u.grid = std::move(grid);
  return u;
}

namespace {
int floor_div(int a, int b) {  // b > 0
  const int q = a / b, r = a % b;
  return (r != 0 && r < 0) ? q - 1 : q;
}
}  // namespace

ScalarField harmonic_polynomial(int d, std::shared_ptr<const PolarGrid> grid) {
  ScalarField u = make_field(grid);
  const PolarGrid& g = *u.grid;
  const int nth = g.nth();
  if (!g.is_disk()) {
    for (int i = 0; i < g.nr(); ++i) {
      const double rd = std::pow(g.radii[i], d);
      for (int k = 0; k < nth; ++k)
        // the rays are the zero set of cos(d theta); write those zeros exactly
        u.at(i, k) = (k == 0 || k == nth - 1) ? 0.0 : rd * std::cos(d * g.thetas[k]);
    }
    return u;
  }
  // Disk nodes are evaluated through the fold into the principal sector with
  // the sign of the rotation parity: cos(d theta) changes sign exactly under
  // theta -> theta + pi/d, but floating-point cos does not, and downstream
  // symmetry checks are node-exact.
  const int S = nth / (2 * d);
  std::vector<int> src(nth);
  std::vector<double> sgn(nth);
  for (int k = 0; k < nth; ++k) {
    const int j = k - nth / 2;
    const int m = floor_div(j + S / 2, S);
    const int p = j - m * S;  // principal-sector offset in [-S/2, S/2)
    src[k] = (p == -S / 2) ? -1 : p + nth / 2;  // -1 marks a nodal ray
    sgn[k] = (m & 1) ? -1.0 : 1.0;
  }
  for (int i = 0; i < g.nr(); ++i) {
    const double rd = std::pow(g.radii[i], d);
    for (int k = 0; k < nth; ++k)
      u.at(i, k) = (src[k] < 0) ? 0.0 : sgn[k] * (rd * std::cos(d * g.thetas[src[k]]));
  }
  return u;
}

LaplacianRow laplacian_row(const PolarGrid& g, int i) {
  const double r = g.radii[i];
  const double hm = r - g.radii[i - 1];
  const double hp = g.radii[i + 1] - r;
  const double hbar = 0.5 * (hm + hp);
  const double dth2 = g.dtheta() * g.dtheta();
  return {(r - 0.5 * hm) / (hm * r * hbar), (r + 0.5 * hp) / (hp * r * hbar),
          1.0 / (dth2 * r * r)};
}

double volume_weight(const PolarGrid& g, int i) {
  const double hm = g.radii[i] - g.radii[i - 1];
  const double hp = g.radii[i + 1] - g.radii[i];
  return g.radii[i] * (0.5 * (hm + hp)) * g.dtheta();
}

ScalarField laplacian(const ScalarField& u) {
  const PolarGrid& g = *u.grid;
  const int nr = g.nr(), nth = g.nth();
  if (nr < 3 || nth < 3) throw std::invalid_argument("grid too small for the stencil");
  ScalarField out = make_field(u.grid);
  const bool disk = g.is_disk();
  const int klo = disk ? 0 : 1;
  const int khi = disk ? nth - 1 : nth - 2;
  for (int i = 1; i < nr - 1; ++i) {
    const auto [cw, ce, ct] = laplacian_row(g, i);
    for (int k = klo; k <= khi; ++k) {
      const int km = (k == 0) ? nth - 1 : k - 1;
      const int kp = (k == nth - 1) ? 0 : k + 1;
      const double uc = u.at(i, k);
      // difference form: exactly zero on constant fields
      out.at(i, k) = cw * (u.at(i - 1, k) - uc) + ce * (u.at(i + 1, k) - uc) +
                     ct * ((u.at(i, km) - uc) + (u.at(i, kp) - uc));
    }
  }
  return out;
}

double dirichlet_energy_annulus(const ScalarField& u, const PeriodicPotential& pot,
                                double r_in, double r_out) {
  const PolarGrid& g = *u.grid;
  if (r_in < 0.0 || r_in >= r_out || r_out > g.R() * (1.0 + 1e-12))
    throw std::out_of_range("annulus radii out of range");
  int i0 = 0, i1 = g.nr() - 1;
  while (i0 < g.nr() && g.radii[i0] < r_in * (1.0 - 1e-12)) ++i0;
  while (i1 >= 0 && g.radii[i1] > r_out * (1.0 + 1e-12)) --i1;
  if (i1 - i0 < 1) throw std::out_of_range("annulus contains fewer than two rings");

  const int nth = g.nth();
  const bool disk = g.is_disk();
  const double dth = g.dtheta();
  double total = 0.0;
  for (int i = i0; i <= i1; ++i) {
    const double r = g.radii[i];
    const double wr = (i == i0)   ? 0.5 * (g.radii[i + 1] - g.radii[i])
                      : (i == i1) ? 0.5 * (g.radii[i] - g.radii[i - 1])
                                  : 0.5 * (g.radii[i + 1] - g.radii[i - 1]);
    double ring = 0.0;
    for (int k = 0; k < nth; ++k) {
      // radial gradient: centered inside [i0, i1], one-sided at its ends
      double gr;
      if (i > 0 && i < g.nr() - 1)
        gr = (u.at(i + 1, k) - u.at(i - 1, k)) / (g.radii[i + 1] - g.radii[i - 1]);
      else if (i == 0)
        gr = (u.at(1, k) - u.at(0, k)) / (g.radii[1] - g.radii[0]);
      else
        gr = (u.at(i, k) - u.at(i - 1, k)) / (g.radii[i] - g.radii[i - 1]);
      // angular gradient
      double gt;
      if (disk) {
        const int km = (k == 0) ? nth - 1 : k - 1;
        const int kp = (k == nth - 1) ? 0 : k + 1;
        gt = (u.at(i, kp) - u.at(i, km)) / (2.0 * dth);
      } else if (k == 0) {
        gt = (u.at(i, 1) - u.at(i, 0)) / dth;
      } else if (k == nth - 1) {
        gt = (u.at(i, k) - u.at(i, k - 1)) / dth;
      } else {
        gt = (u.at(i, k + 1) - u.at(i, k - 1)) / (2.0 * dth);
      }
      const double wt = (disk || (k > 0 && k < nth - 1)) ? 1.0 : 0.5;
      ring += wt * (0.5 * (gr * gr + gt * gt / (r * r)) + pot.F(u.at(i, k)));
    }
    total += ring * r * wr * dth;
  }
  return total;
}

CircleSup sup_on_circle(const ScalarField& u, double r) {
  const PolarGrid& g = *u.grid;
  CircleSup s;
  s.ring = g.nearest_ring(r);
  s.radius = g.radii[s.ring];
  for (int k = 0; k < g.nth(); ++k) s.value = std::max(s.value, std::abs(u.at(s.ring, k)));
  return s;
}

void write_field_csv(const ScalarField& u, std::ostream& os) {
  const PolarGrid& g = *u.grid;
  os << "r,theta,value\n";
  char buf[96];
  for (int i = 0; i < g.nr(); ++i)
    for (int k = 0; k < g.nth(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.radii[i], g.thetas[k],
                    u.at(i, k));
      os << buf;
    }
}

ScalarField read_field_csv(std::istream& is, std::shared_ptr<const PolarGrid> grid) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("r,theta,value", 0) != 0)
    throw std::runtime_error("bad field CSV header");
  ScalarField u = make_field(grid);
  const PolarGrid& g = *u.grid;
  for (int i = 0; i < g.nr(); ++i)
    for (int k = 0; k < g.nth(); ++k) {
      if (!std::getline(is, line)) throw std::runtime_error("truncated field CSV");
      double r, th, v;
      if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &r, &th, &v) != 3)
        throw std::runtime_error("bad field CSV row: " + line);
      const double rs = std::max(std::abs(r), 1e-300);
      if (std::abs(r - g.radii[i]) > 1e-12 * rs || std::abs(th - g.thetas[k]) > 1e-12)
        throw std::runtime_error("field CSV does not match the grid");
      u.at(i, k) = v;
    }
  return u;
}

}  // namespace polygrow
