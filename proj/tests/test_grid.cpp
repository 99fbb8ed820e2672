#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "polygrow/grid.hpp"
#include "polygrow/potential.hpp"

using namespace polygrow;

namespace {
constexpr double kPi = std::numbers::pi;

std::shared_ptr<const PolarGrid> sector(int d, double R, int Nr, int Nth,
                                        double rmin = -1.0) {
  return std::make_shared<PolarGrid>(make_sector_grid(d, R, Nr, Nth, rmin));
}
std::shared_ptr<const PolarGrid> disk(int d, double R, int Nr, int Nth,
                                      double rmin = -1.0) {
  return std::make_shared<PolarGrid>(make_disk_grid(d, R, Nr, Nth, rmin));
}

double max_interior_abs(const ScalarField& u) {
  const auto& g = *u.grid;
  double m = 0.0;
  for (int i = 1; i < g.nr() - 1; ++i)
    for (int k = 0; k < g.nth(); ++k)
      if (g.tag(i, k) == NodeTag::interior) m = std::max(m, std::abs(u.at(i, k)));
  return m;
}
}  // namespace

TEST_CASE("graded radii") {
  const auto r = graded_radii(1.0, 2.0, 10.0);
  REQUIRE(r.size() == 5);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 2.0);
  CHECK(r[2] == 4.0);
  CHECK(r[3] == 8.0);
  CHECK(r[4] == 10.0);
}

TEST_CASE("grid construction") {
  const auto g = sector(2, 10.0, 64, 32);
  CHECK(g->nr() == 65);
  CHECK(g->nth() == 33);
  CHECK(g->r_min() == doctest::Approx(1e-2).epsilon(1e-12));
  CHECK(g->R() == 10.0);
  CHECK(g->thetas.front() == doctest::Approx(-kPi / 4).epsilon(1e-15));
  CHECK(g->thetas.back() == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK(g->thetas[16] == 0.0);  // symmetry axis on a node
  // constant grading ratio to 1e-12
  const double q = g->radii[1] / g->radii[0];
  for (int i = 1; i + 1 < g->nr(); ++i)
    CHECK(g->radii[i + 1] / g->radii[i] == doctest::Approx(q).epsilon(1e-12));

  CHECK_THROWS(make_sector_grid(2, 10.0, 64, 31));   // odd Ntheta
  CHECK_THROWS(make_disk_grid(2, 10.0, 64, 30));     // not a multiple of 4d
  CHECK_THROWS(make_sector_grid(1, 10.0, 64, 32));   // d < 2
}

TEST_CASE("boundary tags") {
  const auto g = sector(2, 5.0, 16, 8);
  CHECK(g->tag(0, 4) == NodeTag::origin);
  CHECK(g->tag(16, 4) == NodeTag::arc);
  CHECK(g->tag(8, 0) == NodeTag::ray);
  CHECK(g->tag(8, 8) == NodeTag::ray);
  CHECK(g->tag(16, 0) == NodeTag::ray);  // corner: ray wins
  CHECK(g->tag(8, 4) == NodeTag::interior);

  const auto gd = disk(2, 5.0, 16, 16);
  // nodal rays of cos(2 theta): pi/4, 3pi/4, 5pi/4, 7pi/4 -> k = 2, 6, 10, 14
  for (int k : {2, 6, 10, 14}) CHECK(gd->tag(8, k) == NodeTag::ray);
  CHECK(gd->tag(8, 0) == NodeTag::interior);
  CHECK(gd->tag(0, 0) == NodeTag::origin);
  CHECK(gd->tag(16, 3) == NodeTag::arc);
}

TEST_CASE("disk rotation by pi/d is a node bijection") {
  const auto gd = disk(3, 2.0, 8, 24);
  const int nth = gd->nth();
  const int shift = nth / (2 * gd->d);  // angular steps in pi/d
  std::vector<int> seen(nth, 0);
  for (int k = 0; k < nth; ++k) seen[(k + shift) % nth]++;
  for (int k = 0; k < nth; ++k) CHECK(seen[k] == 1);
  int k = 5;
  for (int a = 0; a < 2 * gd->d; ++a) k = (k + shift) % nth;
  CHECK(k == 5);
  // phi anti-symmetry under the rotation
  const auto phi = harmonic_polynomial(3, gd);
  for (int i = 0; i < gd->nr(); ++i)
    for (int kk = 0; kk < nth; ++kk)
      CHECK(phi.at(i, (kk + shift) % nth) ==
            doctest::Approx(-phi.at(i, kk)).epsilon(1e-12).scale(
                std::pow(gd->radii[i], 3)));
}

TEST_CASE("nearest ring") {
  const auto g = sector(2, 10.0, 32, 8);
  for (int i : {0, 7, 31, 32})
    CHECK(g->nearest_ring(g->radii[i]) == i);
  CHECK(g->nearest_ring(0.0) == 0);
  CHECK(g->nearest_ring(10.0) == 32);
  CHECK_THROWS(g->nearest_ring(10.5));
  CHECK_THROWS(g->nearest_ring(-1.0));
}

TEST_CASE("harmonic polynomial node values") {
  const auto g1 = sector(2, 1.0, 16, 8);
  const auto f1 = harmonic_polynomial(2, g1);
  CHECK(f1.at(16, 4) == 1.0);  // r=1, theta=0

  const auto g2 = sector(2, 3.0, 16, 8);
  const auto f2 = harmonic_polynomial(2, g2);
  CHECK(std::abs(f2.at(16, 8)) < 1e-13);  // r=3, theta=pi/4 nodal ray

  const auto g3 = sector(4, 2.0, 16, 8);
  const auto f3 = harmonic_polynomial(4, g3);
  CHECK(f3.at(16, 4) == 16.0);  // 2^4
}

TEST_CASE("laplacian of a constant is exactly zero") {
  for (auto g : {sector(2, 4.0, 24, 12), disk(2, 4.0, 24, 16)}) {
    auto u = make_field(g, 3.25);
    const auto L = laplacian(u);
    for (double v : L.values) CHECK(v == 0.0);
  }
}

TEST_CASE("laplacian of r^2 is 4 to second order") {
  const auto g = sector(2, 2.0, 128, 64);
  auto u = make_field(g);
  for (int i = 0; i < g->nr(); ++i)
    for (int k = 0; k < g->nth(); ++k) u.at(i, k) = g->radii[i] * g->radii[i];
  const auto L = laplacian(u);
  double worst = 0.0;
  for (int i = 1; i < g->nr() - 1; ++i)
    for (int k = 1; k < g->nth() - 1; ++k)
      worst = std::max(worst, std::abs(L.at(i, k) - 4.0));
  CHECK(worst < 1e-2);
}

TEST_CASE("laplacian refinement on a harmonic field") {
  // u = r cos(theta) is harmonic; residual must drop x4 +- 20% under doubling
  auto resid = [](int Nr, int Nth) {
    const auto g = sector(2, 2.0, Nr, Nth);
    auto u = make_field(g);
    for (int i = 0; i < g->nr(); ++i)
      for (int k = 0; k < g->nth(); ++k)
        u.at(i, k) = g->radii[i] * std::cos(g->thetas[k]);
    return max_interior_abs(laplacian(u));
  };
  const double coarse = resid(64, 32), fine = resid(128, 64);
  const double ratio = coarse / fine;
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);
}

TEST_CASE("energy quadrature") {
  const auto zero = make_zero();
  const auto sg = make_sine_gordon();

  const auto g = disk(2, 1.0, 128, 128);
  auto u0 = make_field(g);
  CHECK(dirichlet_energy_annulus(u0, zero, 0.0, 1.0) == 0.0);
  CHECK(dirichlet_energy_annulus(u0, sg, 0.0, 1.0) == 0.0);  // F(0) = 0

  // u = r cos(theta): integral of 1/2 |grad u|^2 = pi/2 over the unit disk
  auto u = make_field(g);
  for (int i = 0; i < g->nr(); ++i)
    for (int k = 0; k < g->nth(); ++k)
      u.at(i, k) = g->radii[i] * std::cos(g->thetas[k]);
  CHECK(dirichlet_energy_annulus(u, zero, 0.0, 1.0) ==
        doctest::Approx(kPi / 2).epsilon(0.01));

  // constants: energy = area * F(c) to 1e-12 relative
  const double c = 1.1;
  auto uc = make_field(g, c);
  const double r0 = g->r_min();
  const double area = kPi * (1.0 - r0 * r0);
  CHECK(dirichlet_energy_annulus(uc, sg, 0.0, 1.0) ==
        doctest::Approx(area * sg.F(c)).epsilon(1e-12));

  const auto gs = sector(3, 2.0, 64, 30);
  auto us = make_field(gs, c);
  const double rs = gs->r_min();
  const double areas = (kPi / 3) * (4.0 - rs * rs) / 2;
  CHECK(dirichlet_energy_annulus(us, sg, 0.0, 2.0) ==
        doctest::Approx(areas * sg.F(c)).epsilon(1e-12));

  CHECK_THROWS(dirichlet_energy_annulus(u0, zero, 0.5, 2.0));  // r_out > R
}

TEST_CASE("sup on circle") {
  const auto g = sector(2, 4.0, 64, 16);
  const auto phi = harmonic_polynomial(2, g);
  const auto s = sup_on_circle(phi, 2.0);
  CHECK(s.value == std::pow(s.radius, 2));  // max at theta = 0 node
  CHECK(std::abs(s.radius - 2.0) / 2.0 < 0.1);

  auto z = make_field(g);
  CHECK(sup_on_circle(z, 1.0).value == 0.0);
  CHECK_THROWS(sup_on_circle(z, 5.0));
}

TEST_CASE("field csv round trip") {
  const auto g = sector(2, 3.0, 12, 6);
  auto u = harmonic_polynomial(2, g);
  u.at(3, 2) = 0.1234567890123456789;  // not representable: exercises %.17g
  std::ostringstream os;
  write_field_csv(u, os);
  std::istringstream is(os.str());
  const auto v = read_field_csv(is, g);
  REQUIRE(v.values.size() == u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i) CHECK(v.values[i] == u.values[i]);

  // wrong grid is rejected
  std::istringstream is2(os.str());
  CHECK_THROWS(read_field_csv(is2, sector(2, 4.0, 12, 6)));
}
