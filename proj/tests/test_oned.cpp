#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "polygrow/grid.hpp"
#include "polygrow/oned.hpp"

using namespace polygrow;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// canonical rotating sine-Gordon solution, shared across cases
const RotatingSolution& rotating_sg() {
  static const RotatingSolution sol =
      quadrature_solution(make_sine_gordon(), 2.0, 0.5, 10000);
  return sol;
}

std::shared_ptr<PolarGrid> disk(int nr, int nth) {
  return std::make_shared<PolarGrid>(make_disk_grid(2, 10.0, nr, nth));
}

// max over consecutive sample pairs of the first-integral defect
// |(1/2)(dv/ds)^2 - (E - kappa F(v))| with F evaluated at the midpoint
double first_integral_defect(const RotatingSolution& sol) {
  double worst = 0.0;
  for (std::size_t j = 0; j + 1 < sol.s.size(); ++j) {
    const double vp = (sol.v[j + 1] - sol.v[j]) / (sol.s[j + 1] - sol.s[j]);
    const double vm = 0.5 * (sol.v[j] + sol.v[j + 1]);
    worst = std::max(worst, std::abs(0.5 * vp * vp -
                                     (sol.E - sol.kappa * sol.potential.F(vm))));
  }
  return worst;
}
}  // namespace

TEST_CASE("zero potential rotates along the exact line") {
  const auto sol = quadrature_solution(make_zero(), 0.5, 1.0, 100);
  // v' = sqrt(2E) = 1, so the solution is the identity line
  CHECK(sol.mean_slope == 1.0);
  CHECK(sol.period == kTwoPi);
  CHECK(sol.deviation == 0.0);
  CHECK(sol.offset == 0.0);
  CHECK(verify_ode(sol) == 0.0);
  CHECK(static_cast<int>(sol.s.size()) == 4 * 100 + 1);
  for (double s : {0.3, 2.0, 7.5, 20.0})
    CHECK(std::abs(sol.value(s) - s) <= 1e-12);
}

TEST_CASE("sine-Gordon rotating solution matches the quadrature oracle") {
  const auto& sol = rotating_sg();
  // mean slope and period: 2*pi / integral_0^{2pi} dv / sqrt(2(2 - (1-cos v)/2)),
  // evaluated with an independent 40-digit quadrature
  CHECK(sol.mean_slope == doctest::Approx(1.694426169587958173).epsilon(1e-12));
  CHECK(sol.period == doctest::Approx(3.708149354602743837).epsilon(1e-12));
  CHECK(sol.deviation == doctest::Approx(0.17258761998099459).epsilon(1e-8));
  CHECK(std::abs(sol.offset) <= 1e-10);
  CHECK(sol.deviation < kPi);  // within half a period of the line
  CHECK(first_integral_defect(sol) <= 1e-6);
  for (std::size_t j = 0; j + 1 < sol.v.size(); ++j)
    REQUIRE(sol.v[j] < sol.v[j + 1]);
}

TEST_CASE("ode residual shrinks at second order and flags corruption") {
  auto sg = make_sine_gordon();
  CHECK(verify_ode(rotating_sg()) <= 1e-6);

  const double r250 = verify_ode(quadrature_solution(sg, 2.0, 0.5, 250));
  const double r500 = verify_ode(quadrature_solution(sg, 2.0, 0.5, 500));
  const double r1000 = verify_ode(quadrature_solution(sg, 2.0, 0.5, 1000));
  CHECK(r250 / r500 == doctest::Approx(4.0).epsilon(0.13));
  CHECK(r500 / r1000 == doctest::Approx(4.0).epsilon(0.13));

  auto bad = quadrature_solution(sg, 2.0, 0.5, 1000);
  bad.v[bad.v.size() / 2] += 1e-3;
  CHECK(verify_ode(bad) > 1e-2);
}

TEST_CASE("interpolant is periodic and consistent across refinement") {
  const auto& sol = rotating_sg();
  const int spp = 10000;
  double value_gap = 0.0, shift_gap = 0.0;
  for (std::size_t j = 0; j + spp < sol.s.size(); ++j) {
    value_gap = std::max(
        value_gap, std::abs(sol.value(sol.s[j] + sol.period) - sol.v[j] - kTwoPi));
    shift_gap = std::max(shift_gap,
                         std::abs(sol.s[j + spp] - sol.s[j] - sol.period));
  }
  CHECK(value_gap <= 1e-10);
  CHECK(shift_gap <= 1e-10);

  const auto coarse = quadrature_solution(make_sine_gordon(), 2.0, 0.5, 2000);
  double cross = 0.0;
  for (std::size_t j = 0; j < sol.s.size(); ++j)
    cross = std::max(cross, std::abs(coarse.value(sol.s[j]) - sol.v[j]));
  CHECK(cross <= 1e-9);
}

TEST_CASE("mean slope grows with energy and approaches the free limit") {
  auto sg = make_sine_gordon();
  double prev = 0.0;
  for (double E : {1.5, 2.0, 2.5, 3.0, 4.0, 6.0}) {
    const double slope = quadrature_solution(sg, E, 0.5, 400).mean_slope;
    CHECK(slope > prev);
    prev = slope;
  }
  // potential negligible at large E: slope -> sqrt(2E), deviation -> 0
  const auto fast = quadrature_solution(sg, 1000.0, 1.0, 400);
  CHECK(std::abs(fast.mean_slope / std::sqrt(2000.0) - 1.0) <= 1e-2);
  CHECK(fast.deviation <= 1e-3);
}

TEST_CASE("catalog potentials stay within the half-period envelope") {
  // v' = sqrt(1.4) is inexact, so the line is only reproduced to roundoff
  const auto z = quadrature_solution(make_zero(), 0.7, 1.0, 500);
  CHECK(z.deviation <= 1e-12);
  const double devs[] = {
      quadrature_solution(make_sine_gordon(), 2.0, 0.5, 500).deviation,
      quadrature_solution(make_sine_gordon(), 3.0, 1.0, 500).deviation,
      quadrature_solution(make_cosine_series({0.7, 0.2}), 2.2, 1.0, 500).deviation,
  };
  for (double dev : devs) {
    CHECK(dev > 0.0);
    CHECK(dev < kPi);
  }
  CHECK(devs[1] == doctest::Approx(0.271901).epsilon(1e-4));
}

TEST_CASE("planar extension solves the equation and is monotone along the axis") {
  const auto gc = disk(64, 64);
  const auto gf = disk(128, 128);

  // zero potential: u(x) = a.x is linear, harmonic, and exactly monotone
  const auto line = quadrature_solution(make_zero(), 0.5, 1.0, 100);
  const auto zc = planar_extension_check(line, {1.0, 0.0}, gc);
  const auto zf = planar_extension_check(line, {1.0, 0.0}, gf);
  CHECK(zc.pde_residual <= 0.1);
  CHECK(zf.pde_residual <= 0.5 * zc.pde_residual);
  CHECK(zc.linear_bound <= 1e-12);
  CHECK(zc.monotonicity_min == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  CHECK(zc.orthogonal_sup == 0.0);

  const auto& sol = rotating_sg();
  const auto pc = planar_extension_check(sol, {1.0, 0.0}, gc);
  const auto pf = planar_extension_check(sol, {1.0, 0.0}, gf);
  CHECK(pc.pde_residual <= 0.5);
  CHECK(pf.pde_residual <= 0.6 * pc.pde_residual);
  CHECK(pc.linear_bound <= sol.deviation + std::abs(sol.offset) + 1e-9);
  CHECK(pc.linear_bound >= 0.9 * sol.deviation);
  // fan minimum sits at the pi/4 probes: v'_min * |a| cos(pi/4) = sqrt(2)
  CHECK(pc.monotonicity_min >= 1.0);
  CHECK(pc.monotonicity_min == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  CHECK(pc.orthogonal_sup == 0.0);

  const auto pd = planar_extension_check(sol, {0.6, 0.8}, gc);
  CHECK(pd.monotonicity_min == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  CHECK(pd.orthogonal_sup <= 1e-12);
}

TEST_CASE("rejects non-rotating and malformed inputs") {
  auto sg = make_sine_gordon();
  // E = kappa * max F is the separatrix: the quadrature diverges there
  CHECK_THROWS_AS(quadrature_solution(sg, 2.0, 1.0, 100), std::domain_error);
  CHECK_THROWS_AS(quadrature_solution(sg, 1.0, 1.0, 100), std::domain_error);
  CHECK_THROWS_AS(quadrature_solution(sg, 2.0, 0.5, 7), std::invalid_argument);
  CHECK_THROWS_AS(quadrature_solution(sg, 2.0, 0.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(quadrature_solution(sg, 2.0, -1.0, 100), std::invalid_argument);

  const auto& sol = rotating_sg();
  CHECK_THROWS_AS(planar_extension_check(sol, {0.6, 0.7}, disk(32, 32)),
                  std::invalid_argument);
  auto sector = std::make_shared<PolarGrid>(make_sector_grid(2, 10.0, 32, 32));
  CHECK_THROWS_AS(planar_extension_check(sol, {1.0, 0.0}, sector),
                  std::invalid_argument);
}
