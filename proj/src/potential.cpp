#include "polygrow/potential.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polygrow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// cos/sin of m*(b + x) for m = 1, 2, ... built by the angle-addition
// recurrence from the single-angle values. Forming m*(b + x) directly would
// round at ~ulp(m*b), which for b ~ R^d dwarfs the low bits of x.
struct HarmonicPhases {
  double c1, s1, c, s;
  HarmonicPhases(double b, double x) {
    const double cb = std::cos(b), sb = std::sin(b);
    const double cx = std::cos(x), sx = std::sin(x);
    c1 = cb * cx - sb * sx;
    s1 = sb * cx + cb * sx;
    c = c1;
    s = s1;
  }
  void advance() {
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
  }
};
}  // namespace

PeriodicPotential make_zero() {
  PeriodicPotential p;
  p.period = kTwoPi;
  p.even = true;
  p.F = [](double) { return 0.0; };
  p.f = [](double) { return 0.0; };
  p.fprime = [](double) { return 0.0; };
  p.F_shifted = [](double, double) { return 0.0; };
  p.f_shifted = [](double, double) { return 0.0; };
  p.fprime_shifted = [](double, double) { return 0.0; };
  p.osc = 0.0;
  p.kind = "zero";
  return p;
}

PeriodicPotential make_sine_gordon() {
  PeriodicPotential p;
  p.period = kTwoPi;
  p.even = true;
  p.F = [](double u) { return 1.0 - std::cos(u); };
  p.f = [](double u) { return std::sin(u); };
  p.fprime = [](double u) { return std::cos(u); };
  p.F_shifted = [](double b, double x) {
    return 1.0 - (std::cos(b) * std::cos(x) - std::sin(b) * std::sin(x));
  };
  p.f_shifted = [](double b, double x) {
    return std::sin(b) * std::cos(x) + std::cos(b) * std::sin(x);
  };
  p.fprime_shifted = [](double b, double x) {
    return std::cos(b) * std::cos(x) - std::sin(b) * std::sin(x);
  };
  p.osc = 2.0;
  p.kind = "sine_gordon";
  return p;
}

PeriodicPotential make_cosine_series(const std::vector<double>& coefficients) {
  if (coefficients.empty()) return make_zero();
  PeriodicPotential p;
  p.period = kTwoPi;
  p.even = true;
  p.kind = "cosine_series";
  p.coefficients = coefficients;
  const std::vector<double> a = coefficients;
  p.F = [a](double u) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      s += a[k] * (1.0 - std::cos((k + 1) * u));
    return s;
  };
  p.f = [a](double u) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      s += a[k] * (k + 1) * std::sin((k + 1) * u);
    return s;
  };
  p.fprime = [a](double u) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      s += a[k] * (k + 1) * (k + 1) * std::cos((k + 1) * u);
    return s;
  };
  p.F_shifted = [a](double b, double x) {
    double s = 0.0;
    HarmonicPhases ph(b, x);
    for (std::size_t k = 0; k < a.size(); ++k, ph.advance()) s += a[k] * (1.0 - ph.c);
    return s;
  };
  p.f_shifted = [a](double b, double x) {
    double s = 0.0;
    HarmonicPhases ph(b, x);
    for (std::size_t k = 0; k < a.size(); ++k, ph.advance()) s += a[k] * (k + 1) * ph.s;
    return s;
  };
  p.fprime_shifted = [a](double b, double x) {
    double s = 0.0;
    HarmonicPhases ph(b, x);
    for (std::size_t k = 0; k < a.size(); ++k, ph.advance())
      s += a[k] * (k + 1) * (k + 1) * ph.c;
    return s;
  };
  // osc by dense sampling; adequate because osc only enters slack constants.
  const int n = 4096;
  double lo = p.F(0.0), hi = lo;
  for (int i = 1; i <= n; ++i) {
    const double v = p.F(kTwoPi * i / n);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  p.osc = hi - lo;
  return p;
}

PeriodicPotential make_potential(const std::string& kind,
                                 const std::vector<double>& coefficients) {
  if (kind == "zero") return make_zero();
  if (kind == "sine_gordon") return make_sine_gordon();
  if (kind == "cosine_series") return make_cosine_series(coefficients);
  throw std::invalid_argument("unknown potential kind: " + kind);
}

}  // namespace polygrow
