#pragma once

#include <functional>
#include <string>
#include <vector>

namespace polygrow {

// Periodic potential F with f = F' and f' = F''. Pure value object with
// closed-form evaluators; osc = max F - min F over one period is cached at
// construction. `kind`/`coefficients` identify the catalog entry for config
// echo and round-tripping.
struct PeriodicPotential {
  double period = 0.0;
  bool even = true;
  std::function<double(double)> F;
  std::function<double(double)> f;
  std::function<double(double)> fprime;
  // Shifted evaluators: F(base + delta), f(base + delta), f'(base + delta)
  // computed by angle addition instead of forming base + delta. Near the
  // sector arc the harmonic background reaches R^d, where rounding base +
  // delta loses the low bits of delta and floors the attainable residual at
  // ~ulp(base); the split form keeps the error at delta's own roundoff.
  // Catalog constructors always populate these; they may be left empty on a
  // hand-built potential, in which case consumers fall back to f(base+delta).
  std::function<double(double, double)> F_shifted;
  std::function<double(double, double)> f_shifted;
  std::function<double(double, double)> fprime_shifted;
  double osc = 0.0;
  std::string kind;
  std::vector<double> coefficients;  // cosine-series a_k, empty otherwise

  bool is_zero() const { return osc == 0.0; }
};

PeriodicPotential make_zero();
PeriodicPotential make_sine_gordon();

// F(u) = sum_k a_k (1 - cos((k+1) u)), period 2*pi. Empty list degenerates to
// the zero potential. osc by dense sampling (4096 points over one period).
PeriodicPotential make_cosine_series(const std::vector<double>& coefficients);

// Catalog lookup used by config parsing; throws std::invalid_argument on an
// unknown kind.
PeriodicPotential make_potential(const std::string& kind,
                                 const std::vector<double>& coefficients = {});

}  // namespace polygrow
