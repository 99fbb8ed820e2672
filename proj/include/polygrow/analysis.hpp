#pragma once

#include <stdexcept>
#include <vector>

#include "polygrow/grid.hpp"
#include "polygrow/potential.hpp"

namespace polygrow {

// v(t, theta) = e^{-d t} u(e^t, theta) on a uniform-in-t lattice: the scaled
// field whose Fourier modes carry the decay laws. Row-major over (i, k) like
// ScalarField.
struct PolarProfile {
  int d = 0;
  std::vector<double> t;       // log radii, uniform spacing
  std::vector<double> thetas;  // disk angles, uniform, periodic
  std::vector<double> values;

  int nt() const { return static_cast<int>(t.size()); }
  int nth() const { return static_cast<int>(thetas.size()); }
  double& at(int i, int k) { return values[static_cast<std::size_t>(i) * thetas.size() + k]; }
  double at(int i, int k) const { return values[static_cast<std::size_t>(i) * thetas.size() + k]; }
};

// One angular mode: c holds the cosine coefficients (1/pi convention, 1/2pi
// for j = 0), I the raw angular integral of f(e^{dt} v) cos(j theta), g the
// forcing e^{(2-d)t} I / pi that enters the mode ODE alongside c. flagged
// marks t samples whose angular phase failed the non-degeneracy check; fits
// must skip them. Vectors other than t may be empty depending on the
// producing operation.
struct ModeSeries {
  int j = 0;
  std::vector<double> t;
  std::vector<double> c;
  std::vector<double> g;
  std::vector<double> I;
  std::vector<unsigned char> flagged;
};

// Least-squares power law in log scale. window is the span of the samples
// actually used, which can be narrower than requested once the floor gate
// removes samples.
struct DecayFit {
  double t_a = 0.0, t_b = 0.0;
  double lambda = 0.0;        // fitted exponent of e^{lambda t}
  double log_constant = 0.0;  // log |value| extrapolated to t = 0
  double residual = 0.0;      // RMS of log deviations over used samples
  double noise_floor = 0.0;
  int samples_used = 0;
};

// A diagnostic sits at or below the discretization floor (or has too few
// samples above it to fit) — a meaningful outcome, not a crash.
class SignalBelowFloor : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scales a disk field into exponential polar coordinates. The radial factor
// divides by the same pow(r, d) the harmonic background is built from, so
// u = phi gives v = cos(d theta) up to one rounding of the quotient. Throws
// if the grading is not geometric (t spacing uniform to 1e-10).
PolarProfile to_polar_profile(const ScalarField& u, int d);

// Cosine coefficients c_j, j = 0..j_max, by plain quadrature at each t. The
// sine coefficients are computed once and must stay below 1e-10 of the
// profile's amplitude (evenness in theta); they are then discarded.
// j_max above Ntheta/2 - 1 aliases and throws.
std::vector<ModeSeries> fourier_modes(const PolarProfile& profile, int j_max);

// max over forbidden j (those not of the form (2k+1) d) and all t of
// |c_j| / max_t |c_d|. The mode list must reach j >= 3d.
double selection_rule_check(const std::vector<ModeSeries>& modes, int d);

// OLS of log|value| against t over [t_a, t_b], using only samples with
// |value| > 10 * noise_floor; fewer than 5 usable samples throws
// SignalBelowFloor.
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& values,
                   double t_a, double t_b, double noise_floor);

// t of the largest |value| within [t_a, t_b] (t_a when the window is empty).
// Decay laws are asymptotic: series that first rise through the window would
// bias a log-linear fit, so fit windows start at the series' peak.
double fit_window_start(const std::vector<double>& t, const std::vector<double>& values,
                        double t_a, double t_b);

// Local maxima of |values|: the envelope samples for fitting oscillatory
// series, whose log has -inf spikes at the zeros.
void abs_envelope(const std::vector<double>& t, const std::vector<double>& values,
                  std::vector<double>& t_peaks, std::vector<double>& peaks);

// Raw integral I_j(t) of f(e^{dt} v) cos(j theta) over the circle (same
// quadrature as fourier_modes) and the mode forcing g_j = e^{(2-d)t} I_j/pi.
// Each t sample is checked for non-degenerate angular critical points
// (|second theta-derivative| > 0.1 d^2 at every critical point); failures are
// flagged for exclusion from fits, not errors.
ModeSeries oscillatory_integral(const PolarProfile& profile, const PeriodicPotential& pot,
                                int j);

// max over interior t of |c_j'' + 2d c_j' + (d^2 - j^2) c_j + g_j| with
// centered differences on the uniform t grid; the local, checkable form of
// the modes' representation formula. Requires g attached; windows touching
// flagged samples are skipped.
double mode_ode_residual(const ModeSeries& mode, int d);

// Fit of log sup_{|z|=r} |u - phi| against log r over rings in [r_a, r_b],
// which must sit inside [R/20, R/2] (outside that the Dirichlet boundary
// layer deflates the error). noise_floor <= 0 selects a roundoff-scale
// default; a field with u = phi to roundoff throws SignalBelowFloor.
DecayFit growth_exponent(const ScalarField& u, int d, double r_a, double r_b,
                         double noise_floor = 0.0);

}  // namespace polygrow
