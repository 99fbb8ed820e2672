#include "polygrow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace polygrow {
namespace {

// All vectors use the full grid layout; w-type vectors keep boundary entries
// at zero so the stencil can read them unconditionally.
struct SectorSystem {
  std::shared_ptr<const PolarGrid> grid;
  const PeriodicPotential* pot = nullptr;
  int nr = 0, nth = 0;
  std::vector<LaplacianRow> row;  // valid on rings 1..nr-2
  std::vector<double> W;          // volume weights, valid on rings 1..nr-2
  std::vector<double> phi;        // background field, exact zeros on the rays
  // Pointwise nonlinearity at phi + w. Shifted evaluators keep the roundoff
  // at w's own scale even where phi ~ R^d; forming phi + w there would floor
  // the attainable residual at ~ulp(phi).
  std::function<double(double, double)> F_at, f_at, fp_at;
};

std::function<double(double, double)> shifted_or_direct(
    const std::function<double(double, double)>& shifted,
    std::function<double(double)> direct) {
  if (shifted) return shifted;
  return [direct = std::move(direct)](double b, double x) { return direct(b + x); };
}

SectorSystem make_system(const PeriodicPotential& pot, std::shared_ptr<const PolarGrid> grid) {
  SectorSystem s;
  s.grid = grid;
  s.pot = &pot;
  s.nr = grid->nr();
  s.nth = grid->nth();
  s.row.resize(s.nr);
  s.W.assign(s.nr, 0.0);
  for (int i = 1; i < s.nr - 1; ++i) {
    s.row[i] = laplacian_row(*grid, i);
    s.W[i] = volume_weight(*grid, i);
  }
  s.phi = harmonic_polynomial(grid->d, grid).values;
  s.F_at = shifted_or_direct(pot.F_shifted, pot.F);
  s.f_at = shifted_or_direct(pot.f_shifted, pot.f);
  s.fp_at = shifted_or_direct(pot.fprime_shifted, pot.fprime);
  return s;
}

// out = K x on interior nodes (same arithmetic as the field-level laplacian),
// zero on boundary rows.
void apply_K(const SectorSystem& s, const std::vector<double>& x, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  const int nth = s.nth;
  for (int i = 1; i < s.nr - 1; ++i) {
    const auto [cw, ce, ct] = s.row[i];
    const std::size_t base = static_cast<std::size_t>(i) * nth;
    for (int k = 1; k < nth - 1; ++k) {
      const std::size_t c = base + k;
      const double uc = x[c];
      out[c] = cw * (x[c - nth] - uc) + ce * (x[c + nth] - uc) +
               ct * ((x[c - 1] - uc) + (x[c + 1] - uc));
    }
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) acc += a[c] * b[c];
  return acc;
}

// Fills res = K w + f(phi + w) on interior nodes; returns its max norm.
double residual(const SectorSystem& s, const std::vector<double>& w,
                std::vector<double>& Kw, std::vector<double>& res) {
  apply_K(s, w, Kw);
  std::fill(res.begin(), res.end(), 0.0);
  double rn = 0.0;
  const int nth = s.nth;
  for (int i = 1; i < s.nr - 1; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * nth;
    for (int k = 1; k < nth - 1; ++k) {
      const std::size_t c = base + k;
      res[c] = Kw[c] + s.f_at(s.phi[c], w[c]);
      rn = std::max(rn, std::abs(res[c]));
    }
  }
  return rn;
}

// E(w) = a(w,w)/2 - sum W F(phi + w); the quadratic part is evaluated as
// -<w, W K w>/2, which equals the edge form when w vanishes on the boundary.
double energy_of(const SectorSystem& s, const std::vector<double>& w,
                 std::vector<double>& scratch) {
  apply_K(s, w, scratch);
  double quad = 0.0, potl = 0.0;
  const int nth = s.nth;
  for (int i = 1; i < s.nr - 1; ++i) {
    const double Wi = s.W[i];
    const std::size_t base = static_cast<std::size_t>(i) * nth;
    for (int k = 1; k < nth - 1; ++k) {
      const std::size_t c = base + k;
      quad += Wi * scratch[c] * w[c];
      potl += Wi * s.F_at(s.phi[c], w[c]);
    }
  }
  return -0.5 * quad - potl;
}

struct CgScratch {
  std::vector<double> r, z, p, Hp;
  explicit CgScratch(std::size_t n) : r(n), z(n), p(n), Hp(n) {}
};

// Preconditioned CG on H x = b from x = 0. In Steihaug mode a direction of
// nonpositive curvature stops the iteration (falling back to b itself when it
// is the first one); otherwise curvature trouble just terminates early. An
// optional `certified` predicate is polled every 64 iterations with the
// current x; returning true stops the solve. The recursion residual only
// tracks the l2 norm, so callers needing a max-norm guarantee certify against
// the true residual themselves.
template <typename Apply>
void pcg(Apply&& H, const std::vector<double>& b, const std::vector<double>& M,
         std::vector<double>& x, double tol_abs, int max_iters, bool steihaug,
         CgScratch& S,
         const std::function<bool(const std::vector<double>&)>& certified = {}) {
  const std::size_t n = b.size();
  std::fill(x.begin(), x.end(), 0.0);
  S.r = b;
  for (std::size_t c = 0; c < n; ++c) S.z[c] = S.r[c] / M[c];
  S.p = S.z;
  double rz = dot(S.r, S.z);
  for (int it = 0; it < max_iters; ++it) {
    H(S.p, S.Hp);
    const double pHp = dot(S.p, S.Hp);
    if (pHp <= 0.0) {
      if (steihaug && it == 0) x = b;
      return;
    }
    const double alpha = rz / pHp;
    for (std::size_t c = 0; c < n; ++c) x[c] += alpha * S.p[c];
    for (std::size_t c = 0; c < n; ++c) S.r[c] -= alpha * S.Hp[c];
    if (std::sqrt(dot(S.r, S.r)) <= tol_abs) return;
    if (certified && (it & 63) == 63 && certified(x)) return;
    for (std::size_t c = 0; c < n; ++c) S.z[c] = S.r[c] / M[c];
    const double rz_new = dot(S.r, S.z);
    const double beta = rz_new / rz;
    for (std::size_t c = 0; c < n; ++c) S.p[c] = S.z[c] + beta * S.p[c];
    rz = rz_new;
  }
}

class SectorSolver {
 public:
  SectorSolver(const PeriodicPotential& pot, std::shared_ptr<const PolarGrid> grid,
               const SolveOptions& opts)
      : sys_(make_system(pot, grid)),
        opts_(opts),
        n_(grid->size()),
        w_(n_, 0.0),
        Kw_(n_),
        res_(n_),
        g_(n_),
        fp_(n_),
        hdiag_(n_, 1.0),
        dir_(n_),
        trial_(n_),
        scratch_(n_),
        cg_(n_) {}

  void set_guess(const std::vector<double>& guess_values) {
    // interior part only; boundary rows of w stay zero
    const int nth = sys_.nth;
    for (int i = 1; i < sys_.nr - 1; ++i)
      for (int k = 1; k < nth - 1; ++k) {
        const std::size_t c = static_cast<std::size_t>(i) * nth + k;
        w_[c] = guess_values[c] - sys_.phi[c];
      }
    project();
  }

  std::pair<ScalarField, SolveReport> run() {
    const double tol = opts_.newton_tol;
    const double polish_enter = std::max(tol, 1e-3);
    refresh();

    // Phase 1: globalized Newton (Steihaug trust direction + Armijo on the
    // energy) until the residual is small enough for the quadratic basin, or
    // until it stalls. Stalling here is not failure: once the residual hides
    // on low-volume-weight rings the energy gradient goes numerically blind,
    // and the residual-driven polish phase is the right tool.
    const bool trace = std::getenv("POLYGROW_TRACE") != nullptr;
    int stall = 0;
    while (rn_ > polish_enter && iters_ < opts_.max_newton_iters && stall < 5) {
      const double rn_prev = rn_;
      ++iters_;
      prepare_newton();
      const double g2 = std::sqrt(dot(g_, g_));
      const double cg_tol = std::min(0.5, std::sqrt(g2)) * g2;
      pcg([this](const std::vector<double>& v, std::vector<double>& out) { hess(v, out); },
          b_from_g(), hdiag_, dir_, cg_tol, 400, true, cg_);
      double gd = dot(g_, dir_);
      if (gd >= 0.0) {  // safeguard: fall back to steepest descent
        for (std::size_t c = 0; c < n_; ++c) dir_[c] = -g_[c];
        gd = -g2 * g2;
      }
      if (trace)
        std::fprintf(stderr, "[p1 %3d] rn=%.3e g2=%.3e gd=%.3e E=%.10e\n", iters_, rn_,
                     g2, gd, energy_of(sys_, w_, scratch_));
      if (opts_.line_search) {
        if (!armijo(gd)) {
          if (!try_flow()) break;
          refresh();
          continue;
        }
      } else {
        for (std::size_t c = 0; c < n_; ++c) w_[c] += dir_[c];
      }
      project();
      refresh();
      stall = rn_ > 0.99 * rn_prev ? stall + 1 : 0;
    }

    // Phase 2: polish with tight CG, accepting on residual decrease (the
    // energy is flat to roundoff here, so Armijo loses its meaning).
    steer_ = false;
    for (int p2 = 0; p2 < 60 && rn_ > tol; ++p2) {
      ++iters_;
      prepare_newton();
      pcg([this](const std::vector<double>& v, std::vector<double>& out) { hess(v, out); },
          b_from_g(), hdiag_, dir_, 1e-12 * std::sqrt(dot(g_, g_)), 5000, true, cg_);
      bool accepted = false;
      double step = 1.0;
      for (int h = 0; h < 20; ++h, step *= 0.5) {
        for (std::size_t c = 0; c < n_; ++c) trial_[c] = w_[c] + step * dir_[c];
        const double rn_t = residual(sys_, trial_, Kw_, scratch_);
        if (rn_t < rn_) {
          w_.swap(trial_);
          accepted = true;
          break;
        }
      }
      if (trace) {
        std::size_t cmax = 0;
        for (std::size_t c = 0; c < n_; ++c)
          if (std::abs(res_[c]) > std::abs(res_[cmax])) cmax = c;
        std::fprintf(stderr, "[p2 %3d] rn=%.3e acc=%d step=%.3g at ring %zu (r=%.3g) k=%zu\n",
                     p2, rn_, accepted ? 1 : 0, step,
                     cmax / sys_.nth, sys_.grid->radii[cmax / sys_.nth], cmax % sys_.nth);
      }
      if (!accepted) {
        if (!try_flow()) break;
      }
      refresh();
    }

    // The returned field should satisfy the sign guarantee and the residual
    // certificate at once, and the final projection is a no-op whenever the
    // solution is genuinely positive. Under extreme radial grading, though,
    // inner rings can hold nodes where the discrete solution sits within
    // roundoff of zero, and there the stencil amplifies a sign flip past any
    // tolerance; the certificate wins, so a projection that breaks it is
    // rolled back.
    if (rn_ <= tol) {
      const std::vector<double> pre = w_;
      project_now();
      refresh();
      if (rn_ > tol) {
        w_ = pre;
        refresh();
      }
    }

    SolveReport rep;
    rep.iterations = iters_;
    rep.converged = rn_ <= tol;
    if (!rep.converged && best_rn_ < rn_) {
      w_ = best_w_;
      refresh();
    }
    rep.final_residual = rn_;
    rep.energy = energy_of(sys_, w_, scratch_);

    ScalarField u = make_field(sys_.grid);
    for (std::size_t c = 0; c < n_; ++c) u.values[c] = sys_.phi[c] + w_[c];
    rep.min_value_interior = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sys_.nr; ++i)
      for (int k = 0; k < sys_.nth; ++k)
        if (sys_.grid->tag(i, k) == NodeTag::interior)
          rep.min_value_interior = std::min(rep.min_value_interior, u.at(i, k));

    if (!rep.converged)
      throw ConvergenceFailure("sector solve did not reach the residual tolerance", u, rep);
    return {std::move(u), rep};
  }

 private:
  void refresh() {
    rn_ = residual(sys_, w_, Kw_, res_);
    if (rn_ < best_rn_) {
      best_rn_ = rn_;
      best_w_ = w_;
    }
  }

  void prepare_newton() {
    const int nth = sys_.nth;
    std::fill(g_.begin(), g_.end(), 0.0);
    std::fill(hdiag_.begin(), hdiag_.end(), 1.0);
    for (int i = 1; i < sys_.nr - 1; ++i) {
      const auto [cw, ce, ct] = sys_.row[i];
      const double Wi = sys_.W[i];
      const double adiag = Wi * (cw + ce + 2.0 * ct);
      const std::size_t base = static_cast<std::size_t>(i) * nth;
      for (int k = 1; k < nth - 1; ++k) {
        const std::size_t c = base + k;
        fp_[c] = sys_.fp_at(sys_.phi[c], w_[c]);
        g_[c] = -Wi * res_[c];
        const double hd = adiag - Wi * fp_[c];
        hdiag_[c] = hd > 1e-12 ? hd : adiag;  // Jacobi guard
      }
    }
  }

  // H v = -W (K v + f'(u) v): the Hessian of the energy at the current w.
  void hess(const std::vector<double>& v, std::vector<double>& out) {
    apply_K(sys_, v, out);
    const int nth = sys_.nth;
    for (int i = 1; i < sys_.nr - 1; ++i) {
      const double Wi = sys_.W[i];
      const std::size_t base = static_cast<std::size_t>(i) * nth;
      for (int k = 1; k < nth - 1; ++k) {
        const std::size_t c = base + k;
        out[c] = -Wi * (out[c] + fp_[c] * v[c]);
      }
    }
  }

  const std::vector<double>& b_from_g() {
    // Newton right-hand side -g, reusing trial_ as storage until line search
    bneg_.resize(n_);
    for (std::size_t c = 0; c < n_; ++c) bneg_[c] = -g_[c];
    return bneg_;
  }

  bool armijo(double gd) {
    const double E0 = energy_of(sys_, w_, scratch_);
    double step = 1.0;
    for (int h = 0; h < 40; ++h, step *= 0.5) {
      for (std::size_t c = 0; c < n_; ++c) trial_[c] = w_[c] + step * dir_[c];
      const double En = energy_of(sys_, trial_, scratch_);
      if (En <= E0 + 1e-4 * step * gd) {
        w_.swap(trial_);
        return true;
      }
    }
    return false;
  }

  // Semi-implicit gradient flow: (W/tau + A) w+ = (W/tau) w + W f(phi + w),
  // with A = -W K. Linear in the implicit part, so each step is one SPD
  // solve; used as a smoother when Newton stalls.
  bool try_flow() {
    if (!opts_.flow_fallback || flow_rounds_ >= 40) return false;
    ++flow_rounds_;
    const double tau = opts_.flow_step;
    const int nth = sys_.nth;
    std::vector<double> b(n_, 0.0), Mf(n_, 1.0);
    for (int step = 0; step < 10; ++step) {
      for (int i = 1; i < sys_.nr - 1; ++i) {
        const auto [cw, ce, ct] = sys_.row[i];
        const double Wi = sys_.W[i];
        const std::size_t base = static_cast<std::size_t>(i) * nth;
        for (int k = 1; k < nth - 1; ++k) {
          const std::size_t c = base + k;
          b[c] = Wi * (w_[c] / tau + sys_.f_at(sys_.phi[c], w_[c]));
          Mf[c] = Wi / tau + Wi * (cw + ce + 2.0 * ct);
        }
      }
      auto flow_op = [&](const std::vector<double>& v, std::vector<double>& out) {
        apply_K(sys_, v, out);
        for (int i = 1; i < sys_.nr - 1; ++i) {
          const double Wi = sys_.W[i];
          const std::size_t base = static_cast<std::size_t>(i) * nth;
          for (int k = 1; k < nth - 1; ++k) {
            const std::size_t c = base + k;
            out[c] = Wi * (v[c] / tau - out[c]);
          }
        }
      };
      pcg(flow_op, b, Mf, dir_, 1e-10 * std::sqrt(dot(b, b)), 20000, false, cg_);
      w_ = dir_;
      project();
    }
    return true;
  }

  // Replace u by |u| in w coordinates. Steering every globalization iterate
  // into the positive cone keeps Newton out of the sign-flipped basins, but
  // near convergence it would re-perturb nodes sitting within roundoff of
  // zero and cap the attainable residual, so the polish phase skips it; one
  // final application (a no-op once the solution is positive) restores the
  // sign guarantee before return.
  void project_now() {
    if (!opts_.positivity_projection || !sys_.pot->even) return;
    const int nth = sys_.nth;
    for (int i = 1; i < sys_.nr - 1; ++i)
      for (int k = 1; k < nth - 1; ++k) {
        const std::size_t c = static_cast<std::size_t>(i) * nth + k;
        w_[c] = std::abs(sys_.phi[c] + w_[c]) - sys_.phi[c];
      }
  }

  void project() {
    if (steer_) project_now();
  }

  SectorSystem sys_;
  SolveOptions opts_;
  std::size_t n_;
  std::vector<double> w_, Kw_, res_, g_, fp_, hdiag_, dir_, trial_, scratch_, bneg_;
  CgScratch cg_;
  std::vector<double> best_w_;
  double rn_ = std::numeric_limits<double>::infinity();
  double best_rn_ = std::numeric_limits<double>::infinity();
  int iters_ = 0;
  int flow_rounds_ = 0;
  bool steer_ = true;
};

void check_sector_grid(const std::shared_ptr<const PolarGrid>& grid) {
  if (!grid || grid->mode != GridMode::sector)
    throw std::invalid_argument("a sector-mode grid is required");
}

}  // namespace

std::pair<ScalarField, SolveReport> solve_sector(const PeriodicPotential& pot,
                                                 const SectorDomain& domain,
                                                 std::shared_ptr<const PolarGrid> grid,
                                                 const SolveOptions& opts,
                                                 const ScalarField* initial_guess) {
  check_sector_grid(grid);
  if (grid->d != domain.d ||
      std::abs(grid->R() - domain.R) > 1e-12 * std::max(1.0, std::abs(domain.R)))
    throw std::invalid_argument("grid does not match the sector domain");
  if (!(opts.newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  if (!(opts.flow_step > 0.0)) throw std::invalid_argument("flow_step must be positive");
  if (!pot.even && !opts.allow_uneven)
    throw std::invalid_argument(
        "potential lacks the even symmetry the construction relies on "
        "(set allow_uneven to experiment)");

  SectorSolver solver(pot, grid, opts);
  if (initial_guess) {
    if (initial_guess->grid->mode != GridMode::sector ||
        initial_guess->grid->nr() != grid->nr() ||
        initial_guess->grid->nth() != grid->nth() ||
        std::abs(initial_guess->grid->R() - grid->R()) > 1e-12 * grid->R())
      throw std::invalid_argument("initial guess lives on a different grid");
    solver.set_guess(initial_guess->values);
  }
  return solver.run();
}

double discrete_energy(const PeriodicPotential& pot, const ScalarField& u) {
  check_sector_grid(u.grid);
  SectorSystem s = make_system(pot, u.grid);
  std::vector<double> w(u.values.size()), scratch(u.values.size());
  for (std::size_t c = 0; c < w.size(); ++c) w[c] = u.values[c] - s.phi[c];
  return energy_of(s, w, scratch);
}

ScalarField extend_by_symmetry(const ScalarField& sector_field, int d,
                               std::shared_ptr<const PolarGrid> disk_grid) {
  const PolarGrid& sg = *sector_field.grid;
  if (sg.mode != GridMode::sector || !disk_grid || disk_grid->mode != GridMode::disk)
    throw std::invalid_argument("extend_by_symmetry maps a sector field to a disk grid");
  if (sg.d != d || disk_grid->d != d)
    throw std::invalid_argument("degree mismatch between field, argument, and grid");
  const int S = sg.nth() - 1;
  const int Nd = disk_grid->nth();
  if (Nd != 2 * d * S)
    throw std::invalid_argument("incompatible angular resolutions (disk Ntheta != 2d * sector intervals)");
  if (disk_grid->nr() != sg.nr())
    throw std::invalid_argument("sector and disk grids have different radial resolutions");
  for (int i = 0; i < sg.nr(); ++i)
    if (std::abs(disk_grid->radii[i] - sg.radii[i]) > 1e-12 * sg.radii[i])
      throw std::invalid_argument("sector and disk grids have mismatched radii");

  ScalarField out = make_field(disk_grid);
  const int nr = sg.nr();
  std::vector<int> src(Nd);
  std::vector<double> sgn(Nd);
  for (int k = 0; k < Nd; ++k) {
    const int j = k - Nd / 2;
    const int q = j + S / 2;
    const int m = (q >= 0) ? q / S : -((-q + S - 1) / S);  // floor division
    const int p = j - m * S;                               // offset in [-S/2, S/2)
    src[k] = p + S / 2;
    sgn[k] = (m & 1) ? -1.0 : 1.0;
  }
  for (int i = 0; i < nr; ++i)
    for (int k = 0; k < Nd; ++k) out.at(i, k) = sgn[k] * sector_field.at(i, src[k]);
  return out;
}

ScalarField zero_potential_oracle(std::shared_ptr<const PolarGrid> grid) {
  check_sector_grid(grid);
  const PeriodicPotential zero = make_zero();
  SectorSystem s = make_system(zero, grid);
  const std::size_t n = grid->size();
  std::vector<double> b(n, 0.0), M(n, 1.0), w0(n);
  apply_K(s, s.phi, b);  // boundary values of phi feed the interior stencil
  double kphi_max = 0.0;
  const int nth = s.nth;
  for (int i = 1; i < s.nr - 1; ++i) {
    const auto [cw, ce, ct] = s.row[i];
    const double Wi = s.W[i];
    const std::size_t base = static_cast<std::size_t>(i) * nth;
    for (int k = 1; k < nth - 1; ++k) {
      kphi_max = std::max(kphi_max, std::abs(b[base + k]));
      b[base + k] *= Wi;  // A w0 = W K phi
      M[base + k] = Wi * (cw + ce + 2.0 * ct);
    }
  }
  auto A_op = [&](const std::vector<double>& v, std::vector<double>& out) {
    apply_K(s, v, out);
    for (int i = 1; i < s.nr - 1; ++i) {
      const double Wi = s.W[i];
      const std::size_t base = static_cast<std::size_t>(i) * nth;
      for (int k = 1; k < nth - 1; ++k) out[base + k] *= -Wi;
    }
  };
  // K(phi + w0) = (b - A w0)/W on interior nodes, so the useful stopping rule
  // is on the true residual in exactly that scaling: the iterate is accepted
  // once phi + w0's remaining defect is 1e-9 of the background's own, leaving
  // the oracle's consumers a clean order of magnitude. The l2 recursion alone
  // can stall well above this, so it only serves as a machine-level floor.
  const double target = 1e-9 * kphi_max;
  std::vector<double> Ax(n);
  auto certified = [&](const std::vector<double>& x) {
    A_op(x, Ax);
    double worst = 0.0;
    for (int i = 1; i < s.nr - 1; ++i) {
      const double Wi = s.W[i];
      const std::size_t base = static_cast<std::size_t>(i) * nth;
      for (int k = 1; k < nth - 1; ++k)
        worst = std::max(worst, std::abs(b[base + k] - Ax[base + k]) / Wi);
    }
    return worst <= target;
  };
  CgScratch cg(n);
  pcg(A_op, b, M, w0, 1e-15 * std::sqrt(dot(b, b)), 200000, false, cg, certified);
  ScalarField out = make_field(grid);
  out.values = std::move(w0);
  return out;
}

ContinuationResult continuation(const PeriodicPotential& pot, int d,
                                const std::vector<double>& radii, int Nr,
                                int Ntheta_sector, const SolveOptions& opts,
                                double r_min_factor) {
  if (radii.size() < 2) throw std::invalid_argument("continuation needs at least two radii");
  for (std::size_t m = 0; m < radii.size(); ++m)
    if (!(radii[m] > 0.0) || (m > 0 && radii[m] <= radii[m - 1]))
      throw std::invalid_argument("continuation radii must be positive and strictly increasing");
  if (!(r_min_factor > 0.0 && r_min_factor < 1.0))
    throw std::invalid_argument("r_min_factor must lie in (0, 1)");

  ContinuationResult result;
  std::vector<std::vector<double>> ws;  // per-stage w = u - phi
  std::vector<std::vector<double>> ts;  // per-stage log radii

  for (std::size_t m = 0; m < radii.size(); ++m) {
    const double R = radii[m];
    auto grid = std::make_shared<PolarGrid>(
        make_sector_grid(d, R, Nr, Ntheta_sector, r_min_factor * R));
    std::vector<double> t(grid->nr());
    for (int i = 0; i < grid->nr(); ++i) t[i] = std::log(grid->radii[i]);

    ScalarField guess = make_field(grid);
    const ScalarField* guess_ptr = nullptr;
    ScalarField phi_m = harmonic_polynomial(d, grid);
    if (m > 0) {
      // warm start: previous w carried over by per-column linear
      // interpolation in t; w = 0 (u = phi) on the fresh outer annulus
      const auto& tp = ts[m - 1];
      const auto& wp = ws[m - 1];
      const double t0 = tp.front();
      const double dt = (tp.back() - t0) / (static_cast<int>(tp.size()) - 1);
      const int nth = grid->nth();
      const int np = static_cast<int>(tp.size());
      for (int i = 0; i < grid->nr(); ++i) {
        const double x = (t[i] - t0) / dt;
        if (x < 0.0 || x >= np - 1) continue;  // below previous r_min or beyond R_prev
        const int j0 = static_cast<int>(x);
        const double fr = x - j0;
        for (int k = 1; k < nth - 1; ++k) {
          const double wv = (1.0 - fr) * wp[static_cast<std::size_t>(j0) * nth + k] +
                            fr * wp[static_cast<std::size_t>(j0 + 1) * nth + k];
          guess.at(i, k) = wv;
        }
      }
      for (std::size_t c = 0; c < guess.values.size(); ++c)
        guess.values[c] += phi_m.values[c];
      guess_ptr = &guess;
    }

    try {
      auto [u, rep] = solve_sector(pot, SectorDomain{d, R}, grid, opts, guess_ptr);
      std::vector<double> w(u.values.size());
      for (std::size_t c = 0; c < w.size(); ++c) w[c] = u.values[c] - phi_m.values[c];
      ws.push_back(std::move(w));
      ts.push_back(std::move(t));
      result.fields.push_back(std::move(u));
      result.reports.push_back(rep);
    } catch (const ConvergenceFailure& fail) {
      throw ContinuationFailure(fail, std::move(result));
    }
  }

  // Cauchy deltas: later stage interpolated in t onto the earlier lattice,
  // compared over the shared ball of radius radii[0]/2. phi cancels exactly
  // because both terms sit at identical (r, theta) points.
  const double r_cap = radii[0] / 2.0;
  for (std::size_t m = 0; m + 1 < radii.size(); ++m) {
    const auto& g0 = *result.fields[m].grid;
    const auto& tn = ts[m + 1];
    const auto& wn = ws[m + 1];
    const double t0 = tn.front();
    const double dt = (tn.back() - t0) / (static_cast<int>(tn.size()) - 1);
    const int np = static_cast<int>(tn.size());
    const int nth = g0.nth();
    double delta = 0.0;
    for (int i = 0; i < g0.nr(); ++i) {
      if (g0.radii[i] > r_cap) break;
      const double x = (ts[m][i] - t0) / dt;
      for (int k = 0; k < nth; ++k) {
        double wv = 0.0;  // below the later stage's r_min: its w is pinned to 0
        if (x >= 0.0 && x < np - 1) {
          const int j0 = static_cast<int>(x);
          const double fr = x - j0;
          wv = (1.0 - fr) * wn[static_cast<std::size_t>(j0) * nth + k] +
               fr * wn[static_cast<std::size_t>(j0 + 1) * nth + k];
        }
        delta = std::max(delta, std::abs(wv - ws[m][static_cast<std::size_t>(i) * nth + k]));
      }
    }
    result.cauchy.deltas.push_back(delta);
  }
  return result;
}

}  // namespace polygrow
