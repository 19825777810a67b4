#include "uotlab/reg_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linalg.hpp"
#include "uotlab/error.hpp"
#include "uotlab/marginal.hpp"

namespace uotlab {

namespace {

void require_positive_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw_invalid("regularization parameter t must be positive and finite");
  }
}

}  // namespace

Kantorovich::Kantorovich(const Problem& problem, double t)
    : problem_(problem), t_(t), div_(make_divergence(problem)) {
  require_positive_t(t);
}

PlanMatrix Kantorovich::exponents(const DualPotential& xi,
                                  Diagnostics* diag) const {
  if (xi.nx() != problem_.nx() || xi.ny() != problem_.ny()) {
    throw_invalid("dual potential shape does not match problem");
  }
  PlanMatrix e(problem_.nx(), problem_.ny());
  for (Index x = 0; x < e.rows(); ++x) {
    for (Index y = 0; y < e.cols(); ++y) {
      double v = t_ * (xi.phi[x] + xi.psi[y] - problem_.cost(x, y));
      if (v > kExponentClamp) {
        v = kExponentClamp;
        if (diag) diag->overflow = true;
      }
      e(x, y) = v;
    }
  }
  return e;
}

double Kantorovich::value(const DualPotential& xi, Diagnostics* diag) const {
  const PlanMatrix e = exponents(xi, diag);
  return div_.conj(-xi.stacked(), diag) + e.array().exp().sum() / t_;
}

Vec Kantorovich::grad(const DualPotential& xi, Diagnostics* diag) const {
  const PlanMatrix gamma = exponents(xi, diag).array().exp().matrix();
  const Marginals m = apply_A(Coupling{gamma});
  return -div_.conj_grad(-xi.stacked(), diag) + m.stacked();
}

Mat Kantorovich::hess(const DualPotential& xi, Diagnostics* diag) const {
  const Index nx = problem_.nx();
  const Index ny = problem_.ny();
  const PlanMatrix gamma = exponents(xi, diag).array().exp().matrix();
  Mat H = Mat::Zero(nx + ny, nx + ny);
  for (Index x = 0; x < nx; ++x) {
    for (Index y = 0; y < ny; ++y) {
      const double w = t_ * gamma(x, y);
      H(x, x) += w;
      H(nx + y, nx + y) += w;
      H(x, nx + y) = w;
      H(nx + y, x) = w;
    }
  }
  H.diagonal() += div_.conj_hess_diag(-xi.stacked(), diag);
  return H;
}

double kantorovich_eval(const DualPotential& xi, double t, const Problem& problem,
                        Diagnostics* diag) {
  return Kantorovich(problem, t).value(xi, diag);
}

Vec kantorovich_grad(const DualPotential& xi, double t, const Problem& problem) {
  return Kantorovich(problem, t).grad(xi);
}

Mat kantorovich_hess(const DualPotential& xi, double t, const Problem& problem) {
  return Kantorovich(problem, t).hess(xi);
}

namespace {

RegSolution newton(const Kantorovich& K, DualPotential xi,
                   const RegSolveConfig& cfg) {
  RegSolution out;
  out.t = K.t();
  const Index nx = xi.nx();
  const double eps = std::numeric_limits<double>::epsilon();

  Diagnostics diag;
  double f = K.value(xi, &diag);
  Vec g = K.grad(xi, &diag);
  double gnorm = g.lpNorm<Eigen::Infinity>();

  DualPotential best = xi;
  double best_gnorm = gnorm;

  // Jacobi-scaled gradient norm, comparable across nodes of very
  // different mass.
  auto scaled_norm = [](const Vec& grad, const Mat& H) {
    return (grad.array() / H.diagonal().array().max(1e-300).sqrt()).matrix().norm();
  };

  int it = 0;
  for (; it < cfg.max_newton_iters; ++it) {
    const Mat H = K.hess(xi, &diag);
    bool ridged = false;
    const Vec d = detail::solve_spd(H, -g, cfg.hess_ridge, &ridged);
    diag.ridge = diag.ridge || ridged;
    const bool small_step =
        d.lpNorm<Eigen::Infinity>() <= cfg.step_tol * (1.0 + xi.stacked().lpNorm<Eigen::Infinity>());
    if (gnorm <= cfg.grad_tol && small_step) break;
    const double slope = g.dot(d);
    const double g_scaled = scaled_norm(g, H);

    // Backtracking. Near the optimum the decrease in K_t drops below its
    // rounding level; a step is then accepted if it reduces the scaled
    // gradient.
    double alpha = 1.0;
    bool accepted = false;
    DualPotential trial;
    double f_trial = 0.0;
    Vec g_trial;
    while (alpha > 1e-14) {
      g_trial.resize(0);
      trial = DualPotential::split(xi.stacked() + alpha * d, nx);
      Diagnostics trial_diag;
      f_trial = K.value(trial, &trial_diag);
      if (!trial_diag.overflow && std::isfinite(f_trial)) {
        if (f_trial <= f + cfg.armijo_slope * alpha * slope) {
          accepted = true;
        } else if (std::abs(alpha * slope) < 64 * eps * (1.0 + std::abs(f))) {
          g_trial = K.grad(trial);
          accepted = scaled_norm(g_trial, H) < g_scaled;
        }
        if (accepted) break;
      }
      alpha *= cfg.backtrack;
    }
    if (!accepted) break;  // stagnation at machine precision

    xi = std::move(trial);
    f = f_trial;
    g = g_trial.size() > 0 ? g_trial : K.grad(xi, &diag);
    gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm <= cfg.grad_tol || gnorm < best_gnorm) {
      best = xi;
      best_gnorm = gnorm;
    }
  }

  out.xi = best;
  out.grad_norm = best_gnorm;
  out.converged = best_gnorm <= cfg.grad_tol;
  out.iters = it;
  out.kan_value = K.value(best, &diag);
  out.gamma = Coupling{K.exponents(best, &diag).array().exp().matrix()};
  out.diagnostics = diag;
  return out;
}

}  // namespace

RegSolution solve_dual_t(const Problem& problem, double t,
                         const RegSolveConfig& config) {
  require_positive_t(t);
  if (!(config.grad_tol > 0.0)) throw_invalid("grad_tol must be positive");
  if (!(config.step_tol >= 0.0)) throw_invalid("step_tol must be nonnegative");
  if (!(config.backtrack > 0.0 && config.backtrack < 1.0)) {
    throw_invalid("backtrack factor must lie in (0, 1)");
  }
  problem.validate();

  DualPotential start = DualPotential::zeros(problem.nx(), problem.ny());
  bool cold = true;
  if (config.init == InitKind::kWarm) {
    if (!config.warm_xi) throw_invalid("warm start requested without warm_xi");
    start = *config.warm_xi;
    if (start.nx() != problem.nx() || start.ny() != problem.ny()) {
      throw_invalid("warm start shape does not match problem");
    }
    cold = false;
  }

  int total_iters = 0;
  Diagnostics diag;
  if (cold && config.continuation && t > 10.0) {
    for (double tk = 1.0; tk < t; tk *= 10.0) {
      const RegSolution stage = newton(Kantorovich(problem, tk), start, config);
      total_iters += stage.iters;
      diag |= stage.diagnostics;
      start = stage.xi;
    }
  }
  RegSolution sol = newton(Kantorovich(problem, t), start, config);
  sol.iters += total_iters;
  sol.diagnostics |= diag;
  return sol;
}

Coupling recover_primal(const DualPotential& xi, double t, const Problem& problem,
                        Diagnostics* diag) {
  const Kantorovich K(problem, t);
  return Coupling{K.exponents(xi, diag).array().exp().matrix()};
}

Coupling solve_primal_t(const Problem& problem, double t,
                        const RegSolveConfig& config) {
  return solve_dual_t(problem, t, config).gamma;
}

double primal_objective(const Coupling& gamma, const Problem& problem) {
  const Marginals m = apply_A(gamma, problem);
  return frobenius_dot(problem.cost, gamma.gamma) +
         make_divergence(problem).value(m.stacked());
}

double regularized_primal_objective(const Coupling& gamma, double t,
                                    const Problem& problem) {
  require_positive_t(t);
  return primal_objective(gamma, problem) + discrete_entropy(gamma) / t;
}

double coercivity_lower_bound(const DualPotential& xi, const Problem& problem) {
  const DivergenceF div = make_divergence(problem);
  const PlanMatrix gap = apply_A_adjoint(xi) - problem.cost;
  return div.conj(-xi.stacked()) + gap.cwiseMax(0.0).sum();
}

}  // namespace uotlab
