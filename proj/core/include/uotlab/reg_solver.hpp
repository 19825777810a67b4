#pragma once

#include <optional>

#include "uotlab/divergence.hpp"
#include "uotlab/types.hpp"

namespace uotlab {

/// Largest exponent t(phi_x + psi_y - c) evaluated before clamping.
inline constexpr double kExponentClamp = 690.0;

enum class InitKind { kZeros, kWarm };

struct RegSolveConfig {
  double grad_tol = 1e-10;  // on the sup-norm of the gradient
  /// Once grad_tol is met, iterate until the Newton step is below
  /// step_tol * (1 + |xi|_inf). Nodes with tiny mass have tiny gradients
  /// long before their potentials settle.
  double step_tol = 1e-12;
  int max_newton_iters = 200;
  double armijo_slope = 1e-4;
  double backtrack = 0.5;
  double hess_ridge = 0.0;
  InitKind init = InitKind::kZeros;
  /// Starting point for kWarm.
  std::optional<DualPotential> warm_xi;
  /// Cold starts at t > 10 first walk t = 1, 10, 100, ... with warm starts.
  bool continuation = true;
};

struct RegSolution {
  double t = 0.0;
  DualPotential xi;
  Coupling gamma;
  double kan_value = 0.0;
  int iters = 0;
  double grad_norm = 0.0;
  bool converged = false;
  Diagnostics diagnostics;
};

/// The regularized dual functional
///   K_t(xi) = F*(-xi) + sum_{x,y} (1/t) exp(t (phi_x + psi_y - c(x,y)))
/// with its gradient and Hessian. Holds a reference to the problem.
class Kantorovich {
 public:
  Kantorovich(const Problem& problem, double t);

  double t() const { return t_; }
  const DivergenceF& divergence() const { return div_; }

  /// t (A* xi - c), clamped at kExponentClamp.
  PlanMatrix exponents(const DualPotential& xi, Diagnostics* diag) const;

  double value(const DualPotential& xi, Diagnostics* diag = nullptr) const;
  /// -grad F*(-xi) + A gamma(xi, t), stacked over X ⊔ Y.
  Vec grad(const DualPotential& xi, Diagnostics* diag = nullptr) const;
  /// t A diag(gamma) A* + D^2 F*(-xi).
  Mat hess(const DualPotential& xi, Diagnostics* diag = nullptr) const;

 private:
  const Problem& problem_;
  double t_;
  DivergenceF div_;
};

double kantorovich_eval(const DualPotential& xi, double t, const Problem& problem,
                        Diagnostics* diag = nullptr);
Vec kantorovich_grad(const DualPotential& xi, double t, const Problem& problem);
Mat kantorovich_hess(const DualPotential& xi, double t, const Problem& problem);

/// Minimizes K_t by damped Newton with Armijo backtracking. Never throws on
/// non-convergence: the best iterate comes back with converged == false.
RegSolution solve_dual_t(const Problem& problem, double t,
                         const RegSolveConfig& config = {});

/// gamma = exp(t (A* xi - c)) entrywise.
Coupling recover_primal(const DualPotential& xi, double t, const Problem& problem,
                        Diagnostics* diag = nullptr);

/// Minimizer of the regularized primal <c|gamma> + F(A gamma) + H(gamma)/t.
Coupling solve_primal_t(const Problem& problem, double t,
                        const RegSolveConfig& config = {});

/// <c|gamma> + F(A gamma).
double primal_objective(const Coupling& gamma, const Problem& problem);

/// <c|gamma> + F(A gamma) + H(gamma) / t.
double regularized_primal_objective(const Coupling& gamma, double t,
                                    const Problem& problem);

/// V(xi) = F*(-xi) + sum (phi_x + psi_y - c)_+, a t-uniform lower bound of K_t.
double coercivity_lower_bound(const DualPotential& xi, const Problem& problem);

}  // namespace uotlab
