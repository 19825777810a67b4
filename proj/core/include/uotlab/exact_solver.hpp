#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "uotlab/divergence.hpp"
#include "uotlab/types.hpp"

namespace uotlab {

struct ExactConfig {
  // Log-barrier phase: minimize F*(-xi) - (1/tau) sum log(c - A* xi),
  // tau <- tau_factor * tau until |X||Y| / tau < gap_target.
  double tau0 = 1.0;
  double tau_factor = 10.0;
  double gap_target = 1e-10;
  int max_inner_iters = 60;

  // Active-set refinement on the barrier output.
  bool polish = true;
  int max_polish_iters = 400;

  double feas_tol = 1e-9;
  /// Saturation threshold for I0; default max(1e-7, 1e-6 * ||c||_inf).
  std::optional<double> sat_tol;

  // Minimal-entropy plan recovery.
  double proj_tol = 1e-10;
  int max_scaling_iters = 50000;
};

struct BarrierDiagnostics {
  int outer_iters = 0;
  int inner_iters = 0;
  double final_tau = 0.0;
  bool barrier_converged = false;
  bool polished = false;
  int polish_iters = 0;
  /// Non-unique multipliers (cycles in the saturated graph) or saturated
  /// constraints carrying no mass.
  bool degenerate = false;
  /// sup-norm of -grad F*(-xi) + A lambda with lambda >= 0 on the active set.
  double kkt_residual = 0.0;
  double min_slack = 0.0;
  bool converged = false;
};

struct DualExactResult {
  DualPotential xi;
  /// Nonnegative multipliers (a primal plan supported on the active set).
  PlanMatrix multipliers;
  BarrierDiagnostics diagnostics;
};

/// I0 = {(x, y) : kappa_{x,y} <= sat_tol}, with the full slack matrix.
struct SaturatedSet {
  Index nx = 0;
  Index ny = 0;
  std::vector<std::pair<Index, Index>> pairs;  // row-major order
  PlanMatrix kappa;
  /// min of kappa over the complement of I0 (+inf when I0 is everything).
  double kappa_star_min = kInf;
  std::pair<Index, Index> kappa_star_argmin{-1, -1};

  bool contains(Index x, Index y) const;
  /// Indicator matrix of I0.
  PlanMatrix mask() const;
};

struct PlanResult {
  Coupling gamma;
  bool converged = false;
  double residual = 0.0;  // sup-norm of A gamma - m
  int iters = 0;
  bool used_fallback = false;
};

struct ExactSolution {
  DualPotential xi_star;
  PlanMatrix kappa;
  SaturatedSet I0;
  Marginals m_star;
  Coupling gamma_star;
  double kappa_star_min = kInf;
  double sat_tol = 0.0;
  BarrierDiagnostics barrier;
  PlanResult plan;

  bool converged() const { return barrier.converged && plan.converged; }
};

double default_sat_tol(const Problem& problem);

/// Minimizes F*(-xi) subject to A* xi <= c.
DualExactResult solve_dual_exact(const Problem& problem,
                                 const ExactConfig& config = {});

/// Slack kappa = c - A* xi and the thresholded saturated set. Throws
/// kDegenerateInstance when I0 is empty and kInvalidInput when xi is
/// infeasible beyond feas_tol.
SaturatedSet saturated_set(const DualPotential& xi_star, const Problem& problem,
                           double sat_tol, double feas_tol = 1e-9);

/// m* = grad F*(-xi*), the marginals shared by every primal optimizer.
Marginals optimal_marginals(const DualPotential& xi_star, const DivergenceF& div);

/// argmin H(gamma) s.t. gamma >= 0, supp gamma ⊆ I0, A gamma = m, by masked
/// alternating scaling; Newton on the restricted dual as fallback.
PlanResult minimal_entropy_plan(const SaturatedSet& I0, const Marginals& m_star,
                                const ExactConfig& config = {});

/// Full pipeline: dual, saturated set, optimal marginals, minimal-entropy plan.
ExactSolution solve_exact(const Problem& problem, const ExactConfig& config = {});

struct BruteForceConfig {
  int restarts = 3;
  int max_sweeps = 400;
  std::uint64_t seed = 0;
};

struct BruteForceResult {
  Coupling gamma;
  double objective = 0.0;
};

/// Direct minimization of <c|gamma> + F(A gamma) over gamma >= 0 for tiny
/// instances (|X||Y| <= 9): random restarts, coordinate and pairwise golden
/// section sweeps, then pattern-search refinement. Uses phi only, never the
/// conjugate. Oracle-grade: best found, no certificate.
BruteForceResult brute_force_primal(const Problem& problem,
                                    const BruteForceConfig& config = {});

}  // namespace uotlab
