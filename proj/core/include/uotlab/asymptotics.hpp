#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "uotlab/divergence.hpp"
#include "uotlab/exact_solver.hpp"
#include "uotlab/types.hpp"

namespace uotlab {

/// Bits of TrajectoryPoint::flags.
enum TrajectoryFlag : std::uint32_t {
  kFlagNonConverged = 1u,
  kFlagOverflow = 2u,
  kFlagRidge = 4u,
  kFlagOdeUnavailable = 8u,
};

struct TrajectoryPoint {
  double t = 0.0;
  DualPotential xi;
  Coupling gamma;
  Vec d;                     // t (xi(t) - xi*)
  double dual_err = 0.0;     // Euclidean, over X ⊔ Y
  double primal_err = 0.0;   // Frobenius
  double ode_residual = 0.0;
  double ode_source = 0.0;   // sup-norm of (1/t^2) A diag(gamma) log(gamma)
  double entropy_val = 0.0;
  int iters = 0;
  std::uint32_t flags = 0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double t_min_fit = 0.0;
  double t_max_fit = 0.0;
  int n_used = 0;
};

/// Fit window in t. Unset ends default to the upper half of the series in
/// log scale: [sqrt(t_first * t_last), t_last].
struct FitWindow {
  std::optional<double> t_lo;
  std::optional<double> t_hi;
};

/// Errors below this are solver noise and are left out of rate fits.
inline constexpr double kErrorFloor = 1e-12;

Vec compute_d(const DualPotential& xi_t, const DualPotential& xi_star, double t);

/// Limit of d(t): minimizer of G(z) = -<m*, z> + sum_{I0} exp(z_x + z_y),
/// selected by minimal ||z|| in the metric D^2 F*(-xi*).
Vec solve_d_star(const ExactSolution& exact, const DivergenceF& div);

/// sup-norm of A diag(g) A* xi_dot + (1/t) D^2 F*(-xi) xi_dot
///              + (1/t^2) A diag(g) log g,   g = exp(t (A* xi - c)).
double ode_residual(const DualPotential& xi, const Vec& xi_dot, double t,
                    const Problem& problem);

/// sup-norm of the (1/t^2) A diag(g) log g term alone.
double ode_source_norm(const DualPotential& xi, double t, const Problem& problem);

/// Central difference (xi_plus - xi_minus) / (t_plus - t_minus) for xi'(t).
/// t_minus < t < t_plus must be symmetric in log t; otherwise kInvalidInput.
Vec central_difference(const DualPotential& xi_minus, double t_minus,
                       const DualPotential& xi_plus, double t_plus, double t);

/// Derivative at t of the interpolating polynomial through (ts[i], xis[i]).
/// The nodes must be distinct and symmetric about t in log scale (t itself
/// may be one of them); otherwise kInvalidInput. Five nodes t r^k,
/// k = -2..2, give a fourth-order estimate.
Vec stencil_derivative(const std::vector<double>& ts,
                       const std::vector<DualPotential>& xis, double t);

/// xi'(t_i) from the neighbours i-1, i+1 of a sweep. kInvalidInput at the
/// ends or when the neighbours are not log-symmetric around t_i.
Vec sweep_xi_dot(const std::vector<TrajectoryPoint>& points, std::size_t i);

struct E0Report {
  int dim = 0;
  double residual = 0.0;  // |m - P m| / |m|
  Mat basis;              // orthonormal columns
};

E0Report e0_diagnostics(const SaturatedSet& I0, const Vec& m);
E0Report e0_diagnostics(const ExactSolution& exact);

/// OLS of log err against log t. kInvalidInput with fewer than 8 usable
/// points (finite, >= kErrorFloor, inside the window).
RateFit fit_rate(const std::vector<std::pair<double, double>>& series,
                 const FitWindow& window = {});

/// Linear fit in t of log gamma_{x,y}(t) = t (phi_x + psi_y - c_{x,y}) at the
/// off-I0 entry achieving kappa*, over the upper half of the sweep. The slope
/// approaches -kappa*. kInvalidInput when I0 covers every pair.
RateFit fit_offsupport_decay(const std::vector<TrajectoryPoint>& points,
                             const ExactSolution& exact, const Problem& problem);

}  // namespace uotlab
