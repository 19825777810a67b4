#include "uotlab/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "linalg.hpp"
#include "support_newton.hpp"
#include "uotlab/error.hpp"
#include "uotlab/marginal.hpp"
#include "uotlab/reg_solver.hpp"

namespace uotlab {

Vec compute_d(const DualPotential& xi_t, const DualPotential& xi_star, double t) {
  if (xi_t.nx() != xi_star.nx() || xi_t.ny() != xi_star.ny()) {
    throw_invalid("compute_d: shape mismatch");
  }
  return t * (xi_t.stacked() - xi_star.stacked());
}

Vec solve_d_star(const ExactSolution& exact, const DivergenceF& div) {
  const Index nx = exact.I0.nx;
  const Index ny = exact.I0.ny;
  if (exact.I0.pairs.empty()) throw Error(ErrorKind::kDegenerateInstance, "I0 is empty");
  const Vec m = exact.m_star.stacked();

  const detail::SupportNewtonResult nr =
      detail::minimize_support_exp(nx, ny, exact.I0.pairs, m, 1e-13, 500);
  // G has a minimizer only when m* is a strictly positive combination of the
  // A e_{x,y} over I0; otherwise some z drifts to -inf and Newton never settles.
  if (!nr.converged) {
    throw Error(ErrorKind::kInternal, "solve_d_star: G has no stationary point");
  }

  // Weighted least-squares selection on z0 + ker(restricted adjoint).
  const Mat B = detail::restricted_adjoint(nx, ny, exact.I0.pairs);
  const Mat K = detail::null_space(B);
  const Vec z0 = nr.z;
  if (K.cols() == 0) return z0;
  const Vec w = div.conj_hess_diag(-exact.xi_star.stacked());
  const Mat KtW = K.transpose() * w.asDiagonal();
  const Mat KtWK = KtW * K;
  return z0 - K * KtWK.ldlt().solve(KtW * z0);
}

namespace {

struct OdeTerms {
  PlanMatrix gamma;
  PlanMatrix log_gamma;
  Vec d2;
};

OdeTerms ode_terms(const DualPotential& xi, double t, const Problem& problem) {
  if (!(t > 0.0)) throw_invalid("t must be positive");
  const Kantorovich K(problem, t);
  OdeTerms out;
  out.log_gamma = K.exponents(xi, nullptr);
  out.gamma = out.log_gamma.array().exp().matrix();
  out.d2 = K.divergence().conj_hess_diag(-xi.stacked());
  return out;
}

Vec source_term(const OdeTerms& o, double t) {
  const PlanMatrix gl = o.gamma.cwiseProduct(o.log_gamma);
  return apply_A(Coupling{gl}).stacked() / (t * t);
}

}  // namespace

double ode_residual(const DualPotential& xi, const Vec& xi_dot, double t,
                    const Problem& problem) {
  if (xi_dot.size() != problem.n_dual()) throw_invalid("xi_dot size mismatch");
  const OdeTerms o = ode_terms(xi, t, problem);
  const PlanMatrix flow =
      o.gamma.cwiseProduct(apply_A_adjoint(DualPotential::split(xi_dot, problem.nx())));
  const Vec lhs = apply_A(Coupling{flow}).stacked() +
                  o.d2.cwiseProduct(xi_dot) / t + source_term(o, t);
  return lhs.lpNorm<Eigen::Infinity>();
}

double ode_source_norm(const DualPotential& xi, double t, const Problem& problem) {
  return source_term(ode_terms(xi, t, problem), t).lpNorm<Eigen::Infinity>();
}

Vec central_difference(const DualPotential& xi_minus, double t_minus,
                       const DualPotential& xi_plus, double t_plus, double t) {
  if (!(t_minus > 0.0 && t_minus < t && t < t_plus)) {
    throw_invalid("central_difference: need 0 < t_minus < t < t_plus");
  }
  const double lo = std::log(t / t_minus);
  const double hi = std::log(t_plus / t);
  if (std::abs(lo - hi) > 1e-9 * std::max(lo, hi)) {
    throw_invalid("central_difference: points are not symmetric in log t");
  }
  if (xi_minus.nx() != xi_plus.nx() || xi_minus.ny() != xi_plus.ny()) {
    throw_invalid("central_difference: shape mismatch");
  }
  return (xi_plus.stacked() - xi_minus.stacked()) / (t_plus - t_minus);
}

Vec stencil_derivative(const std::vector<double>& ts,
                       const std::vector<DualPotential>& xis, double t) {
  const std::size_t n = ts.size();
  if (n < 2 || xis.size() != n) throw_invalid("stencil_derivative: need matching nodes and values");
  if (!(t > 0.0)) throw_invalid("stencil_derivative: t must be positive");
  std::vector<double> u(n);  // log offsets, must come in +- pairs
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ts[i] > 0.0)) throw_invalid("stencil_derivative: nodes must be positive");
    u[i] = std::log(ts[i] / t);
  }
  std::vector<double> sorted = u;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double a = sorted[i], b = -sorted[n - 1 - i];
    if (std::abs(a - b) > 1e-9 * (std::abs(a) + std::abs(b) + 1e-300)) {
      throw_invalid("stencil_derivative: nodes are not symmetric in log t");
    }
    if (i > 0 && !(sorted[i] > sorted[i - 1])) throw_invalid("stencil_derivative: repeated node");
  }
  // Lagrange basis derivatives at t, on nodes scaled by t.
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = ts[i] / t;
  Vec out = Vec::Zero(xis[0].size());
  for (std::size_t i = 0; i < n; ++i) {
    if (xis[i].size() != out.size()) throw_invalid("stencil_derivative: shape mismatch");
    double w = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      double prod = 1.0 / (x[i] - x[k]);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && j != k) prod *= (1.0 - x[j]) / (x[i] - x[j]);
      }
      w += prod;
    }
    out += (w / t) * xis[i].stacked();
  }
  return out;
}

Vec sweep_xi_dot(const std::vector<TrajectoryPoint>& points, std::size_t i) {
  if (i == 0 || i + 1 >= points.size()) {
    throw_invalid("sweep_xi_dot: point has no neighbours on both sides");
  }
  const TrajectoryPoint& a = points[i - 1];
  const TrajectoryPoint& b = points[i + 1];
  return central_difference(a.xi, a.t, b.xi, b.t, points[i].t);
}

E0Report e0_diagnostics(const SaturatedSet& I0, const Vec& m) {
  const Index n = I0.nx + I0.ny;
  if (m.size() != n) throw_invalid("e0_diagnostics: marginal size mismatch");
  E0Report rep;
  const Mat AI = detail::restricted_adjoint(I0.nx, I0.ny, I0.pairs).transpose();
  if (AI.cols() == 0) {
    rep.basis = Mat(n, 0);
    rep.residual = m.norm() > 0.0 ? 1.0 : 0.0;
    return rep;
  }
  Eigen::ColPivHouseholderQR<Mat> qr(AI);
  qr.setThreshold(1e-10);
  rep.dim = static_cast<int>(qr.rank());
  const Mat Q = qr.householderQ() * Mat::Identity(n, n);
  rep.basis = Q.leftCols(rep.dim);
  const Vec proj = rep.basis * (rep.basis.transpose() * m);
  const double mn = m.norm();
  rep.residual = mn > 0.0 ? (m - proj).norm() / mn : 0.0;
  return rep;
}

E0Report e0_diagnostics(const ExactSolution& exact) {
  return e0_diagnostics(exact.I0, exact.m_star.stacked());
}

namespace {

RateFit ols(const std::vector<std::pair<double, double>>& xy) {
  const double n = static_cast<double>(xy.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : xy) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw_invalid("fit: abscissae are all equal");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (const auto& [x, y] : xy) {
    const double e = y - (f.intercept + f.slope * x);
    sse += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.n_used = static_cast<int>(xy.size());
  return f;
}

std::pair<double, double> resolve_window(double t_first, double t_last, const FitWindow& w) {
  return {w.t_lo.value_or(std::sqrt(t_first * t_last)), w.t_hi.value_or(t_last)};
}

}  // namespace

RateFit fit_rate(const std::vector<std::pair<double, double>>& series,
                 const FitWindow& window) {
  if (series.empty()) throw_invalid("fit_rate: empty series");
  double t_first = kInf, t_last = 0.0;
  for (const auto& [t, e] : series) {
    if (!(t > 0.0)) throw_invalid("fit_rate: t must be positive");
    t_first = std::min(t_first, t);
    t_last = std::max(t_last, t);
  }
  const auto [lo, hi] = resolve_window(t_first, t_last, window);
  std::vector<std::pair<double, double>> xy;
  double tmin = kInf, tmax = 0.0;
  for (const auto& [t, e] : series) {
    // Tiny relative slack so grid points on the window edge survive rounding.
    if (t < lo * (1 - 1e-12) || t > hi * (1 + 1e-12)) continue;
    if (!std::isfinite(e) || e < kErrorFloor) continue;
    xy.emplace_back(std::log(t), std::log(e));
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  if (xy.size() < 8) throw_invalid("fit_rate: fewer than 8 usable points");
  RateFit f = ols(xy);
  f.t_min_fit = tmin;
  f.t_max_fit = tmax;
  return f;
}

RateFit fit_offsupport_decay(const std::vector<TrajectoryPoint>& points,
                             const ExactSolution& exact, const Problem& problem) {
  const auto [x, y] = exact.I0.kappa_star_argmin;
  if (x < 0) throw_invalid("fit_offsupport_decay: I0 covers every pair");
  if (points.empty()) throw_invalid("fit_offsupport_decay: empty sweep");
  const auto [lo, hi] = resolve_window(points.front().t, points.back().t, {});
  std::vector<std::pair<double, double>> xy;
  double tmin = kInf, tmax = 0.0;
  for (const TrajectoryPoint& p : points) {
    if (p.t < lo * (1 - 1e-12) || p.t > hi * (1 + 1e-12)) continue;
    if (p.flags & kFlagNonConverged) continue;
    xy.emplace_back(p.t, p.t * (p.xi.phi[x] + p.xi.psi[y] - problem.cost(x, y)));
    tmin = std::min(tmin, p.t);
    tmax = std::max(tmax, p.t);
  }
  if (xy.size() < 8) throw_invalid("fit_offsupport_decay: fewer than 8 usable points");
  RateFit f = ols(xy);
  f.t_min_fit = tmin;
  f.t_max_fit = tmax;
  return f;
}

}  // namespace uotlab
