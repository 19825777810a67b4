#include "support_newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linalg.hpp"

namespace uotlab::detail {

Mat restricted_adjoint(Index nx, Index ny,
                       const std::vector<std::pair<Index, Index>>& support) {
  Mat B = Mat::Zero(static_cast<Index>(support.size()), nx + ny);
  for (std::size_t k = 0; k < support.size(); ++k) {
    B(static_cast<Index>(k), support[k].first) = 1.0;
    B(static_cast<Index>(k), nx + support[k].second) = 1.0;
  }
  return B;
}

SupportNewtonResult minimize_support_exp(
    Index nx, Index ny, const std::vector<std::pair<Index, Index>>& support,
    const Vec& m, double tol, int max_iters) {
  const Index n = nx + ny;
  std::vector<bool> touched(n, false);
  for (const auto& [x, y] : support) {
    touched[x] = true;
    touched[nx + y] = true;
  }
  // Only the part of m seen by the support enters the problem; untouched
  // nodes have no exponential term and stay at zero.
  Vec mt = m;
  for (Index i = 0; i < n; ++i) {
    if (!touched[i]) mt[i] = 0.0;
  }

  auto value = [&](const Vec& z) {
    double v = -mt.dot(z);
    for (const auto& [x, y] : support) v += std::exp(z[x] + z[nx + y]);
    return v;
  };
  auto gradient = [&](const Vec& z) {
    Vec g = -mt;
    for (const auto& [x, y] : support) {
      const double e = std::exp(z[x] + z[nx + y]);
      g[x] += e;
      g[nx + y] += e;
    }
    return g;
  };
  auto hessian = [&](const Vec& z) {
    Mat H = Mat::Zero(n, n);
    for (const auto& [x, y] : support) {
      const double e = std::exp(z[x] + z[nx + y]);
      H(x, x) += e;
      H(nx + y, nx + y) += e;
      H(x, nx + y) += e;
      H(nx + y, x) += e;
    }
    return H;
  };

  SupportNewtonResult out;
  Vec z = Vec::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (touched[i] && mt[i] > 0.0) z[i] = 0.5 * std::log(mt[i]);
  }
  const double scale = std::max(1.0, mt.lpNorm<Eigen::Infinity>());
  const double eps = std::numeric_limits<double>::epsilon();

  double f = value(z);
  Vec g = gradient(z);
  int it = 0;
  bool small_step = false;
  for (; it < max_iters; ++it) {
    // Jacobi-scaled minimum-norm Newton direction.
    const Mat H = hessian(z);
    Vec s(n);
    for (Index i = 0; i < n; ++i) s[i] = H(i, i) > 0 ? 1.0 / std::sqrt(H(i, i)) : 0.0;
    const Mat S = s.asDiagonal() * H * s.asDiagonal();
    const Vec d = s.cwiseProduct(min_norm_solve(S, -s.cwiseProduct(g)));
    // Masses can span twenty orders of magnitude, so the gradient test alone
    // would stop with the light nodes unresolved; the step must settle too.
    small_step = d.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + z.lpNorm<Eigen::Infinity>());
    if (g.lpNorm<Eigen::Infinity>() <= tol * scale && small_step) break;
    const double slope = g.dot(d);
    if (!(slope < 0.0)) break;

    double alpha = 1.0;
    bool accepted = false;
    Vec trial;
    while (alpha > 1e-14) {
      trial = z + alpha * d;
      const double ft = value(trial);
      if (std::isfinite(ft) &&
          (ft <= f + 1e-4 * alpha * slope ||
           (std::abs(alpha * slope) < 64 * eps * (1.0 + std::abs(f)) &&
            gradient(trial).lpNorm<Eigen::Infinity>() <
                g.lpNorm<Eigen::Infinity>()))) {
        accepted = true;
        f = ft;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    z = trial;
    g = gradient(z);
  }
  out.z = z;
  out.iters = it;
  out.grad_norm = g.lpNorm<Eigen::Infinity>();
  out.converged = out.grad_norm <= tol * scale && small_step;
  return out;
}

}  // namespace uotlab::detail
