#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace uotlab::testing {

Problem one_by_one(double c, DivergenceKind kind, double mu, double nu) {
  PlanMatrix cost(1, 1);
  cost(0, 0) = c;
  Vec m(1), n(1);
  m << mu;
  n << nu;
  return from_cost(cost, m, n, kind);
}

Problem from_cost(const PlanMatrix& c, const Vec& mu, const Vec& nu, DivergenceKind kind) {
  DivergenceSpec div;
  div.kind = kind;
  return make_problem_from_cost(c, mu, nu, div);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Problem random_problem(std::mt19937_64& rng, int nx, int ny, DivergenceKind kind) {
  Mat px(nx, 2), py(ny, 2);
  for (int i = 0; i < nx; ++i) px.row(i) << uniform(rng), uniform(rng);
  for (int j = 0; j < ny; ++j) py.row(j) << uniform(rng), uniform(rng);
  Vec mu(nx), nu(ny);
  for (int i = 0; i < nx; ++i) mu[i] = uniform(rng, 0.5, 2.0);
  for (int j = 0; j < ny; ++j) nu[j] = uniform(rng, 0.5, 2.0);
  DivergenceSpec div;
  div.kind = kind;
  return make_problem(px, py, mu, nu, CostKind::kSqEuclidean, div);
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  if (flo * f(hi) > 0.0) throw std::invalid_argument("bisect: no sign change");
  for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& g, const Vec& x, double h) {
  const Vec g0 = g(x);
  Mat J(g0.size(), x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    J.col(i) = (g(a) - g(b)) / (2 * h);
  }
  return J;
}

double conj_closed_form(DivergenceKind kind, double y) {
  switch (kind) {
    case DivergenceKind::kKl: return std::exp(y);
    case DivergenceKind::kQuadratic: return 0.5 * y * y + y;
    default: throw std::invalid_argument("no closed form");
  }
}

double conj_d1_closed_form(DivergenceKind kind, double y) {
  switch (kind) {
    case DivergenceKind::kKl: return std::exp(y);
    case DivergenceKind::kQuadratic: return y + 1.0;
    default: throw std::invalid_argument("no closed form");
  }
}

namespace {

double phi_closed_form(DivergenceKind kind, double x) {
  switch (kind) {
    case DivergenceKind::kKl:
      if (x < 0.0) return INFINITY;
      return x == 0.0 ? 0.0 : x * (std::log(x) - 1.0);
    case DivergenceKind::kQuadratic: return 0.5 * (x - 1.0) * (x - 1.0);
    default: throw std::invalid_argument("no closed form");
  }
}

}  // namespace

double kantorovich_oracle(const Problem& p, double t, const Vec& xi) {
  const Index nx = p.nx(), ny = p.ny();
  const DivergenceKind k = p.divergence.kind;
  double v = 0.0;
  for (Index x = 0; x < nx; ++x) v += p.mu[x] * conj_closed_form(k, -xi[x]);
  for (Index y = 0; y < ny; ++y) v += p.nu[y] * conj_closed_form(k, -xi[nx + y]);
  for (Index x = 0; x < nx; ++x) {
    for (Index y = 0; y < ny; ++y) v += std::exp(t * (xi[x] + xi[nx + y] - p.cost(x, y))) / t;
  }
  return v;
}

Vec kantorovich_grad_oracle(const Problem& p, double t, const Vec& xi) {
  const Index nx = p.nx(), ny = p.ny();
  const DivergenceKind k = p.divergence.kind;
  Vec g(nx + ny);
  for (Index x = 0; x < nx; ++x) g[x] = -p.mu[x] * conj_d1_closed_form(k, -xi[x]);
  for (Index y = 0; y < ny; ++y) g[nx + y] = -p.nu[y] * conj_d1_closed_form(k, -xi[nx + y]);
  for (Index x = 0; x < nx; ++x) {
    for (Index y = 0; y < ny; ++y) {
      const double e = std::exp(t * (xi[x] + xi[nx + y] - p.cost(x, y)));
      g[x] += e;
      g[nx + y] += e;
    }
  }
  return g;
}

double regularized_objective_oracle(const Problem& p, double t, const PlanMatrix& gamma) {
  const Index nx = p.nx(), ny = p.ny();
  const DivergenceKind k = p.divergence.kind;
  double v = 0.0, h = 0.0;
  Vec row = Vec::Zero(nx), col = Vec::Zero(ny);
  for (Index x = 0; x < nx; ++x) {
    for (Index y = 0; y < ny; ++y) {
      const double g = gamma(x, y);
      v += p.cost(x, y) * g;
      if (g > 0.0) h += g * (std::log(g) - 1.0);
      row[x] += g;
      col[y] += g;
    }
  }
  for (Index x = 0; x < nx; ++x) v += p.mu[x] * phi_closed_form(k, row[x] / p.mu[x]);
  for (Index y = 0; y < ny; ++y) v += p.nu[y] * phi_closed_form(k, col[y] / p.nu[y]);
  return v + h / t;
}

Vec gradient_descent_dual(const Problem& p, double t, double grad_tol, int max_iters) {
  Vec xi = Vec::Zero(p.n_dual());
  double step = 1.0;
  double f = kantorovich_oracle(p, t, xi);
  for (int it = 0; it < max_iters; ++it) {
    const Vec g = kantorovich_grad_oracle(p, t, xi);
    if (g.lpNorm<Eigen::Infinity>() <= grad_tol) return xi;
    step *= 2.0;
    while (true) {
      const Vec trial = xi - step * g;
      const double ft = kantorovich_oracle(p, t, trial);
      const double decrease = 0.5 * step * g.squaredNorm();
      bool accept = ft <= f - decrease;
      // Near the optimum the decrease drops below rounding in f; fall back
      // to asking for a smaller gradient.
      if (!accept && decrease < 1e-13 * (1.0 + std::abs(f))) {
        accept = kantorovich_grad_oracle(p, t, trial).norm() < g.norm();
      }
      if (accept) {
        xi = trial;
        f = ft;
        break;
      }
      step *= 0.5;
      if (step < 1e-300) return xi;
    }
  }
  return xi;
}

}  // namespace uotlab::testing
