#include "uotlab/exact_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "linalg.hpp"
#include "support_newton.hpp"
#include "uotlab/error.hpp"
#include "uotlab/marginal.hpp"
#include "uotlab/reg_solver.hpp"

namespace uotlab {

bool SaturatedSet::contains(Index x, Index y) const {
  return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(x, y));
}

PlanMatrix SaturatedSet::mask() const {
  PlanMatrix m = PlanMatrix::Zero(nx, ny);
  for (const auto& [x, y] : pairs) m(x, y) = 1.0;
  return m;
}

double default_sat_tol(const Problem& problem) {
  const double cmax = problem.cost.size() > 0 ? problem.cost.cwiseAbs().maxCoeff() : 0.0;
  return std::max(1e-7, 1e-6 * cmax);
}

namespace {

using Pairs = std::vector<std::pair<Index, Index>>;

PlanMatrix slack(const DualPotential& xi, const Problem& problem) {
  return problem.cost - apply_A_adjoint(xi);
}

// Barrier objective scaled by tau: tau F*(-xi) - sum log kappa.
struct Barrier {
  const Problem& problem;
  const DivergenceF& div;
  double tau;

  double value(const Vec& s, bool* feasible) const {
    const DualPotential xi = DualPotential::split(s, problem.nx());
    const PlanMatrix k = slack(xi, problem);
    if (!(k.minCoeff() > 0.0)) {
      *feasible = false;
      return kInf;
    }
    *feasible = true;
    return tau * div.conj(-s) - k.array().log().sum();
  }

  void derivatives(const Vec& s, Vec* g, Mat* H) const {
    const Index nx = problem.nx();
    const Index ny = problem.ny();
    const DualPotential xi = DualPotential::split(s, nx);
    const PlanMatrix k = slack(xi, problem);
    const PlanMatrix inv = k.cwiseInverse();
    *g = -tau * div.conj_grad(-s) + apply_A(Coupling{inv}).stacked();
    *H = Mat::Zero(nx + ny, nx + ny);
    for (Index x = 0; x < nx; ++x) {
      for (Index y = 0; y < ny; ++y) {
        const double w = inv(x, y) * inv(x, y);
        (*H)(x, x) += w;
        (*H)(nx + y, nx + y) += w;
        (*H)(x, nx + y) = w;
        (*H)(nx + y, x) = w;
      }
    }
    H->diagonal() += tau * div.conj_hess_diag(-s);
  }
};

struct PolishResult {
  bool ok = false;
  Vec xi;
  PlanMatrix multipliers;
  int iters = 0;
  bool degenerate = false;
  double kkt = kInf;
};

Pairs pairs_of(const std::vector<bool>& in_w, Index ny) {
  Pairs p;
  for (std::size_t k = 0; k < in_w.size(); ++k) {
    if (in_w[k]) p.emplace_back(static_cast<Index>(k) / ny, static_cast<Index>(k) % ny);
  }
  return p;
}

// Primal active-set method on min F*(-xi) s.t. A* xi <= c, started from the
// barrier iterate. Steps are equality-constrained Newton steps on the working
// set in nullspace form, so cycles in the saturated graph (rank-deficient
// working sets) are handled without gauge fixing.
PolishResult active_set_polish(const Problem& problem, const DivergenceF& div,
                               Vec s, const ExactConfig& cfg) {
  const Index nx = problem.nx();
  const Index ny = problem.ny();
  const Index n = nx + ny;
  const double cscale = 1.0 + problem.cost.cwiseAbs().maxCoeff();

  std::vector<bool> in_w(static_cast<std::size_t>(nx * ny), false);
  {
    const PlanMatrix k = slack(DualPotential::split(s, nx), problem);
    for (Index x = 0; x < nx; ++x) {
      for (Index y = 0; y < ny; ++y) {
        if (k(x, y) <= 1e-9 * cscale) in_w[static_cast<std::size_t>(x * ny + y)] = true;
      }
    }
  }

  PolishResult out;
  for (int it = 0; it < cfg.max_polish_iters; ++it) {
    out.iters = it + 1;
    const Pairs w = pairs_of(in_w, ny);
    const Mat B = detail::restricted_adjoint(nx, ny, w);
    const DualPotential xi = DualPotential::split(s, nx);
    const PlanMatrix k = slack(xi, problem);

    Vec r(static_cast<Index>(w.size()));
    for (std::size_t j = 0; j < w.size(); ++j) r[static_cast<Index>(j)] = k(w[j].first, w[j].second);

    const Vec g = -div.conj_grad(-s);
    const Mat H = Mat(div.conj_hess_diag(-s).asDiagonal());
    Vec step = w.empty() ? Vec::Zero(n) : detail::min_norm_solve(B, r);
    if (w.size() > 0 && (B * step - r).lpNorm<Eigen::Infinity>() > 1e-9 * cscale) {
      return out;  // inconsistent working set
    }
    const Mat Z = detail::null_space(B);
    if (Z.cols() > 0) {
      const Mat ZHZ = Z.transpose() * H * Z;
      const Vec rhs = -Z.transpose() * (g + H * step);
      step += Z * ZHZ.ldlt().solve(rhs);
    }

    // Ratio test against constraints outside the working set.
    double alpha = 1.0;
    Index block = -1;
    const PlanMatrix dA = apply_A_adjoint(DualPotential::split(step, nx));
    for (Index x = 0; x < nx; ++x) {
      for (Index y = 0; y < ny; ++y) {
        if (in_w[static_cast<std::size_t>(x * ny + y)] || dA(x, y) <= 0.0) continue;
        const double a = std::max(0.0, k(x, y)) / dA(x, y);
        if (a < alpha) {
          alpha = a;
          block = x * ny + y;
        }
      }
    }
    // Damping for the first steps when the working set is still wrong.
    if (block < 0 && r.size() > 0 && r.lpNorm<Eigen::Infinity>() == 0.0) {
      const double f0 = div.conj(-s);
      while (alpha > 1e-10 && div.conj(-(s + alpha * step)) > f0 + 1e-4 * alpha * g.dot(step) &&
             std::abs(alpha * g.dot(step)) > 1e-15 * (1.0 + std::abs(f0))) {
        alpha *= 0.5;
      }
    }
    s += alpha * step;
    if (block >= 0) {
      in_w[static_cast<std::size_t>(block)] = true;
      continue;
    }
    if (alpha * step.lpNorm<Eigen::Infinity>() >
        1e-12 * (1.0 + s.lpNorm<Eigen::Infinity>())) {
      continue;
    }

    // Stationary on the working set: check the multiplier signs.
    const Vec m = div.conj_grad(-s);
    if (w.empty()) return out;
    // Least-squares multipliers keep full relative accuracy on light nodes;
    // NNLS only steps in when they have the wrong sign.
    const Vec ls = detail::min_norm_solve(B.transpose(), m);
    const double ls_res = (B.transpose() * ls - m).lpNorm<Eigen::Infinity>();
    const Vec lam = ls.minCoeff() >= 0.0 ? ls : detail::nnls(B.transpose(), m);
    const double kkt = std::min(ls.minCoeff() >= 0.0 ? ls_res : kInf,
                                (B.transpose() * lam - m).lpNorm<Eigen::Infinity>());
    if (kkt <= 1e-9 * (1.0 + m.lpNorm<Eigen::Infinity>())) {
      out.ok = true;
      out.xi = s;
      out.kkt = kkt;
      out.multipliers = PlanMatrix::Zero(nx, ny);
      for (std::size_t j = 0; j < w.size(); ++j) {
        out.multipliers(w[j].first, w[j].second) = lam[static_cast<Index>(j)];
      }
      Eigen::FullPivLU<Mat> lu(B);
      out.degenerate = lu.rank() < B.rows() || (lam.array() <= 0.0).any();
      return out;
    }
    Index drop = 0;
    ls.minCoeff(&drop);
    if (!(ls[drop] < 0.0)) return out;
    in_w[static_cast<std::size_t>(w[static_cast<std::size_t>(drop)].first * ny +
                                  w[static_cast<std::size_t>(drop)].second)] = false;
  }
  return out;
}

}  // namespace

DualExactResult solve_dual_exact(const Problem& problem, const ExactConfig& config) {
  problem.validate();
  if (!(config.tau0 > 0.0) || !(config.tau_factor > 1.0) || !(config.gap_target > 0.0)) {
    throw_invalid("barrier parameters must satisfy tau0 > 0, tau_factor > 1, gap_target > 0");
  }
  const Index nx = problem.nx();
  const Index ny = problem.ny();
  const DivergenceF div = make_divergence(problem);
  const double n_con = static_cast<double>(nx * ny);

  DualExactResult out;
  BarrierDiagnostics& diag = out.diagnostics;
  // c >= 0, so -1/2 everywhere is strictly feasible with slack c + 1.
  Vec s = Vec::Constant(nx + ny, -0.5);
  double tau = config.tau0;
  bool all_inner_ok = true;

  for (;;) {
    const Barrier bar{problem, div, tau};
    bool feasible = true;
    double f = bar.value(s, &feasible);
    bool inner_ok = false;
    const int cap = diag.outer_iters == 0 ? 4 * config.max_inner_iters : config.max_inner_iters;
    for (int it = 0; it < cap; ++it) {
      Vec g;
      Mat H;
      bar.derivatives(s, &g, &H);
      bool ridged = false;
      const Vec d = detail::solve_spd(H, -g, 0.0, &ridged);
      const double dec = -g.dot(d);
      ++diag.inner_iters;
      if (dec <= 1e-10) {
        inner_ok = true;
        break;
      }
      // Largest step keeping every slack positive.
      const PlanMatrix k = slack(DualPotential::split(s, nx), problem);
      const PlanMatrix dA = apply_A_adjoint(DualPotential::split(d, nx));
      double amax = kInf;
      for (Index x = 0; x < nx; ++x) {
        for (Index y = 0; y < ny; ++y) {
          if (dA(x, y) > 0.0) amax = std::min(amax, k(x, y) / dA(x, y));
        }
      }
      double alpha = std::min(1.0, 0.99 * amax);
      bool accepted = false;
      while (alpha > 1e-14) {
        const Vec trial = s + alpha * d;
        const double ft = bar.value(trial, &feasible);
        if (feasible && ft <= f - 1e-4 * alpha * dec) {
          s = trial;
          f = ft;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        // Decrease below rounding: the iterate is as good as it gets.
        inner_ok = dec <= 1e-6;
        break;
      }
    }
    all_inner_ok = all_inner_ok && inner_ok;
    ++diag.outer_iters;
    diag.final_tau = tau;
    if (n_con / tau < config.gap_target) break;
    tau *= config.tau_factor;
  }
  diag.barrier_converged = all_inner_ok;

  const PlanMatrix k = slack(DualPotential::split(s, nx), problem);
  PlanMatrix lam = (k * tau).cwiseInverse();
  out.xi = DualPotential::split(s, nx);
  out.multipliers = lam;

  if (config.polish) {
    const PolishResult pol = active_set_polish(problem, div, s, config);
    diag.polish_iters = pol.iters;
    if (pol.ok) {
      diag.polished = true;
      diag.degenerate = pol.degenerate;
      out.xi = DualPotential::split(pol.xi, nx);
      out.multipliers = pol.multipliers;
    }
  }

  const Vec m = div.conj_grad(-out.xi.stacked());
  diag.kkt_residual =
      (apply_A(Coupling{out.multipliers}).stacked() - m).lpNorm<Eigen::Infinity>();
  diag.min_slack = slack(out.xi, problem).minCoeff();
  diag.converged = diag.min_slack >= -config.feas_tol &&
                   diag.kkt_residual <= 1e-8 * (1.0 + m.lpNorm<Eigen::Infinity>());
  return out;
}

SaturatedSet saturated_set(const DualPotential& xi_star, const Problem& problem,
                           double sat_tol, double feas_tol) {
  if (xi_star.nx() != problem.nx() || xi_star.ny() != problem.ny()) {
    throw_invalid("dual potential shape does not match problem");
  }
  if (!(sat_tol > 0.0)) throw_invalid("sat_tol must be positive");
  SaturatedSet s;
  s.nx = problem.nx();
  s.ny = problem.ny();
  s.kappa = slack(xi_star, problem);
  if (s.kappa.size() > 0 && s.kappa.minCoeff() < -feas_tol) {
    throw_invalid("dual potential violates A* xi <= c beyond feas_tol");
  }
  for (Index x = 0; x < s.nx; ++x) {
    for (Index y = 0; y < s.ny; ++y) {
      const double kv = s.kappa(x, y);
      if (kv <= sat_tol) {
        s.pairs.emplace_back(x, y);
      } else if (kv < s.kappa_star_min) {
        s.kappa_star_min = kv;
        s.kappa_star_argmin = {x, y};
      }
    }
  }
  if (s.pairs.empty()) {
    throw Error(ErrorKind::kDegenerateInstance, "saturated set I0 is empty");
  }
  return s;
}

Marginals optimal_marginals(const DualPotential& xi_star, const DivergenceF& div) {
  if (xi_star.size() != div.size()) throw_invalid("dual potential size does not match divergence");
  return Marginals::split(div.conj_grad(-xi_star.stacked()), xi_star.nx());
}

PlanResult minimal_entropy_plan(const SaturatedSet& I0, const Marginals& m_star,
                                const ExactConfig& config) {
  const Index nx = I0.nx;
  const Index ny = I0.ny;
  if (m_star.row.size() != nx || m_star.col.size() != ny) {
    throw_invalid("marginals do not match saturated set shape");
  }
  const Vec m = m_star.stacked();
  if ((m.array() < 0.0).any() || !m.allFinite()) throw_invalid("marginals must be finite and nonnegative");
  const double tol = config.proj_tol * std::max(1.0, m.lpNorm<Eigen::Infinity>());
  const PlanMatrix K = I0.mask();

  auto residual = [&](const PlanMatrix& g) {
    return (apply_A(Coupling{g}).stacked() - m).lpNorm<Eigen::Infinity>();
  };

  PlanResult out;
  Vec u = Vec::Ones(nx);
  Vec v = Vec::Ones(ny);
  double best = kInf;
  int since_best = 0;
  PlanMatrix g;
  int it = 0;
  for (; it < config.max_scaling_iters; ++it) {
    const Vec Kv = K * v;
    for (Index x = 0; x < nx; ++x) u[x] = Kv[x] > 0.0 ? m_star.row[x] / Kv[x] : 0.0;
    const Vec Ku = K.transpose() * u;
    for (Index y = 0; y < ny; ++y) v[y] = Ku[y] > 0.0 ? m_star.col[y] / Ku[y] : 0.0;
    if (it % 10 == 9 || it == config.max_scaling_iters - 1) {
      g = u.asDiagonal() * K * v.asDiagonal();
      const double res = residual(g);
      if (!std::isfinite(res)) break;
      if (res <= tol) {
        out.gamma = Coupling{g};
        out.converged = true;
        out.residual = res;
        out.iters = it + 1;
        return out;
      }
      if (res < 0.99 * best) {
        best = res;
        since_best = 0;
      } else if (++since_best > 100) {
        break;  // stagnation
      }
    }
  }

  const detail::SupportNewtonResult nr = detail::minimize_support_exp(nx, ny, I0.pairs, m);
  PlanMatrix gn = PlanMatrix::Zero(nx, ny);
  for (const auto& [x, y] : I0.pairs) gn(x, y) = std::exp(nr.z[x] + nr.z[nx + y]);
  const double res_n = residual(gn);
  out.used_fallback = true;
  out.iters = it + nr.iters;
  if (g.size() == 0 || !(residual(g) < res_n)) {
    out.gamma = Coupling{gn};
    out.residual = res_n;
  } else {
    out.gamma = Coupling{g};
    out.residual = residual(g);
  }
  out.converged = out.residual <= tol;
  return out;
}

ExactSolution solve_exact(const Problem& problem, const ExactConfig& config) {
  ExactSolution sol;
  const DualExactResult dual = solve_dual_exact(problem, config);
  sol.xi_star = dual.xi;
  sol.barrier = dual.diagnostics;
  sol.sat_tol = config.sat_tol.value_or(default_sat_tol(problem));
  sol.I0 = saturated_set(sol.xi_star, problem, sol.sat_tol, config.feas_tol);
  sol.kappa = sol.I0.kappa;
  sol.kappa_star_min = sol.I0.kappa_star_min;
  sol.m_star = optimal_marginals(sol.xi_star, make_divergence(problem));
  sol.plan = minimal_entropy_plan(sol.I0, sol.m_star, config);
  sol.gamma_star = sol.plan.gamma;
  return sol;
}

namespace {

// Golden-section minimization of f on [lo, hi].
template <class F>
double golden_section(F&& f, double lo, double hi, int iters = 80) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && b - a > 1e-15 * (1.0 + std::abs(a)); ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  // Endpoints matter: the optimum often sits on the boundary gamma = 0.
  double best = mid, fbest = f(mid);
  for (double cand : {lo, hi}) {
    const double fv = f(cand);
    if (fv < fbest) {
      fbest = fv;
      best = cand;
    }
  }
  return best;
}

}  // namespace

BruteForceResult brute_force_primal(const Problem& problem, const BruteForceConfig& config) {
  problem.validate();
  const Index nx = problem.nx();
  const Index ny = problem.ny();
  const Index n = nx * ny;
  if (n > 9) throw_invalid("brute_force_primal is limited to |X||Y| <= 9");
  const DivergenceF div = make_divergence(problem);
  const double upper = 2.0 * std::max(1.0, div.q().maxCoeff()) + 1.0;

  auto objective = [&](const Vec& g) {
    PlanMatrix G = Eigen::Map<const PlanMatrix>(g.data(), nx, ny);
    const Marginals m = apply_A(Coupling{G});
    return frobenius_dot(problem.cost, G) + div.value(m.stacked());
  };

  // Search directions: coordinates, pairs e_i +- e_j, and 2x2 cycles.
  std::vector<Vec> dirs;
  for (Index i = 0; i < n; ++i) dirs.push_back(Vec::Unit(n, i));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      dirs.push_back(Vec::Unit(n, i) - Vec::Unit(n, j));
      dirs.push_back(Vec::Unit(n, i) + Vec::Unit(n, j));
    }
  }
  for (Index x0 = 0; x0 < nx; ++x0) {
    for (Index x1 = x0 + 1; x1 < nx; ++x1) {
      for (Index y0 = 0; y0 < ny; ++y0) {
        for (Index y1 = y0 + 1; y1 < ny; ++y1) {
          Vec d = Vec::Zero(n);
          d[x0 * ny + y0] = 1;
          d[x1 * ny + y1] = 1;
          d[x0 * ny + y1] = -1;
          d[x1 * ny + y0] = -1;
          dirs.push_back(d);
        }
      }
    }
  }

  auto line_range = [&](const Vec& g, const Vec& d, double* lo, double* hi) {
    *lo = -kInf;
    *hi = kInf;
    for (Index i = 0; i < n; ++i) {
      if (d[i] > 0) {
        *lo = std::max(*lo, -g[i] / d[i]);
        *hi = std::min(*hi, (upper - g[i]) / d[i]);
      } else if (d[i] < 0) {
        *lo = std::max(*lo, (upper - g[i]) / d[i]);
        *hi = std::min(*hi, -g[i] / d[i]);
      }
    }
  };

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 0.5 * upper);

  BruteForceResult best;
  best.objective = kInf;
  for (int r = 0; r < std::max(1, config.restarts); ++r) {
    Vec g(n);
    for (Index i = 0; i < n; ++i) g[i] = r == 0 ? 0.0 : unif(rng);
    double f = objective(g);
    for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
      const double f_start = f;
      for (const Vec& d : dirs) {
        double lo, hi;
        line_range(g, d, &lo, &hi);
        if (!(hi > lo)) continue;
        const double a = golden_section([&](double s) { return objective(g + s * d); }, lo, hi);
        const Vec cand = (g + a * d).cwiseMax(0.0);
        const double fc = objective(cand);
        if (fc < f) {
          g = cand;
          f = fc;
        }
      }
      if (f_start - f <= 1e-15 * (1.0 + std::abs(f))) break;
    }
    // Pattern search with shrinking steps.
    for (double h = 1e-2 * upper; h > 1e-13; h *= 0.5) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (const Vec& d : dirs) {
          for (double sgn : {1.0, -1.0}) {
            const Vec cand = g + sgn * h * d;
            if (cand.minCoeff() < 0.0) continue;
            const double fc = objective(cand);
            if (fc < f) {
              g = cand;
              f = fc;
              improved = true;
            }
          }
        }
      }
    }
    if (f < best.objective) {
      best.objective = f;
      best.gamma = Coupling{Eigen::Map<const PlanMatrix>(g.data(), nx, ny)};
    }
  }
  return best;
}

}  // namespace uotlab
