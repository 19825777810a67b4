#include "uotlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <thread>

#include "uotlab/error.hpp"
#include "uotlab/marginal.hpp"

namespace uotlab {

const char* to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kPointClouds: return "point-clouds";
    case DatasetKind::kGaussians1d: return "gaussians-1d";
  }
  return "?";
}

DatasetKind parse_dataset_kind(const std::string& name) {
  if (name == "point-clouds") return DatasetKind::kPointClouds;
  if (name == "gaussians-1d") return DatasetKind::kGaussians1d;
  throw_invalid("unknown dataset kind '" + name + "'");
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Rescales w to total `mass`; the last entry absorbs the rounding so that a
// left-to-right sum returns `mass` exactly.
Vec with_mass(Vec w, double mass) {
  w *= mass / w.sum();
  const double head = std::accumulate(w.data(), w.data() + w.size() - 1, 0.0);
  w[w.size() - 1] = mass - head;
  return w;
}

}  // namespace

Problem gen_dataset(const DatasetSpec& spec) {
  DivergenceSpec div;
  div.kind = spec.divergence;
  if (spec.divergence == DivergenceKind::kCustom) {
    throw_invalid("datasets ship with kl or quadratic divergences only");
  }

  if (spec.kind == DatasetKind::kPointClouds) {
    if (spec.n_x < 1 || spec.n_y < 1) throw_invalid("cloud sizes must be positive");
    if (spec.n_outliers < 0 || spec.n_outliers > spec.n_y) {
      throw_invalid("n_outliers must lie in [0, n_y]");
    }
    if (!(spec.mass_x_clouds > 0.0 && spec.mass_y_clouds > 0.0)) {
      throw_invalid("masses must be positive");
    }
    std::mt19937_64 rng(spec.seed);
    Mat px(spec.n_x, 2), py(spec.n_y, 2);
    for (Index i = 0; i < px.rows(); ++i) {
      px(i, 0) = unit_draw(rng);
      px(i, 1) = unit_draw(rng);
    }
    for (Index i = 0; i < py.rows(); ++i) {
      py(i, 0) = unit_draw(rng);
      py(i, 1) = unit_draw(rng);
    }
    for (int k = 0; k < spec.n_outliers; ++k) {
      py.row(spec.n_y - 1 - k).array() += spec.outlier_shift;
    }
    Vec mu = with_mass(Vec::Ones(spec.n_x), spec.mass_x_clouds);
    Vec nu = with_mass(Vec::Ones(spec.n_y), spec.mass_y_clouds);
    return make_problem(std::move(px), std::move(py), std::move(mu), std::move(nu),
                        spec.cost, div);
  }

  if (spec.grid_nodes < 2) throw_invalid("grid_nodes must be at least 2");
  if (!(spec.std_dev > 0.0)) throw_invalid("std_dev must be positive");
  if (!(spec.mass_x_gauss > 0.0 && spec.mass_y_gauss > 0.0)) {
    throw_invalid("masses must be positive");
  }
  const Index n = spec.grid_nodes;
  Mat grid(n, 1);
  for (Index i = 0; i < n; ++i) grid(i, 0) = static_cast<double>(i) / static_cast<double>(n - 1);
  auto density = [&](double mean) {
    Vec w(n);
    for (Index i = 0; i < n; ++i) {
      const double z = (grid(i, 0) - mean) / spec.std_dev;
      w[i] = std::exp(-0.5 * z * z);
    }
    return w;
  };
  Vec mu = with_mass(density(spec.mean_x), spec.mass_x_gauss);
  Vec nu = with_mass(density(spec.mean_y), spec.mass_y_gauss);
  return make_problem(grid, grid, std::move(mu), std::move(nu), spec.cost, div);
}

std::vector<double> geometric_grid(double t_min, double t_max, int n) {
  if (!(t_min > 0.0 && t_min < t_max) || !std::isfinite(t_max)) {
    throw_invalid("grid needs 0 < t_min < t_max < inf");
  }
  if (n < 2) throw_invalid("grid needs at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double lo = std::log(t_min), hi = std::log(t_max);
  for (int i = 0; i < n; ++i) {
    g[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / (n - 1));
  }
  g.front() = t_min;
  g.back() = t_max;
  return g;
}

int threads_from_env() {
  const char* v = std::getenv("UOTLAB_THREADS");
  if (!v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1) return 1;
  return static_cast<int>(std::min<long>(n, 256));
}

namespace {

std::uint32_t flags_of(const RegSolution& s) {
  std::uint32_t f = 0;
  if (!s.converged) f |= kFlagNonConverged;
  if (s.diagnostics.overflow) f |= kFlagOverflow;
  if (s.diagnostics.ridge) f |= kFlagRidge;
  return f;
}

void probe_ode(TrajectoryPoint& p, const Problem& problem, const SweepConfig& cfg) {
  RegSolveConfig sc = cfg.solver;
  sc.init = InitKind::kWarm;
  const double r = cfg.fd_ratio;
  const int half = cfg.fd_points / 2;
  std::vector<double> ts{p.t};
  std::vector<DualPotential> xis{p.xi};
  bool ok = true;
  // Walk outwards on each side, warm-starting from the previous node.
  for (double dir : {-1.0, 1.0}) {
    DualPotential warm = p.xi;
    for (int k = 1; k <= half && ok; ++k) {
      const double tk = p.t * std::pow(r, dir * k);
      sc.warm_xi = warm;
      const RegSolution s = solve_dual_t(problem, tk, sc);
      ok = s.converged;
      ts.push_back(tk);
      xis.push_back(s.xi);
      warm = s.xi;
    }
  }
  if (!ok) {
    p.flags |= kFlagOdeUnavailable;
    p.ode_residual = std::nan("");
    p.ode_source = std::nan("");
    return;
  }
  Vec xi_dot;
  if (cfg.fd_points == 3) {
    xi_dot = central_difference(xis[1], ts[1], xis[2], ts[2], p.t);
  } else {
    xi_dot = stencil_derivative(ts, xis, p.t);
  }
  p.ode_residual = ode_residual(p.xi, xi_dot, p.t, problem);
  p.ode_source = ode_source_norm(p.xi, p.t, problem);
}

}  // namespace

SweepResult run_sweep(const Problem& problem, const SweepConfig& cfg) {
  problem.validate();
  if (cfg.n_points < 8) throw_invalid("sweep needs n_points >= 8");
  if (!(cfg.fd_ratio == 0.0 || cfg.fd_ratio > 1.0)) {
    throw_invalid("fd_ratio must be 0 (off) or greater than 1");
  }
  if (cfg.threads < 1) throw_invalid("threads must be at least 1");
  if (cfg.fd_points != 3 && cfg.fd_points != 5) throw_invalid("fd_points must be 3 or 5");
  const std::vector<double> grid = geometric_grid(cfg.t_min, cfg.t_max, cfg.n_points);

  SweepResult res;
  res.exact = solve_exact(problem, cfg.exact);
  res.exact_entropy = discrete_entropy(res.exact.gamma_star);
  const DualPotential& xi_star = res.exact.xi_star;
  const PlanMatrix& g_star = res.exact.gamma_star.gamma;

  std::optional<DualPotential> prev;
  for (double t : grid) {
    RegSolveConfig sc = cfg.solver;
    if (cfg.warm_start && prev) {
      sc.init = InitKind::kWarm;
      sc.warm_xi = *prev;
    }
    const RegSolution s = solve_dual_t(problem, t, sc);
    TrajectoryPoint p;
    p.t = t;
    p.xi = s.xi;
    p.gamma = s.gamma;
    p.d = compute_d(s.xi, xi_star, t);
    p.dual_err = (s.xi.stacked() - xi_star.stacked()).norm();
    p.primal_err = (s.gamma.gamma - g_star).norm();
    p.entropy_val = discrete_entropy(s.gamma);
    p.iters = s.iters;
    p.flags = flags_of(s);
    if (cfg.fd_ratio == 0.0) {
      p.flags |= kFlagOdeUnavailable;
      p.ode_residual = std::nan("");
      p.ode_source = std::nan("");
    }
    res.points.push_back(std::move(p));
    prev = s.xi;
  }

  if (cfg.fd_ratio > 0.0) {
    // Each probe depends only on its own row, so the split across threads
    // cannot change any output.
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < res.points.size(); i = next++) {
        probe_ode(res.points[i], problem, cfg);
      }
    };
    const int nt = std::min<int>(cfg.threads, static_cast<int>(res.points.size()));
    std::vector<std::thread> pool;
    for (int k = 1; k < nt; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }

  std::vector<std::pair<double, double>> dual, primal;
  for (const TrajectoryPoint& p : res.points) {
    if (p.flags & kFlagNonConverged) continue;
    dual.emplace_back(p.t, p.dual_err);
    primal.emplace_back(p.t, p.primal_err);
  }
  try {
    res.dual_fit = fit_rate(dual);
  } catch (const Error&) {
  }
  try {
    res.primal_fit = fit_rate(primal);
  } catch (const Error&) {
  }
  try {
    res.d_star = solve_d_star(res.exact, make_divergence(problem));
  } catch (const Error&) {
  }
  try {
    res.decay_fit = fit_offsupport_decay(res.points, res.exact, problem);
  } catch (const Error&) {
  }
  res.e0 = e0_diagnostics(res.exact);
  return res;
}

SweepSummary summarize_sweep(const SweepResult& r, const Problem& problem) {
  const ExactSolution& e = r.exact;
  SweepSummary s;
  s.primal_value = primal_objective(e.gamma_star, problem);
  s.duality_gap = s.primal_value + make_divergence(problem).conj(-e.xi_star.stacked());
  s.max_complementarity = e.gamma_star.gamma.cwiseProduct(e.kappa).cwiseAbs().maxCoeff();
  s.min_slack = e.kappa.minCoeff();
  s.max_entropy_excess = -kInf;
  for (const TrajectoryPoint& p : r.points) {
    s.max_d_norm = std::max(s.max_d_norm, p.d.norm());
    s.max_entropy_excess = std::max(s.max_entropy_excess, p.entropy_val - r.exact_entropy);
    if (p.flags & kFlagNonConverged) ++s.nonconverged_rows;
    if (p.t < 10.0) continue;
    if ((p.flags & kFlagOdeUnavailable) || !std::isfinite(p.ode_residual)) {
      ++s.ode_missing_rows;
      continue;
    }
    const double ratio = p.ode_source > 0.0 ? p.ode_residual / p.ode_source
                                            : (p.ode_residual > 0.0 ? kInf : 0.0);
    s.ode_max_ratio = std::max(s.ode_max_ratio.value_or(0.0), ratio);
  }
  return s;
}

}  // namespace uotlab
