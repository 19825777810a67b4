#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "uotlab/error.hpp"
#include "uotlab/exact_solver.hpp"
#include "uotlab/marginal.hpp"
#include "uotlab/reg_solver.hpp"

namespace uotlab {
namespace {

using testing::one_by_one;
using testing::uniform;

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

PlanMatrix mat2(double a, double b, double c, double d) {
  PlanMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

SaturatedSet make_set(Index nx, Index ny, std::vector<std::pair<Index, Index>> pairs) {
  SaturatedSet s;
  s.nx = nx;
  s.ny = ny;
  s.pairs = std::move(pairs);
  s.kappa = PlanMatrix::Zero(nx, ny);
  return s;
}

Marginals marg(const Vec& row, const Vec& col) { return Marginals{row, col}; }

TEST(SolveDualExact, OneByOne) {
  const DualExactResult kl1 = solve_dual_exact(one_by_one(1.0));
  EXPECT_TRUE(kl1.diagnostics.converged);
  EXPECT_NEAR(kl1.xi.phi[0], 0.5, 1e-10);
  EXPECT_NEAR(kl1.xi.psi[0], 0.5, 1e-10);

  const DualExactResult kl0 = solve_dual_exact(one_by_one(0.0));
  EXPECT_NEAR(kl0.xi.phi[0], 0.0, 1e-10);
  EXPECT_NEAR(kl0.xi.psi[0], 0.0, 1e-10);

  const DualExactResult q0 = solve_dual_exact(one_by_one(0.0, DivergenceKind::kQuadratic));
  EXPECT_NEAR(q0.xi.phi[0], 0.0, 1e-10);
  EXPECT_NEAR(q0.xi.psi[0], 0.0, 1e-10);
}

TEST(SolveExact, OneByOnePipeline) {
  const ExactSolution ex = solve_exact(one_by_one(1.0));
  ASSERT_TRUE(ex.converged());
  EXPECT_NEAR(ex.kappa(0, 0), 0.0, 1e-10);
  ASSERT_EQ(ex.I0.pairs.size(), 1u);
  const double e = std::exp(-0.5);
  EXPECT_NEAR(ex.m_star.row[0], e, 1e-10);
  EXPECT_NEAR(ex.m_star.col[0], e, 1e-10);
  EXPECT_NEAR(ex.gamma_star.gamma(0, 0), e, 1e-10);
  EXPECT_NEAR(ex.gamma_star.gamma(0, 0), 0.606531, 1e-6);
  EXPECT_EQ(ex.kappa_star_min, kInf);

  const ExactSolution q = solve_exact(one_by_one(0.0, DivergenceKind::kQuadratic));
  EXPECT_NEAR(q.m_star.row[0], 1.0, 1e-10);
  EXPECT_NEAR(q.m_star.col[0], 1.0, 1e-10);
}

// Hand-solved quadratic instance: xi* = 1/2 everywhere, kappa = [[0, 2], [1, 0]],
// I0 = {(0,0), (1,1)}, m* = 1/2 everywhere, gamma* = diag(1/2, 1/2).
TEST(SolveExact, RationalTwoByTwo) {
  const Problem p = testing::from_cost(mat2(1, 3, 2, 1), vec({1, 1}), vec({1, 1}),
                                       DivergenceKind::kQuadratic);
  const ExactSolution ex = solve_exact(p);
  ASSERT_TRUE(ex.converged());
  EXPECT_LE((ex.xi_star.stacked() - Vec::Constant(4, 0.5)).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_LE((ex.kappa - mat2(0, 2, 1, 0)).lpNorm<Eigen::Infinity>(), 1e-10);
  const std::vector<std::pair<Index, Index>> expect{{0, 0}, {1, 1}};
  EXPECT_EQ(ex.I0.pairs, expect);
  EXPECT_NEAR(ex.kappa_star_min, 1.0, 1e-10);
  EXPECT_EQ(ex.I0.kappa_star_argmin, (std::pair<Index, Index>{1, 0}));
  EXPECT_LE((ex.gamma_star.gamma - mat2(0.5, 0, 0, 0.5)).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_FALSE(ex.barrier.degenerate);
}

TEST(SaturatedSet, StableUnderSmallPerturbation) {
  std::mt19937_64 rng(3);
  const Problem p = testing::random_problem(rng, 3, 3);
  const ExactSolution ex = solve_exact(p);
  for (int trial = 0; trial < 20; ++trial) {
    DualPotential xi = ex.xi_star;
    // Downward shifts keep xi feasible; magnitude below sat_tol / 10.
    for (Index i = 0; i < xi.phi.size(); ++i) xi.phi[i] -= uniform(rng, 0, ex.sat_tol / 20);
    for (Index i = 0; i < xi.psi.size(); ++i) xi.psi[i] -= uniform(rng, 0, ex.sat_tol / 20);
    EXPECT_EQ(saturated_set(xi, p, ex.sat_tol).pairs, ex.I0.pairs);
  }
}

TEST(SaturatedSet, Errors) {
  const Problem p = one_by_one(1.0);
  DualPotential far = DualPotential::zeros(1, 1);
  far.phi[0] = -10;
  try {
    saturated_set(far, p, 1e-7);
    FAIL() << "expected degenerate-instance";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateInstance);
  }
  DualPotential infeasible = DualPotential::zeros(1, 1);
  infeasible.phi[0] = 2;
  EXPECT_THROW(saturated_set(infeasible, p, 1e-7), Error);
  EXPECT_THROW(saturated_set(DualPotential::zeros(1, 1), p, 0.0), Error);
}

TEST(SaturatedSet, ContainsAndMask) {
  const SaturatedSet s = make_set(2, 2, {{0, 1}, {1, 0}});
  EXPECT_TRUE(s.contains(0, 1));
  EXPECT_FALSE(s.contains(0, 0));
  EXPECT_EQ(s.mask(), mat2(0, 1, 1, 0));
}

TEST(OptimalMarginals, ClosedForms) {
  const Problem p = one_by_one(1.0);
  DualPotential half = DualPotential::zeros(1, 1);
  half.phi[0] = half.psi[0] = 0.5;
  const Marginals m = optimal_marginals(half, make_divergence(p));
  EXPECT_NEAR(m.row[0], std::exp(-0.5), 1e-15);
  const Marginals q =
      optimal_marginals(DualPotential::zeros(1, 1),
                        make_divergence(one_by_one(0.0, DivergenceKind::kQuadratic)));
  EXPECT_DOUBLE_EQ(q.row[0], 1.0);
  EXPECT_DOUBLE_EQ(q.col[0], 1.0);
}

TEST(MinimalEntropyPlan, FullGridUniformGivesProduct) {
  const SaturatedSet full = make_set(3, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}, {2, 1}});
  const PlanResult r = minimal_entropy_plan(full, marg(Vec::Constant(3, 2.0), Vec::Constant(2, 3.0)));
  ASSERT_TRUE(r.converged);
  EXPECT_LE((r.gamma.gamma - PlanMatrix::Ones(3, 2)).lpNorm<Eigen::Infinity>(), 1e-10);
}

// Row marginals (1, 2), column marginals (2, 1) on the full 2x2 grid: the
// feasible set is gamma(a) = [[a, 1 - a], [2 - a, a]], a in [0, 1].
TEST(MinimalEntropyPlan, MatchesGoldenSectionOnOneParameterFamily) {
  const SaturatedSet full = make_set(2, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  const PlanResult r = minimal_entropy_plan(full, marg(vec({1, 2}), vec({2, 1})));
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-10);
  const double a = testing::golden_section(
      [](double a) { return discrete_entropy(Coupling{mat2(a, 1 - a, 2 - a, a)}); }, 0.0, 1.0);
  EXPECT_LE((r.gamma.gamma - mat2(a, 1 - a, 2 - a, a)).lpNorm<Eigen::Infinity>(), 1e-6);
  EXPECT_NEAR(a, 2.0 / 3, 1e-6);
}

TEST(MinimalEntropyPlan, ThreeEntrySupportIsUnique) {
  const SaturatedSet s = make_set(2, 2, {{0, 0}, {0, 1}, {1, 1}});
  const PlanResult r = minimal_entropy_plan(s, marg(vec({3, 2}), vec({1, 4})));
  ASSERT_TRUE(r.converged);
  EXPECT_LE((r.gamma.gamma - mat2(1, 2, 0, 2)).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(MinimalEntropyPlan, EntropyMinimalOnOptimalFace) {
  // Zero cost saturates every pair; the optimal face is a polytope of plans.
  const Problem p = testing::from_cost(PlanMatrix::Zero(3, 3), vec({1, 2, 0.5}),
                                       vec({0.7, 1.1, 1.6}));
  const ExactSolution ex = solve_exact(p);
  ASSERT_TRUE(ex.converged());
  ASSERT_EQ(ex.I0.pairs.size(), 9u);
  EXPECT_TRUE(ex.barrier.degenerate);
  const double h_star = discrete_entropy(ex.gamma_star);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    // Random combination of 2x2 cycles keeps both marginals fixed.
    PlanMatrix v = PlanMatrix::Zero(3, 3);
    for (Index x = 0; x < 2; ++x) {
      for (Index y = 0; y < 2; ++y) {
        const double w = uniform(rng, -1, 1);
        v(x, y) += w;
        v(x + 1, y + 1) += w;
        v(x, y + 1) -= w;
        v(x + 1, y) -= w;
      }
    }
    const double room = (ex.gamma_star.gamma.array() / v.array().abs().max(1e-300)).minCoeff();
    const PlanMatrix g = ex.gamma_star.gamma + uniform(rng, 0.01, 0.9) * room * v;
    EXPECT_LE(h_star, discrete_entropy(Coupling{g}) + 1e-12);
  }
}

class ExactOptimality : public ::testing::TestWithParam<DivergenceKind> {};

TEST_P(ExactOptimality, DualityComplementarityFeasibility) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const int nx = 1 + static_cast<int>(rng() % 5), ny = 1 + static_cast<int>(rng() % 5);
    const Problem p = testing::random_problem(rng, nx, ny, GetParam());
    const ExactSolution ex = solve_exact(p);
    ASSERT_TRUE(ex.converged()) << trial;
    const double primal = primal_objective(ex.gamma_star, p);
    EXPECT_LE(std::abs(primal + make_divergence(p).conj(-ex.xi_star.stacked())), 1e-8);
    EXPECT_LE(ex.gamma_star.gamma.cwiseProduct(ex.kappa).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GE(ex.kappa.minCoeff(), -1e-9);
    EXPECT_LE((apply_A(ex.gamma_star).stacked() - ex.m_star.stacked()).lpNorm<Eigen::Infinity>(),
              1e-9);
    for (Index x = 0; x < nx; ++x) {
      for (Index y = 0; y < ny; ++y) {
        if (!ex.I0.contains(x, y)) EXPECT_EQ(ex.gamma_star.gamma(x, y), 0.0);
      }
    }
  }
}

TEST_P(ExactOptimality, PlanIsLimitOfRegularizedPlans) {
  std::mt19937_64 rng(67);
  const Problem p = testing::random_problem(rng, 3, 3, GetParam());
  const ExactSolution ex = solve_exact(p);
  const PlanMatrix g = solve_primal_t(p, 1e6).gamma;
  EXPECT_LE((g - ex.gamma_star.gamma).lpNorm<Eigen::Infinity>(), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Shipped, ExactOptimality,
                         ::testing::Values(DivergenceKind::kKl, DivergenceKind::kQuadratic));

TEST(BruteForce, OneByOne) {
  // <c|g> + F(Ag) = g + 2 g (log g - 1), minimized at e^{-1/2}.
  const BruteForceResult kl = brute_force_primal(one_by_one(1.0));
  EXPECT_NEAR(kl.gamma.gamma(0, 0), std::exp(-0.5), 1e-6);
  EXPECT_NEAR(kl.objective, -2 * std::exp(-0.5), 1e-10);
  const BruteForceResult q = brute_force_primal(one_by_one(0.0, DivergenceKind::kQuadratic));
  EXPECT_NEAR(q.gamma.gamma(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(q.objective, 0.0, 1e-10);
}

TEST(BruteForce, AgreesWithRegularizedSolverAtLargeT) {
  std::mt19937_64 rng(71);
  for (DivergenceKind k : {DivergenceKind::kKl, DivergenceKind::kQuadratic}) {
    for (int trial = 0; trial < 3; ++trial) {
      const Problem p = testing::random_problem(rng, 2, 2, k);
      const double bf = brute_force_primal(p).objective;
      const double reg = primal_objective(solve_primal_t(p, 1e6), p);
      EXPECT_NEAR(bf, reg, 1e-6);
    }
  }
}

TEST(BruteForce, RejectsLargeInstances) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(brute_force_primal(testing::random_problem(rng, 2, 5)), Error);
}

}  // namespace
}  // namespace uotlab
