#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "uotlab/error.hpp"
#include "uotlab/marginal.hpp"
#include "uotlab/types.hpp"

namespace uotlab {
namespace {

using testing::uniform;

PlanMatrix plan(std::initializer_list<std::initializer_list<double>> rows) {
  PlanMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(ApplyA, RowAndColumnSums) {
  const Marginals m = apply_A(Coupling{plan({{1, 2}, {3, 4}})});
  EXPECT_EQ(m.row, vec({3, 7}));
  EXPECT_EQ(m.col, vec({4, 6}));
}

TEST(ApplyA, ZeroPlan) {
  const Marginals m = apply_A(Coupling{PlanMatrix::Zero(2, 3)});
  EXPECT_TRUE(m.row.isZero());
  EXPECT_TRUE(m.col.isZero());
}

TEST(ApplyA, MatchesExplicitMatrix) {
  std::mt19937_64 rng(11);
  const Index nx = 3, ny = 3;
  PlanMatrix g(nx, ny);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = uniform(rng);
  // A as a (nx + ny) x (nx ny) 0/1 matrix acting on the row-major vector of g.
  Mat A = Mat::Zero(nx + ny, nx * ny);
  for (Index x = 0; x < nx; ++x) {
    for (Index y = 0; y < ny; ++y) {
      A(x, x * ny + y) = 1.0;
      A(nx + y, x * ny + y) = 1.0;
    }
  }
  const Vec flat = Eigen::Map<const Vec>(g.data(), g.size());
  const Vec expected = A * flat;
  EXPECT_LE((apply_A(Coupling{g}).stacked() - expected).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(ApplyA, ShapeCheckedAgainstProblem) {
  const Problem p = testing::one_by_one(1.0);
  EXPECT_THROW(apply_A(Coupling{PlanMatrix::Zero(2, 2)}, p), Error);
}

TEST(ApplyAdjoint, DirectSum) {
  DualPotential xi{vec({1, 2}), vec({10})};
  EXPECT_EQ(apply_A_adjoint(xi), plan({{11}, {12}}));
  EXPECT_TRUE(apply_A_adjoint(DualPotential::zeros(2, 3)).isZero());
}

TEST(ApplyAdjoint, Adjointness) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Index nx = 1 + static_cast<Index>(rng() % 5), ny = 1 + static_cast<Index>(rng() % 5);
    DualPotential xi{Vec(nx), Vec(ny)};
    for (Index i = 0; i < nx; ++i) xi.phi[i] = uniform(rng, -2, 2);
    for (Index j = 0; j < ny; ++j) xi.psi[j] = uniform(rng, -2, 2);
    PlanMatrix g(nx, ny);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = uniform(rng);
    const double lhs = frobenius_dot(apply_A_adjoint(xi), g);
    const double rhs = xi.stacked().dot(apply_A(Coupling{g}).stacked());
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(ApplyAdjoint, MassConservation) {
  std::mt19937_64 rng(5);
  PlanMatrix g(4, 3);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = uniform(rng);
  const Marginals m = apply_A(Coupling{g});
  EXPECT_NEAR(m.row.sum(), g.sum(), 1e-14);
  EXPECT_NEAR(m.col.sum(), g.sum(), 1e-14);
}

TEST(ApplyAdjoint, KernelIsOneDimensional) {
  std::mt19937_64 rng(8);
  for (Index nx = 1; nx <= 4; ++nx) {
    for (Index ny = 1; ny <= 4; ++ny) {
      DualPotential k{Vec::Ones(nx), -Vec::Ones(ny)};
      EXPECT_TRUE(apply_A_adjoint(k).isZero());
      // Matrix of A* on the stacked potentials; its rank must be nx + ny - 1.
      Mat M(nx * ny, nx + ny);
      for (Index c = 0; c < nx + ny; ++c) {
        Vec e = Vec::Zero(nx + ny);
        e[c] = 1.0;
        const PlanMatrix col = apply_A_adjoint(DualPotential::split(e, nx));
        M.col(c) = Eigen::Map<const Vec>(col.data(), col.size());
      }
      Eigen::FullPivLU<Mat> lu(M);
      EXPECT_EQ(lu.rank(), nx + ny - 1) << nx << "x" << ny;
    }
  }
}

TEST(Entropy, Values) {
  EXPECT_DOUBLE_EQ(discrete_entropy(Coupling{plan({{1}})}), -1.0);
  EXPECT_NEAR(discrete_entropy(Coupling{plan({{std::exp(1.0)}})}), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(discrete_entropy(Coupling{plan({{0, 1}, {0, 0}})}), -1.0);
}

TEST(Entropy, RejectsNegativeEntries) {
  EXPECT_THROW(discrete_entropy(Coupling{plan({{-1e-3}})}), Error);
}

TEST(Entropy, StrictMidpointConvexity) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    PlanMatrix a(2, 3), b(2, 3);
    for (Index i = 0; i < a.size(); ++i) {
      a.data()[i] = uniform(rng, 1e-3, 3);
      b.data()[i] = uniform(rng, 1e-3, 3);
    }
    const double mid = discrete_entropy(Coupling{(0.5 * (a + b)).eval()});
    const double avg = 0.5 * (discrete_entropy(Coupling{a}) + discrete_entropy(Coupling{b}));
    EXPECT_LT(mid, avg);
  }
}

TEST(BuildCost, Kinds) {
  Mat x(1, 1), y(1, 1);
  x << 0.0;
  y << 2.0;
  EXPECT_DOUBLE_EQ(build_cost(x, y, CostKind::kSqEuclidean)(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(build_cost(x, y, CostKind::kEuclidean)(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(build_cost(x, x, CostKind::kSqEuclidean)(0, 0), 0.0);
  EXPECT_THROW(build_cost(x, y, CostKind::kExplicit), Error);
}

TEST(BuildCost, MatchesDirectDistances) {
  std::mt19937_64 rng(2);
  Mat x(3, 2), y(3, 2);
  for (Index i = 0; i < 3; ++i) {
    x.row(i) << uniform(rng, -1, 1), uniform(rng, -1, 1);
    y.row(i) << uniform(rng, -1, 1), uniform(rng, -1, 1);
  }
  const PlanMatrix sq = build_cost(x, y, CostKind::kSqEuclidean);
  const PlanMatrix eu = build_cost(x, y, CostKind::kEuclidean);
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) {
      const double dx = x(i, 0) - y(j, 0), dy = x(i, 1) - y(j, 1);
      EXPECT_NEAR(sq(i, j), dx * dx + dy * dy, 1e-12);
      EXPECT_NEAR(eu(i, j), std::sqrt(dx * dx + dy * dy), 1e-12);
    }
  }
}

TEST(BuildCost, DimensionMismatch) {
  EXPECT_THROW(build_cost(Mat::Zero(2, 2), Mat::Zero(2, 3), CostKind::kSqEuclidean), Error);
}

TEST(Problem, Validation) {
  EXPECT_NO_THROW(testing::one_by_one(1.0).validate());
  // Negative cost.
  EXPECT_THROW(testing::one_by_one(-1.0), Error);
  // Zero reference mass under a superlinear entropy.
  EXPECT_THROW(testing::one_by_one(1.0, DivergenceKind::kKl, 0.0, 1.0), Error);
  // Non-finite cost.
  EXPECT_THROW(testing::one_by_one(INFINITY), Error);
  // Shape mismatch between points and weights.
  EXPECT_THROW(make_problem(Mat::Zero(2, 1), Mat::Zero(1, 1), Vec::Ones(3), Vec::Ones(1)),
               Error);
}

TEST(Problem, ReferenceDefaultsToMarginals) {
  const Problem p = testing::from_cost(PlanMatrix::Ones(2, 1), vec({1, 2}), vec({3}));
  EXPECT_EQ(p.reference(), vec({1, 2, 3}));
}

TEST(DualPotential, StackSplitRoundTrip) {
  const Vec s = vec({1, 2, 3, 4, 5});
  const DualPotential xi = DualPotential::split(s, 2);
  EXPECT_EQ(xi.phi, vec({1, 2}));
  EXPECT_EQ(xi.psi, vec({3, 4, 5}));
  EXPECT_EQ(xi.stacked(), s);
}

}  // namespace
}  // namespace uotlab
