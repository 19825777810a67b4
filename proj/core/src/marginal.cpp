#include "uotlab/marginal.hpp"

#include <cmath>
#include <string>

#include "uotlab/error.hpp"

namespace uotlab {

Marginals apply_A(const Coupling& gamma) {
  return Marginals{gamma.gamma.rowwise().sum(),
                   gamma.gamma.colwise().sum().transpose()};
}

Marginals apply_A(const Coupling& gamma, const Problem& problem) {
  if (gamma.gamma.rows() != problem.nx() ||
      gamma.gamma.cols() != problem.ny()) {
    throw_invalid("coupling shape " + std::to_string(gamma.gamma.rows()) +
                  "x" + std::to_string(gamma.gamma.cols()) +
                  " does not match problem " + std::to_string(problem.nx()) +
                  "x" + std::to_string(problem.ny()));
  }
  return apply_A(gamma);
}

PlanMatrix apply_A_adjoint(const DualPotential& xi) {
  PlanMatrix out(xi.nx(), xi.ny());
  for (Index x = 0; x < xi.nx(); ++x) {
    for (Index y = 0; y < xi.ny(); ++y) {
      out(x, y) = xi.phi[x] + xi.psi[y];
    }
  }
  return out;
}

double discrete_entropy(const Coupling& gamma) {
  double h = 0.0;
  for (Index x = 0; x < gamma.gamma.rows(); ++x) {
    for (Index y = 0; y < gamma.gamma.cols(); ++y) {
      const double g = gamma.gamma(x, y);
      if (!(g >= 0.0)) {
        throw_invalid("discrete_entropy: negative or NaN entry at (" +
                      std::to_string(x) + "," + std::to_string(y) + ")");
      }
      if (g > 0.0) h += g * (std::log(g) - 1.0);
    }
  }
  return h;
}

PlanMatrix build_cost(const Mat& points_x, const Mat& points_y, CostKind kind) {
  if (points_x.cols() != points_y.cols()) {
    throw_invalid("build_cost: dimension mismatch (" +
                  std::to_string(points_x.cols()) + " vs " +
                  std::to_string(points_y.cols()) + ")");
  }
  if (kind == CostKind::kExplicit) {
    throw_invalid("build_cost: explicit costs carry their own matrix");
  }
  PlanMatrix cost(points_x.rows(), points_y.rows());
  for (Index x = 0; x < points_x.rows(); ++x) {
    for (Index y = 0; y < points_y.rows(); ++y) {
      const double sq = (points_x.row(x) - points_y.row(y)).squaredNorm();
      cost(x, y) = kind == CostKind::kSqEuclidean ? sq : std::sqrt(sq);
    }
  }
  return cost;
}

double frobenius_dot(const PlanMatrix& a, const PlanMatrix& b) {
  return a.cwiseProduct(b).sum();
}

}  // namespace uotlab
