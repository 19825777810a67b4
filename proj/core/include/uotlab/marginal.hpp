#pragma once

#include "uotlab/types.hpp"

namespace uotlab {

/// Marginal operator: row sums over Y and column sums over X.
Marginals apply_A(const Coupling& gamma);

/// As above, with a shape check against a declared problem.
Marginals apply_A(const Coupling& gamma, const Problem& problem);

/// Adjoint of apply_A: entry (x, y) is phi_x + psi_y.
PlanMatrix apply_A_adjoint(const DualPotential& xi);

/// Sum of gamma (log gamma - 1), with 0 log 0 = 0. Throws on negative entries.
double discrete_entropy(const Coupling& gamma);

/// Pairwise cost between two point sets (rows are points).
/// kExplicit is rejected here; explicit matrices bypass this function.
PlanMatrix build_cost(const Mat& points_x, const Mat& points_y, CostKind kind);

/// <a | b> over X x Y.
double frobenius_dot(const PlanMatrix& a, const PlanMatrix& b);

}  // namespace uotlab
