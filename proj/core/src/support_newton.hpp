#pragma once

#include <utility>
#include <vector>

#include "uotlab/types.hpp"

namespace uotlab::detail {

struct SupportNewtonResult {
  Vec z;                 // stacked over X ⊔ Y
  bool converged = false;  // gradient below tol and the last step negligible
  int iters = 0;
  double grad_norm = 0.0;  // over nodes touched by the support
};

/// Minimizes G(z) = -<m, z> + sum_{(x,y) in support} exp(z_x + z_y).
///
/// G is flat along ker of the restricted adjoint (one direction per connected
/// component of the support graph, plus isolated nodes), so steps use the
/// minimum-norm Newton direction. At the minimizer exp(z_x + z_y) on the
/// support is the minimal-entropy plan with marginals m.
SupportNewtonResult minimize_support_exp(
    Index nx, Index ny, const std::vector<std::pair<Index, Index>>& support,
    const Vec& m, double tol = 1e-13, int max_iters = 500);

/// Restricted adjoint: one row per support pair, 1 at x and at nx + y.
Mat restricted_adjoint(Index nx, Index ny,
                       const std::vector<std::pair<Index, Index>>& support);

}  // namespace uotlab::detail
