#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>

namespace uotlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
/// Plans and costs are stored row-major: entry (x, y) at x * |Y| + y.
using PlanMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

enum class CostKind { kSqEuclidean, kEuclidean, kExplicit };
enum class DivergenceKind { kKl, kQuadratic, kCustom };

const char* to_string(CostKind kind);
const char* to_string(DivergenceKind kind);
CostKind parse_cost_kind(const std::string& name);
DivergenceKind parse_divergence_kind(const std::string& name);

class EntropyFunction;

/// Divergence descriptor: which entropy function, and the reference measure q.
/// Empty q_mu / q_nu mean "use the problem's mu / nu".
struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::kKl;
  /// KL only: use x log x - x + 1 instead of x (log x - 1), so D(q|q) = 0.
  bool normalized = false;
  std::optional<Vec> q_mu;
  std::optional<Vec> q_nu;
  /// Required when kind == kCustom.
  std::shared_ptr<const EntropyFunction> custom;
};

/// Dual variable xi = (phi, psi), potentials on X and Y.
struct DualPotential {
  Vec phi;
  Vec psi;

  Index nx() const { return phi.size(); }
  Index ny() const { return psi.size(); }
  Index size() const { return phi.size() + psi.size(); }

  /// Concatenation over X then Y.
  Vec stacked() const;
  static DualPotential split(const Vec& stacked, Index nx);
  static DualPotential zeros(Index nx, Index ny);
};

struct Marginals {
  Vec row;
  Vec col;

  Vec stacked() const;
  static Marginals split(const Vec& stacked, Index nx);
};

struct Coupling {
  PlanMatrix gamma;
};

/// A full instance of the unregularized unbalanced problem.
struct Problem {
  Mat points_x;  // |X| x d
  Mat points_y;  // |Y| x d
  Vec mu;
  Vec nu;
  CostKind cost_kind = CostKind::kSqEuclidean;
  PlanMatrix cost;
  DivergenceSpec divergence;

  Index nx() const { return mu.size(); }
  Index ny() const { return nu.size(); }
  Index n_dual() const { return mu.size() + nu.size(); }

  /// Reference measure q on X ⊔ Y (defaults to (mu, nu)).
  Vec reference() const;

  /// Throws Error(kInvalidInput) when any invariant is broken.
  void validate() const;
};

/// Builds a problem from point clouds, computing the cost from `kind`.
Problem make_problem(Mat points_x, Mat points_y, Vec mu, Vec nu,
                     CostKind kind = CostKind::kSqEuclidean,
                     DivergenceSpec divergence = {});

/// Builds a problem from an explicit cost matrix (no coordinates).
Problem make_problem_from_cost(PlanMatrix cost, Vec mu, Vec nu,
                               DivergenceSpec divergence = {});

}  // namespace uotlab
