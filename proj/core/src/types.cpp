#include "uotlab/types.hpp"

#include <cmath>
#include <string>

#include "uotlab/divergence.hpp"
#include "uotlab/error.hpp"
#include "uotlab/marginal.hpp"

namespace uotlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kDomainError: return "domain-error";
    case ErrorKind::kDegenerateInstance: return "degenerate-instance";
    case ErrorKind::kIo: return "io-error";
    case ErrorKind::kInternal: return "internal-error";
  }
  return "unknown";
}

const char* to_string(CostKind kind) {
  switch (kind) {
    case CostKind::kSqEuclidean: return "sqeuclidean";
    case CostKind::kEuclidean: return "euclidean";
    case CostKind::kExplicit: return "explicit";
  }
  return "unknown";
}

const char* to_string(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::kKl: return "kl";
    case DivergenceKind::kQuadratic: return "quadratic";
    case DivergenceKind::kCustom: return "custom";
  }
  return "unknown";
}

CostKind parse_cost_kind(const std::string& name) {
  if (name == "sqeuclidean") return CostKind::kSqEuclidean;
  if (name == "euclidean") return CostKind::kEuclidean;
  if (name == "explicit") return CostKind::kExplicit;
  throw_invalid("unknown cost kind '" + name + "'");
}

DivergenceKind parse_divergence_kind(const std::string& name) {
  if (name == "kl") return DivergenceKind::kKl;
  if (name == "quadratic") return DivergenceKind::kQuadratic;
  throw_invalid("unknown divergence kind '" + name + "' (expected kl|quadratic)");
}

Vec DualPotential::stacked() const {
  Vec out(size());
  out << phi, psi;
  return out;
}

DualPotential DualPotential::split(const Vec& stacked, Index nx) {
  return DualPotential{stacked.head(nx), stacked.tail(stacked.size() - nx)};
}

DualPotential DualPotential::zeros(Index nx, Index ny) {
  return DualPotential{Vec::Zero(nx), Vec::Zero(ny)};
}

Vec Marginals::stacked() const {
  Vec out(row.size() + col.size());
  out << row, col;
  return out;
}

Marginals Marginals::split(const Vec& stacked, Index nx) {
  return Marginals{stacked.head(nx), stacked.tail(stacked.size() - nx)};
}

Vec Problem::reference() const {
  Vec q(n_dual());
  q << (divergence.q_mu ? *divergence.q_mu : mu),
      (divergence.q_nu ? *divergence.q_nu : nu);
  return q;
}

namespace {

void require_finite_nonneg(const Vec& v, const char* name) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0) {
      throw_invalid(std::string(name) + " must be finite and nonnegative (entry " +
                    std::to_string(i) + ")");
    }
  }
}

}  // namespace

void Problem::validate() const {
  if (mu.size() == 0 || nu.size() == 0) throw_invalid("empty marginal");
  require_finite_nonneg(mu, "mu");
  require_finite_nonneg(nu, "nu");
  if (cost.rows() != mu.size() || cost.cols() != nu.size()) {
    throw_invalid("cost shape " + std::to_string(cost.rows()) + "x" +
                  std::to_string(cost.cols()) + " does not match |mu|=" +
                  std::to_string(mu.size()) + ", |nu|=" +
                  std::to_string(nu.size()));
  }
  for (Index x = 0; x < cost.rows(); ++x) {
    for (Index y = 0; y < cost.cols(); ++y) {
      if (!std::isfinite(cost(x, y)) || cost(x, y) < 0.0) {
        throw_invalid("cost entries must be finite and nonnegative");
      }
    }
  }
  if (cost_kind != CostKind::kExplicit) {
    if (points_x.rows() != mu.size() || points_y.rows() != nu.size()) {
      throw_invalid("point counts do not match weight vectors");
    }
  }
  if (divergence.q_mu && divergence.q_mu->size() != mu.size()) {
    throw_invalid("q.mu_ref length does not match mu");
  }
  if (divergence.q_nu && divergence.q_nu->size() != nu.size()) {
    throw_invalid("q.nu_ref length does not match nu");
  }
  // Positivity of q under superlinear entropies is enforced here.
  DivergenceF(make_entropy(divergence), reference());
}

Problem make_problem(Mat points_x, Mat points_y, Vec mu, Vec nu, CostKind kind,
                     DivergenceSpec divergence) {
  Problem p;
  p.cost = build_cost(points_x, points_y, kind);
  p.points_x = std::move(points_x);
  p.points_y = std::move(points_y);
  p.mu = std::move(mu);
  p.nu = std::move(nu);
  p.cost_kind = kind;
  p.divergence = std::move(divergence);
  p.validate();
  return p;
}

Problem make_problem_from_cost(PlanMatrix cost, Vec mu, Vec nu,
                               DivergenceSpec divergence) {
  Problem p;
  p.cost = std::move(cost);
  p.mu = std::move(mu);
  p.nu = std::move(nu);
  p.cost_kind = CostKind::kExplicit;
  p.divergence = std::move(divergence);
  p.validate();
  return p;
}

}  // namespace uotlab
