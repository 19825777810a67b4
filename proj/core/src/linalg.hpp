#pragma once

// Internal dense linear-algebra helpers shared by the solvers.

#include "uotlab/types.hpp"

namespace uotlab::detail {

/// Solves H x = rhs for symmetric positive (semi)definite H after symmetric
/// Jacobi scaling. When Cholesky fails, a diagonal ridge of
/// max(ridge_floor, 1e-12 * trace / n) is added and grown until it succeeds.
Vec solve_spd(const Mat& H, const Vec& rhs, double ridge_floor, bool* ridged);

/// Orthonormal basis (columns) of the null space of M, by SVD.
Mat null_space(const Mat& M, double rel_tol = 1e-10);

/// Minimum-norm least-squares solution of M x = b.
Vec min_norm_solve(const Mat& M, const Vec& b);

/// Nonnegative least squares min ||M x - b|| s.t. x >= 0 (Lawson-Hanson).
Vec nnls(const Mat& M, const Vec& b, int max_iter = 500);

/// Dense marginal operator as an (|X|+|Y|) x (|X||Y|) matrix, columns
/// ordered row-major over (x, y).
Mat dense_marginal_operator(Index nx, Index ny);

}  // namespace uotlab::detail
