#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "uotlab/error.hpp"

namespace uotlab::detail {

Vec solve_spd(const Mat& H, const Vec& rhs, double ridge_floor, bool* ridged) {
  const Index n = H.rows();
  Vec scale(n);
  for (Index i = 0; i < n; ++i) {
    const double d = H(i, i);
    scale[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  Mat S = scale.asDiagonal() * H * scale.asDiagonal();
  const Vec srhs = scale.cwiseProduct(rhs);

  Eigen::LLT<Mat> llt(S);
  if (llt.info() == Eigen::Success) {
    return scale.cwiseProduct(llt.solve(srhs));
  }
  if (ridged) *ridged = true;
  double ridge = std::max(ridge_floor, 1e-12 * S.trace() / std::max<Index>(n, 1));
  if (!(ridge > 0.0)) ridge = 1e-12;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Mat R = S;
    R.diagonal().array() += ridge;
    llt.compute(R);
    if (llt.info() == Eigen::Success) {
      return scale.cwiseProduct(llt.solve(srhs));
    }
    ridge *= 10.0;
  }
  throw Error(ErrorKind::kInternal, "solve_spd: factorization failed");
}

Mat null_space(const Mat& M, double rel_tol) {
  const Index n = M.cols();
  if (M.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double smax = s.size() > 0 ? s[0] : 0.0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] > rel_tol * std::max(smax, 1.0)) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

Vec min_norm_solve(const Mat& M, const Vec& b) {
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(M);
  cod.setThreshold(1e-12);
  return cod.solve(b);
}

Vec nnls(const Mat& M, const Vec& b, int max_iter) {
  const Index n = M.cols();
  Vec x = Vec::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-13 * std::max(1.0, M.cwiseAbs().maxCoeff()) *
                     std::max(1.0, b.cwiseAbs().maxCoeff());

  auto solve_passive = [&](Vec& s) {
    std::vector<Index> idx;
    for (Index j = 0; j < n; ++j) {
      if (passive[j]) idx.push_back(j);
    }
    Mat Mp(M.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Mp.col(k) = M.col(idx[k]);
    const Vec sp = min_norm_solve(Mp, b);
    s.setZero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = sp[k];
  };

  for (int outer = 0; outer < max_iter; ++outer) {
    const Vec w = M.transpose() * (b - M * x);
    Index best = -1;
    double wmax = tol;
    for (Index j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[best] = true;

    for (int inner = 0; inner < max_iter; ++inner) {
      Vec s;
      solve_passive(s);
      bool all_positive = true;
      double alpha = 1.0;
      for (Index j = 0; j < n; ++j) {
        if (passive[j] && s[j] <= 0.0) {
          all_positive = false;
          alpha = std::min(alpha, x[j] / (x[j] - s[j]));
        }
      }
      if (all_positive) {
        x = s;
        break;
      }
      x += alpha * (s - x);
      for (Index j = 0; j < n; ++j) {
        if (passive[j] && x[j] <= 1e-300) {
          passive[j] = false;
          x[j] = 0.0;
        }
      }
    }
  }
  return x;
}

Mat dense_marginal_operator(Index nx, Index ny) {
  Mat A = Mat::Zero(nx + ny, nx * ny);
  for (Index x = 0; x < nx; ++x) {
    for (Index y = 0; y < ny; ++y) {
      A(x, x * ny + y) = 1.0;
      A(nx + y, x * ny + y) = 1.0;
    }
  }
  return A;
}

}  // namespace uotlab::detail
