#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>

#include "uotlab/types.hpp"

namespace uotlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Exponent at which exp() saturates instead of overflowing.
inline constexpr double kExpSaturation = 700.0;

/// Numerical side conditions hit during an evaluation.
struct Diagnostics {
  bool overflow = false;  // an exponential was saturated
  bool ridge = false;     // a Hessian needed diagonal regularization

  Diagnostics& operator|=(const Diagnostics& other) {
    overflow = overflow || other.overflow;
    ridge = ridge || other.ridge;
    return *this;
  }
};

/// Real interval with open/closed ends; infinite ends are always open.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool lo_closed = false;
  bool hi_closed = false;

  bool contains(double v) const;
  bool interior_contains(double v) const { return v > lo && v < hi; }
};

/// Scalar convex entropy phi together with its Legendre conjugate.
///
/// phi may be +inf outside its domain. The conjugate and its first two
/// derivatives are what the solvers consume; phi itself is only needed to
/// evaluate primal objectives.
class EntropyFunction {
 public:
  virtual ~EntropyFunction() = default;

  virtual std::string name() const = 0;
  virtual double phi(double x) const = 0;
  virtual double conj(double y) const = 0;
  virtual double conj_d1(double y) const = 0;
  virtual double conj_d2(double y) const = 0;
  /// lim phi(x)/x as x -> +inf.
  virtual double recession() const = 0;
  virtual Interval phi_domain() const = 0;
  virtual Interval conj_domain() const = 0;
  /// Arguments above this value are clamped before evaluating the conjugate
  /// (and flagged). +inf when the conjugate cannot overflow.
  virtual double conj_saturation() const { return kInf; }
};

/// phi(x) = x (log x - 1) on [0, inf), conjugate e^y.
/// With `normalized`, phi(x) = x log x - x + 1 and conjugate e^y - 1.
class KlEntropy final : public EntropyFunction {
 public:
  explicit KlEntropy(bool normalized = false) : normalized_(normalized) {}

  std::string name() const override;
  double phi(double x) const override;
  double conj(double y) const override;
  double conj_d1(double y) const override;
  double conj_d2(double y) const override;
  double recession() const override { return kInf; }
  Interval phi_domain() const override { return {0.0, kInf, true, false}; }
  Interval conj_domain() const override { return {}; }
  double conj_saturation() const override { return kExpSaturation; }

 private:
  bool normalized_;
};

/// phi(x) = |x - 1|^2 / 2 on the real line, conjugate y^2/2 + y.
class QuadraticEntropy final : public EntropyFunction {
 public:
  std::string name() const override { return "quadratic"; }
  double phi(double x) const override { return 0.5 * (x - 1.0) * (x - 1.0); }
  double conj(double y) const override { return 0.5 * y * y + y; }
  double conj_d1(double y) const override { return y + 1.0; }
  double conj_d2(double) const override { return 1.0; }
  double recession() const override { return kInf; }
  Interval phi_domain() const override { return {}; }
  Interval conj_domain() const override { return {}; }
};

/// Extension point: an entropy assembled from user callables. Must pass
/// `verify_entropy` before a problem will accept it.
class CallableEntropy final : public EntropyFunction {
 public:
  struct Callables {
    std::string name = "custom";
    std::function<double(double)> phi;
    std::function<double(double)> conj;
    std::function<double(double)> conj_d1;
    std::function<double(double)> conj_d2;
    double recession = kInf;
    Interval phi_domain;
    Interval conj_domain;
  };

  explicit CallableEntropy(Callables fns);

  std::string name() const override { return fns_.name; }
  double phi(double x) const override { return fns_.phi(x); }
  double conj(double y) const override { return fns_.conj(y); }
  double conj_d1(double y) const override { return fns_.conj_d1(y); }
  double conj_d2(double y) const override { return fns_.conj_d2(y); }
  double recession() const override { return fns_.recession; }
  Interval phi_domain() const override { return fns_.phi_domain; }
  Interval conj_domain() const override { return fns_.conj_domain; }

 private:
  Callables fns_;
};

struct EntropyCheckReport {
  bool ok = true;
  double max_d1_rel_err = 0.0;
  double max_d2_rel_err = 0.0;
  double min_d2 = kInf;
  std::string failure;
};

/// Finite-difference and positivity checks of conj/conj_d1/conj_d2 on a grid
/// of the conjugate domain interior (clipped to [-lim, lim]).
EntropyCheckReport verify_entropy(const EntropyFunction& entropy,
                                  double lim = 3.0, int samples = 101,
                                  double rel_tol = 1e-6);

std::shared_ptr<const EntropyFunction> make_entropy(const DivergenceSpec& spec);

/// Discrete Csiszar divergence D_phi(p | q). May return +inf.
double csiszar(const Vec& p, const Vec& q, const EntropyFunction& entropy);

/// F(.) = D_phi(. | q) on X ⊔ Y, with its separable conjugate machinery.
class DivergenceF {
 public:
  DivergenceF(std::shared_ptr<const EntropyFunction> entropy, Vec q);

  const EntropyFunction& entropy() const { return *entropy_; }
  const Vec& q() const { return q_; }
  Index size() const { return q_.size(); }

  /// F(p).
  double value(const Vec& p) const { return csiszar(p, q_, *entropy_); }

  /// F*(arg) = sum_z q_z phi*(arg_z).
  double conj(const Vec& arg, Diagnostics* diag = nullptr) const;
  /// Gradient of F* at arg: q_z phi*'(arg_z).
  Vec conj_grad(const Vec& arg, Diagnostics* diag = nullptr) const;
  /// Diagonal of the Hessian of F* at arg: q_z phi*''(arg_z).
  Vec conj_hess_diag(const Vec& arg, Diagnostics* diag = nullptr) const;

 private:
  double clamp_arg(double y, Diagnostics* diag) const;
  void check_interior(const Vec& arg, const char* who) const;

  std::shared_ptr<const EntropyFunction> entropy_;
  Vec q_;
};

DivergenceF make_divergence(const Problem& problem);

}  // namespace uotlab
