#include "uotlab/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "uotlab/error.hpp"

namespace uotlab {

bool Interval::contains(double v) const {
  const bool above = lo_closed ? v >= lo : v > lo;
  const bool below = hi_closed ? v <= hi : v < hi;
  return above && below;
}

std::string KlEntropy::name() const {
  return normalized_ ? "kl-normalized" : "kl";
}

double KlEntropy::phi(double x) const {
  if (x < 0.0) return kInf;
  const double offset = normalized_ ? 1.0 : 0.0;
  if (x == 0.0) return offset;
  return x * (std::log(x) - 1.0) + offset;
}

double KlEntropy::conj(double y) const {
  return normalized_ ? std::expm1(y) : std::exp(y);
}

double KlEntropy::conj_d1(double y) const { return std::exp(y); }

double KlEntropy::conj_d2(double y) const { return std::exp(y); }

CallableEntropy::CallableEntropy(Callables fns) : fns_(std::move(fns)) {
  if (!fns_.phi || !fns_.conj || !fns_.conj_d1 || !fns_.conj_d2) {
    throw_invalid("CallableEntropy: phi, conj, conj_d1 and conj_d2 are all required");
  }
}

EntropyCheckReport verify_entropy(const EntropyFunction& entropy, double lim,
                                  int samples, double rel_tol) {
  EntropyCheckReport report;
  const Interval dom = entropy.conj_domain();
  const double lo = std::max(dom.lo, -lim);
  const double hi = std::min(dom.hi, lim);
  if (!(hi > lo)) {
    report.ok = false;
    report.failure = "empty conjugate domain on the probe window";
    return report;
  }
  // Keep probes strictly inside so that the stencil stays in the domain.
  const double margin = 1e-3 * (hi - lo);
  for (int i = 0; i < samples; ++i) {
    const double y = lo + margin + (hi - lo - 2 * margin) * i / (samples - 1);
    const double room = std::min(y - dom.lo, dom.hi - y);
    const double h = 1e-5 * std::min(std::max(1.0, std::abs(y)), room);
    const double fd1 = (entropy.conj(y + h) - entropy.conj(y - h)) / (2 * h);
    const double fd2 =
        (entropy.conj_d1(y + h) - entropy.conj_d1(y - h)) / (2 * h);
    const double d1 = entropy.conj_d1(y);
    const double d2 = entropy.conj_d2(y);
    const double e1 = std::abs(fd1 - d1) / std::max(1.0, std::abs(d1));
    const double e2 = std::abs(fd2 - d2) / std::max(1.0, std::abs(d2));
    report.max_d1_rel_err = std::max(report.max_d1_rel_err, e1);
    report.max_d2_rel_err = std::max(report.max_d2_rel_err, e2);
    report.min_d2 = std::min(report.min_d2, d2);
  }
  std::ostringstream why;
  if (report.max_d1_rel_err > rel_tol) {
    why << "conj_d1 disagrees with finite differences (" << report.max_d1_rel_err
        << ") ";
  }
  if (report.max_d2_rel_err > rel_tol) {
    why << "conj_d2 disagrees with finite differences (" << report.max_d2_rel_err
        << ") ";
  }
  if (!(report.min_d2 > 0.0)) why << "conj_d2 not strictly positive ";
  report.failure = why.str();
  report.ok = report.failure.empty();
  return report;
}

std::shared_ptr<const EntropyFunction> make_entropy(const DivergenceSpec& spec) {
  switch (spec.kind) {
    case DivergenceKind::kKl:
      return std::make_shared<KlEntropy>(spec.normalized);
    case DivergenceKind::kQuadratic:
      return std::make_shared<QuadraticEntropy>();
    case DivergenceKind::kCustom: {
      if (!spec.custom) throw_invalid("custom divergence without an entropy");
      const EntropyCheckReport report = verify_entropy(*spec.custom);
      if (!report.ok) {
        throw_invalid("custom entropy '" + spec.custom->name() +
                      "' failed verification: " + report.failure);
      }
      return spec.custom;
    }
  }
  throw Error(ErrorKind::kInternal, "unknown divergence kind");
}

double csiszar(const Vec& p, const Vec& q, const EntropyFunction& entropy) {
  if (p.size() != q.size()) {
    throw_invalid("csiszar: p and q have different lengths");
  }
  double total = 0.0;
  double orphan_mass = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (q[i] > 0.0) {
      const double term = q[i] * entropy.phi(p[i] / q[i]);
      if (term == kInf) return kInf;
      total += term;
    } else {
      orphan_mass += p[i];
    }
  }
  // recession * 0 = 0 even when the recession constant is infinite.
  if (orphan_mass != 0.0) total += entropy.recession() * orphan_mass;
  return total;
}

DivergenceF::DivergenceF(std::shared_ptr<const EntropyFunction> entropy, Vec q)
    : entropy_(std::move(entropy)), q_(std::move(q)) {
  if (!entropy_) throw_invalid("DivergenceF: null entropy");
  for (Index i = 0; i < q_.size(); ++i) {
    if (!(q_[i] >= 0.0) || !std::isfinite(q_[i])) {
      throw_invalid("DivergenceF: reference measure must be finite and >= 0");
    }
    if (entropy_->recession() == kInf && !(q_[i] > 0.0)) {
      throw_invalid(
          "DivergenceF: superlinear entropy requires a strictly positive "
          "reference measure (entry " +
          std::to_string(i) + " is zero)");
    }
  }
}

double DivergenceF::clamp_arg(double y, Diagnostics* diag) const {
  const double cap = entropy_->conj_saturation();
  if (y > cap) {
    if (diag) diag->overflow = true;
    return cap;
  }
  return y;
}

void DivergenceF::check_interior(const Vec& arg, const char* who) const {
  if (arg.size() != q_.size()) {
    throw_invalid(std::string(who) + ": argument length mismatch");
  }
  const Interval dom = entropy_->conj_domain();
  for (Index i = 0; i < arg.size(); ++i) {
    if (!dom.interior_contains(arg[i])) {
      std::ostringstream msg;
      msg << who << ": argument " << arg[i] << " at index " << i
          << " lies outside the interior of the conjugate domain";
      throw_domain(msg.str());
    }
  }
}

double DivergenceF::conj(const Vec& arg, Diagnostics* diag) const {
  if (arg.size() != q_.size()) throw_invalid("conj: argument length mismatch");
  double total = 0.0;
  for (Index i = 0; i < arg.size(); ++i) {
    total += q_[i] * entropy_->conj(clamp_arg(arg[i], diag));
  }
  return total;
}

Vec DivergenceF::conj_grad(const Vec& arg, Diagnostics* diag) const {
  check_interior(arg, "conj_grad");
  Vec g(arg.size());
  for (Index i = 0; i < arg.size(); ++i) {
    g[i] = q_[i] * entropy_->conj_d1(clamp_arg(arg[i], diag));
  }
  return g;
}

Vec DivergenceF::conj_hess_diag(const Vec& arg, Diagnostics* diag) const {
  check_interior(arg, "conj_hess");
  Vec h(arg.size());
  for (Index i = 0; i < arg.size(); ++i) {
    h[i] = q_[i] * entropy_->conj_d2(clamp_arg(arg[i], diag));
  }
  return h;
}

DivergenceF make_divergence(const Problem& problem) {
  return DivergenceF(make_entropy(problem.divergence), problem.reference());
}

}  // namespace uotlab
