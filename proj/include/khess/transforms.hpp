#pragma once

#include <memory>

#include "khess/nonlinearity.hpp"
#include "khess/numerics.hpp"

namespace khess::transforms {

struct Derivs {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// psi(t) solves int_{psi(t)}^inf f^{-1/k} = t.  Decreasing, with
/// psi' = -f(psi)^{1/k} and psi'' = (1/k) f(psi)^{2/k-1} f'(psi).
/// Closed forms for the power and exponential families; otherwise an
/// inverse table over a wide coverage window with Newton polish against
/// the quadrature tail.  Instances are immutable and safe to share
/// across threads.
class PsiTransform {
 public:
  explicit PsiTransform(nonlin::Nonlinearity d);

  double operator()(double t) const;
  /// Quadrature-and-inversion path even when a closed form exists; used
  /// to cross-check the closed forms.
  double numeric(double t) const;
  Derivs derivatives(double t) const;
  /// Psi(t) = -psi''(t) t / psi'(t); equals I(psi(t)).
  double big_psi(double t) const;
  /// Tail integral T(x) = int_x^inf f^{-1/k} evaluated by quadrature.
  double tail(double x) const;
  const nonlin::Nonlinearity& descriptor() const { return d_; }
  bool has_closed_form() const { return closed_; }

 private:
  nonlin::Nonlinearity d_;
  bool closed_ = false;
  std::shared_ptr<const num::Pchip> inv_;  // asinh(x) against ln t
  double lnt_lo_ = 0.0, lnt_hi_ = 0.0;
  double invert(double t) const;
};

/// phi(t) solves int_{phi(t)}^inf ((k+1) F)^{-1/(k+1)} = t, with
/// phi' = -((k+1) F(phi))^{1/(k+1)} and
/// phi'' = ((k+1) F(phi))^{(1-k)/(k+1)} f(phi), so that
/// (-phi')^{k-1} phi'' = f(phi) identically.
class PhiTransform {
 public:
  explicit PhiTransform(nonlin::Nonlinearity d);

  double operator()(double t) const;
  double numeric(double t) const;
  Derivs derivatives(double t) const;
  /// Phi(t) = -phi'(t) / (t phi''(t)).
  double big_phi(double t) const;
  double tail(double x) const;
  const nonlin::Nonlinearity& descriptor() const { return d_; }
  bool has_closed_form() const { return closed_; }

 private:
  nonlin::Nonlinearity d_;
  bool closed_ = false;
  std::shared_ptr<const num::Pchip> inv_;
  double lnt_lo_ = 0.0, lnt_hi_ = 0.0;
  double invert(double t) const;
};

}  // namespace khess::transforms
