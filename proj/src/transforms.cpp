#include "khess/transforms.hpp"

#include <cmath>
#include <vector>

#include "khess/errors.hpp"

namespace khess::transforms {

namespace {

using nonlin::Family;
using nonlin::Nonlinearity;
using nonlin::SignClass;

// Coverage window for the inverse tables.
constexpr double kCovLo = 1e-30;
constexpr double kCovHi = 1e9;

void check_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw DomainError("transform argument t must be positive and finite");
}

struct InverseTable {
  std::shared_ptr<const num::Pchip> interp;  // ln t -> asinh(x)
  double lnt_lo = 0.0, lnt_hi = 0.0;
};

// Samples the decreasing tail map T and tabulates its inverse.  `s1`
// restricts the argument to (0, inf).
InverseTable build_inverse(const std::function<double(double)>& tail, bool s1) {
  double x_hi = 1.0;
  double T = tail(x_hi);
  int guard = 0;
  while (T > kCovLo && guard++ < 240) {
    x_hi *= 2.0;
    T = tail(x_hi);
  }
  double x_lo;
  if (s1) {
    x_lo = 1.0;
    T = tail(x_lo);
    double prev = T;
    guard = 0;
    while (T < kCovHi && guard++ < 240) {
      x_lo *= 0.5;
      T = tail(x_lo);
      if (!(T > prev * (1.0 + 1e-12))) break;  // finite sup of the tail
      prev = T;
    }
  } else {
    x_lo = -1.0;
    T = tail(x_lo);
    guard = 0;
    while (T < kCovHi && guard++ < 240) {
      x_lo *= 2.0;
      T = tail(x_lo);
    }
  }
  const int n = 700;
  const double a = std::asinh(x_lo), b = std::asinh(x_hi);
  std::vector<double> lnt, ax;
  lnt.reserve(n);
  ax.reserve(n);
  // descending x gives ascending t; anchoring the sum at `a` keeps the last
  // sample exact when a is many orders below b (forming b + (a - b) would
  // round a tiny positive endpoint to zero and leave the S1 tail undefined)
  for (int i = 0; i < n; ++i) {
    const double xa = a + (b - a) * (n - 1 - i) / (n - 1);
    const double x = std::sinh(xa);
    if (s1 && !(x > 0.0)) continue;
    const double tv = tail(x);
    if (!(tv > 0.0) || !std::isfinite(tv)) continue;
    const double lt = std::log(tv);
    if (!lnt.empty() && !(lt > lnt.back() + 1e-10)) continue;
    lnt.push_back(lt);
    ax.push_back(xa);
  }
  if (lnt.size() < 8)
    throw NumericsError("inverse transform table: too few usable samples");
  InverseTable out;
  out.interp = std::make_shared<num::Pchip>(lnt, ax);
  out.lnt_lo = lnt.front();
  out.lnt_hi = lnt.back();
  return out;
}

double invert_with(const InverseTable& tab,
                   const std::function<double(double)>& tail,
                   const std::function<double(double)>& integrand, bool s1,
                   double t) {
  const double lt = std::log(t);
  if (lt < tab.lnt_lo - 1e-9 || lt > tab.lnt_hi + 1e-9)
    throw RangeError(
        "transform argument outside the inverse table coverage; extend the "
        "coverage window");
  double x = std::sinh((*tab.interp)(std::min(std::max(lt, tab.lnt_lo), tab.lnt_hi)));
  for (int it = 0; it < 24; ++it) {
    const double r = tail(x) - t;
    if (std::fabs(r) <= 1e-11 * t) return x;
    // dT/dx = -integrand(x)
    double step = r / integrand(x);
    const double cap = 0.5 * std::fabs(x) + 1.0;
    if (std::fabs(step) > cap) step = step > 0 ? cap : -cap;
    double xn = x + step;
    if (s1 && !(xn > 0.0)) xn = 0.5 * x;
    x = xn;
  }
  if (std::fabs(tail(x) - t) <= 1e-8 * t) return x;
  throw NumericsError("transform inversion failed to converge");
}

}  // namespace

// ---------------------------------------------------------------------------
// PsiTransform

namespace {

double psi_tail_quadrature(const Nonlinearity& d, double x) {
  const int k = d.k();
  const num::Fn ip = [d, k](double s) { return std::pow(d.f(s), -1.0 / k); };
  if (d.sign_class() == SignClass::S1 && !(x > 0.0))
    throw DomainError("tail of f^{-1/k} requires x > 0 for this family");
  if (x > 0.0) return num::integrate_tail_exp(ip, x, 1e-12);
  return num::integrate(ip, x, 1.0, 1e-12).value +
         num::integrate_tail_exp(ip, 1.0, 1e-12);
}

}  // namespace

PsiTransform::PsiTransform(nonlin::Nonlinearity d) : d_(std::move(d)) {
  closed_ = d_.family() == Family::Power || d_.family() == Family::Exponential;
  const bool s1 = d_.sign_class() == SignClass::S1;
  const Nonlinearity local = d_;
  const auto tab = build_inverse(
      [local](double x) { return psi_tail_quadrature(local, x); }, s1);
  inv_ = tab.interp;
  lnt_lo_ = tab.lnt_lo;
  lnt_hi_ = tab.lnt_hi;
}

double PsiTransform::tail(double x) const { return psi_tail_quadrature(d_, x); }

double PsiTransform::invert(double t) const {
  const Nonlinearity local = d_;
  const int k = d_.k();
  InverseTable tab;
  tab.interp = inv_;
  tab.lnt_lo = lnt_lo_;
  tab.lnt_hi = lnt_hi_;
  return invert_with(
      tab, [local](double x) { return psi_tail_quadrature(local, x); },
      [local, k](double x) { return std::pow(local.f(x), -1.0 / k); },
      d_.sign_class() == SignClass::S1, t);
}

double PsiTransform::operator()(double t) const {
  check_t(t);
  const int k = d_.k();
  switch (d_.family()) {
    case Family::Power: {
      const double g = *d_.growth_exponent_at_infinity();
      return std::pow((g - k) / k * t, -static_cast<double>(k) / (g - k));
    }
    case Family::Exponential:
      return -k * std::log(t / k);
    default:
      return invert(t);
  }
}

double PsiTransform::numeric(double t) const {
  check_t(t);
  return invert(t);
}

Derivs PsiTransform::derivatives(double t) const {
  const double x = (*this)(t);
  const int k = d_.k();
  const double fv = d_.f(x);
  Derivs out;
  out.value = x;
  out.d1 = -std::pow(fv, 1.0 / k);
  out.d2 = std::pow(fv, 2.0 / k - 1.0) * d_.fprime(x) / k;
  return out;
}

double PsiTransform::big_psi(double t) const {
  const double x = (*this)(t);
  const int k = d_.k();
  return t * d_.fprime(x) * std::pow(d_.f(x), 1.0 / k - 1.0) / k;
}

// ---------------------------------------------------------------------------
// PhiTransform

namespace {

double phi_tail_quadrature(const Nonlinearity& d, double x) {
  const int k = d.k();
  const num::Fn ip = [d, k](double s) {
    return std::pow((k + 1.0) * d.F(s), -1.0 / (k + 1.0));
  };
  if (d.sign_class() == SignClass::S1 && !(x > 0.0))
    throw DomainError("tail of ((k+1)F)^{-1/(k+1)} requires x > 0");
  if (x > 0.0) return num::integrate_tail_exp(ip, x, 1e-12);
  return num::integrate(ip, x, 1.0, 1e-12).value +
         num::integrate_tail_exp(ip, 1.0, 1e-12);
}

}  // namespace

PhiTransform::PhiTransform(nonlin::Nonlinearity d) : d_(std::move(d)) {
  if (!d_.has_antiderivative())
    throw NumericsError(
        "phi transform needs the antiderivative F; it is unavailable for "
        "this nonlinearity");
  closed_ = d_.family() == Family::Power || d_.family() == Family::Exponential;
  const bool s1 = d_.sign_class() == SignClass::S1;
  const Nonlinearity local = d_;
  const auto tab = build_inverse(
      [local](double x) { return phi_tail_quadrature(local, x); }, s1);
  inv_ = tab.interp;
  lnt_lo_ = tab.lnt_lo;
  lnt_hi_ = tab.lnt_hi;
}

double PhiTransform::tail(double x) const { return phi_tail_quadrature(d_, x); }

double PhiTransform::invert(double t) const {
  const Nonlinearity local = d_;
  const int k = d_.k();
  InverseTable tab;
  tab.interp = inv_;
  tab.lnt_lo = lnt_lo_;
  tab.lnt_hi = lnt_hi_;
  return invert_with(
      tab, [local](double x) { return phi_tail_quadrature(local, x); },
      [local, k](double x) {
        return std::pow((k + 1.0) * local.F(x), -1.0 / (k + 1.0));
      },
      d_.sign_class() == SignClass::S1, t);
}

double PhiTransform::operator()(double t) const {
  check_t(t);
  const int k = d_.k();
  switch (d_.family()) {
    case Family::Power: {
      const double g = *d_.growth_exponent_at_infinity();
      const double c_phi = (g - k) / (k + 1.0) *
                           std::pow((k + 1.0) / (g + 1.0), 1.0 / (k + 1.0));
      return std::pow(c_phi * t, -(k + 1.0) / (g - k));
    }
    case Family::Exponential:
      return k * std::log(k + 1.0) - (k + 1.0) * std::log(t);
    default:
      return invert(t);
  }
}

double PhiTransform::numeric(double t) const {
  check_t(t);
  return invert(t);
}

Derivs PhiTransform::derivatives(double t) const {
  const double x = (*this)(t);
  const int k = d_.k();
  const double Fk = (k + 1.0) * d_.F(x);
  Derivs out;
  out.value = x;
  out.d1 = -std::pow(Fk, 1.0 / (k + 1.0));
  out.d2 = std::pow(Fk, (1.0 - k) / (k + 1.0)) * d_.f(x);
  return out;
}

double PhiTransform::big_phi(double t) const {
  const double x = (*this)(t);
  const int k = d_.k();
  const double Fk = (k + 1.0) * d_.F(x);
  return std::pow(Fk, static_cast<double>(k) / (k + 1.0)) / (t * d_.f(x));
}

}  // namespace khess::transforms
