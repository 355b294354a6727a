#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace khess::nonlin {

/// Sign/monotonicity class of the reaction term.
///   S1:  f(0) = 0, f increasing and positive on (0, inf); domain [0, inf).
///   S01: f increasing and positive on all of R; domain (-inf, inf).
enum class SignClass { S1, S01 };

enum class Family { Power, Exponential, NegativePowerTail, PowerLog, Tabulated };

/// Reaction term f together with its derivative, antiderivative and the
/// Hessian order k it is paired with.  Instances are immutable and cheap
/// to copy; antiderivative caches are shared.
class Nonlinearity {
 public:
  /// f(t) = t^gamma on [0, inf), gamma > 0.
  static Nonlinearity power(double gamma, int k);
  /// f(t) = e^t on R.
  static Nonlinearity exponential(int k);
  /// f(t) = (sqrt(1+t^2) - t)^gamma with gamma < 0: increasing, positive,
  /// behaves like (-t)^gamma as t -> -inf and like (2t)^{-gamma} at +inf.
  static Nonlinearity negative_power_tail(double gamma, int k);
  /// f(t) = t^gamma ln^p(1+t) on [0, inf): regularly varying with index
  /// gamma at infinity and gamma+p at zero.
  static Nonlinearity power_log(double gamma, double p, int k);
  /// Sampled f with power-law tail extensions.  Positive-infinity exponent
  /// is required; exactly one of the zero/negative-infinity exponents
  /// selects the sign class.
  static Nonlinearity tabulated(std::vector<double> t, std::vector<double> f,
                                double tail_exp_plus,
                                std::optional<double> tail_exp_zero,
                                std::optional<double> tail_exp_minus, int k);
  /// Two-column text file (t, f) with `tail_exp_plus = ...` and either
  /// `tail_exp_zero = ...` or `tail_exp_minus = ...` header lines.
  static Nonlinearity from_file(const std::string& path, int k);

  double f(double t) const;
  double fprime(double t) const;
  /// Antiderivative from the natural base point: F(t) = int_0^t f for S1,
  /// int_{-inf}^t f for S01.  Throws when the S01 tail is not integrable.
  double F(double t) const;
  bool has_antiderivative() const;

  int k() const;
  SignClass sign_class() const;
  Family family() const;
  double domain_min() const;  // 0.0 or -infinity
  std::string describe() const;

  /// Power-law exponents where known (analytic for built-ins, header
  /// values for tabulated data); nullopt for genuinely non-power growth
  /// (the exponential family).
  std::optional<double> growth_exponent_at_infinity() const;
  std::optional<double> behaviour_exponent_at_zero() const;    // S1
  std::optional<double> tail_exponent_at_neg_infinity() const; // S01

 private:
  struct Core;
  std::shared_ptr<const Core> core_;
  explicit Nonlinearity(std::shared_ptr<const Core> c) : core_(std::move(c)) {}
};

/// int_t^inf f(s)^{-1/k} ds.  Throws NumericsError naming the
/// Keller-Osserman violation when the tail diverges.
double tail_f(const Nonlinearity& d, double t);

/// int_t^inf F(s)^{-1/(k+1)} ds, same divergence contract.
double tail_F(const Nonlinearity& d, double t);

/// I(t) = (f^{1/k})'(t) * int_t^inf f^{-1/k}.
double index_I(const Nonlinearity& d, double t);

/// J(t) = (F^{1/(k+1)})'(t) * int_t^inf F^{-1/(k+1)}.
double index_J(const Nonlinearity& d, double t);

struct LimitConstants {
  double C_inf = 0.0;            // lim I at +infinity (+inf reported via flag)
  bool C_inf_finite = true;
  std::optional<double> C_zero;     // lim I at 0+        (S1)
  std::optional<double> C_neg_inf;  // lim I at -infinity (S01)
  std::optional<double> E_zero;     // lim J at 0+        (S1)
  std::optional<double> E_neg_inf;  // lim J at -infinity (S01)
  double h0 = 0.0;  // inf of I over the domain
  double H0 = 0.0;  // sup of I (+inf when C_inf is infinite)
  bool H0_finite = true;
};

/// Closed forms for the built-in families, extrapolation for tabulated
/// data.  Throws HypothesisError when h0 <= 0 (the structure conditions
/// on f fail).
LimitConstants limit_constants(const Nonlinearity& d);

enum class KOOrder {
  GradientK,  // integrability of f^{-1/k} at +infinity
  EnergyK1,   // integrability of F^{-1/(k+1)} at +infinity, divergence at 0+
};

struct KOReport {
  bool tail_converges = false;
  std::optional<bool> near_zero_diverges;  // EnergyK1 with an S1 family only
};

KOReport keller_osserman(const Nonlinearity& d, KOOrder order = KOOrder::EnergyK1);

struct IndexEquivalence {
  double C = 0.0;                        // C_f^{+inf} (finite branch)
  bool rapid_variation = false;          // C == 1 branch
  std::optional<double> predicted_gamma; // k C / (C-1), or k when C = +inf
  std::optional<double> measured_gamma;  // extrapolated rv index of f at +inf
  double discrepancy = 0.0;
  bool superpolynomial_checked = false;  // f(t)/t^10 -> inf probe (rapid branch)
};

/// Cross-check of the index/regular-variation correspondence: gamma and
/// k C/(C-1) must agree for power-like growth; C = 1 flags the
/// rapidly varying branch instead.
IndexEquivalence index_equivalence_check(const Nonlinearity& d);

}  // namespace khess::nonlin
