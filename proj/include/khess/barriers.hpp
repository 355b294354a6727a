#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "khess/geometry.hpp"
#include "khess/karamata.hpp"
#include "khess/nonlinearity.hpp"
#include "khess/numerics.hpp"
#include "khess/transforms.hpp"

namespace khess::barriers {

// ---------------------------------------------------------------------------
// Boundary-rate profile theta and its antiderivative.

/// Positive monotone profile theta on (0, delta0) with antiderivative
/// Theta(t) = int_0^t theta and the limit constant
/// D = lim_{t->0+} d/dt (Theta/theta), finite and nonnegative.
class ThetaFunction {
 public:
  static ThetaFunction constant(double c = 1.0);
  /// theta(t) = scale * t^beta with beta > -1; D = 1/(beta+1).
  static ThetaFunction power(double beta, double scale = 1.0);
  static ThetaFunction from_callable(num::Fn theta, double delta0 = 1.0);

  double theta(double t) const;
  double antiderivative(double t) const;  // Theta(t)
  double D() const { return D_; }

 private:
  enum class Kind { Constant, Power, Callable };
  Kind kind_ = Kind::Constant;
  double c_ = 1.0;
  double beta_ = 0.0;
  num::Fn fn_;
  double delta0_ = 1.0;
  double D_ = 1.0;
};

// ---------------------------------------------------------------------------
// Weight b(x).

enum class WeightForm { Power, LogCritical, Karamata, BoundaryRate };

/// Weight envelope b1 * model <= b <= b2 * model where the model is one of
///   v^lambda | v^{-k-1} (-ln v)^{-k mu} | v^lambda Ltilde^k(v) | theta^{k+1}(d).
/// The default evaluator is b = b1 * model; a custom evaluator may be
/// attached and checked against the envelope.
class Weight {
 public:
  static Weight power(double lambda, double b1 = 1.0, double b2 = 1.0);
  static Weight log_critical(double mu, double b1 = 1.0, double b2 = 1.0);
  static Weight karamata(double lambda, karamata::SlowlyVarying Ltilde,
                         double b1 = 1.0, double b2 = 1.0);
  static Weight boundary_rate(ThetaFunction theta, double b1 = 1.0,
                              double b2 = 1.0);

  WeightForm form() const { return form_; }
  double b1() const { return b1_; }
  double b2() const { return b2_; }
  double lambda() const;
  double mu() const;
  const karamata::SlowlyVarying& slowly_varying() const;
  const ThetaFunction& theta() const;

  double model(double v, double d, int k) const;
  double evaluate(double v, double d, int k) const;
  Weight with_evaluator(std::function<double(double, double)> b_of_v_d) const;
  /// Envelope sandwich b1*model <= b <= b2*model on an n-point radial grid.
  bool check_envelope(const geom::BallDomain& dom,
                      const geom::DefiningFunction& dfn, int n = 256) const;

 private:
  WeightForm form_ = WeightForm::Power;
  double b1_ = 1.0, b2_ = 1.0;
  double lambda_ = 0.0, mu_ = 0.0;
  std::optional<karamata::SlowlyVarying> L_;
  std::optional<ThetaFunction> theta_;
  std::function<double(double, double)> eval_;  // (v, d) -> b
};

// ---------------------------------------------------------------------------
// Problem bundle.

struct BallProblem {
  geom::BallDomain dom;
  geom::DefiningFunction dfn;
  Weight weight;
  nonlin::Nonlinearity f;
  BallProblem(geom::BallDomain dom_, geom::DefiningFunction dfn_,
              Weight weight_, nonlin::Nonlinearity f_)
      : dom(dom_), dfn(dfn_), weight(std::move(weight_)), f(std::move(f_)) {}
  /// b at radius r through the weight evaluator.
  double b_at(double r) const;
};

// ---------------------------------------------------------------------------
// Barrier construction.

enum class Theorem { T21, T22, T23, T24, T25, T26 };
enum class Role { Sub, Super };

struct HypothesisReport {
  bool ok = true;
  std::vector<std::string> checks;  // one line per verified condition
  std::vector<std::string> notes;   // adjustments such as the c_v shrink
  void pass(const std::string& line) { checks.push_back("[ok]   " + line); }
  void fail(const std::string& line) {
    ok = false;
    checks.push_back("[FAIL] " + line);
  }
};

struct TauResult {
  double tau = 0.0;
  double residual = 0.0;      // |tau^p * extremum - b| after the final polish
  double extremum = 0.0;      // extremal omega value at the solution
  double extremum_radius = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  bool closed_form = false;   // tau-independent omega, no bisection needed
};

class BarrierEngine;

/// Evaluable sub/supersolution: a profile h(v) composed with the defining
/// function.  Immutable; cheap to copy.
class Barrier {
 public:
  Theorem theorem() const { return theorem_; }
  Role role() const { return role_; }
  /// h(v), dh/dv, d2h/dv2.
  transforms::Derivs profile(double v) const { return profile_(v); }
  double value_r(double r) const;
  double value_d(double d) const;
  double tau() const { return tau_; }
  /// m0/M0 (power case) or m1/M1 (log case); 0 for the transform cases.
  double amplitude() const { return amplitude_; }
  double alpha() const { return alpha_; }
  double eta() const { return eta_; }
  const HypothesisReport& report() const { return *report_; }
  /// Problem the barrier was actually built for (the defining function may
  /// have been rescaled to meet a smallness hypothesis).
  const BallProblem& problem() const { return *problem_; }

 private:
  friend class BarrierEngine;
  Theorem theorem_ = Theorem::T21;
  Role role_ = Role::Super;
  std::function<transforms::Derivs(double)> profile_;
  double tau_ = 0.0, amplitude_ = 0.0, alpha_ = 0.0, eta_ = 0.0;
  std::shared_ptr<const HypothesisReport> report_;
  std::shared_ptr<const BallProblem> problem_;
};

enum class TauSide { MaxToB1, MinToB2 };

/// Shared evaluation context for one problem: transforms, index limits and
/// the Karamata primitive are built once and reused by every omega
/// evaluation, tau solve and barrier construction.
class BarrierEngine {
 public:
  explicit BarrierEngine(BallProblem prob);

  const BallProblem& problem() const;
  /// Coefficient function omega_j(tau, r), j = 0..5, exact closed-ball
  /// algebra (j=0,1 ignore tau).
  double omega(int j, double tau, double r) const;
  /// Solves tau^p * ext_r omega_j(tau, r) = b with p = k (j = 2,3,4) or
  /// k+1 (j = 5); ext is max (-> b1) or min (-> b2).
  TauResult solve_tau(int j, TauSide side, int n_grid = 4096) const;
  Barrier build(Theorem t, Role role) const;

  const nonlin::LimitConstants& limits() const;
  const transforms::PsiTransform& psi() const;
  const transforms::PhiTransform& phi() const;
  /// W(v) = int_0^v s^{(1+lambda)/k} Ltilde(s) ds for the Karamata weight.
  double karamata_primitive(double v) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

Barrier build_barrier(const BallProblem& prob, Theorem t, Role role);

// ---------------------------------------------------------------------------
// Verification.

struct VerifyReport {
  double worst_margin = 0.0;  // scaled inequality slack; negative = violation
  double worst_radius = 0.0;
  int points = 0;
  int violations = 0;
  int convexity_failures = 0;
  bool ok(double tol = -1e-9) const {
    return worst_margin >= tol && convexity_failures == 0;
  }
};

/// Pointwise S_k(D^2 barrier) vs b f(barrier) with the role's inequality
/// direction, plus strict k-convexity of the composed radial Hessian.
/// Margins are scaled by the local magnitude of both sides.
VerifyReport verify_barrier(const Barrier& b, int n_grid = 1024);
/// Same check against an explicit problem (for perturbed-weight cases).
VerifyReport verify_barrier(const Barrier& b, const BallProblem& prob,
                            int n_grid = 1024);

/// Minimum of super(r) - sub(r) scaled by local size; negative means the
/// ordering fails somewhere.
double barrier_ordering_margin(const Barrier& sub, const Barrier& super,
                               int n_grid = 1024);

// ---------------------------------------------------------------------------
// Boundary-rate constants.

struct RateConstants {
  double tau9 = 0.0;
  double tau10 = 0.0;
  double exponent = 0.0;  // 1 - C_f^{+inf}
  double C = 0.0;
  double D_theta = 0.0;
  double M_plus = 0.0, M_minus = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
};

/// tau9 = k/(k+1) * (b1 k / (((k+1)(C-1) + k D) M+))^{1/k}, tau10 with
/// b2 and M-; on balls M+- = C(N-1,k-1)/R^{k-1}.  The predicted ratio
/// bracket is [tau10^{1-C}, tau9^{1-C}] (the single value 1 when C = 1).
RateConstants rate_constants(const BallProblem& prob,
                             std::optional<ThetaFunction> theta = std::nullopt);

}  // namespace khess::barriers
