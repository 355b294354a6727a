#include <cmath>
#include <vector>

#include "doctest.h"
#include "khess/barriers.hpp"
#include "khess/errors.hpp"

using namespace khess;
using barriers::BallProblem;
using barriers::Barrier;
using barriers::BarrierEngine;
using barriers::Role;
using barriers::TauSide;
using barriers::Theorem;
using barriers::ThetaFunction;
using barriers::Weight;

namespace {

BallProblem unit_problem(int N, int k, nonlin::Nonlinearity f, Weight w,
                         double cv = -1.0) {
  geom::BallDomain dom(N, k, 1.0);
  geom::DefiningFunction dfn =
      cv > 0.0 ? geom::DefiningFunction(dom, cv) : geom::DefiningFunction(dom);
  return BallProblem(dom, dfn, std::move(w), std::move(f));
}

BallProblem pinned_cubic(double b1 = 1.0, double b2 = 1.0) {
  return unit_problem(2, 1, nonlin::Nonlinearity::power(3.0, 1),
                      Weight::power(0.0, b1, b2));
}

}  // namespace

TEST_CASE("boundary-rate profiles expose theta, Theta and the limit constant D") {
  auto c = ThetaFunction::constant(2.0);
  CHECK(c.theta(0.3) == doctest::Approx(2.0));
  CHECK(c.antiderivative(0.3) == doctest::Approx(0.6));
  CHECK(c.D() == doctest::Approx(1.0));

  auto p = ThetaFunction::power(1.0, 3.0);
  CHECK(p.theta(0.5) == doctest::Approx(1.5));
  CHECK(p.antiderivative(0.5) == doctest::Approx(0.375));  // 3 t^2 / 2
  CHECK(p.D() == doctest::Approx(0.5));

  CHECK_THROWS_AS(ThetaFunction::power(-1.0), ArgumentError);
  CHECK_THROWS_AS(ThetaFunction::constant(0.0), ArgumentError);
}

TEST_CASE("weight envelopes evaluate their model families") {
  auto pw = Weight::power(-1.0, 0.5, 2.0);
  CHECK(pw.lambda() == -1.0);
  CHECK(pw.model(0.25, 0.1, 1) == doctest::Approx(4.0));
  CHECK(pw.evaluate(0.25, 0.1, 1) == doctest::Approx(2.0));  // b1 * model

  auto lc = Weight::log_critical(2.0, 1.0, 1.0);
  // v^{-k-1} (-ln v)^{-k mu} at v = e^{-4}, k = 1: e^8 * 4^{-2}.
  CHECK(lc.model(std::exp(-4.0), 0.1, 1) ==
        doctest::Approx(std::exp(8.0) / 16.0).epsilon(1e-12));
  CHECK_THROWS_AS(Weight::log_critical(1.0), ArgumentError);

  auto ka = Weight::karamata(0.0, karamata::SlowlyVarying::log_power(1.0, 1.0));
  // v^0 * ln(e/v)^k at k = 1.
  CHECK(ka.model(std::exp(-1.0), 0.1, 1) == doctest::Approx(2.0).epsilon(1e-10));

  auto br = Weight::boundary_rate(ThetaFunction::power(1.0));
  // theta(d)^{k+1} = d^2 for k = 1.
  CHECK(br.model(0.3, 0.25, 1) == doctest::Approx(0.0625).epsilon(1e-12));

  CHECK_THROWS_AS(Weight::power(0.0, 2.0, 1.0), ArgumentError);  // b1 > b2
}

TEST_CASE("custom evaluators are checked against the envelope") {
  geom::BallDomain dom(2, 1, 1.0);
  geom::DefiningFunction dfn(dom);
  auto w = Weight::power(0.0, 0.5, 2.0);
  auto inside = w.with_evaluator([](double, double) { return 1.0; });
  CHECK(inside.check_envelope(dom, dfn));
  auto outside = w.with_evaluator([](double, double) { return 3.0; });
  CHECK_FALSE(outside.check_envelope(dom, dfn));
}

TEST_CASE("pinned coefficient functions on the unit ball") {
  // N = 2, k = 1, c_v = 1/2, f = t^3, b = 1: A = 1 - r^2, Sigma = r^2,
  // so omega_1 = 1 and omega_0 = omega_2 = 1 + r^2.
  BarrierEngine eng(pinned_cubic());
  for (double r : {0.1, 0.5, 0.9}) {
    CHECK(eng.omega(1, 0.0, r) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eng.omega(0, 0.0, r) == doctest::Approx(1.0 + r * r).epsilon(1e-12));
    CHECK(eng.omega(2, 0.7, r) == doctest::Approx(1.0 + r * r).epsilon(1e-10));
  }

  // With c_v = 1/4 the center value of omega_1 is A(0) = 1/4.
  BarrierEngine quarter(unit_problem(2, 1, nonlin::Nonlinearity::power(3.0, 1),
                                     Weight::power(0.0), 0.25));
  CHECK(quarter.omega(1, 0.0, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("index limits are shared through the engine") {
  BarrierEngine eng(pinned_cubic());
  CHECK(eng.limits().C_inf == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(eng.limits().h0 == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(eng.psi()(0.5) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(eng.problem().b_at(0.3) == doctest::Approx(1.0));
}

TEST_CASE("tau calibration against the omega extrema, pinned values") {
  // omega_2 = 1 + r^2 on (0,1): min 1, sup 2.  tau^k min = b2 gives the
  // subsolution amplitude, tau^k max = b1 the supersolution one.
  BarrierEngine eng(pinned_cubic());
  auto sub = eng.solve_tau(2, TauSide::MinToB2);
  CHECK(sub.tau == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sub.extremum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sub.closed_form);
  CHECK(std::abs(sub.residual) <= 1e-10);

  auto sup = eng.solve_tau(2, TauSide::MaxToB1);
  CHECK(sup.tau == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sup.extremum == doctest::Approx(2.0).epsilon(1e-6));

  // Scaling the envelope scales tau by (b)^{1/k}.
  BarrierEngine scaled(pinned_cubic(2.0, 2.0));
  CHECK(scaled.solve_tau(2, TauSide::MinToB2).tau == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(scaled.solve_tau(2, TauSide::MaxToB1).tau == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(eng.solve_tau(1, TauSide::MinToB2), ArgumentError);
  CHECK_THROWS_AS(eng.solve_tau(4, TauSide::MinToB2), ArgumentError);  // wrong weight form
}

TEST_CASE("tau calibration is stable under grid refinement") {
  BallProblem prob = unit_problem(3, 2, nonlin::Nonlinearity::exponential(2),
                                  Weight::power(0.0));
  BarrierEngine eng(prob);
  auto coarse = eng.solve_tau(2, TauSide::MaxToB1, 4096);
  auto fine = eng.solve_tau(2, TauSide::MaxToB1, 40960);
  CHECK(std::abs(coarse.tau - fine.tau) <= 1e-6 * std::abs(fine.tau));
  CHECK(std::abs(coarse.residual) <= 1e-10);
}

TEST_CASE("power-growth barriers carry the pinned amplitudes") {
  // N = 2, k = 1, gamma = 3, lambda = 0: alpha = 1, omega_0 extrema {1, 2},
  // so the amplitudes are m0 = 1 and M0 = sqrt(2).
  BallProblem prob = pinned_cubic();
  auto sub = barriers::build_barrier(prob, Theorem::T21, Role::Sub);
  auto sup = barriers::build_barrier(prob, Theorem::T21, Role::Super);
  CHECK(sub.amplitude() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sup.amplitude() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(sub.alpha() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sub.report().ok);

  // Profile m v^{-alpha} evaluated at the center where v = 1/2.
  CHECK(sub.value_r(0.0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(sup.value_r(0.0) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(sub.value_d(0.25) == doctest::Approx(sub.value_r(0.75)).epsilon(1e-12));

  auto vs = barriers::verify_barrier(sub);
  auto vS = barriers::verify_barrier(sup);
  CHECK(vs.ok(-1e-9));
  CHECK(vS.ok(-1e-9));
  CHECK(vs.convexity_failures == 0);
  CHECK(barriers::barrier_ordering_margin(sub, sup) >= -1e-9);
}

TEST_CASE("exponential barriers reproduce the exactly solvable profile") {
  // N = 2, k = 1, c_v = 1/2, f = e^u, b = 1: both amplitudes collapse to
  // ln 2 and the barrier u = ln 2 - 2 ln v solves the equation exactly.
  BallProblem prob = unit_problem(2, 1, nonlin::Nonlinearity::exponential(1),
                                  Weight::power(0.0));
  auto sub = barriers::build_barrier(prob, Theorem::T22, Role::Sub);
  auto sup = barriers::build_barrier(prob, Theorem::T22, Role::Super);
  CHECK(sub.amplitude() == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(sup.amplitude() == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(sub.value_r(0.0) == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-10));
  for (double r : {0.2, 0.6, 0.95}) {
    const double v = 0.5 * (1.0 - r * r);
    CHECK(sub.value_r(r) == doctest::Approx(std::log(2.0) - 2.0 * std::log(v)).epsilon(1e-10));
  }
  CHECK(barriers::verify_barrier(sub).ok(-1e-6));
  CHECK(barriers::verify_barrier(sup).ok(-1e-6));
  CHECK(barriers::barrier_ordering_margin(sub, sup) >= -1e-9);
}

TEST_CASE("verification flags an inflated subsolution amplitude") {
  // Building the subsolution against b' = 4/9 inflates m0 by 3/2; checked
  // against the original b = 1 problem the inequality fails.
  BallProblem weak = pinned_cubic(4.0 / 9.0, 4.0 / 9.0);
  auto sub = barriers::build_barrier(weak, Theorem::T21, Role::Sub);
  CHECK(sub.amplitude() == doctest::Approx(1.5).epsilon(1e-9));

  BallProblem original = pinned_cubic();
  auto rep = barriers::verify_barrier(sub, original);
  CHECK(rep.violations > 0);
  CHECK(rep.worst_margin < 0.0);
}

TEST_CASE("any admissible barrier dominates the degenerate zero weight") {
  // With b = 0 the subsolution inequality S_k >= b f is vacuous.
  BallProblem original = pinned_cubic();
  auto sub = barriers::build_barrier(original, Theorem::T21, Role::Sub);
  BallProblem zero = unit_problem(2, 1, nonlin::Nonlinearity::power(3.0, 1),
                                  Weight::power(0.0, 0.0, 0.0));
  auto rep = barriers::verify_barrier(sub, zero);
  CHECK(rep.ok(-1e-9));
  CHECK(rep.violations == 0);
}

TEST_CASE("transform barriers verify across the power and exponential families") {
  struct Config {
    int N, k;
    nonlin::Nonlinearity f;
    double lambda;
  };
  std::vector<Config> configs = {
      {2, 1, nonlin::Nonlinearity::power(3.0, 1), -1.0},
      {2, 1, nonlin::Nonlinearity::exponential(1), 0.0},
      {2, 1, nonlin::Nonlinearity::exponential(1), -1.0},
  };
  for (const auto& cfg : configs) {
    BallProblem prob = unit_problem(cfg.N, cfg.k, cfg.f, Weight::power(cfg.lambda));
    auto sub = barriers::build_barrier(prob, Theorem::T23, Role::Sub);
    auto sup = barriers::build_barrier(prob, Theorem::T23, Role::Super);
    CHECK(sub.eta() == doctest::Approx((cfg.k + 1 + cfg.lambda) / cfg.k));
    CHECK(sub.tau() >= sup.tau());  // psi is decreasing
    CHECK(barriers::verify_barrier(sub).ok(-1e-6));
    CHECK(barriers::verify_barrier(sup).ok(-1e-6));
    CHECK(barriers::barrier_ordering_margin(sub, sup) >= -1e-9);

    BarrierEngine eng(prob);
    CHECK(std::abs(eng.solve_tau(2, TauSide::MinToB2).residual) <= 1e-10);
    CHECK(std::abs(eng.solve_tau(2, TauSide::MaxToB1).residual) <= 1e-10);
  }
}

TEST_CASE("log-critical barriers rescale the defining function when needed") {
  BallProblem prob = unit_problem(2, 1, nonlin::Nonlinearity::power(3.0, 1),
                                  Weight::log_critical(2.0));
  auto sub = barriers::build_barrier(prob, Theorem::T24, Role::Sub);
  auto sup = barriers::build_barrier(prob, Theorem::T24, Role::Super);
  // max v = 1/2 > e^{-2}, so the build notes a rescaled c_v.
  bool noted = false;
  for (const auto& n : sub.report().notes)
    if (n.find("rescaled") != std::string::npos) noted = true;
  CHECK(noted);
  CHECK(sub.problem().dfn.max_value() <= std::exp(-2.0) + 1e-12);
  CHECK(barriers::verify_barrier(sub).ok(-1e-6));
  CHECK(barriers::verify_barrier(sup).ok(-1e-6));
  CHECK(barriers::barrier_ordering_margin(sub, sup) >= -1e-9);
}

TEST_CASE("slowly varying weights build through the Karamata primitive") {
  BallProblem prob = unit_problem(
      2, 1, nonlin::Nonlinearity::power(3.0, 1),
      Weight::karamata(0.0, karamata::SlowlyVarying::log_power(1.0, 1.5)));
  auto sub = barriers::build_barrier(prob, Theorem::T25, Role::Sub);
  auto sup = barriers::build_barrier(prob, Theorem::T25, Role::Super);
  CHECK(barriers::verify_barrier(sub).ok(-1e-6));
  CHECK(barriers::verify_barrier(sup).ok(-1e-6));
  CHECK(barriers::barrier_ordering_margin(sub, sup) >= -1e-9);
}

TEST_CASE("a trivial slowly varying factor reduces to the power weight") {
  // With Ltilde == 1 the Karamata coefficient function coincides with the
  // power-weight one at every (tau, r).
  BallProblem prob = unit_problem(2, 1, nonlin::Nonlinearity::power(3.0, 1),
                                  Weight::karamata(0.0, karamata::SlowlyVarying::constant(1.0)));
  BarrierEngine eng(prob);
  for (double tau : {0.5, 1.0, 1.7}) {
    for (double r : {0.2, 0.6, 0.9}) {
      CHECK(eng.omega(4, tau, r) == doctest::Approx(eng.omega(2, tau, r)).epsilon(1e-8));
    }
  }
  // The primitive itself has the closed form v^eta/eta, eta = 2.
  CHECK(eng.karamata_primitive(0.3) == doctest::Approx(0.045).epsilon(1e-8));
}

TEST_CASE("negative-exponent weights in the energy window use the phi profile") {
  BallProblem prob = unit_problem(
      2, 1, nonlin::Nonlinearity::power(3.0, 1),
      Weight::karamata(-1.5, karamata::SlowlyVarying::constant(1.0)));
  auto sub = barriers::build_barrier(prob, Theorem::T26, Role::Sub);
  auto sup = barriers::build_barrier(prob, Theorem::T26, Role::Super);
  CHECK(barriers::verify_barrier(sub).ok(-1e-6));
  CHECK(barriers::verify_barrier(sup).ok(-1e-6));
  CHECK(barriers::barrier_ordering_margin(sub, sup) >= -1e-9);

  BarrierEngine eng(prob);
  CHECK(std::abs(eng.solve_tau(5, TauSide::MinToB2).residual) <= 1e-10);
}

TEST_CASE("hypothesis failures are reported, not silently patched") {
  // Growth exponent at most k.
  CHECK_THROWS_AS(barriers::build_barrier(
                      unit_problem(2, 1, nonlin::Nonlinearity::power(0.5, 1),
                                   Weight::power(0.0)),
                      Theorem::T21, Role::Sub),
                  HypothesisError);
  // lambda at or below the critical exponent -k-1.
  CHECK_THROWS_AS(barriers::build_barrier(
                      unit_problem(2, 1, nonlin::Nonlinearity::power(3.0, 1),
                                   Weight::power(-2.0)),
                      Theorem::T21, Role::Sub),
                  HypothesisError);
  // Vanishing lower envelope.
  CHECK_THROWS_AS(barriers::build_barrier(
                      unit_problem(2, 1, nonlin::Nonlinearity::power(3.0, 1),
                                   Weight::power(0.0, 0.0, 1.0)),
                      Theorem::T21, Role::Sub),
                  HypothesisError);
  // The energy-window theorem outside its lambda range.
  CHECK_THROWS_AS(
      barriers::build_barrier(
          unit_problem(2, 1, nonlin::Nonlinearity::power(3.0, 1),
                       Weight::karamata(0.5, karamata::SlowlyVarying::constant(1.0))),
          Theorem::T26, Role::Sub),
      HypothesisError);
}

TEST_CASE("boundary-rate constants reproduce the solvable-case values") {
  // N = 2, k = 1, f = t^3, b = 1, theta = 1: C = 3/2, D = 1, M+- = 1,
  // tau9 = tau10 = 1/4 and the predicted ratio bracket collapses to {2}.
  auto rc = barriers::rate_constants(pinned_cubic(), ThetaFunction::constant(1.0));
  CHECK(rc.C == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(rc.D_theta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rc.M_plus == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rc.tau9 == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(rc.tau10 == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(rc.exponent == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(rc.bracket_lo == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(rc.bracket_hi == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("boundary-rate constants for the genuine Hessian configuration") {
  // k = N = 2, f = t^4: C = 2, tau9 = (2/3) sqrt(2/5),
  // ratio limit tau9^{1-C} = sqrt(45/8).
  BallProblem prob = unit_problem(2, 2, nonlin::Nonlinearity::power(4.0, 2),
                                  Weight::power(0.0));
  auto rc = barriers::rate_constants(prob, ThetaFunction::constant(1.0));
  CHECK(rc.C == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rc.tau9 == doctest::Approx(2.0 / 3.0 * std::sqrt(0.4)).epsilon(1e-9));
  CHECK(rc.bracket_hi == doctest::Approx(std::sqrt(45.0 / 8.0)).epsilon(1e-8));
}

TEST_CASE("rapidly varying growth collapses the rate bracket to one") {
  BallProblem prob = unit_problem(2, 1, nonlin::Nonlinearity::exponential(1),
                                  Weight::power(0.0));
  auto rc = barriers::rate_constants(prob, ThetaFunction::constant(1.0));
  CHECK(rc.C == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rc.bracket_lo == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rc.bracket_hi == doctest::Approx(1.0).epsilon(1e-9));
}
