#include <cmath>
#include <vector>

#include "doctest.h"
#include "khess/errors.hpp"
#include "khess/nonlinearity.hpp"
#include "khess/numerics.hpp"

using namespace khess;
using nonlin::Nonlinearity;

TEST_CASE("built-in families evaluate f, f' and F consistently") {
  auto pw = Nonlinearity::power(3.0, 1);
  CHECK(pw.f(2.0) == doctest::Approx(8.0));
  CHECK(pw.fprime(2.0) == doctest::Approx(12.0));
  CHECK(pw.F(2.0) == doctest::Approx(4.0));  // t^4/4
  CHECK(pw.sign_class() == nonlin::SignClass::S1);
  CHECK(pw.growth_exponent_at_infinity().value() == doctest::Approx(3.0));
  CHECK_FALSE(pw.describe().empty());

  auto ex = Nonlinearity::exponential(2);
  CHECK(ex.f(-1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(ex.F(0.0) == doctest::Approx(1.0));  // int_{-inf}^0 e^s
  CHECK(ex.sign_class() == nonlin::SignClass::S01);
  CHECK_FALSE(ex.growth_exponent_at_infinity().has_value());

  auto pl = Nonlinearity::power_log(3.0, 2.0, 1);
  CHECK(pl.f(4.0) == doctest::Approx(64.0 * std::pow(std::log(5.0), 2.0)));
}

TEST_CASE("derivatives agree with central differences") {
  std::vector<Nonlinearity> fams = {
      Nonlinearity::power_log(3.0, 2.0, 1),
      Nonlinearity::negative_power_tail(-2.0, 1),
      Nonlinearity::exponential(1),
  };
  for (const auto& d : fams) {
    for (double t : {-1.5, 0.5, 1.0, 3.0, 7.0}) {
      if (d.sign_class() == nonlin::SignClass::S1 && t <= 0.0) continue;
      const double h = 1e-5 * std::max(1.0, std::abs(t));
      const double fd = (d.f(t + h) - d.f(t - h)) / (2.0 * h);
      CHECK(d.fprime(t) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("gradient-order index is exactly constant for powers") {
  auto d = Nonlinearity::power(3.0, 2);
  for (double t : {0.7, 1.0, 5.0, 40.0})
    CHECK(nonlin::index_I(d, t) == doctest::Approx(3.0).epsilon(1e-8));

  auto sq = Nonlinearity::power(2.0, 1);
  CHECK(nonlin::index_I(sq, 1.0) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("gradient-order index is exactly one for the exponential") {
  auto d = Nonlinearity::exponential(1);
  for (double t : {-3.0, 0.0, 2.0})
    CHECK(nonlin::index_I(d, t) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("energy-order index matches the power closed form") {
  auto d = Nonlinearity::power(4.0, 2);
  for (double t : {0.5, 1.0, 9.0})
    CHECK(nonlin::index_J(d, t) == doctest::Approx(2.5).epsilon(1e-8));
  auto cu = Nonlinearity::power(3.0, 1);
  CHECK(nonlin::index_J(cu, 1.0) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("divergent comparison tails raise the growth-condition error") {
  auto slow = Nonlinearity::power(1.0, 1);  // f^{-1/k} = 1/t not integrable
  CHECK_THROWS_AS(nonlin::tail_f(slow, 1.0), NumericsError);
  CHECK_THROWS_AS(nonlin::index_I(slow, 1.0), NumericsError);
}

TEST_CASE("limit constants reproduce the closed forms of each family") {
  // Power: C = gamma/(gamma-k) at both ends, E0 = (gamma+1)/(gamma-k).
  auto pw = nonlin::limit_constants(Nonlinearity::power(3.0, 2));
  CHECK(pw.C_inf_finite);
  CHECK(pw.C_inf == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(pw.C_zero.value() == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(pw.E_zero.value() == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(pw.h0 == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(pw.H0 == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(pw.H0_finite);

  // Exponential: everything collapses to 1.
  auto ex = nonlin::limit_constants(Nonlinearity::exponential(1));
  CHECK(ex.C_inf == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ex.C_neg_inf.value() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ex.E_neg_inf.value() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ex.h0 == doctest::Approx(1.0).epsilon(1e-9));

  // Negative-power tail gamma = -2, k = 1: C at -inf is gamma/(gamma-k),
  // growth at +inf behaves like t^2 so C at +inf is 2.
  auto np = nonlin::limit_constants(Nonlinearity::negative_power_tail(-2.0, 1));
  CHECK(np.C_neg_inf.value() == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(np.C_inf == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(np.E_neg_inf.value() == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

  // Power-log gamma = 3, p = 2, k = 1: index gamma at infinity and
  // gamma + p at zero.
  auto pl = nonlin::limit_constants(Nonlinearity::power_log(3.0, 2.0, 1));
  CHECK(pl.C_inf == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(pl.C_zero.value() == doctest::Approx(1.25).epsilon(1e-6));
  CHECK(pl.E_zero.value() == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("limit constants satisfy the structural inequalities") {
  auto np = nonlin::limit_constants(Nonlinearity::negative_power_tail(-2.0, 1));
  CHECK(np.C_neg_inf.value() <= 1.0 + 1e-9);
  CHECK(np.E_neg_inf.value() <= 1.0 + 1e-9);

  auto pw = nonlin::limit_constants(Nonlinearity::power(3.0, 2));
  CHECK(pw.E_zero.value() >= 1.0 - 1e-9);
}

TEST_CASE("the normalised tail product converges to C - 1") {
  // f^{1/k}(t)/t * int_t^inf f^{-1/k} is exactly C - 1 for pure powers.
  auto pw = Nonlinearity::power(5.0, 2);
  for (double t : {1.0, 4.0}) {
    const double prod = std::pow(pw.f(t), 0.5) / t * nonlin::tail_f(pw, t);
    CHECK(prod == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  }
  // With a log correction the product still converges to C - 1 = 0.5.
  // The error expands in powers of 1/ln t, so extrapolate polynomially
  // in that variable.
  auto pl = Nonlinearity::power_log(3.0, 1.0, 1);
  std::vector<double> xs, seq;
  for (int j = 0; j < 14; ++j) {
    const double t = 10.0 * std::pow(2.0, j);
    xs.push_back(1.0 / std::log(t));
    seq.push_back(pl.f(t) / t * nonlin::tail_f(pl, t));
  }
  CHECK(std::abs(seq.back() - 0.5) <= 0.05);
  CHECK(std::abs(num::neville_limit(xs, seq).value - 0.5) <= 1e-4);
}

TEST_CASE("Keller-Osserman reports for representative growth laws") {
  auto ok = nonlin::keller_osserman(Nonlinearity::power(3.0, 1));
  CHECK(ok.tail_converges);
  CHECK(ok.near_zero_diverges.value());

  auto lin = nonlin::keller_osserman(Nonlinearity::power(1.0, 1), nonlin::KOOrder::GradientK);
  CHECK_FALSE(lin.tail_converges);

  auto ex = nonlin::keller_osserman(Nonlinearity::exponential(1));
  CHECK(ex.tail_converges);
  CHECK_FALSE(ex.near_zero_diverges.has_value());  // domain is all of R
}

TEST_CASE("borderline index-k powers diverge in the energy tail") {
  // f = t^k: F/(t f) = 1/(k+1) exactly and the energy tail diverges.
  auto d = Nonlinearity::power(2.0, 2);
  for (double t : {0.5, 1.0, 6.0})
    CHECK(d.F(t) / (t * d.f(t)) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK_THROWS_AS(nonlin::tail_F(d, 1.0), NumericsError);
  auto rep = nonlin::keller_osserman(d, nonlin::KOOrder::EnergyK1);
  CHECK_FALSE(rep.tail_converges);
}

TEST_CASE("index and regular-variation views of growth agree") {
  auto eq = nonlin::index_equivalence_check(Nonlinearity::power(3.0, 2));
  CHECK_FALSE(eq.rapid_variation);
  CHECK(eq.C == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(eq.predicted_gamma.value() == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(eq.measured_gamma.value() == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(std::abs(eq.discrepancy) <= 1e-3);

  auto ex = nonlin::index_equivalence_check(Nonlinearity::exponential(1));
  CHECK(ex.rapid_variation);
  CHECK(ex.superpolynomial_checked);
}

TEST_CASE("tabulated data recovers its growth exponent from samples") {
  // f(t) = t^4 (1 + 1/ln(e+t)) sampled over eight decades, k = 2.
  std::vector<double> ts, fs;
  for (int j = 0; j <= 160; ++j) {
    const double t = std::pow(10.0, -4.0 + 8.0 * j / 160.0);
    ts.push_back(t);
    fs.push_back(std::pow(t, 4.0) * (1.0 + 1.0 / std::log(std::exp(1.0) + t)));
  }
  auto tab = Nonlinearity::tabulated(ts, fs, 4.0, 4.0, std::nullopt, 2);
  CHECK(tab.family() == nonlin::Family::Tabulated);
  CHECK(tab.f(1.0) == doctest::Approx(1.0 + 1.0 / std::log(std::exp(1.0) + 1.0)).epsilon(1e-6));

  auto eq = nonlin::index_equivalence_check(tab);
  CHECK(eq.measured_gamma.value() == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(eq.predicted_gamma.value() == doctest::Approx(4.0).epsilon(1e-2));
}
