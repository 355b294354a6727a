#include <cmath>
#include <vector>

#include "doctest.h"
#include "khess/errors.hpp"
#include "khess/numerics.hpp"

using namespace khess;

TEST_CASE("adaptive quadrature reproduces smooth integrals to tight tolerance") {
  auto res = num::integrate([](double s) { return std::cos(s); }, 0.0, 1.0);
  CHECK(std::abs(res.value - std::sin(1.0)) <= 1e-12);
  CHECK(res.evaluations > 0);

  // Oscillatory integrand forces subdivision.
  auto osc = num::integrate([](double s) { return std::sin(40.0 * s); }, 0.0, 1.0);
  CHECK(std::abs(osc.value - (1.0 - std::cos(40.0)) / 40.0) <= 1e-11);
}

TEST_CASE("adaptive quadrature handles integrable endpoint singularities") {
  // int_0^1 s^{-1/2} = 2; the node placement never touches s = 0.
  auto res = num::integrate([](double s) { return 1.0 / std::sqrt(s); }, 0.0, 1.0, 1e-11);
  CHECK(std::abs(res.value - 2.0) <= 1e-9);
}

TEST_CASE("exponential-substitution tail integral matches closed forms") {
  CHECK(num::integrate_tail_exp([](double s) { return std::exp(-s); }, 1.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  // int_2^inf s^-3 = 1/8.
  CHECK(num::integrate_tail_exp([](double s) { return 1.0 / (s * s * s); }, 2.0) ==
        doctest::Approx(0.125).epsilon(1e-10));
}

TEST_CASE("divergent tails are reported instead of silently truncated") {
  CHECK_THROWS_AS(num::integrate_tail_exp([](double s) { return 1.0 / s; }, 1.0),
                  NumericsError);
}

TEST_CASE("bisection refines a bracketed root to near machine precision") {
  const double root = num::bisect([](double x) { return x * x - 2.0; }, 1.0, 2.0);
  CHECK(std::abs(root - std::sqrt(2.0)) <= 1e-13);
}

TEST_CASE("multiplicative bracketing finds a sign change or reports failure") {
  auto br = num::bracket_multiplicative([](double x) { return x - 3.0; }, 1.0);
  CHECK(br.lo <= 3.0);
  CHECK(br.hi >= 3.0);
  CHECK_THROWS_AS(num::bracket_multiplicative([](double x) { return 1.0 + x * x; }, 1.0),
                  RangeError);
}

TEST_CASE("golden-section search locates a quadratic minimum") {
  double fmin = 0.0;
  const double x = num::golden_min([](double t) { return (t - 1.3) * (t - 1.3); },
                                   0.0, 3.0, 1e-9, &fmin);
  CHECK(std::abs(x - 1.3) <= 1e-7);
  CHECK(fmin <= 1e-13);
}

TEST_CASE("Aitken acceleration collapses geometric error sequences") {
  std::vector<double> seq;
  for (int n = 0; n <= 12; ++n) seq.push_back(1.0 + std::pow(2.0, -n));
  auto est = num::aitken_limit(seq);
  CHECK(est.converged);
  CHECK(std::abs(est.value - 1.0) <= 1e-10);
}

TEST_CASE("Neville extrapolation is exact for polynomial error models") {
  std::vector<double> x, y;
  for (int j = 0; j <= 6; ++j) {
    const double xj = std::pow(0.5, j);
    x.push_back(xj);
    y.push_back(3.0 + 2.0 * xj + xj * xj);
  }
  auto est = num::neville_limit(x, y);
  CHECK(est.converged);
  CHECK(std::abs(est.value - 3.0) <= 1e-11);
}

TEST_CASE("finite-difference weights reproduce classical stencils") {
  const std::vector<double> nodes{-1.0, 0.0, 1.0};
  auto w1 = num::fd_weights(0.0, nodes, 1);
  CHECK(w1[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(w1[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(w1[2] == doctest::Approx(0.5).epsilon(1e-14));
  auto w2 = num::fd_weights(0.0, nodes, 2);
  CHECK(w2[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w2[1] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(w2[2] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("finite-difference weights are exact on polynomials at scattered nodes") {
  const std::vector<double> nodes{0.1, 0.35, 0.4, 0.8, 1.1};
  const double z = 0.55;
  auto w = num::fd_weights(z, nodes, 1);
  // d/dx (x^3) at z.
  double acc = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) acc += w[j] * nodes[j] * nodes[j] * nodes[j];
  CHECK(acc == doctest::Approx(3.0 * z * z).epsilon(1e-12));
}

TEST_CASE("monotone cubic interpolation preserves monotone data") {
  std::vector<double> x{0.0, 0.5, 1.0, 1.7, 2.0, 3.0};
  std::vector<double> y{0.0, 0.1, 0.9, 1.0, 1.05, 4.0};
  num::Pchip p(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(p(x[i]) == doctest::Approx(y[i]));
  double prev = p(0.0);
  for (int i = 1; i <= 300; ++i) {
    const double xi = 3.0 * i / 300.0;
    const double v = p(xi);
    CHECK(v >= prev - 1e-13);
    prev = v;
  }
}

TEST_CASE("Chebyshev nodes include the endpoints and increase") {
  auto nodes = num::chebyshev_nodes(9, -1.0, 2.0);
  REQUIRE(nodes.size() == 9);
  CHECK(nodes.front() == doctest::Approx(-1.0));
  CHECK(nodes.back() == doctest::Approx(2.0));
  for (std::size_t i = 1; i < nodes.size(); ++i) CHECK(nodes[i] > nodes[i - 1]);
}

TEST_CASE("binomial coefficients are exact for small arguments") {
  CHECK(num::binomial(6, 3) == 20.0);
  CHECK(num::binomial(10, 5) == 252.0);
  CHECK(num::binomial(7, 0) == 1.0);
  CHECK(num::binomial(7, 7) == 1.0);
}

namespace {

std::vector<double> graded_grid(int n) {
  // Geometric refinement toward x = 0, mimicking the solver's boundary grids.
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::pow(1e-4, 1.0 - double(i) / (n - 1));
  x.insert(x.begin(), 0.0);
  return x;
}

double cumulative_error(int n) {
  auto x = graded_grid(n);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::exp(x[i]);
  auto cum = num::cumulative_integral(x, y);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::abs(cum[i] - (std::exp(x[i]) - 1.0)));
  return worst;
}

}  // namespace

TEST_CASE("cumulative integration is fourth order on smooth graded data") {
  const double e65 = cumulative_error(65);
  const double e129 = cumulative_error(129);
  // The widest cells of the graded grid dominate the constant, so the
  // absolute level is modest; the order shows in the refinement ratio.
  CHECK(e129 <= 1e-6);
  CHECK(e65 / e129 > 8.0);  // roughly h^4 between the two resolutions
}

TEST_CASE("cell integrals sum to the cumulative integral in either direction") {
  auto x = graded_grid(80);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + x[i]);
  auto cum = num::cumulative_integral(x, y);
  auto cells = num::cell_integrals(x, y);
  REQUIRE(cells.size() + 1 == cum.size());
  double forward = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    forward += cells[i];
    CHECK(std::abs(forward - cum[i + 1]) <= 1e-12 * (1.0 + std::abs(forward)));
  }
  double backward = 0.0;
  for (std::size_t i = cells.size(); i-- > 0;) backward += cells[i];
  CHECK(backward == doctest::Approx(cum.back()).epsilon(1e-12));
}
