#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "khess/errors.hpp"
#include "khess/geometry.hpp"
#include "khess/numerics.hpp"
#include "khess/symfun.hpp"

using namespace khess;
using geom::BallDomain;
using geom::DefiningFunction;

TEST_CASE("domain construction enforces the structural invariants") {
  CHECK_THROWS_AS(BallDomain(3, 4, 1.0), ArgumentError);   // k > N
  CHECK_THROWS_AS(BallDomain(2, 1, -1.0), ArgumentError);  // R <= 0
  BallDomain dom(3, 2, 2.0);
  CHECK(dom.N == 3);
  CHECK(dom.k == 2);
}

TEST_CASE("defining function defaults keep the maximum below one") {
  BallDomain dom(2, 1, 3.0);
  DefiningFunction v(dom);
  CHECK(v.c_v() == doctest::Approx(1.0 / 18.0));
  CHECK(v.max_value() == doctest::Approx(0.5));
  CHECK(v.value_r(3.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(v.value_r(0.0) == doctest::Approx(0.5));
  CHECK(v.value_d(1.0) == doctest::Approx(v.value_r(2.0)));
  CHECK(v.radial_derivative(1.5) == doctest::Approx(-2.0 * v.c_v() * 1.5));
  CHECK_THROWS_AS(DefiningFunction(dom, 1.0), ArgumentError);  // c_v R^2 >= 1
}

TEST_CASE("pinned unit-ball coefficients: A = 1 - r^2 and Sigma = r^2") {
  BallDomain dom(2, 1, 1.0);
  DefiningFunction v(dom, 0.5);
  CHECK(geom::neg_sk_hessian_v(dom, v) == doctest::Approx(2.0));
  for (double r : {0.0, 0.3, 0.8, 0.99}) {
    CHECK(geom::defining_product(dom, v, r) == doctest::Approx(1.0 - r * r).epsilon(1e-14));
    CHECK(geom::submatrix_sum_term(dom, v, r) == doctest::Approx(r * r).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("composition with the identity profile returns the Hessian determinant data") {
  // h(v) = v: S_k(D^2 v) itself.  N = 2, k = 2, c_v = 1/4: det(-I/2) = 1/4.
  BallDomain dom(2, 2, 1.0);
  DefiningFunction v(dom, 0.25);
  CHECK(geom::sk_of_v_composition(dom, v, 1.0, 0.0, 0.6) == doctest::Approx(0.25).epsilon(1e-13));
  // Constant profile: zero.
  CHECK(geom::sk_of_v_composition(dom, v, 0.0, 0.0, 0.6) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("spectral composition agrees with the dense-matrix oracle") {
  // Includes even k, which exercises the characteristic-polynomial signs.
  std::mt19937 rng(20240818);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 120; ++trial) {
    const int N = 2 + int(uni(rng) * 3.0);       // 2..4
    const int k = 1 + int(uni(rng) * N) % N;     // 1..N
    BallDomain dom(N, k, 1.0);
    const double cv = 0.1 + 0.35 * uni(rng);
    DefiningFunction v(dom, cv);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
    for (int i = 0; i < N; ++i) x[i] = coef(rng) * 0.3;
    if (x.norm() >= 0.95) x *= 0.9 / x.norm();
    const double hp = coef(rng);
    const double hpp = coef(rng);
    const double spectral = geom::sk_of_v_composition(dom, v, hp, hpp, x.norm());
    const double dense = geom::sk_of_v_composition_matrix(dom, v, hp, hpp, x);
    const double scale = std::max({1.0, std::abs(spectral), std::abs(dense)});
    CHECK(std::abs(spectral - dense) / scale <= 1e-10);
  }
}

TEST_CASE("quadratic profile pinned cross-check at an off-axis point") {
  // h(v) = v^2 at x = (0.5, 0) with c_v = 1/4.
  BallDomain dom(2, 1, 1.0);
  DefiningFunction v(dom, 0.25);
  Eigen::VectorXd x(2);
  x << 0.5, 0.0;
  const double vv = v.value_r(0.5);
  const double spectral = geom::sk_of_v_composition(dom, v, 2.0 * vv, 2.0, 0.5);
  const double dense = geom::sk_of_v_composition_matrix(dom, v, 2.0 * vv, 2.0, x);
  CHECK(spectral == doctest::Approx(dense).epsilon(1e-10));
}

TEST_CASE("distance composition evaluates the curvature formula") {
  BallDomain dom(2, 1, 1.0);
  // eps = 1/(R - d) = 2 at d = 1/2; h' = -1, h'' = 0.
  CHECK(geom::sk_of_distance_composition(dom, -1.0, 0.0, 0.5) == doctest::Approx(2.0));
  CHECK(geom::sk_of_distance_composition(dom, 0.0, 0.0, 0.5) == doctest::Approx(0.0).scale(1.0));

  // N = 3, k = 2 toward the boundary: eps -> 1, S2(eps) = 1, S1(eps) = 2.
  BallDomain dom32(3, 2, 1.0);
  CHECK(geom::sk_of_distance_composition(dom32, -1.0, 1.0, 1e-9) ==
        doctest::Approx(3.0).epsilon(1e-7));

  CHECK_THROWS_AS(geom::sk_of_distance_composition(dom, -1.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(geom::sk_of_distance_composition(dom, -1.0, 0.0, 0.0), DomainError);
}

TEST_CASE("curvature factors stay positive and approach the boundary curvature") {
  BallDomain dom(3, 1, 2.0);
  // eps(d) = 1/(R-d) realised through the composition with h' = -1, h'' = 0,
  // k = 1: S_1 = (N-1) eps, decreasing toward the boundary.
  double prev = std::numeric_limits<double>::infinity();
  for (double d : {1.9, 1.0, 0.5, 0.1, 1e-3, 1e-6}) {
    const double s1 = geom::sk_of_distance_composition(dom, -1.0, 0.0, d);
    CHECK(s1 > 0.0);
    CHECK(s1 < prev);
    prev = s1;
  }
  // eps -> kappa = 1/R as d -> 0.
  CHECK(geom::sk_of_distance_composition(dom, -1.0, 0.0, 1e-9) ==
        doctest::Approx(2.0 * (1.0 / 2.0)).epsilon(1e-8));
}

TEST_CASE("radial S_k of the paraboloid is the binomial constant") {
  for (int N : {2, 3, 4}) {
    for (int k = 1; k <= N; ++k) {
      BallDomain dom(N, k, 1.0);
      // u = |x|^2/2: u' = r, u'' = 1, Hessian = identity.
      CHECK(geom::radial_sk(dom, 0.37, 1.0, 0.37) ==
            doctest::Approx(num::binomial(N, k)).epsilon(1e-13));
      CHECK(geom::radial_sk_origin(dom, 1.0) == doctest::Approx(num::binomial(N, k)));
    }
  }
  // N = 2, k = 1 is the radial Laplacian u'' + u'/r.
  BallDomain dom21(2, 1, 1.0);
  CHECK(geom::radial_sk(dom21, 0.3, -0.7, 0.5) == doctest::Approx(-0.7 + 0.3 / 0.5));
}

TEST_CASE("radial S_k equals the symmetric function of the profile eigenvalues") {
  // Eigenvalues: u'' once and u'/r with multiplicity N - 1.
  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  std::uniform_real_distribution<double> upps(-2.0, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int N = 4;
    const int k = 1 + trial % 4;
    BallDomain dom(N, k, 1.0);
    const double r = 0.05 + 0.9 * uni(rng);
    const double up = uni(rng);
    const double upp = upps(rng);
    Eigen::VectorXd lam(N);
    lam[0] = upp;
    for (int i = 1; i < N; ++i) lam[i] = up / r;
    CHECK(geom::radial_sk(dom, up, upp, r) ==
          doctest::Approx(symfun::elem_sym(lam, k)).epsilon(1e-11).scale(1.0));
  }
}

TEST_CASE("the origin requires the limit form") {
  BallDomain dom(3, 2, 1.0);
  CHECK_THROWS_AS(geom::radial_sk(dom, 0.0, 1.0, 0.0), DomainError);
  CHECK(geom::radial_sk_origin(dom, 2.0) == doctest::Approx(3.0 * 4.0));
}

TEST_CASE("flux form and product form of the radial operator agree") {
  // d/dr flux(u', r) = r^{N-1} S_k for u = r^2/2 follows from
  // C(N,k) = C(N-1,k-1) N / k; verify numerically by differencing.
  BallDomain dom(4, 2, 1.0);
  const double r = 0.6, h = 1e-6;
  const double dflux =
      (geom::flux_of_gradient(dom, r + h, r + h) - geom::flux_of_gradient(dom, r - h, r - h)) /
      (2.0 * h);
  const double rhs = std::pow(r, 3) * geom::radial_sk(dom, r, 1.0, r);
  CHECK(dflux == doctest::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("gradient recovery inverts the flux integral") {
  // For u = r^2/2, int_0^r s^{N-1} S_k ds = C(N,k) r^N / N.
  for (int N : {2, 3, 4}) {
    for (int k = 1; k <= N; ++k) {
      BallDomain dom(N, k, 1.0);
      const double r = 0.45;
      const double flux_int = num::binomial(N, k) * std::pow(r, N) / N;
      const double upk = geom::gradient_power_from_flux(dom, r, flux_int);
      CHECK(std::pow(upk, 1.0 / k) == doctest::Approx(r).epsilon(1e-12));
    }
  }
  BallDomain dom(2, 1, 1.0);
  CHECK_THROWS_AS(geom::gradient_power_from_flux(dom, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(geom::flux_of_gradient(dom, 1.0, 1.5), DomainError);
}
