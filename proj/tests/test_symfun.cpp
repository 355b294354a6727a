#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "khess/errors.hpp"
#include "khess/numerics.hpp"
#include "khess/symfun.hpp"

using namespace khess;

namespace {

// Brute-force e_k by explicit subset enumeration; the library uses a
// product recurrence, so this is an independent oracle.
double elem_sym_subsets(const Eigen::VectorXd& lam, int k) {
  const int n = int(lam.size());
  double total = 0.0;
  std::vector<int> idx(k);
  std::function<void(int, int, double)> rec = [&](int start, int depth, double prod) {
    if (depth == k) {
      total += prod;
      return;
    }
    for (int i = start; i < n; ++i) rec(i + 1, depth + 1, prod * lam[i]);
  };
  if (k == 0) return 1.0;
  rec(0, 0, 1.0);
  return total;
}

Eigen::MatrixXd random_symmetric(int n, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> uni(-scale, scale);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = uni(rng);
  return 0.5 * (A + A.transpose());
}

Eigen::MatrixXd random_orthogonal(int n, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
}

}  // namespace

TEST_CASE("elementary symmetric polynomials match hand values") {
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  CHECK(symfun::elem_sym(ones, 0) == 1.0);
  CHECK(symfun::elem_sym(ones, 2) == doctest::Approx(3.0));

  // Equal entries lambda: e_k = C(N,k) lambda^k.
  Eigen::VectorXd lam = Eigen::VectorXd::Constant(5, 1.7);
  for (int k = 1; k <= 5; ++k)
    CHECK(symfun::elem_sym(lam, k) ==
          doctest::Approx(num::binomial(5, k) * std::pow(1.7, k)).epsilon(1e-13));
}

TEST_CASE("product recurrence agrees with subset enumeration on random data") {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::VectorXd lam(5);
    for (int i = 0; i < 5; ++i) lam[i] = uni(rng);
    for (int k = 0; k <= 5; ++k) {
      const double ref = elem_sym_subsets(lam, k);
      CHECK(symfun::elem_sym(lam, k) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
    }
    auto all = symfun::elem_sym_all(lam);
    REQUIRE(all.size() == 6);
    for (int k = 0; k <= 5; ++k)
      CHECK(all[k] == doctest::Approx(symfun::elem_sym(lam, k)).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("matrix S_k matches diagonal closed forms") {
  CHECK(symfun::sk_matrix(Eigen::MatrixXd::Identity(3, 3), 2) == doctest::Approx(3.0));
  Eigen::MatrixXd D = Eigen::Vector3d(2.0, 3.0, 4.0).asDiagonal();
  CHECK(symfun::sk_matrix(D, 1) == doctest::Approx(9.0));
  CHECK(symfun::sk_matrix(D, 2) == doctest::Approx(26.0));
  CHECK(symfun::sk_matrix(D, 3) == doctest::Approx(24.0));
}

TEST_CASE("trace recurrence agrees with the eigendecomposition route for every order") {
  // Even orders catch sign conventions in the characteristic polynomial.
  std::mt19937 rng(7011);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;  // 2..4
    Eigen::MatrixXd M = random_symmetric(n, rng);
    for (int k = 1; k <= n; ++k) {
      const double a = symfun::sk_matrix(M, k);
      const double b = symfun::sk_matrix_eig(M, k);
      CHECK(a == doctest::Approx(b).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("S_k is invariant under orthogonal conjugation") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd M = random_symmetric(4, rng, 2.0);
    Eigen::MatrixXd Q = random_orthogonal(4, rng);
    Eigen::MatrixXd Mc = Q.transpose() * M * Q;
    Mc = 0.5 * (Mc + Mc.transpose());
    for (int k = 1; k <= 4; ++k)
      CHECK(symfun::sk_matrix(Mc, k) ==
            doctest::Approx(symfun::sk_matrix(M, k)).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("cone membership follows the S_i sign chain") {
  Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
  CHECK(symfun::is_k_convex(I3, 3, true));
  CHECK_FALSE(symfun::is_k_convex(-I3, 1));

  Eigen::MatrixXd D = Eigen::Vector2d(3.0, -1.0).asDiagonal();
  CHECK(symfun::is_k_convex(D, 1));   // trace 2 > 0
  CHECK_FALSE(symfun::is_k_convex(D, 2));  // det -3 < 0

  Eigen::VectorXd lam(2);
  lam << 3.0, -1.0;
  CHECK(symfun::is_k_convex_eigs(lam, 1));
  CHECK_FALSE(symfun::is_k_convex_eigs(lam, 2));
}

TEST_CASE("Gamma_k cones are nested") {
  std::mt19937 rng(512);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd M = random_symmetric(4, rng, 2.0);
    bool seen_failure = false;
    for (int k = 1; k <= 4; ++k) {
      const bool in_k = symfun::is_k_convex(M, k);
      if (seen_failure) CHECK_FALSE(in_k);
      if (!in_k) seen_failure = true;
    }
  }
}

TEST_CASE("principal-submatrix quadratic form sum matches the ball pinned value") {
  // M = -2c I, g = -2c x with c = 1/4 and x = (1,0): each 1x1 block
  // contributes det(M_ii) g_i^2 / M_ii = g_i^2, totalling |2c x|^2 = 1/4.
  const double c = 0.25;
  Eigen::MatrixXd M = -2.0 * c * Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd g(2);
  g << -2.0 * c * 1.0, 0.0;
  CHECK(symfun::submatrix_form_sum(M, g, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(symfun::submatrix_form_sum(M, Eigen::VectorXd::Zero(2), 1) == 0.0);
}

TEST_CASE("submatrix sum agrees with naive enumeration on negative-definite matrices") {
  std::mt19937 rng(40404);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 4;
    Eigen::MatrixXd A = random_symmetric(n, rng);
    Eigen::MatrixXd M = -(A * A.transpose()) - 0.3 * Eigen::MatrixXd::Identity(n, n);
    M = 0.5 * (M + M.transpose());
    Eigen::VectorXd g(n);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < n; ++i) g[i] = uni(rng);

    for (int k = 1; k <= 3; ++k) {
      // Enumerate index subsets directly.
      double ref = 0.0;
      std::vector<int> idx(k);
      std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
          Eigen::MatrixXd sub(k, k);
          Eigen::VectorXd gs(k);
          for (int a = 0; a < k; ++a) {
            gs[a] = g[idx[a]];
            for (int b = 0; b < k; ++b) sub(a, b) = M(idx[a], idx[b]);
          }
          ref += sub.determinant() * gs.dot(sub.fullPivLu().solve(gs));
          return;
        }
        for (int i = start; i < n; ++i) {
          idx[depth] = i;
          rec(i + 1, depth + 1);
        }
      };
      rec(0, 0);
      CHECK(symfun::submatrix_form_sum(M, g, k) ==
            doctest::Approx(ref).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("singular principal submatrices are reported by index") {
  Eigen::MatrixXd M = Eigen::Vector2d(0.0, 1.0).asDiagonal();
  Eigen::VectorXd g(2);
  g << 1.0, 1.0;
  CHECK_THROWS_AS(symfun::submatrix_form_sum(M, g, 1), SingularityError);
}

TEST_CASE("dimension and argument guards reject out-of-range input") {
  Eigen::VectorXd big = Eigen::VectorXd::Ones(symfun::kMaxDim + 1);
  CHECK_THROWS_AS(symfun::elem_sym(big, 1), ArgumentError);
  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(symfun::sk_matrix(rect, 1), ArgumentError);
  Eigen::MatrixXd asym(2, 2);
  asym << 0.0, 1.0, 2.0, 0.0;
  CHECK_THROWS_AS(symfun::sk_matrix(asym, 1), ArgumentError);
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd g2(2);
  g2.setZero();
  CHECK_THROWS_AS(symfun::submatrix_form_sum(M, g2, 1), ArgumentError);
}
