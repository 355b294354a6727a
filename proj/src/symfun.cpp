#include "khess/symfun.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "khess/errors.hpp"

namespace khess::symfun {

namespace {

void check_dims(int n, int k, const char* who) {
  if (n < 1 || n > kMaxDim) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "%s: dimension %d outside [1, %d]", who, n, kMaxDim);
    throw ArgumentError(buf);
  }
  if (k < 0 || k > n) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "%s: order k=%d outside [0, %d]", who, k, n);
    throw ArgumentError(buf);
  }
}

void check_symmetric(const Eigen::MatrixXd& M, const char* who) {
  if (M.rows() != M.cols()) throw ArgumentError(std::string(who) + ": matrix must be square");
  const double scale = M.cwiseAbs().maxCoeff();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
    throw ArgumentError(std::string(who) + ": matrix must be symmetric");
}

}  // namespace

double elem_sym(const Eigen::VectorXd& lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  check_dims(n, k, "elem_sym");
  if (k == 0) return 1.0;
  // e_j accumulates the elementary symmetric polynomial of the values
  // processed so far; one value extends it by e_j += x * e_{j-1}.
  std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
  e[0] = 1.0;
  for (int i = 0; i < n; ++i) {
    const double x = lambda[i];
    for (int j = std::min(k, i + 1); j >= 1; --j) e[j] += x * e[j - 1];
  }
  return e[k];
}

std::vector<double> elem_sym_all(const Eigen::VectorXd& lambda) {
  const int n = static_cast<int>(lambda.size());
  check_dims(n, 0, "elem_sym_all");
  std::vector<double> e(static_cast<std::size_t>(n) + 1, 0.0);
  e[0] = 1.0;
  for (int i = 0; i < n; ++i) {
    const double x = lambda[i];
    for (int j = i + 1; j >= 1; --j) e[j] += x * e[j - 1];
  }
  return e;
}

double sk_matrix(const Eigen::MatrixXd& M, int k) {
  const int n = static_cast<int>(M.rows());
  check_dims(n, k, "sk_matrix");
  check_symmetric(M, "sk_matrix");
  if (k == 0) return 1.0;
  // Faddeev-LeVerrier: with M_1 = M, c_1 = tr M_1 and
  // M_{j+1} = M (M_j - c_j I), c_{j+1} = tr(M_{j+1})/(j+1),
  // the characteristic polynomial is lambda^n - c_1 lambda^{n-1} - ...
  // - c_n, so the elementary symmetric polynomial alternates:
  // e_j = (-1)^{j+1} c_j (check on diag(a,b): c_2 = -ab).
  Eigen::MatrixXd Mj = M;
  double cj = Mj.trace();
  for (int j = 1; j < k; ++j) {
    Mj = M * (Mj - cj * Eigen::MatrixXd::Identity(n, n));
    cj = Mj.trace() / (j + 1);
  }
  return k % 2 == 1 ? cj : -cj;
}

double sk_matrix_eig(const Eigen::MatrixXd& M, int k) {
  const int n = static_cast<int>(M.rows());
  check_dims(n, k, "sk_matrix_eig");
  check_symmetric(M, "sk_matrix_eig");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericsError("sk_matrix_eig: eigendecomposition failed");
  return elem_sym(es.eigenvalues(), k);
}

bool is_k_convex_eigs(const Eigen::VectorXd& lambda, int k, bool strict) {
  const int n = static_cast<int>(lambda.size());
  check_dims(n, k, "is_k_convex_eigs");
  if (k == 0) return true;
  const std::vector<double> e = elem_sym_all(lambda);
  for (int i = 1; i <= k; ++i) {
    if (strict ? !(e[i] > 0.0) : e[i] < 0.0) return false;
  }
  return true;
}

bool is_k_convex(const Eigen::MatrixXd& M, int k, bool strict) {
  const int n = static_cast<int>(M.rows());
  check_dims(n, k, "is_k_convex");
  check_symmetric(M, "is_k_convex");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericsError("is_k_convex: eigendecomposition failed");
  return is_k_convex_eigs(es.eigenvalues(), k, strict);
}

double submatrix_form_sum(const Eigen::MatrixXd& M, const Eigen::VectorXd& g, int k) {
  const int n = static_cast<int>(M.rows());
  check_dims(n, k, "submatrix_form_sum");
  check_symmetric(M, "submatrix_form_sum");
  if (g.size() != n)
    throw ArgumentError("submatrix_form_sum: vector length must match matrix dimension");
  if (k == 0) return 0.0;

  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  double total = 0.0;
  while (true) {
    Eigen::MatrixXd sub(k, k);
    Eigen::VectorXd gs(k);
    for (int r = 0; r < k; ++r) {
      gs[r] = g[idx[r]];
      for (int c = 0; c < k; ++c) sub(r, c) = M(idx[r], idx[c]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    const double det = lu.determinant();
    const double scale = std::pow(std::max(sub.cwiseAbs().maxCoeff(), 1e-30), k);
    if (std::abs(det) <= 1e-13 * scale) {
      std::string which = "{";
      for (int r = 0; r < k; ++r) which += (r ? "," : "") + std::to_string(idx[r]);
      which += "}";
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "submatrix_form_sum: singular principal submatrix %s "
                    "(det %.3g, scale %.3g)",
                    which.c_str(), det, scale);
      throw SingularityError(buf);
    }
    total += det * gs.dot(lu.solve(gs));

    // next k-combination of {0..n-1} in lexicographic order
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int r = pos + 1; r < k; ++r) idx[r] = idx[r - 1] + 1;
  }
  return total;
}

}  // namespace khess::symfun
