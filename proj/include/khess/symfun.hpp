#pragma once

#include <Eigen/Dense>
#include <vector>

namespace khess::symfun {

/// Maximum matrix dimension accepted by the operations below.  The
/// submatrix sum enumerates C(N,k) principal minors, which stays cheap
/// only for small N.
inline constexpr int kMaxDim = 16;

/// k-th elementary symmetric polynomial of the entries of lambda,
/// computed by the stable one-pass product recurrence (no subset
/// enumeration).  e_0 = 1 by convention.
double elem_sym(const Eigen::VectorXd& lambda, int k);

/// All elementary symmetric polynomials e_0..e_N in one pass.
std::vector<double> elem_sym_all(const Eigen::VectorXd& lambda);

/// S_k(M): k-th elementary symmetric polynomial of the eigenvalues of the
/// symmetric matrix M, via the Faddeev-LeVerrier trace recurrence (no
/// eigendecomposition on the default path).
double sk_matrix(const Eigen::MatrixXd& M, int k);

/// Eigendecomposition route for S_k(M).  Kept as an independent oracle;
/// production code calls sk_matrix.
double sk_matrix_eig(const Eigen::MatrixXd& M, int k);

/// Gamma_k cone membership: S_i(eigenvalues) >= 0 for i = 1..k
/// (strictly > 0 when strict is set).
bool is_k_convex(const Eigen::MatrixXd& M, int k, bool strict = false);

/// Same test on a precomputed eigenvalue (or diagonal) vector.
bool is_k_convex_eigs(const Eigen::VectorXd& lambda, int k, bool strict = false);

/// Sum over all k x k principal submatrices M_I of det(M_I) * g_I^T M_I^{-1} g_I,
/// where g_I restricts g to the rows/columns I.  Throws SingularityError,
/// naming the offending index set, when a submatrix is numerically singular.
double submatrix_form_sum(const Eigen::MatrixXd& M, const Eigen::VectorXd& g, int k);

}  // namespace khess::symfun
