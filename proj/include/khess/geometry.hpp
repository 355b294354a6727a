#pragma once

#include <Eigen/Core>
#include <optional>

namespace khess::geom {

/// Ball B_R(0) in R^N together with the Hessian order k (1 <= k <= N).
struct BallDomain {
  int N = 2;
  int k = 1;
  double R = 1.0;
  BallDomain(int N_, int k_, double R_);
};

/// Defining function v(x) = c_v (R^2 - |x|^2): positive inside, zero on
/// the boundary, with constant Hessian -2 c_v I.  The default scale
/// c_v = 1/(2 R^2) keeps max v = 1/2 < 1.
class DefiningFunction {
 public:
  DefiningFunction(const BallDomain& dom,
                   std::optional<double> c_v = std::nullopt);
  double c_v() const { return c_v_; }
  double R() const { return R_; }
  double value_r(double r) const;        // v at radius r
  double value_d(double d) const;        // v at boundary distance d = R - r
  double radial_derivative(double r) const;  // dv/dr = -2 c_v r
  double max_value() const { return c_v_ * R_ * R_; }

 private:
  double c_v_;
  double R_;
};

/// (-1)^k S_k(D^2 v) = (2 c_v)^k C(N,k), a positive constant.
double neg_sk_hessian_v(const BallDomain& dom, const DefiningFunction& v);

/// A(r) = v(r) * (-1)^k S_k(D^2 v).
double defining_product(const BallDomain& dom, const DefiningFunction& v,
                        double r);

/// Sigma(r) = 2^{k+1} c_v^{k+1} C(N-1,k-1) r^2, the gradient-weighted
/// minor sum that accompanies A(r) in every radial composition expansion.
double submatrix_sum_term(const BallDomain& dom, const DefiningFunction& v,
                          double r);

/// S_k(D^2 h(v(x))) at radius r for scalar h with h' = hp, h'' = hpp
/// evaluated at v(r).  Spectral form of the rank-one update.
double sk_of_v_composition(const BallDomain& dom, const DefiningFunction& v,
                           double hp, double hpp, double r);

/// Same quantity assembled as a dense matrix at the point x and fed to the
/// generic S_k evaluator; cross-check oracle for the spectral form.
double sk_of_v_composition_matrix(const BallDomain& dom,
                                  const DefiningFunction& v, double hp,
                                  double hpp, const Eigen::VectorXd& x);

/// S_k(D^2 h(d(x))) for d(x) = R - |x| the boundary distance:
/// (-hp)^k C(N-1,k) eps^k + (-hp)^{k-1} hpp C(N-1,k-1) eps^{k-1}
/// with eps = 1/(R - d).
double sk_of_distance_composition(const BallDomain& dom, double hp, double hpp,
                                  double d);

/// S_k(D^2 u) for radial u: eigenvalues u'/r (multiplicity N-1) and u''.
double radial_sk(const BallDomain& dom, double up, double upp, double r);

/// Limit at the origin (needs u'(0) = 0): C(N,k) (u'')^k.
double radial_sk_origin(const BallDomain& dom, double upp);

/// Conserved radial flux: C(N-1,k-1)/k * r^{N-k} (u')^k, whose radial
/// derivative equals r^{N-1} S_k(D^2 u).
double flux_of_gradient(const BallDomain& dom, double up, double r);

/// Inverse map: (u')^k = k/C(N-1,k-1) * r^{k-N} * int_0^r s^{N-1} S_k ds.
double gradient_power_from_flux(const BallDomain& dom, double r,
                                double flux_integral);

}  // namespace khess::geom
