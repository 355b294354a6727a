#include "khess/geometry.hpp"

#include <cmath>

#include "khess/errors.hpp"
#include "khess/numerics.hpp"
#include "khess/symfun.hpp"

namespace khess::geom {

namespace {

double binom(int n, int k) { return num::binomial(n, k); }

void check_radius(const BallDomain& dom, double r) {
  if (!(r >= 0.0) || !(r <= dom.R))
    throw DomainError("radius outside [0, R]");
}

}  // namespace

BallDomain::BallDomain(int N_, int k_, double R_) : N(N_), k(k_), R(R_) {
  if (N < 1 || N > 16) throw ArgumentError("dimension N must be in [1,16]");
  if (k < 1 || k > N) throw ArgumentError("Hessian order k must satisfy 1 <= k <= N");
  if (!(R > 0.0) || !std::isfinite(R)) throw ArgumentError("radius R must be positive");
}

DefiningFunction::DefiningFunction(const BallDomain& dom,
                                   std::optional<double> c_v)
    : c_v_(c_v.value_or(0.5 / (dom.R * dom.R))), R_(dom.R) {
  if (!(c_v_ > 0.0)) throw ArgumentError("defining function scale c_v must be positive");
  if (!(c_v_ * R_ * R_ < 1.0))
    throw ArgumentError("defining function scale too large: c_v R^2 must be < 1");
}

double DefiningFunction::value_r(double r) const {
  // written as d (2R - d) to stay accurate near the boundary
  return value_d(R_ - r);
}

double DefiningFunction::value_d(double d) const {
  return c_v_ * d * (2.0 * R_ - d);
}

double DefiningFunction::radial_derivative(double r) const {
  return -2.0 * c_v_ * r;
}

double neg_sk_hessian_v(const BallDomain& dom, const DefiningFunction& v) {
  return std::pow(2.0 * v.c_v(), dom.k) * binom(dom.N, dom.k);
}

double defining_product(const BallDomain& dom, const DefiningFunction& v,
                        double r) {
  check_radius(dom, r);
  return v.value_r(r) * neg_sk_hessian_v(dom, v);
}

double submatrix_sum_term(const BallDomain& dom, const DefiningFunction& v,
                          double r) {
  check_radius(dom, r);
  return std::pow(2.0 * v.c_v(), dom.k + 1) * binom(dom.N - 1, dom.k - 1) * r *
         r;
}

double sk_of_v_composition(const BallDomain& dom, const DefiningFunction& v,
                           double hp, double hpp, double r) {
  check_radius(dom, r);
  const int N = dom.N, k = dom.k;
  const double c = v.c_v();
  // eigenvalues of hp * (-2c I) + hpp * 4c^2 x x^T:
  //   radial  -2c hp + 4c^2 r^2 hpp   (multiplicity 1)
  //   tangent -2c hp                  (multiplicity N-1)
  const double tang = -2.0 * c * hp;
  const double rad = tang + 4.0 * c * c * r * r * hpp;
  return binom(N - 1, k) * std::pow(tang, k) +
         binom(N - 1, k - 1) * std::pow(tang, k - 1) * rad;
}

double sk_of_v_composition_matrix(const BallDomain& dom,
                                  const DefiningFunction& v, double hp,
                                  double hpp, const Eigen::VectorXd& x) {
  if (x.size() != dom.N) throw ArgumentError("point dimension mismatch");
  const double c = v.c_v();
  Eigen::MatrixXd H = -2.0 * c * hp * Eigen::MatrixXd::Identity(dom.N, dom.N);
  H += 4.0 * c * c * hpp * (x * x.transpose());
  return symfun::sk_matrix(H, dom.k);
}

double sk_of_distance_composition(const BallDomain& dom, double hp, double hpp,
                                  double d) {
  if (!(d > 0.0) || !(d < dom.R))
    throw DomainError("boundary distance must lie in (0, R)");
  const int N = dom.N, k = dom.k;
  const double eps = 1.0 / (dom.R - d);
  const double tang = -hp * eps;
  return binom(N - 1, k) * std::pow(tang, k) +
         binom(N - 1, k - 1) * std::pow(tang, k - 1) * hpp;
}

double radial_sk(const BallDomain& dom, double up, double upp, double r) {
  if (!(r > 0.0)) throw DomainError("radial S_k at r = 0 has its own limit form");
  check_radius(dom, r);
  const int N = dom.N, k = dom.k;
  const double tang = up / r;
  return binom(N - 1, k) * std::pow(tang, k) +
         binom(N - 1, k - 1) * std::pow(tang, k - 1) * upp;
}

double radial_sk_origin(const BallDomain& dom, double upp) {
  return num::binomial(dom.N, dom.k) * std::pow(upp, dom.k);
}

double flux_of_gradient(const BallDomain& dom, double up, double r) {
  check_radius(dom, r);
  const int N = dom.N, k = dom.k;
  return binom(N - 1, k - 1) / k * std::pow(r, N - k) * std::pow(up, k);
}

double gradient_power_from_flux(const BallDomain& dom, double r,
                                double flux_integral) {
  if (!(r > 0.0)) throw DomainError("flux inversion needs r > 0");
  check_radius(dom, r);
  const int N = dom.N, k = dom.k;
  return k / binom(N - 1, k - 1) * std::pow(r, k - N) * flux_integral;
}

}  // namespace khess::geom
