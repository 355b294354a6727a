#pragma once

#include <functional>
#include <vector>

namespace khess::num {

using Fn = std::function<double(double)>;

struct QuadResult {
  double value = 0.0;
  double error = 0.0;   // estimated absolute error
  long evaluations = 0;
};

/// Adaptive Gauss-Kronrod 7-15 on a finite interval.  Integrable endpoint
/// singularities are handled by recursive bisection (no node sits on an
/// endpoint).  Throws NumericsError when the depth budget is exhausted
/// without meeting the tolerance.
QuadResult integrate(const Fn& f, double a, double b, double rel_tol = 1e-11,
                     double abs_tol = 1e-300, int max_depth = 52);

/// Improper integral over [t, +inf) of a positive decaying integrand,
/// computed in the substitution s = t * e^w.  The truncation window is
/// extended until the increment falls below the tolerance; failure to
/// shrink signals a divergent tail.  Requires t > 0.
double integrate_tail_exp(const Fn& g, double t, double rel_tol = 1e-11);

/// Bisection on a continuous function with a sign change over [lo, hi].
/// Refines until the interval is below rel_tol relative to its midpoint.
double bisect(const Fn& h, double lo, double hi, double rel_tol = 1e-14,
              int max_iter = 200);

/// Expand a bracket multiplicatively from `seed` (positive axis) until
/// h changes sign.  Returns {lo, hi} with h(lo)*h(hi) <= 0.  Throws
/// RangeError after max_doublings with the achieved endpoints in the
/// message (callers append their own context).
struct Bracket {
  double lo, hi;
};
Bracket bracket_multiplicative(const Fn& h, double seed, int max_doublings = 60);

/// Golden-section minimisation on [a, b] for a unimodal function.
/// Returns the minimiser; *fmin (optional) receives the value.
double golden_min(const Fn& f, double a, double b, double x_tol, double* fmin = nullptr);

struct LimitEstimate {
  double value = 0.0;
  double error = 0.0;   // self-reported absolute error
  bool converged = false;
};

/// Iterated Aitken delta-squared acceleration.  Best for sequences with
/// geometric error decay (samples along geometric abscissas).
LimitEstimate aitken_limit(const std::vector<double>& seq, double rel_tol = 1e-7);

/// Neville polynomial extrapolation of (x_j, y_j) to x = 0.  Best for
/// sequences whose error is analytic in the auxiliary variable x, e.g.
/// x = 1/ln(1/t) for logarithmically convergent limits at t -> 0+.
LimitEstimate neville_limit(const std::vector<double>& x, const std::vector<double>& y);

/// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
/// weights[j] multiplies f(x[j]) to approximate d^m f / dx^m at z.
std::vector<double> fd_weights(double z, const std::vector<double>& x, int m);

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> x, std::vector<double> y);  // x strictly increasing
  double operator()(double xq) const;
  double derivative(double xq) const;
  bool empty() const { return x_.empty(); }
  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, m_;  // node slopes
  std::size_t cell(double xq) const;
};

/// Chebyshev points of the second kind mapped to [a, b], endpoints included.
std::vector<double> chebyshev_nodes(int n, double a, double b);

/// Binomial coefficient as a double (exact for the small arguments used here).
double binomial(int n, int k);

/// Cumulative integral of nodal data: result[i] = integral from x[0] to x[i]
/// of the interpolant through the samples.  Each cell uses the local cubic
/// through four neighbouring nodes, giving O(h^4) accuracy on smooth data.
std::vector<double> cumulative_integral(const std::vector<double>& x,
                                        const std::vector<double>& y);

/// Per-cell integrals of the same interpolant: element i approximates the
/// integral over [x_i, x_{i+1}].  Summing forward or backward lets callers
/// keep rounding errors at the local solution scale.
std::vector<double> cell_integrals(const std::vector<double>& x,
                                   const std::vector<double>& y);

}  // namespace khess::num
