#include "khess/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

#include "khess/errors.hpp"

namespace khess::num {

namespace {

// Gauss-Kronrod 7-15 abscissae and weights (positive half).
constexpr std::array<double, 8> kKronrodX = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr std::array<double, 8> kKronrodW = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
// Gauss weights attach to the odd-index Kronrod nodes (and the centre).
constexpr std::array<double, 4> kGaussW = {0.129484966168870, 0.279705391489277,
                                           0.381830050505119, 0.417959183673469};

struct Panel {
  double a, b;
  double value;   // Kronrod estimate
  double error;   // |Kronrod - Gauss| based estimate
  int depth;
};

Panel eval_panel(const Fn& f, double a, double b, int depth, long& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double kron = 0.0, gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kKronrodX[i];
    double fv;
    if (i == 7) {
      fv = f(c);
      ++evals;
    } else {
      fv = f(c - dx) + f(c + dx);
      evals += 2;
    }
    kron += kKronrodW[i] * fv;
    if (i % 2 == 1) gauss += kGaussW[i / 2] * fv;
  }
  if (!std::isfinite(kron)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "quadrature: non-finite integrand on [%.6g, %.6g]", a, b);
    throw NumericsError(buf);
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.value = kron * h;
  // QUADPACK-style sharpened error estimate.
  const double diff = std::abs(kron - gauss) * h;
  p.error = diff > 0.0 ? std::pow(200.0 * diff, 1.5) : 0.0;
  if (p.error > diff && diff > 0.0) p.error = diff;  // keep the conservative floor sane
  p.error = std::max(p.error, diff * 1e-3);
  p.depth = depth;
  return p;
}

}  // namespace

QuadResult integrate(const Fn& f, double a, double b, double rel_tol,
                     double abs_tol, int max_depth) {
  QuadResult out;
  if (a == b) return out;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  long evals = 0;
  auto cmp = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> heap(cmp);
  Panel first = eval_panel(f, a, b, 0, evals);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  const std::size_t max_panels = 200000;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) && !heap.empty()) {
    Panel worst = heap.top();
    if (worst.depth >= max_depth || heap.size() > max_panels) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = eval_panel(f, worst.a, mid, worst.depth + 1, evals);
    Panel right = eval_panel(f, mid, worst.b, worst.depth + 1, evals);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  if (err > 1e3 * std::max(abs_tol, rel_tol * std::abs(total)) &&
      err > 1e-280) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "quadrature on [%.6g, %.6g] stalled: value %.6g, error "
                  "estimate %.3g above tolerance",
                  a, b, total, err);
    throw NumericsError(buf);
  }
  out.value = sign * total;
  out.error = err;
  out.evaluations = evals;
  return out;
}

double integrate_tail_exp(const Fn& g, double t, double rel_tol) {
  if (!(t > 0.0)) throw ArgumentError("integrate_tail_exp: requires t > 0");
  auto h = [&](double w) {
    const double s = t * std::exp(w);
    return g(s) * s;  // ds = s dw
  };
  double window = 32.0;
  double total = integrate(h, 0.0, window, rel_tol * 0.5).value;
  double prev_inc = std::numeric_limits<double>::infinity();
  while (true) {
    const double inc = integrate(h, window, 2.0 * window, rel_tol * 0.5).value;
    if (std::abs(inc) <= rel_tol * std::abs(total) || inc == 0.0) {
      total += inc;
      break;
    }
    if (window >= 4096.0 && std::abs(inc) >= 0.5 * std::abs(prev_inc)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "tail integral from t=%.6g appears divergent (window %.0f, "
                    "increment %.3g)",
                    t, window, inc);
      throw NumericsError(buf);
    }
    total += inc;
    prev_inc = inc;
    window *= 2.0;
    if (window > 1e6) throw NumericsError("tail integral window exhausted");
  }
  return total;
}

double bisect(const Fn& h, double lo, double hi, double rel_tol, int max_iter) {
  double flo = h(lo), fhi = h(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw ArgumentError("bisect: no sign change over the supplied bracket");
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(hi - lo) <= rel_tol * std::max(std::abs(mid), 1e-300)) return mid;
    const double fm = h(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Bracket bracket_multiplicative(const Fn& h, double seed, int max_doublings) {
  if (!(seed > 0.0)) throw ArgumentError("bracket_multiplicative: seed must be positive");
  const double f0 = h(seed);
  if (f0 == 0.0) return {seed, seed};
  double lo = seed, hi = seed;
  double flo = f0, fhi = f0;
  for (int i = 0; i < max_doublings; ++i) {
    hi *= 2.0;
    const double f = h(hi);
    if ((f > 0.0) != (fhi > 0.0) || f == 0.0) return {hi / 2.0, hi};
    fhi = f;
    lo /= 2.0;
    const double g = h(lo);
    if ((g > 0.0) != (flo > 0.0) || g == 0.0) return {lo, lo * 2.0};
    flo = g;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "no sign change after %d doublings; consider extending the "
                "bracket beyond [%.6g, %.6g]",
                max_doublings, lo, hi);
  throw RangeError(buf);
}

double golden_min(const Fn& f, double a, double b, double x_tol, double* fmin) {
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  if (fmin) *fmin = std::min(f1, f2);
  return xm;
}

LimitEstimate aitken_limit(const std::vector<double>& seq, double rel_tol) {
  LimitEstimate est;
  if (seq.empty()) return est;
  if (seq.size() == 1) {
    est.value = seq[0];
    est.error = std::abs(seq[0]);
    return est;
  }
  std::vector<double> cur = seq;
  est.value = cur.back();
  est.error = std::abs(cur[cur.size() - 1] - cur[cur.size() - 2]);
  double prev_best = est.value;
  while (cur.size() >= 3) {
    std::vector<double> next;
    next.reserve(cur.size() - 2);
    for (std::size_t i = 0; i + 2 < cur.size(); ++i) {
      const double d2 = cur[i + 2] - 2.0 * cur[i + 1] + cur[i];
      double v;
      if (std::abs(d2) < 1e-300 * std::max(1.0, std::abs(cur[i]))) {
        v = cur[i + 2];
      } else {
        v = cur[i + 2] - (cur[i + 2] - cur[i + 1]) * (cur[i + 2] - cur[i + 1]) / d2;
      }
      if (!std::isfinite(v)) v = cur[i + 2];
      next.push_back(v);
    }
    const double cand = next.back();
    const double delta = std::abs(cand - prev_best);
    if (delta < est.error || !est.converged) {
      if (delta <= est.error) {
        est.value = cand;
        est.error = delta;
      }
    }
    est.converged = est.converged ||
                    delta <= rel_tol * std::max(1.0, std::abs(cand));
    prev_best = cand;
    cur = std::move(next);
  }
  return est;
}

LimitEstimate neville_limit(const std::vector<double>& x,
                            const std::vector<double>& y) {
  LimitEstimate est;
  const std::size_t n = std::min<std::size_t>({x.size(), y.size(), 40});
  if (n == 0) return est;
  std::vector<double> p(y.begin(), y.begin() + n);
  est.value = p[0];
  est.error = std::numeric_limits<double>::infinity();
  double prev = p[0];
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = 0; i + m < n; ++i) {
      const double denom = x[i] - x[i + m];
      if (denom == 0.0) throw ArgumentError("neville_limit: repeated abscissa");
      p[i] = ((0.0 - x[i + m]) * p[i] + x[i] * p[i + 1]) / denom;
    }
    const double cand = p[0];
    const double delta = std::abs(cand - prev);
    if (std::isfinite(cand) && delta < est.error) {
      est.value = cand;
      est.error = delta;
      est.converged = true;
    }
    prev = cand;
  }
  return est;
}

std::vector<double> fd_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size());
  if (n < m + 1) throw ArgumentError("fd_weights: not enough nodes for the requested order");
  // Fornberg's recursion, "Generation of finite difference formulas on
  // arbitrarily spaced grids", Math. Comp. 51 (1988).
  std::vector<std::vector<double>> C(n, std::vector<double>(m + 1, 0.0));
  C[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = x[0] - z;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int s = mn; s >= 1; --s)
          C[i][s] = c1 * (s * C[i - 1][s - 1] - c5 * C[i - 1][s]) / c2;
        C[i][0] = -c1 * c5 * C[i - 1][0] / c2;
      }
      for (int s = mn; s >= 1; --s)
        C[j][s] = (c4 * C[j][s] - s * C[j][s - 1]) / c3;
      C[j][0] = c4 * C[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) w[j] = C[j][m];
  return w;
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n != y_.size() || n < 2) throw ArgumentError("Pchip: need matching arrays, size >= 2");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw ArgumentError("Pchip: abscissae must strictly increase");
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      m_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0)
      m = 0.0;
    else if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0))
      m = 3.0 * d0;
    return m;
  };
  if (n == 2) {
    m_[0] = m_[1] = delta[0];
  } else {
    m_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }
}

std::size_t Pchip::cell(double xq) const {
  if (xq <= x_.front()) return 0;
  if (xq >= x_.back()) return x_.size() - 2;
  const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double Pchip::operator()(double xq) const {
  if (empty()) throw ArgumentError("Pchip: empty interpolant");
  const std::size_t i = cell(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double Pchip::derivative(double xq) const {
  if (empty()) throw ArgumentError("Pchip: empty interpolant");
  const std::size_t i = cell(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  const double t2 = t * t;
  const double d00 = (6 * t2 - 6 * t) / h;
  const double d10 = 3 * t2 - 4 * t + 1;
  const double d01 = (-6 * t2 + 6 * t) / h;
  const double d11 = 3 * t2 - 2 * t;
  return d00 * y_[i] + d10 * m_[i] + d01 * y_[i + 1] + d11 * m_[i + 1];
}

std::vector<double> chebyshev_nodes(int n, double a, double b) {
  if (n < 2) throw ArgumentError("chebyshev_nodes: need n >= 2");
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) {
    const double c = std::cos(M_PI * j / (n - 1));
    x[n - 1 - j] = 0.5 * (a + b) + 0.5 * (b - a) * c;
  }
  x.front() = a;
  x.back() = b;
  return x;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

std::vector<double> cell_integrals(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (y.size() != n || n < 2)
    throw ArgumentError("cell_integrals: need matching arrays, size >= 2");
  std::vector<double> out(n - 1, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    // Stencil of four nodes around the cell, clipped at the ends.
    std::size_t s0 = (i == 0) ? 0 : i - 1;
    if (s0 + 4 > n) s0 = n - 4;
    if (n < 4) s0 = 0;
    const std::size_t m = std::min<std::size_t>(4, n);
    // Integrate the Lagrange interpolant over [x_i, x_{i+1}] by moment
    // matching in the scaled variable u = (t - xc)/w, which keeps the
    // Vandermonde entries O(1) on strongly graded grids.
    const double xc = 0.5 * (x[i] + x[i + 1]);
    const double w = x[i + 1] - x[i];
    double A[4][5] = {};
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t j = 0; j < m; ++j)
        A[p][j] = std::pow((x[s0 + j] - xc) / w, static_cast<double>(p));
      // integral of u^p over the cell is w * ((1/2)^{p+1} - (-1/2)^{p+1})/(p+1)
      A[p][m] = w *
                (std::pow(0.5, static_cast<double>(p + 1)) -
                 std::pow(-0.5, static_cast<double>(p + 1))) /
                (p + 1);
    }
    // Gaussian elimination with partial pivoting on the m x (m+1) system.
    for (std::size_t col = 0; col < m; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < m; ++r)
        if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
      if (piv != col)
        for (std::size_t c = 0; c <= m; ++c) std::swap(A[col][c], A[piv][c]);
      for (std::size_t r = 0; r < m; ++r) {
        if (r == col || A[col][col] == 0.0) continue;
        const double fac = A[r][col] / A[col][col];
        for (std::size_t c = col; c <= m; ++c) A[r][c] -= fac * A[col][c];
      }
    }
    double cell = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      cell += (A[j][m] / A[j][j]) * y[s0 + j];
    out[i] = cell;
  }
  return out;
}

std::vector<double> cumulative_integral(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  const auto cells = cell_integrals(x, y);
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i) out[i + 1] = out[i] + cells[i];
  return out;
}

}  // namespace khess::num
