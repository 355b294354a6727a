#include "khess/radial_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "khess/errors.hpp"
#include "khess/numerics.hpp"
#include "khess/symfun.hpp"
#include "khess/transforms.hpp"

namespace khess::solver {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Grid Grid::geometric(const geom::BallDomain& dom, int n, double depth) {
  if (n < 16) throw ArgumentError("grid needs at least 16 nodes");
  if (!(depth > 0.0) || !(depth < 1.0))
    throw ArgumentError("grid depth must lie in (0, 1)");
  Grid g;
  g.R = dom.R;
  g.r.resize(n);
  g.d.resize(n);
  const double rho = std::pow(depth, 1.0 / (n - 1));
  for (int i = 0; i < n; ++i) {
    g.d[i] = dom.R * std::pow(rho, i);
    g.r[i] = dom.R - g.d[i];
  }
  g.r[0] = 0.0;  // d[0] = R exactly
  return g;
}

TruncatedResult picard_iterate(const geom::BallDomain& dom,
                               const std::function<double(double, double)>& rhs,
                               double sigma, const Grid& grid,
                               const std::vector<double>* warm,
                               const SolveOptions& opts) {
  const int n = static_cast<int>(grid.size());
  const int N = dom.N, k = dom.k;
  const double cflux = k / num::binomial(N - 1, k - 1);
  std::vector<double> u =
      warm && static_cast<int>(warm->size()) == n ? *warm
                                                  : std::vector<double>(n, sigma);
  std::vector<double> q(n), up(n), T(n);
  TruncatedResult res;
  double theta = opts.theta0;
  double prev_change = kInf;
  int growths = 0;
  int streak = 0;
  std::ostringstream trace;
  double change = kInf;

  const auto apply_map = [&](const std::vector<double>& uin,
                             std::vector<double>& unew) {
    for (int i = 0; i < n; ++i) {
      const double val = rhs(grid.r[i], uin[i]);
      if (!std::isfinite(val))
        throw NumericsError("right-hand side overflow at r = " +
                            std::to_string(grid.r[i]));
      q[i] = std::pow(grid.r[i], N - 1) * val;
    }
    const auto J = num::cumulative_integral(grid.r, q);
    up[0] = 0.0;
    for (int i = 1; i < n; ++i) {
      const double flux = std::max(J[i], 0.0);
      up[i] = std::pow(cflux * flux * std::pow(grid.r[i], k - N),
                       1.0 / k);
    }
    // Accumulate u backward from the boundary cell by cell.  A forward
    // prefix sum subtracted from sigma would leave node-to-node rounding
    // jitter at the eps * sigma scale, which the reported finite-difference
    // residual then amplifies by 1/h^2.
    const auto cells = num::cell_integrals(grid.r, up);
    unew.resize(n);
    unew[n - 1] = sigma;
    for (int i = n - 2; i >= 0; --i) unew[i] = unew[i + 1] - cells[i];
    (void)T;
  };

  std::vector<double> unew(n);
  // The deepest boundary cells can host a weakly amplified mode of the
  // fixed-point map at extreme sigma; they are pinned by the boundary value
  // anyway, so the per-node convergence test stops at opts.conv_depth.
  int conv_end = n;
  while (conv_end > 1 && grid.d[conv_end - 1] < opts.conv_depth) --conv_end;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    apply_map(u, unew);
    // Convergence wants per-node relative changes: boundary values blow up,
    // so a global norm would leave O(tol * max u) absolute error inside.
    // Damping control watches the global norm instead; per-node maxima hop
    // between nodes during transients and would trip the growth detector.
    change = 0.0;
    double gdiff = 0.0, gamp = std::max(1.0, std::fabs(sigma));
    for (int i = 0; i < n; ++i) {
      if (i < conv_end) {
        const double s = std::max(1.0, std::fabs(u[i]));
        change = std::max(change, std::fabs(unew[i] - u[i]) / s);
      }
      gdiff = std::max(gdiff, std::fabs(unew[i] - u[i]));
      gamp = std::max(gamp, std::fabs(u[i]));
    }
    const double gchange = gdiff / gamp;
    res.sweeps = sweep + 1;
    if (gchange > prev_change * 1.001 && gchange > 1e-13) {
      theta = std::max(0.5 * theta, 1e-3);
      ++growths;
      streak = 0;
      trace << " sweep " << sweep << ": change " << gchange << ", theta -> "
            << theta << ";";
      if (growths >= 20)
        throw NumericsError("picard iteration not contracting;" +
                            trace.str());
    } else if (++streak >= 40 && theta < opts.theta0) {
      theta = std::min(opts.theta0, 2.0 * theta);
      streak = 0;
    }
    for (int i = 0; i < n; ++i) u[i] = (1.0 - theta) * u[i] + theta * unew[i];
    if (change < opts.picard_tol) break;
    if (gchange < 1e-14) break;  // rounding floor of the map
    prev_change = gchange;
  }
  // one final full step keeps (u, u') an exact quadrature pair
  apply_map(u, unew);
  res.u = std::move(unew);
  res.u_prime = up;
  res.final_change = change;
  res.damping_trace = trace.str();
  return res;
}

namespace {

// One outward pass of the flux system u' = (c J / r^{N-k})^{1/k},
// J' = r^{N-1} q(r, u) by classical RK4 on the grid cells.  Solutions are
// ordered in the center value a, and u is nondecreasing, so any node value
// above sigma classifies the trajectory as overshooting.
struct Shot {
  std::vector<double> u, up;
  bool high = false;
  double uend = 0.0;
};

Shot shoot(const geom::BallDomain& dom,
           const std::function<double(double, double)>& rhs, const Grid& grid,
           double a, double sigma_cap, int substeps) {
  const int n = static_cast<int>(grid.size());
  const int N = dom.N, k = dom.k;
  const double cflux = k / num::binomial(N - 1, k - 1);
  Shot s;
  s.u.assign(n, 0.0);
  s.up.assign(n, 0.0);
  const auto du_of = [&](double r, double J) {
    return std::pow(cflux * std::max(J, 0.0) * std::pow(r, k - N), 1.0 / k);
  };
  // series start around r = 0: S_k = binom(N,k) u''(0)^k there
  const double q0 = rhs(0.0, a);
  if (!std::isfinite(q0)) throw NumericsError("right-hand side overflow at 0");
  const double upp0 = std::pow(std::max(q0, 0.0) / num::binomial(N, k),
                               1.0 / k);
  s.u[0] = a;
  double u = a, J = 0.0;
  const int m = std::max(1, substeps);
  const auto step = [&](double r, double h) {
    const auto f1u = du_of(r, J);
    const auto f1J = std::pow(r, N - 1) * rhs(r, u);
    const double rm = r + 0.5 * h;
    const auto f2u = du_of(rm, J + 0.5 * h * f1J);
    const auto f2J = std::pow(rm, N - 1) * rhs(rm, u + 0.5 * h * f1u);
    const auto f3u = du_of(rm, J + 0.5 * h * f2J);
    const auto f3J = std::pow(rm, N - 1) * rhs(rm, u + 0.5 * h * f2u);
    const double re = r + h;
    const auto f4u = du_of(re, J + h * f3J);
    const auto f4J = std::pow(re, N - 1) * rhs(re, u + h * f3u);
    u += h / 6.0 * (f1u + 2.0 * f2u + 2.0 * f3u + f4u);
    J += h / 6.0 * (f1J + 2.0 * f2J + 2.0 * f3J + f4J);
    return std::isfinite(u) && std::isfinite(J) &&
           u <= sigma_cap * (1.0 + 1e-12) + 1e-12;
  };
  if (n > 1) {
    // The flux quotient is removable at the origin but its RK4 stencil is
    // not, so a second-order series seeds the march.  Confining the series
    // to an eighth of a substep keeps its truncation error below the RK4
    // error instead of dominating the interior residual at the first nodes.
    const int m1 = 8 * m;
    const double r1 = grid.r[1];
    const double hs = r1 / m1;
    u = a + 0.5 * upp0 * hs * hs;
    J = std::max(q0, 0.0) * std::pow(hs, N) / N;
    for (int j = 1; j < m1; ++j) {
      if (!step(j * hs, hs)) {
        s.high = true;
        s.uend = u;
        return s;
      }
    }
    s.u[1] = u;
    s.up[1] = du_of(r1, J);
  }
  for (int i = 1; i + 1 < n; ++i) {
    // du_of is a k-th root of the flux, so its state derivative is unbounded
    // as J -> 0 and RK4 loses order near the origin; extra substeps in the
    // first cells restore the interior residual at negligible cost.
    const int mi = i < 16 ? 8 * m : m;
    const double h = (grid.r[i + 1] - grid.r[i]) / mi;
    for (int j = 0; j < mi; ++j) {
      if (!step(grid.r[i] + j * h, h)) {
        s.high = true;
        s.uend = u;
        return s;
      }
    }
    s.u[i + 1] = u;
    s.up[i + 1] = du_of(grid.r[i + 1], J);
  }
  s.uend = u;
  return s;
}

}  // namespace

TruncatedResult solve_truncated(const barriers::BallProblem& prob, double sigma,
                                const Grid& grid, const SolveOptions& opts,
                                const std::vector<double>* warm) {
  const bool clamp = prob.f.sign_class() == nonlin::SignClass::S1;
  const auto& f = prob.f;
  const auto rhs = [&prob, &f, clamp](double r, double u) {
    const double uu = clamp ? std::max(u, 0.0) : u;
    return prob.b_at(r) * f.f(uu);
  };
  const auto& dom = prob.dom;

  // Bracket the center value.  Warm solutions seed the low end since the
  // truncated family is monotone in sigma.
  int passes = 0;
  const auto classify = [&](double a) {
    ++passes;
    return shoot(dom, rhs, grid, a, sigma, opts.rk_substeps);
  };
  double a_lo = warm && !warm->empty() ? warm->front() : std::min(sigma, 0.0);
  {
    // the warm seed may sit a hair above the new solution's center value
    double step = std::max(1.0, 1e-6 * std::fabs(a_lo));
    int tries = 0;
    while (classify(a_lo).high) {
      a_lo -= step;
      step *= 2.0;
      if (++tries > 120)
        throw NumericsError("no undershooting center value found");
    }
  }
  double a_hi = sigma;
  {
    Shot top = classify(a_hi);
    if (!top.high) {
      // sigma itself undershoots only in the degenerate b == 0 case where
      // the solution is constant; the trajectory is already exact
      TruncatedResult res;
      res.u = std::move(top.u);
      res.u_prime = std::move(top.up);
      res.sweeps = passes;
      res.final_change = std::fabs(top.uend - sigma) /
                         std::max(1.0, std::fabs(sigma));
      return res;
    }
  }
  Shot best = classify(a_lo);
  for (int it = 0; it < 200; ++it) {
    const double width = a_hi - a_lo;
    const double gran =
        4.0 * 2.22e-16 * std::max({std::fabs(a_lo), std::fabs(a_hi), 1e-300});
    if (width <= gran) break;
    const double mid = 0.5 * (a_lo + a_hi);
    Shot sh = classify(mid);
    if (sh.high) {
      a_hi = mid;
    } else {
      a_lo = mid;
      best = std::move(sh);
      if (std::fabs(best.uend - sigma) <=
          1e-12 * std::max(1.0, std::fabs(sigma)))
        break;
    }
  }
  TruncatedResult res;
  res.u = std::move(best.u);
  res.u_prime = std::move(best.up);
  res.sweeps = passes;
  res.final_change =
      std::fabs(best.uend - sigma) / std::max(1.0, std::fabs(sigma));
  return res;
}

namespace {

barriers::Barrier auto_super(const barriers::BallProblem& prob) {
  using barriers::Role;
  using barriers::Theorem;
  using barriers::WeightForm;
  const auto form = prob.weight.form();
  switch (form) {
    case WeightForm::Power: {
      const auto fam = prob.f.family();
      if (fam == nonlin::Family::Power)
        return barriers::build_barrier(prob, Theorem::T21, Role::Super);
      if (fam == nonlin::Family::Exponential)
        return barriers::build_barrier(prob, Theorem::T22, Role::Super);
      return barriers::build_barrier(prob, Theorem::T23, Role::Super);
    }
    case WeightForm::LogCritical: {
      const double mu = prob.weight.mu();
      if (!(prob.dfn.max_value() < std::exp(-mu)))
        throw HypothesisError(
            "log-critical weight needs max v < e^{-mu}; choose c_v <= "
            "e^{-mu}/(2 R^2) when posing the problem");
      return barriers::build_barrier(prob, Theorem::T24, Role::Super);
    }
    case WeightForm::Karamata: {
      try {
        return barriers::build_barrier(prob, Theorem::T25, Role::Super);
      } catch (const HypothesisError&) {
        const double lam = prob.weight.lambda();
        if (lam > -prob.dom.k - 1.0 && lam < 0.0)
          return barriers::build_barrier(prob, Theorem::T26, Role::Super);
        throw;
      }
    }
    case WeightForm::BoundaryRate: {
      // bounded theta reduces to a zero-exponent power weight
      const auto& th = prob.weight.theta();
      double lo = kInf, hi = 0.0;
      for (int i = 1; i <= 512; ++i) {
        const double d = prob.dom.R * i / 512.0;
        const double m = std::pow(th.theta(d), prob.dom.k + 1.0);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      if (!(lo > 0.0) || !std::isfinite(hi))
        throw HypothesisError(
            "boundary-rate weight profile is not bounded between positive "
            "constants; no barrier construction applies");
      auto w = barriers::Weight::power(0.0, prob.weight.b1() * lo,
                                       prob.weight.b2() * hi);
      const auto wt = prob.weight;
      const int k = prob.dom.k;
      w = w.with_evaluator([wt, k](double v, double d) {
        return wt.evaluate(v, d, k);
      });
      barriers::BallProblem p2(prob.dom, prob.dfn, w, prob.f);
      const auto fam = prob.f.family();
      if (fam == nonlin::Family::Power)
        return barriers::build_barrier(p2, Theorem::T21, Role::Super);
      if (fam == nonlin::Family::Exponential)
        return barriers::build_barrier(p2, Theorem::T22, Role::Super);
      return barriers::build_barrier(p2, Theorem::T23, Role::Super);
    }
  }
  throw ArgumentError("unknown weight form");
}

}  // namespace

RadialSolution solve_blowup(const barriers::BallProblem& prob,
                            const SolveOptions& opts,
                            const std::optional<barriers::Barrier>& super) {
  const auto& dom = prob.dom;
  const Grid grid = Grid::geometric(dom, opts.grid_points);
  const barriers::Barrier sup = super ? *super : auto_super(prob);

  RadialSolution sol;
  sol.r = grid.r;
  sol.d = grid.d;
  const double d_min = grid.d.back();
  const double delta0 = 0.5 * dom.R;

  SolveOptions lopts = opts;
  if (lopts.conv_depth <= 0.0) lopts.conv_depth = 10.0 * d_min;
  std::size_t band_end = grid.size();
  while (band_end > 1 && grid.d[band_end - 1] < lopts.conv_depth) --band_end;

  std::vector<double> warm;
  double prev_sigma = -kInf;
  for (int lvl = 0; lvl < opts.levels; ++lvl) {
    const double dn = std::max(delta0 * std::pow(2.0, -lvl), d_min);
    const double sigma = sup.value_d(dn);
    if (!std::isfinite(sigma))
      throw NumericsError("boundary ladder overflow: sigma not finite at d = " +
                          std::to_string(dn));
    if (sigma < prev_sigma - 1e-12 * std::max(1.0, std::fabs(sigma)))
      ++sol.monotonicity_violations;
    auto tr = solve_truncated(prob, sigma, grid, lopts,
                              warm.empty() ? nullptr : &warm);
    if (!warm.empty()) {
      double diff = 0.0;
      for (std::size_t i = 0; i < band_end; ++i) {
        const double s = std::max(1.0, std::fabs(tr.u[i]));
        diff = std::max(diff, std::fabs(tr.u[i] - warm[i]) / s);
      }
      sol.level_change = diff;
    }
    warm = tr.u;
    sol.u = std::move(tr.u);
    sol.u_prime = std::move(tr.u_prime);
    sol.sigma_levels.push_back(sigma);
    sol.levels_used = lvl + 1;
    prev_sigma = sigma;
    if (lvl > 0 && dn <= d_min && sol.level_change < opts.level_tol) {
      sol.converged = true;
      break;
    }
  }

  const int n = static_cast<int>(grid.size());
  // interior monotonicity and admissibility bookkeeping
  for (int i = 0; i + 1 < n; ++i) {
    const double slack = 1e-12 * std::max(1.0, std::fabs(sol.u[i]));
    if (sol.u[i + 1] < sol.u[i] - slack) ++sol.monotonicity_violations;
  }

  sol.interior_radius = dom.R * (1.0 - opts.delta_report);
  sol.residual.assign(n, 0.0);
  if (opts.compute_residual) {
    Eigen::VectorXd eigs(dom.N);
    std::vector<double> xw(5), uw(5);
    for (int i = 2; i + 2 < n; ++i) {
      const double r = grid.r[i];
      if (r <= 0.0 || r > sol.interior_radius) continue;
      for (int j = 0; j < 5; ++j) {
        xw[j] = grid.r[i - 2 + j];
        uw[j] = sol.u[i - 2 + j];
      }
      const auto w1 = num::fd_weights(r, xw, 1);
      const auto w2 = num::fd_weights(r, xw, 2);
      double up = 0.0, upp = 0.0;
      for (int j = 0; j < 5; ++j) {
        up += w1[j] * uw[j];
        upp += w2[j] * uw[j];
      }
      const double Sk = geom::radial_sk(dom, up, upp, r);
      const double target = prob.b_at(r) * prob.f.f(
          prob.f.sign_class() == nonlin::SignClass::S1
              ? std::max(sol.u[i], 0.0)
              : sol.u[i]);
      const double scale = std::max({std::fabs(Sk), std::fabs(target), 1.0});
      sol.residual[i] = std::fabs(Sk - target) / scale;
      sol.max_residual_interior =
          std::max(sol.max_residual_interior, sol.residual[i]);
      // composed Hessian spectrum: tangential u'/r (N-1 times), radial u''
      for (int q = 0; q < dom.N - 1; ++q) eigs[q] = up / r;
      eigs[dom.N - 1] = upp;
      if (!symfun::is_k_convex_eigs(eigs, dom.k, false))
        ++sol.gamma_k_violations;
    }
  }
  return sol;
}

SandwichMargin sandwich_margin(const RadialSolution& sol,
                               const barriers::Barrier& sub,
                               const barriers::Barrier& super) {
  SandwichMargin m;
  m.lower = m.upper = kInf;
  for (std::size_t i = 0; i < sol.r.size(); ++i) {
    const double r = sol.r[i];
    const double lo = sub.value_r(r);
    const double hi = super.value_r(r);
    const double scale = std::max({std::fabs(sol.u[i]), 1.0});
    const double ml = (sol.u[i] - lo) / scale;
    const double mu = (hi - sol.u[i]) / scale;
    if (ml < m.lower) {
      m.lower = ml;
      m.lower_radius = r;
    }
    if (mu < m.upper) {
      m.upper = mu;
      m.upper_radius = r;
    }
  }
  return m;
}

RateReport boundary_rate(const RadialSolution& sol,
                         const barriers::BallProblem& prob,
                         std::optional<barriers::ThetaFunction> theta) {
  const double R = prob.dom.R;
  const int k = prob.dom.k;
  barriers::ThetaFunction th =
      theta ? *theta
            : (prob.weight.form() == barriers::WeightForm::BoundaryRate
                   ? prob.weight.theta()
                   : barriers::ThetaFunction::constant(1.0));
  const transforms::PsiTransform psi(prob.f);

  RateReport rep;
  const auto rc = barriers::rate_constants(prob, th);
  rep.bracket_lo = rc.bracket_lo;
  rep.bracket_hi = rc.bracket_hi;

  // probe nodes nearest to d = 1e-2 R * 2^{-j}, down to 1e-4 R
  const int n = static_cast<int>(sol.d.size());
  for (double target = 1e-2 * R; target >= 1e-4 * R * 0.999; target *= 0.5) {
    int best = -1;
    double bd = kInf;
    for (int i = 0; i < n; ++i) {
      const double gap = std::fabs(sol.d[i] - target);
      if (gap < bd) {
        bd = gap;
        best = i;
      }
    }
    if (best < 0) continue;
    const double d = sol.d[best];
    if (!rep.d_probe.empty() && d >= rep.d_probe.back()) continue;
    const double Theta = th.antiderivative(d);
    const double arg = std::pow(Theta, (k + 1.0) / k);
    rep.d_probe.push_back(d);
    rep.ratio.push_back(sol.u[best] / psi(arg));
  }
  if (rep.ratio.size() < 4)
    throw NumericsError("too few probe nodes for boundary-rate extraction");

  // gross reversals mean the sequence carries no limit yet
  int sign = 0;
  bool monotone = true;
  for (std::size_t j = 1; j < rep.ratio.size(); ++j) {
    const double df = rep.ratio[j] - rep.ratio[j - 1];
    const double rel = std::fabs(df) / std::max(1e-300, std::fabs(rep.ratio[j]));
    const int s = df > 0 ? 1 : (df < 0 ? -1 : 0);
    if (sign == 0 && s != 0) sign = s;
    else if (s != 0 && s != sign) {
      monotone = false;
      if (rel > 1e-3) {
        std::ostringstream os;
        os << "boundary-rate sequence reverses direction by " << rel
           << " (relative); raw ratios:";
        for (double v : rep.ratio) os << " " << v;
        throw NumericsError(os.str());
      }
    }
  }
  rep.monotone_tail = monotone;

  const auto ait = num::aitken_limit(rep.ratio);
  const auto nev = num::neville_limit(rep.d_probe, rep.ratio);
  rep.limit = nev.converged || !ait.converged ? nev.value : ait.value;
  rep.limit_error =
      std::max({nev.error, std::fabs(nev.value - ait.value)});
  const double pad = std::max(1e-9 * std::max(1.0, std::fabs(rep.limit)),
                              2.0 * rep.limit_error);
  rep.inside = rep.limit >= rep.bracket_lo - pad &&
               rep.limit <= rep.bracket_hi + pad;
  return rep;
}

double interpolate_u(const RadialSolution& sol, double r) {
  if (r < sol.r.front() || r > sol.r.back())
    throw RangeError("probe radius outside the solution grid");
  const num::Pchip p(sol.r, sol.u);
  return p(r);
}

namespace {

int thread_cap() {
  if (const char* s = std::getenv("HESSIAN_BLOWUP_THREADS")) {
    const int v = std::atoi(s);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(std::min(hc, 8u)) : 1;
}

}  // namespace

SweepResult parameter_sweep(const barriers::BallProblem& prob, SweepKind kind,
                            const std::vector<double>& lambdas, double probe_r,
                            const SolveOptions& opts) {
  if (prob.weight.form() != barriers::WeightForm::Power)
    throw ArgumentError("parameter sweeps vary a power weight exponent");
  SweepResult out;
  out.kind = kind;
  out.probe_r = probe_r;
  out.rows.resize(lambdas.size());
  const int k = prob.dom.k;

  if (kind == SweepKind::RateSmallLambda21) {
    const auto ge = prob.f.growth_exponent_at_infinity();
    if (!ge || !(*ge > k))
      throw HypothesisError("sweep needs power growth exponent > k");
    // alpha -> 0 limit of the coefficient extrema
    barriers::BarrierEngine eng(prob);
    const auto omega1_extremum = [&eng, &prob](bool want_max) {
      double best = want_max ? -kInf : kInf;
      double br = 0.0;
      const int m = 4096;
      for (int i = 0; i <= m; ++i) {
        const double r = prob.dom.R * i / m;
        const double w = eng.omega(1, 1.0, r);
        if (want_max ? (w > best) : (w < best)) {
          best = w;
          br = r;
        }
      }
      const double h = prob.dom.R / m;
      const double lo = std::max(0.0, br - h);
      const double hi = std::min(prob.dom.R, br + h);
      double fmin = 0.0;
      const double rb = num::golden_min(
          [&](double r) {
            const double w = eng.omega(1, 1.0, r);
            return want_max ? -w : w;
          },
          lo, hi, 1e-12 * prob.dom.R, &fmin);
      (void)rb;
      const double wb = want_max ? -fmin : fmin;
      return want_max ? std::max(best, wb) : std::min(best, wb);
    };
    const double c1 = omega1_extremum(false);
    const double C1 = omega1_extremum(true);
    out.bracket_lo = std::pow(prob.weight.b2() / c1, 1.0 / (k - *ge));
    out.bracket_hi = std::pow(prob.weight.b1() / C1, 1.0 / (k - *ge));
  } else if (kind == SweepKind::LogRate22) {
    out.bracket_lo = out.bracket_hi = static_cast<double>(k);
  } else {
    out.bracket_lo = 0.0;
    out.bracket_hi = kInf;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mx;
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= lambdas.size()) return;
      try {
        const double lam = lambdas[i];
        auto w = barriers::Weight::power(lam, prob.weight.b1(),
                                         prob.weight.b2());
        barriers::BallProblem p2(prob.dom, prob.dfn, w, prob.f);
        const auto sol = solve_blowup(p2, opts);
        SweepRow row;
        row.lambda = lam;
        row.u_probe = interpolate_u(sol, probe_r);
        switch (kind) {
          case SweepKind::LogRate22:
            row.ratio = row.u_probe / std::log(k + 1.0 + lam);
            break;
          case SweepKind::RateSmallLambda21: {
            const double g = *prob.f.growth_exponent_at_infinity();
            const double alpha = (k + 1.0 + lam) / (g - k);
            row.ratio = row.u_probe / std::pow(alpha, k / (g - k));
            break;
          }
          case SweepKind::DivergenceLargeLambda21:
            row.ratio = row.u_probe;
            break;
        }
        out.rows[i] = row;
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mx);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const int nw = std::min<int>(thread_cap(), static_cast<int>(lambdas.size()));
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

void write_solution_csv(std::ostream& os, const RadialSolution& sol,
                        const std::string& resolved_config) {
  os << "# " << resolved_config << "\n";
  os << "r,d,u,u_prime,residual\n";
  char buf[512];
  for (std::size_t i = 0; i < sol.r.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  sol.r[i], sol.d[i], sol.u[i], sol.u_prime[i],
                  sol.residual[i]);
    os << buf;
  }
}

}  // namespace khess::solver
