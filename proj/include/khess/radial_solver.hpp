#pragma once

// Radial solver for the k-Hessian boundary blow-up problem on a ball.
//
// Radially symmetric k-admissible functions satisfy
//   S_k(D^2 u) = binom(N-1,k) (u'/r)^k + binom(N-1,k-1) u'' (u'/r)^{k-1},
// and the right-hand side b(x) f(u) integrates against r^{N-1} to give an
// exact first-order reformulation for the gradient,
//   u'(r)^k = k / binom(N-1,k-1) * r^{k-N} * int_0^r s^{N-1} b f(u) ds.
// Truncated problems with finite boundary data sigma are solved by shooting
// on the center value (trajectories of the flux system are ordered in u(0),
// so bisection converges); the blow-up solution is reached by raising sigma
// along a ladder of boundary values taken from an upper barrier evaluated
// ever closer to the boundary.  picard_iterate exposes the damped integral
// fixed-point map for frozen right-hand sides.

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "khess/barriers.hpp"
#include "khess/geometry.hpp"

namespace khess::solver {

/// Geometric grid in the boundary distance d = R - r.  Nodes satisfy
/// d_i = R * rho^i so the mesh refines toward the boundary where the
/// solution blows up; r[0] = 0 exactly.
struct Grid {
  std::vector<double> r;
  std::vector<double> d;
  double R = 0.0;

  static Grid geometric(const geom::BallDomain& dom, int n = 2048,
                        double depth = 1e-6);
  std::size_t size() const { return r.size(); }
};

struct SolveOptions {
  int grid_points = 2048;
  int levels = 24;              // boundary-value ladder length
  double level_tol = 1e-7;      // relative change between ladder levels
  double picard_tol = 1e-10;    // per-node relative change between sweeps
  int max_sweeps = 800;
  double theta0 = 0.5;          // initial Picard damping
  double delta_report = 1e-3;   // interior band R*(1 - delta_report) for
                                // residual reporting
  double conv_depth = 0.0;      // per-node convergence tested for d >= this;
                                // 0 means every node
  int rk_substeps = 4;          // integration steps per grid cell
  bool compute_residual = true;
};

struct TruncatedResult {
  std::vector<double> u;
  std::vector<double> u_prime;
  int sweeps = 0;
  double final_change = 0.0;
  std::string damping_trace;
};

/// One truncated solve for a frozen right-hand side law q = rhs(r, u).
TruncatedResult picard_iterate(const geom::BallDomain& dom,
                               const std::function<double(double, double)>& rhs,
                               double sigma, const Grid& grid,
                               const std::vector<double>* warm,
                               const SolveOptions& opts);

/// Truncated problem S_k(D^2 u) = b(x) f(u), u = sigma on the boundary.
TruncatedResult solve_truncated(const barriers::BallProblem& prob, double sigma,
                                const Grid& grid, const SolveOptions& opts,
                                const std::vector<double>* warm = nullptr);

struct RadialSolution {
  std::vector<double> r;
  std::vector<double> d;
  std::vector<double> u;
  std::vector<double> u_prime;
  std::vector<double> residual;       // relative equation residual per node
  std::vector<double> sigma_levels;
  int levels_used = 0;
  bool converged = false;
  double level_change = 0.0;          // last ladder increment at the center
  double interior_radius = 0.0;       // residuals reported for r <= this
  double max_residual_interior = 0.0;
  int monotonicity_violations = 0;
  int gamma_k_violations = 0;
  std::string note;
};

/// Blow-up solve: exhaust the truncated problems along a boundary-value
/// ladder sigma_n = super(d_n) with d_n halving toward the grid depth.
/// A suitable upper barrier is constructed automatically from the weight
/// form unless one is supplied.
RadialSolution solve_blowup(const barriers::BallProblem& prob,
                            const SolveOptions& opts = {},
                            const std::optional<barriers::Barrier>& super =
                                std::nullopt);

struct SandwichMargin {
  double lower = 0.0;   // min (u - sub)/scale
  double upper = 0.0;   // min (super - u)/scale
  double lower_radius = 0.0;
  double upper_radius = 0.0;
};

SandwichMargin sandwich_margin(const RadialSolution& sol,
                               const barriers::Barrier& sub,
                               const barriers::Barrier& super);

struct RateReport {
  std::vector<double> d_probe;
  std::vector<double> ratio;    // u / psi((Theta(d))^{(k+1)/k}) at the probes
  double limit = 0.0;
  double limit_error = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool inside = false;
  bool monotone_tail = false;
};

/// Boundary-rate extraction: evaluates u / psi((Theta(d))^{(k+1)/k}) on
/// probe nodes with d in [1e-4 R, 1e-2 R] and extrapolates d -> 0.
RateReport boundary_rate(const RadialSolution& sol,
                         const barriers::BallProblem& prob,
                         std::optional<barriers::ThetaFunction> theta =
                             std::nullopt);

enum class SweepKind {
  LogRate22,             // u(x0) / log(k+1+lambda) -> k as lambda -> -k-1
  RateSmallLambda21,     // u(x0) / alpha^{k/(gamma-k)} bracket as lambda -> -k-1
  DivergenceLargeLambda21,  // u(x0) growth as lambda -> +infinity
};

struct SweepRow {
  double lambda = 0.0;
  double u_probe = 0.0;
  double ratio = 0.0;    // kind-specific normalized quantity
};

struct SweepResult {
  SweepKind kind;
  double probe_r = 0.0;
  std::vector<SweepRow> rows;
  double bracket_lo = 0.0;  // target range for the normalized quantity
  double bracket_hi = 0.0;
};

/// Re-solves the problem across a schedule of weight exponents lambda and
/// reports the normalized center values.  Worker threads are capped by the
/// HESSIAN_BLOWUP_THREADS environment variable.
SweepResult parameter_sweep(const barriers::BallProblem& prob, SweepKind kind,
                            const std::vector<double>& lambdas, double probe_r,
                            const SolveOptions& opts = {});

/// Interpolates the solution at radius r (monotone cubic in r).
double interpolate_u(const RadialSolution& sol, double r);

/// Writes "# <config>" then "r,d,u,u_prime,residual" rows with %.17g
/// formatting, so repeated runs are byte-identical.
void write_solution_csv(std::ostream& os, const RadialSolution& sol,
                        const std::string& resolved_config);

}  // namespace khess::solver
