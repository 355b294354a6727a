#include "khess/karamata.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "khess/errors.hpp"

namespace khess::karamata {

SlowlyVarying SlowlyVarying::constant(double c) {
  if (!(c > 0.0)) throw ArgumentError("SlowlyVarying: c must be positive");
  SlowlyVarying L;
  L.family_ = Family::Constant;
  L.c_ = c;
  return L;
}

SlowlyVarying SlowlyVarying::power_perturbation(double c, double eps) {
  SlowlyVarying L = constant(c);
  L.family_ = Family::PowerPerturbation;
  L.param_ = eps;
  return L;
}

SlowlyVarying SlowlyVarying::log_power(double c, double sigma) {
  SlowlyVarying L = constant(c);
  L.family_ = Family::LogPower;
  L.param_ = sigma;
  return L;
}

SlowlyVarying SlowlyVarying::from_callable(double c, std::function<double(double)> y) {
  SlowlyVarying L = constant(c);
  L.family_ = Family::Callable;
  L.y_ = std::move(y);
  return L;
}

SlowlyVarying SlowlyVarying::from_samples(double c, const std::vector<double>& t,
                                          const std::vector<double>& y) {
  SlowlyVarying L = constant(c);
  L.family_ = Family::Sampled;
  std::vector<double> lt(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0)) throw ArgumentError("SlowlyVarying: sample abscissae must be positive");
    lt[i] = std::log(t[i]);
  }
  L.table_ = std::make_shared<num::Pchip>(std::move(lt), y);
  return L;
}

SlowlyVarying SlowlyVarying::with_orientation(Orientation o) const {
  SlowlyVarying L = *this;
  L.orient_ = o;
  return L;
}

double SlowlyVarying::y(double t) const {
  switch (family_) {
    case Family::Constant:
      return 0.0;
    case Family::PowerPerturbation:
      return param_;
    case Family::LogPower:
      return param_ / std::log(M_E / t);
    case Family::Callable:
      return y_(t);
    case Family::Sampled:
      return (*table_)(std::log(t));
  }
  return 0.0;
}

double SlowlyVarying::eval(double t) const {
  double s = t;
  if (orient_ == Orientation::AtNegInfinity) {
    if (!(t < 0.0)) throw DomainError("SlowlyVarying: negative-infinity orientation needs t < 0");
    s = -t;
  } else if (!(t > 0.0)) {
    throw DomainError("SlowlyVarying: evaluation point must be positive");
  }
  switch (family_) {
    case Family::Constant:
      return c_;
    case Family::PowerPerturbation:
      // exp(int_s^1 eps/u du) = s^{-eps}; at infinity the integral flips sign.
      return orient_ == Orientation::AtZero ? c_ * std::pow(s, -param_)
                                            : c_ * std::pow(s, param_);
    case Family::LogPower: {
      if (orient_ == Orientation::AtZero) {
        if (s > 1.0) throw DomainError("SlowlyVarying: at-zero log family defined on (0,1]");
        return c_ * std::pow(std::log(M_E / s), param_);
      }
      // int_1^s sigma/(u ln(e u)) du = sigma (ln ln(e s) - ln ln e)
      return c_ * std::pow(std::log(M_E * s), param_);
    }
    default:
      break;
  }
  // generic representation via quadrature in the log variable
  const double lo = orient_ == Orientation::AtZero ? std::log(s) : 0.0;
  const double hi = orient_ == Orientation::AtZero ? 0.0 : std::log(s);
  auto integrand = [&](double w) { return y(std::exp(w)); };
  const double integral = num::integrate(integrand, lo, hi, 1e-12).value;
  return c_ * std::exp(integral);
}

double SlowlyVarying::log_derivative(double t) const {
  const double s = orient_ == Orientation::AtNegInfinity ? -t : t;
  return orient_ == Orientation::AtZero ? -y(s) : y(s);
}

bool SlowlyVarying::slowly_varying() const {
  switch (family_) {
    case Family::Constant:
      return true;
    case Family::PowerPerturbation:
      return param_ == 0.0;
    case Family::LogPower:
      return true;
    default: {
      // probe the perturbation toward the relevant limit
      double t = orient_ == Orientation::AtZero ? 1e-3 : 1e3;
      double worst = 0.0;
      for (int i = 0; i < 6; ++i) {
        worst = std::abs(y(t));
        t = orient_ == Orientation::AtZero ? t * 1e-2 : t * 1e2;
      }
      return worst < 1e-3;
    }
  }
}

RVFunction::RVFunction(double rho, SlowlyVarying L) : rho_(rho), L_(std::move(L)) {}

double RVFunction::eval(double t) const {
  if (L_.orientation() == Orientation::AtNegInfinity)
    return std::pow(-t, rho_) * L_.eval(t);
  return std::pow(t, rho_) * L_.eval(t);
}

namespace {

IndexEstimate extrapolate_index(std::vector<double> samples, std::vector<double> ts,
                                bool toward_zero) {
  IndexEstimate out;
  out.samples = samples;
  // Divergence guard: a run of strictly growing magnitudes past a large bound
  // means no finite index exists.
  double mag = 0.0;
  for (double s : samples) mag = std::max(mag, std::abs(s));
  if (mag > 1e8 || !std::isfinite(mag)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "rv index estimation failed: log-derivative sequence "
                  "diverges (last %.3g)",
                  samples.back());
    throw NumericsError(buf);
  }
  const num::LimitEstimate a = num::aitken_limit(samples);
  // Logarithmically convergent tails (slowly varying corrections in 1/ln t)
  // defeat Aitken; polynomial extrapolation in x = 1/|ln t| handles them.
  std::vector<double> xs(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double lt = std::log(toward_zero ? 1.0 / ts[i] : ts[i]);
    xs[i] = 1.0 / lt;
  }
  num::LimitEstimate nv;
  try {
    nv = num::neville_limit(xs, samples);
  } catch (const Error&) {
    nv.converged = false;
    nv.error = std::numeric_limits<double>::infinity();
  }
  bool pick_neville = nv.converged && nv.error < a.error;
  // Logarithmic tails make Aitken stagnate on a wrong value while its
  // internal deltas shrink, so the reported errors cannot arbitrate a large
  // disagreement.  A quadratic extrapolation of the last three samples in x
  // is crude but honest; side with the candidate it supports.
  if (nv.converged && samples.size() >= 3 &&
      std::abs(a.value - nv.value) > 10.0 * (a.error + nv.error)) {
    const std::vector<double> x3(xs.end() - 3, xs.end());
    const std::vector<double> y3(samples.end() - 3, samples.end());
    const double ref = num::neville_limit(x3, y3).value;
    pick_neville = std::abs(nv.value - ref) <= std::abs(a.value - ref);
  }
  if (pick_neville) {
    out.value = nv.value;
    out.error = nv.error;
    out.converged = true;
  } else {
    out.value = a.value;
    out.error = a.error;
    out.converged = a.converged;
  }
  if (!std::isfinite(out.value))
    throw NumericsError("rv index estimation failed: extrapolation produced no finite value");
  return out;
}

}  // namespace

IndexEstimate rv_index_at_zero(const std::function<double(double)>& g, double t0,
                               int levels) {
  if (!(t0 > 0.0) || t0 >= 1.0) throw ArgumentError("rv_index_at_zero: need t0 in (0,1)");
  std::vector<double> samples, ts;
  const double dl = 1e-6;  // centred step in ln t
  double t = t0;
  for (int j = 0; j < levels; ++j) {
    const double gp = g(t * std::exp(dl));
    const double gm = g(t * std::exp(-dl));
    if (!(gp > 0.0) || !(gm > 0.0) || !std::isfinite(gp) || !std::isfinite(gm)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "rv index estimation failed: g not positive/finite near t=%.3g", t);
      throw NumericsError(buf);
    }
    samples.push_back((std::log(gp) - std::log(gm)) / (2.0 * dl));
    ts.push_back(t);
    t *= 0.5;
  }
  return extrapolate_index(std::move(samples), std::move(ts), true);
}

IndexEstimate rv_index_at_zero(const std::function<double(double)>& g,
                               const std::function<double(double)>& gprime,
                               double t0, int levels) {
  if (!(t0 > 0.0) || t0 >= 1.0) throw ArgumentError("rv_index_at_zero: need t0 in (0,1)");
  std::vector<double> samples, ts;
  double t = t0;
  for (int j = 0; j < levels; ++j) {
    const double gv = g(t);
    if (!(gv != 0.0) || !std::isfinite(gv))
      throw NumericsError("rv index estimation failed: g vanishes on the probe path");
    samples.push_back(t * gprime(t) / gv);
    ts.push_back(t);
    t *= 0.5;
  }
  return extrapolate_index(std::move(samples), std::move(ts), true);
}

IndexEstimate rv_index_at_infinity(const std::function<double(double)>& g,
                                   double t0, int levels) {
  if (!(t0 > 1.0)) throw ArgumentError("rv_index_at_infinity: need t0 > 1");
  std::vector<double> samples, ts;
  const double dl = 1e-6;
  double t = t0;
  for (int j = 0; j < levels; ++j) {
    const double gp = g(t * std::exp(dl));
    const double gm = g(t * std::exp(-dl));
    if (!(gp > 0.0) || !(gm > 0.0) || !std::isfinite(gp) || !std::isfinite(gm)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "rv index estimation failed: g not positive/finite near t=%.3g", t);
      throw NumericsError(buf);
    }
    samples.push_back((std::log(gp) - std::log(gm)) / (2.0 * dl));
    ts.push_back(t);
    t *= 2.0;
  }
  return extrapolate_index(std::move(samples), std::move(ts), false);
}

double asymptotic_integral_ratio(const SlowlyVarying& L, double rho, Side side,
                                 double t) {
  if (rho == -1.0)
    throw ArgumentError("asymptotic_integral_ratio: rho = -1 has no power formula");
  if (!(t > 0.0)) throw ArgumentError("asymptotic_integral_ratio: need t > 0");
  auto g = [&](double s) { return std::pow(s, rho) * L.eval(s); };
  const double Lt = L.eval(t);
  double integral, formula;
  if (side == Side::AtInfinity) {
    if (rho < -1.0) {
      integral = num::integrate_tail_exp(g, t);
      formula = std::pow(t, 1.0 + rho) * Lt / (-rho - 1.0);
    } else {
      if (!(t > 1.0)) throw ArgumentError("asymptotic_integral_ratio: at infinity needs t > 1");
      integral = num::integrate(g, 1.0, t, 1e-12).value;
      formula = std::pow(t, 1.0 + rho) * Lt / (rho + 1.0);
    }
  } else {
    if (!(t < 1.0)) throw ArgumentError("asymptotic_integral_ratio: at zero needs t < 1");
    if (rho < -1.0) {
      integral = num::integrate(g, t, 1.0, 1e-12).value;
      formula = std::pow(t, 1.0 + rho) * Lt / (-rho - 1.0);
    } else {
      // integral over (0, t]; the integrand has an integrable endpoint
      // singularity at 0 when rho < 0, handled in the log variable
      auto h = [&](double w) {
        const double s = t * std::exp(-w);
        return g(s) * s;
      };
      double window = 32.0;
      integral = num::integrate(h, 0.0, window, 1e-12).value;
      while (true) {
        const double inc = num::integrate(h, window, 2.0 * window, 1e-12).value;
        integral += inc;
        if (std::abs(inc) <= 1e-12 * std::abs(integral) || window > 4096.0) break;
        window *= 2.0;
      }
      formula = std::pow(t, 1.0 + rho) * Lt / (rho + 1.0);
    }
  }
  return integral / formula;
}

double uniform_convergence_deviation(const RVFunction& g, double t, double xi_lo,
                                     double xi_hi, int probes) {
  if (!(t > 0.0)) throw ArgumentError("uniform_convergence_deviation: need t > 0");
  if (!(xi_lo > 0.0 && xi_hi > xi_lo))
    throw ArgumentError("uniform_convergence_deviation: bad xi range");
  const double gt = g.eval(t);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const double xi = xi_lo * std::pow(xi_hi / xi_lo, static_cast<double>(i) / (probes - 1));
    const double dev = std::abs(g.eval(xi * t) / gt - std::pow(xi, g.rho()));
    worst = std::max(worst, dev);
  }
  return worst;
}

}  // namespace khess::karamata
