#include "khess/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "khess/errors.hpp"
#include "khess/karamata.hpp"
#include "khess/numerics.hpp"

namespace khess::nonlin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sqrt(1+t^2) - t without cancellation on either side.
double soft_neg(double t) {
  if (t >= 0.0) return 1.0 / (std::sqrt(1.0 + t * t) + t);
  return std::sqrt(1.0 + t * t) - t;
}

void check_order(int k) {
  if (k < 1 || k > 16) throw ArgumentError("Hessian order k must be in [1,16]");
}

// Cumulative antiderivative on a geometric grid, returned as a pchip of
// ln(value) against ln(t).  `base` is the integral from the lower domain
// end up to t_lo.
num::Pchip log_cumulative(const num::Fn& fn, double t_lo, double t_hi, int n,
                          double base) {
  std::vector<double> lnt(n), lnF(n);
  const double l0 = std::log(t_lo), l1 = std::log(t_hi);
  double acc = base;
  double prev = t_lo;
  for (int i = 0; i < n; ++i) {
    const double t = std::exp(l0 + (l1 - l0) * i / (n - 1));
    if (i > 0) acc += num::integrate(fn, prev, t, 1e-12).value;
    if (!(acc > 0.0) || !std::isfinite(acc))
      throw NumericsError("antiderivative cache: non-positive cumulative value");
    lnt[i] = std::log(t);
    lnF[i] = std::log(acc);
    prev = t;
  }
  return num::Pchip(lnt, lnF);
}

}  // namespace

struct Nonlinearity::Core {
  Family family = Family::Power;
  SignClass sign = SignClass::S1;
  int k = 1;
  double gamma = 0.0, p = 0.0;
  num::Fn f, fp, F;  // F may be empty (no integrable lower tail)
  std::optional<double> rho_inf, rho_zero, rho_minus;
  std::string desc;
};

double Nonlinearity::f(double t) const {
  if (core_->sign == SignClass::S1 && t < 0.0)
    throw DomainError("f is only defined on [0, inf) for this family");
  return core_->f(t);
}

double Nonlinearity::fprime(double t) const {
  if (core_->sign == SignClass::S1 && t < 0.0)
    throw DomainError("f' is only defined on [0, inf) for this family");
  return core_->fp(t);
}

double Nonlinearity::F(double t) const {
  if (!core_->F)
    throw NumericsError(
        "antiderivative unavailable: f is not integrable at -infinity "
        "(tail exponent >= -1)");
  if (core_->sign == SignClass::S1 && t < 0.0)
    throw DomainError("F is only defined on [0, inf) for this family");
  return core_->F(t);
}

bool Nonlinearity::has_antiderivative() const { return static_cast<bool>(core_->F); }
int Nonlinearity::k() const { return core_->k; }
SignClass Nonlinearity::sign_class() const { return core_->sign; }
Family Nonlinearity::family() const { return core_->family; }
double Nonlinearity::domain_min() const {
  return core_->sign == SignClass::S1 ? 0.0 : -kInf;
}
std::string Nonlinearity::describe() const { return core_->desc; }
std::optional<double> Nonlinearity::growth_exponent_at_infinity() const {
  return core_->rho_inf;
}
std::optional<double> Nonlinearity::behaviour_exponent_at_zero() const {
  return core_->rho_zero;
}
std::optional<double> Nonlinearity::tail_exponent_at_neg_infinity() const {
  return core_->rho_minus;
}

Nonlinearity Nonlinearity::power(double gamma, int k) {
  check_order(k);
  if (!(gamma > 0.0)) throw ArgumentError("power family requires gamma > 0");
  auto c = std::make_shared<Core>();
  c->family = Family::Power;
  c->sign = SignClass::S1;
  c->k = k;
  c->gamma = gamma;
  c->rho_inf = gamma;
  c->rho_zero = gamma;
  c->f = [gamma](double t) { return t <= 0.0 ? 0.0 : std::pow(t, gamma); };
  c->fp = [gamma](double t) {
    if (t <= 0.0) return gamma > 1.0 ? 0.0 : (gamma == 1.0 ? 1.0 : kInf);
    return gamma * std::pow(t, gamma - 1.0);
  };
  c->F = [gamma](double t) {
    return t <= 0.0 ? 0.0 : std::pow(t, gamma + 1.0) / (gamma + 1.0);
  };
  std::ostringstream os;
  os << "f(t) = t^" << gamma << " (k = " << k << ")";
  c->desc = os.str();
  return Nonlinearity(std::move(c));
}

Nonlinearity Nonlinearity::exponential(int k) {
  check_order(k);
  auto c = std::make_shared<Core>();
  c->family = Family::Exponential;
  c->sign = SignClass::S01;
  c->k = k;
  c->f = [](double t) { return std::exp(t); };
  c->fp = [](double t) { return std::exp(t); };
  c->F = [](double t) { return std::exp(t); };
  std::ostringstream os;
  os << "f(t) = e^t (k = " << k << ")";
  c->desc = os.str();
  return Nonlinearity(std::move(c));
}

Nonlinearity Nonlinearity::negative_power_tail(double gamma, int k) {
  check_order(k);
  if (!(gamma < 0.0))
    throw ArgumentError("negative_power_tail requires gamma < 0");
  auto c = std::make_shared<Core>();
  c->family = Family::NegativePowerTail;
  c->sign = SignClass::S01;
  c->k = k;
  c->gamma = gamma;
  c->rho_inf = -gamma;   // f(t) ~ (2t)^{-gamma} at +infinity
  c->rho_minus = gamma;  // f(t) ~ (-t)^{gamma} at -infinity
  c->f = [gamma](double t) { return std::pow(soft_neg(t), gamma); };
  // q'(t) = -q / sqrt(1+t^2), so f' = -gamma f / sqrt(1+t^2) > 0.
  c->fp = [gamma](double t) {
    const double q = soft_neg(t);
    return -gamma * std::pow(q, gamma) / std::sqrt(1.0 + t * t);
  };
  if (gamma < -1.0) {
    // F(t) = int_{-inf}^t f.  Negative side: G(u) = int_u^inf f(-s) ds,
    // built right to left from the closed power tail.
    const num::Fn fneg = [gamma](double u) {
      return std::pow(std::sqrt(1.0 + u * u) + u, gamma);
    };
    const int n = 1200;
    const double u_lo = 1e-10, u_hi = 1e12;
    std::vector<double> lnu(n), lnG(n);
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i)
      grid[i] = std::exp(std::log(u_lo) +
                         (std::log(u_hi) - std::log(u_lo)) * i / (n - 1));
    double acc = fneg(u_hi) * u_hi / (-gamma - 1.0);  // ~ exact beyond u_hi
    lnu[n - 1] = std::log(grid[n - 1]);
    lnG[n - 1] = std::log(acc);
    for (int i = n - 2; i >= 0; --i) {
      acc += num::integrate(fneg, grid[i], grid[i + 1], 1e-12).value;
      lnu[i] = std::log(grid[i]);
      lnG[i] = std::log(acc);
    }
    auto pchG = std::make_shared<num::Pchip>(lnu, lnG);
    const double F0 = acc + num::integrate(c->f, -u_lo, 0.0, 1e-12).value;
    const double f0 = c->f(0.0);
    // Positive side: cumulative from F(0).
    const double tp_lo = 1e-10, tp_hi = 1e12;
    auto pchP = std::make_shared<num::Pchip>(
        log_cumulative(c->f, tp_lo, tp_hi, 1200,
                       F0 + num::integrate(c->f, 0.0, tp_lo, 1e-12).value));
    const double rho_plus = -gamma;
    const double f_hi_t_hi = c->f(tp_hi) * tp_hi;
    const double F_hi = std::exp((*pchP)(std::log(tp_hi)));
    const num::Fn f_local = c->f;
    c->F = [pchG, pchP, u_lo, u_hi, tp_lo, tp_hi, F0, f0, gamma, rho_plus,
            f_hi_t_hi, F_hi, f_local](double t) {
      if (t <= -u_hi) {
        // closed tail: f(-u) ~ (2u)^gamma
        return f_local(t) * (-t) / (-gamma - 1.0);
      }
      if (t <= -u_lo) return std::exp((*pchG)(std::log(-t)));
      if (t < tp_lo) return F0 + f0 * t;  // |t| < 1e-10
      if (t <= tp_hi) return std::exp((*pchP)(std::log(t)));
      return F_hi + (f_local(t) * t - f_hi_t_hi) / (rho_plus + 1.0);
    };
  }
  std::ostringstream os;
  os << "f(t) = (sqrt(1+t^2)-t)^" << gamma << " (k = " << k << ")";
  c->desc = os.str();
  return Nonlinearity(std::move(c));
}

Nonlinearity Nonlinearity::power_log(double gamma, double p, int k) {
  check_order(k);
  if (!(gamma > 0.0) || !(p > 0.0))
    throw ArgumentError("power_log family requires gamma > 0 and p > 0");
  auto c = std::make_shared<Core>();
  c->family = Family::PowerLog;
  c->sign = SignClass::S1;
  c->k = k;
  c->gamma = gamma;
  c->p = p;
  c->rho_inf = gamma;
  c->rho_zero = gamma + p;  // ln(1+t) ~ t near zero
  c->f = [gamma, p](double t) {
    if (t <= 0.0) return 0.0;
    return std::pow(t, gamma) * std::pow(std::log1p(t), p);
  };
  c->fp = [gamma, p](double t) {
    if (t <= 0.0) return 0.0;
    const double l = std::log1p(t);
    return std::pow(t, gamma - 1.0) * std::pow(l, p - 1.0) *
           (gamma * l + p * t / (1.0 + t));
  };
  const double t_lo = 1e-12, t_hi = 1e14;
  const double rho0 = gamma + p;
  const double base = c->f(t_lo) * t_lo / (rho0 + 1.0);
  auto pch = std::make_shared<num::Pchip>(
      log_cumulative(c->f, t_lo, t_hi, 2000, base));
  const double F_hi = std::exp((*pch)(std::log(t_hi)));
  const double f_hi_t_hi = c->f(t_hi) * t_hi;
  const num::Fn f_local = c->f;
  c->F = [pch, t_lo, t_hi, rho0, gamma, F_hi, f_hi_t_hi, f_local](double t) {
    if (t <= 0.0) return 0.0;
    if (t < t_lo) return f_local(t) * t / (rho0 + 1.0);
    if (t <= t_hi) return std::exp((*pch)(std::log(t)));
    return F_hi + (f_local(t) * t - f_hi_t_hi) / (gamma + 1.0);
  };
  std::ostringstream os;
  os << "f(t) = t^" << gamma << " ln^" << p << "(1+t) (k = " << k << ")";
  c->desc = os.str();
  return Nonlinearity(std::move(c));
}

Nonlinearity Nonlinearity::tabulated(std::vector<double> t, std::vector<double> fv,
                                     double tail_exp_plus,
                                     std::optional<double> tail_exp_zero,
                                     std::optional<double> tail_exp_minus,
                                     int k) {
  check_order(k);
  if (t.size() != fv.size() || t.size() < 4)
    throw ArgumentError("tabulated data needs at least 4 matching samples");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(fv[i] > 0.0) || !std::isfinite(fv[i]) || !std::isfinite(t[i]))
      throw ArgumentError("tabulated f values must be positive and finite");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw ArgumentError("tabulated abscissae must be strictly increasing");
    if (i > 0 && !(fv[i] > fv[i - 1]))
      throw ArgumentError("tabulated f must be strictly increasing");
  }
  if (tail_exp_zero.has_value() == tail_exp_minus.has_value())
    throw ArgumentError(
        "exactly one of tail_exp_zero / tail_exp_minus must be given");
  if (!(tail_exp_plus > 0.0))
    throw ArgumentError("tail_exp_plus must be positive");
  auto c = std::make_shared<Core>();
  c->family = Family::Tabulated;
  c->k = k;
  c->rho_inf = tail_exp_plus;
  const double t_first = t.front(), t_last = t.back();
  const double f_first = fv.front(), f_last = fv.back();
  if (!(t_last > 0.0))
    throw ArgumentError("tabulated data must reach positive t");
  if (tail_exp_zero) {
    if (!(t_first > 0.0))
      throw ArgumentError("tail_exp_zero requires positive abscissae");
    if (!(*tail_exp_zero > 0.0))
      throw ArgumentError("tail_exp_zero must be positive");
    c->sign = SignClass::S1;
    c->rho_zero = *tail_exp_zero;
  } else {
    if (!(t_first < 0.0))
      throw ArgumentError("tail_exp_minus requires data reaching negative t");
    if (!(*tail_exp_minus < 0.0))
      throw ArgumentError("tail_exp_minus must be negative");
    c->sign = SignClass::S01;
    c->rho_minus = *tail_exp_minus;
  }
  // Interpolate ln f against asinh t; power tails outside the table.
  std::vector<double> xs(t.size()), ys(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    xs[i] = std::asinh(t[i]);
    ys[i] = std::log(fv[i]);
  }
  auto pch = std::make_shared<num::Pchip>(xs, ys);
  const double ez = tail_exp_zero.value_or(0.0);
  const double em = tail_exp_minus.value_or(0.0);
  const bool s1 = (c->sign == SignClass::S1);
  c->f = [pch, t_first, t_last, f_first, f_last, tail_exp_plus, ez, em,
          s1](double t) {
    if (t > t_last) return f_last * std::pow(t / t_last, tail_exp_plus);
    if (t < t_first) {
      if (s1) {
        if (t <= 0.0) return 0.0;
        return f_first * std::pow(t / t_first, ez);
      }
      return f_first * std::pow(t / t_first, em);  // both negative
    }
    return std::exp((*pch)(std::asinh(t)));
  };
  c->fp = [pch, t_first, t_last, f_first, f_last, tail_exp_plus, ez, em,
           s1](double t) {
    if (t > t_last)
      return tail_exp_plus * f_last * std::pow(t / t_last, tail_exp_plus) / t;
    if (t < t_first) {
      if (s1) {
        if (t <= 0.0) return 0.0;
        return ez * f_first * std::pow(t / t_first, ez) / t;
      }
      return em * f_first * std::pow(t / t_first, em) / t;
    }
    const double x = std::asinh(t);
    const double val = std::exp((*pch)(x));
    return val * pch->derivative(x) / std::sqrt(1.0 + t * t);
  };
  // Antiderivative caches mirror the built-in families.
  const num::Fn f_local = c->f;
  if (s1) {
    const double g_lo = std::min(1e-12, t_first), g_hi = std::max(1e14, t_last);
    const double base = f_local(g_lo) * g_lo / (ez + 1.0);
    auto cum = std::make_shared<num::Pchip>(
        log_cumulative(f_local, g_lo, g_hi, 2000, base));
    const double F_hi = std::exp((*cum)(std::log(g_hi)));
    const double fhth = f_local(g_hi) * g_hi;
    const double rp = tail_exp_plus;
    c->F = [cum, g_lo, g_hi, ez, F_hi, fhth, rp, f_local](double t) {
      if (t <= 0.0) return 0.0;
      if (t < g_lo) return f_local(t) * t / (ez + 1.0);
      if (t <= g_hi) return std::exp((*cum)(std::log(t)));
      return F_hi + (f_local(t) * t - fhth) / (rp + 1.0);
    };
  } else if (em < -1.0) {
    const num::Fn fneg = [f_local](double u) { return f_local(-u); };
    const int n = 1200;
    const double u_lo = 1e-10, u_hi = std::max(1e12, -t_first * 10.0);
    std::vector<double> lnu(n), lnG(n), grid(n);
    for (int i = 0; i < n; ++i)
      grid[i] = std::exp(std::log(u_lo) +
                         (std::log(u_hi) - std::log(u_lo)) * i / (n - 1));
    double acc = fneg(u_hi) * u_hi / (-em - 1.0);
    lnu[n - 1] = std::log(grid[n - 1]);
    lnG[n - 1] = std::log(acc);
    for (int i = n - 2; i >= 0; --i) {
      acc += num::integrate(fneg, grid[i], grid[i + 1], 1e-12).value;
      lnu[i] = std::log(grid[i]);
      lnG[i] = std::log(acc);
    }
    auto pchG = std::make_shared<num::Pchip>(lnu, lnG);
    const double F0 = acc + num::integrate(f_local, -u_lo, 0.0, 1e-12).value;
    const double f0 = f_local(0.0);
    const double tp_lo = 1e-10, tp_hi = std::max(1e12, t_last * 10.0);
    auto pchP = std::make_shared<num::Pchip>(log_cumulative(
        f_local, tp_lo, tp_hi, 1200,
        F0 + num::integrate(f_local, 0.0, tp_lo, 1e-12).value));
    const double F_hi = std::exp((*pchP)(std::log(tp_hi)));
    const double fhth = f_local(tp_hi) * tp_hi;
    const double rp = tail_exp_plus;
    c->F = [pchG, pchP, u_lo, u_hi, tp_lo, tp_hi, F0, f0, em, rp, F_hi, fhth,
            f_local](double t) {
      if (t <= -u_hi) return f_local(t) * (-t) / (-em - 1.0);
      if (t <= -u_lo) return std::exp((*pchG)(std::log(-t)));
      if (t < tp_lo) return F0 + f0 * t;
      if (t <= tp_hi) return std::exp((*pchP)(std::log(t)));
      return F_hi + (f_local(t) * t - fhth) / (rp + 1.0);
    };
  }
  std::ostringstream os;
  os << "tabulated f, " << t.size() << " samples on [" << t_first << ", "
     << t_last << "] (k = " << k << ")";
  c->desc = os.str();
  return Nonlinearity(std::move(c));
}

Nonlinearity Nonlinearity::from_file(const std::string& path, int k) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open nonlinearity file: " + path);
  std::optional<double> ep, ez, em;
  std::vector<double> ts, fs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      std::string key = line.substr(0, eq);
      key.erase(key.find_last_not_of(" \t") + 1);
      std::istringstream vs(line.substr(eq + 1));
      double val;
      if (!(vs >> val))
        throw ArgumentError(path + ":" + std::to_string(lineno) +
                            ": bad numeric value for " + key);
      if (key == "tail_exp_plus") ep = val;
      else if (key == "tail_exp_zero") ez = val;
      else if (key == "tail_exp_minus") em = val;
      else
        throw ArgumentError(path + ":" + std::to_string(lineno) +
                            ": unknown header key " + key);
      continue;
    }
    std::istringstream row(line);
    double tv, fv;
    if (!(row >> tv >> fv))
      throw ArgumentError(path + ":" + std::to_string(lineno) +
                          ": expected two numeric columns");
    ts.push_back(tv);
    fs.push_back(fv);
  }
  if (!ep)
    throw ArgumentError(path + ": missing tail_exp_plus header");
  return tabulated(std::move(ts), std::move(fs), *ep, ez, em, k);
}

// ---------------------------------------------------------------------------
// Tail integrals

namespace {

[[noreturn]] void throw_ko(const char* which) {
  throw NumericsError(std::string("Keller-Osserman condition fails: ") + which +
                      " diverges at +infinity");
}

double generic_tail(const Nonlinearity& d, const num::Fn& integrand, double t,
                    const char* name) {
  if (d.sign_class() == SignClass::S1 && !(t > 0.0))
    throw DomainError(std::string(name) + " requires t > 0 for this family");
  try {
    if (t > 0.0) return num::integrate_tail_exp(integrand, t, 1e-11);
    // S01 with t <= 0: bounded piece plus the positive tail.
    const double head = num::integrate(integrand, t, 1.0, 1e-11).value;
    return head + num::integrate_tail_exp(integrand, 1.0, 1e-11);
  } catch (const NumericsError&) {
    throw_ko(name);
  }
}

}  // namespace

double tail_f(const Nonlinearity& d, double t) {
  const int k = d.k();
  switch (d.family()) {
    case Family::Power: {
      const double g = *d.growth_exponent_at_infinity();
      if (g <= k) throw_ko("f^{-1/k}");
      if (!(t > 0.0)) throw DomainError("tail of f^{-1/k} requires t > 0");
      const double q = g / k;
      return std::pow(t, 1.0 - q) / (q - 1.0);
    }
    case Family::Exponential:
      return k * std::exp(-t / k);
    default: {
      const num::Fn g = [&d, k](double s) {
        return std::pow(d.f(s), -1.0 / k);
      };
      return generic_tail(d, g, t, "f^{-1/k}");
    }
  }
}

double tail_F(const Nonlinearity& d, double t) {
  const int k = d.k();
  switch (d.family()) {
    case Family::Power: {
      const double g = *d.growth_exponent_at_infinity();
      const double q = (g + 1.0) / (k + 1.0);
      if (q <= 1.0) throw_ko("F^{-1/(k+1)}");
      if (!(t > 0.0)) throw DomainError("tail of F^{-1/(k+1)} requires t > 0");
      return std::pow(g + 1.0, 1.0 / (k + 1.0)) * std::pow(t, 1.0 - q) /
             (q - 1.0);
    }
    case Family::Exponential:
      return (k + 1.0) * std::exp(-t / (k + 1.0));
    default: {
      if (!d.has_antiderivative())
        throw NumericsError("tail of F^{-1/(k+1)}: antiderivative unavailable");
      const num::Fn g = [&d, k](double s) {
        return std::pow(d.F(s), -1.0 / (k + 1.0));
      };
      return generic_tail(d, g, t, "F^{-1/(k+1)}");
    }
  }
}

double index_I(const Nonlinearity& d, double t) {
  const int k = d.k();
  const double fv = d.f(t);
  if (!(fv > 0.0))
    throw DomainError("index I needs f(t) > 0");
  const double deriv = d.fprime(t) * std::pow(fv, 1.0 / k - 1.0) / k;
  return deriv * tail_f(d, t);
}

double index_J(const Nonlinearity& d, double t) {
  const int k = d.k();
  const double Fv = d.F(t);
  if (!(Fv > 0.0))
    throw DomainError("index J needs F(t) > 0");
  const double deriv =
      d.f(t) * std::pow(Fv, 1.0 / (k + 1.0) - 1.0) / (k + 1.0);
  return deriv * tail_F(d, t);
}

// ---------------------------------------------------------------------------
// Limit constants

namespace {

// Extrapolated limit of g along a geometric sequence, with both a
// geometric-convergence accelerator and polynomial extrapolation in
// 1/|ln t| for logarithmic tails.
num::LimitEstimate limit_along(const std::function<double(double)>& g,
                               double t0, bool toward_zero, int levels) {
  std::vector<double> xs, ys;
  xs.reserve(levels);
  ys.reserve(levels);
  for (int j = 0; j < levels; ++j) {
    const double t = toward_zero ? t0 * std::pow(2.0, -j) : t0 * std::pow(2.0, j);
    const double v = g(t);
    if (!std::isfinite(v)) break;
    xs.push_back(1.0 / std::fabs(std::log(t)));
    ys.push_back(v);
  }
  if (ys.size() < 6)
    throw NumericsError("limit extrapolation: too few finite samples");
  const auto a = num::aitken_limit(ys);
  num::LimitEstimate best = a;
  try {
    const auto nv = num::neville_limit(xs, ys);
    if (nv.error < best.error) best = nv;
  } catch (const Error&) {
  }
  return best;
}

struct ProbeExtrema {
  double min_val = kInf;
  double max_val = -kInf;
};

ProbeExtrema probe_index(const Nonlinearity& d, double lo, double hi,
                         int per_decade) {
  ProbeExtrema ex;
  const double llo = std::log10(lo), lhi = std::log10(hi);
  const int n = std::max(2, static_cast<int>((lhi - llo) * per_decade));
  for (int i = 0; i <= n; ++i) {
    const double t = std::pow(10.0, llo + (lhi - llo) * i / n);
    const double v = index_I(d, t);
    ex.min_val = std::min(ex.min_val, v);
    ex.max_val = std::max(ex.max_val, v);
  }
  return ex;
}

// Probe over negative arguments too (S01 families), asinh-spaced.
ProbeExtrema probe_index_s01(const Nonlinearity& d, double span) {
  ProbeExtrema ex;
  const int n = 600;
  const double a = -std::asinh(span), b = std::asinh(span);
  for (int i = 0; i <= n; ++i) {
    const double t = std::sinh(a + (b - a) * i / n);
    const double v = index_I(d, t);
    ex.min_val = std::min(ex.min_val, v);
    ex.max_val = std::max(ex.max_val, v);
  }
  return ex;
}

void require_positive_h0(LimitConstants& lc) {
  if (!(lc.h0 > 0.0))
    throw HypothesisError(
        "structure condition fails: inf of the index function I is <= 0");
}

}  // namespace

LimitConstants limit_constants(const Nonlinearity& d) {
  const int k = d.k();
  LimitConstants lc;
  switch (d.family()) {
    case Family::Power: {
      const double g = *d.growth_exponent_at_infinity();
      if (g <= k) throw_ko("f^{-1/k}");
      const double C = g / (g - k);
      lc.C_inf = C;
      lc.C_zero = C;
      lc.E_zero = (g + 1.0) / (g - k);
      lc.h0 = lc.H0 = C;
      break;
    }
    case Family::Exponential: {
      lc.C_inf = 1.0;
      lc.C_neg_inf = 1.0;
      lc.E_neg_inf = 1.0;
      lc.h0 = lc.H0 = 1.0;
      break;
    }
    case Family::PowerLog: {
      const double g = *d.growth_exponent_at_infinity();
      const double g0 = *d.behaviour_exponent_at_zero();
      const double p = g0 - g;
      if (g < k || (g == k && p <= k)) throw_ko("f^{-1/k}");
      if (g0 <= k)
        throw HypothesisError(
            "index limit at zero undefined: behaviour exponent at zero <= k");
      if (g > k) {
        lc.C_inf = g / (g - k);
      } else {
        lc.C_inf = kInf;
        lc.C_inf_finite = false;
      }
      lc.C_zero = g0 / (g0 - k);
      lc.E_zero = (g0 + 1.0) / (g0 - k);
      const auto ex = probe_index(d, 1e-7, 1e7, 32);
      lc.h0 = std::min(ex.min_val, *lc.C_zero);
      if (lc.C_inf_finite) {
        lc.H0 = std::max({ex.max_val, *lc.C_zero, lc.C_inf});
      } else {
        lc.H0 = kInf;
        lc.H0_finite = false;
      }
      break;
    }
    case Family::NegativePowerTail: {
      const double g = *d.tail_exponent_at_neg_infinity();  // gamma < 0
      const double rp = -g;
      if (rp <= k) throw_ko("f^{-1/k}");
      lc.C_inf = rp / (rp - k);
      lc.C_neg_inf = g / (g - k);
      if (d.has_antiderivative()) lc.E_neg_inf = (g + 1.0) / (g - k);
      const auto ex = probe_index_s01(d, 1e7);
      lc.h0 = std::min({ex.min_val, *lc.C_neg_inf, lc.C_inf});
      lc.H0 = std::max({ex.max_val, *lc.C_neg_inf, lc.C_inf});
      break;
    }
    case Family::Tabulated: {
      const auto Iof = [&d](double t) { return index_I(d, t); };
      const auto inf_lim = limit_along(Iof, 16.0, false, 24);
      lc.C_inf = inf_lim.value;
      if (d.sign_class() == SignClass::S1) {
        lc.C_zero = limit_along(Iof, 1e-2, true, 24).value;
        if (d.has_antiderivative()) {
          const auto Jof = [&d](double t) { return index_J(d, t); };
          lc.E_zero = limit_along(Jof, 1e-2, true, 24).value;
        }
        const auto ex = probe_index(d, 1e-7, 1e7, 24);
        lc.h0 = std::min(ex.min_val, *lc.C_zero);
        lc.H0 = std::max({ex.max_val, *lc.C_zero, lc.C_inf});
      } else {
        const auto Ineg = [&d](double t) { return index_I(d, -t); };
        lc.C_neg_inf = limit_along(Ineg, 16.0, false, 24).value;
        if (d.has_antiderivative()) {
          const auto Jneg = [&d](double t) { return index_J(d, -t); };
          lc.E_neg_inf = limit_along(Jneg, 16.0, false, 24).value;
        }
        const auto ex = probe_index_s01(d, 1e7);
        lc.h0 = std::min({ex.min_val, *lc.C_neg_inf, lc.C_inf});
        lc.H0 = std::max({ex.max_val, *lc.C_neg_inf, lc.C_inf});
      }
      break;
    }
  }
  require_positive_h0(lc);
  return lc;
}

KOReport keller_osserman(const Nonlinearity& d, KOOrder order) {
  const int k = d.k();
  KOReport r;
  const double rp = d.growth_exponent_at_infinity().value_or(kInf);
  if (order == KOOrder::GradientK) {
    if (d.family() == Family::Exponential) {
      r.tail_converges = true;
    } else if (d.family() == Family::PowerLog) {
      const double p = *d.behaviour_exponent_at_zero() - rp;
      r.tail_converges = rp > k || (rp == k && p > k);
    } else {
      r.tail_converges = rp > k;
    }
    return r;
  }
  // EnergyK1
  if (d.family() == Family::Exponential) {
    r.tail_converges = true;
  } else if (d.family() == Family::PowerLog) {
    const double p = *d.behaviour_exponent_at_zero() - rp;
    // F ~ t^{gamma+1} ln^p at infinity
    r.tail_converges = rp > k || (rp == k && p > k + 1);
  } else {
    r.tail_converges = rp > k;
  }
  if (d.sign_class() == SignClass::S1) {
    const double rz = d.behaviour_exponent_at_zero().value_or(kInf);
    // F ~ t^{rz+1} near zero; the integral of F^{-1/(k+1)} at 0+ diverges
    // exactly when (rz+1)/(k+1) >= 1.
    r.near_zero_diverges = rz >= k;
  }
  return r;
}

IndexEquivalence index_equivalence_check(const Nonlinearity& d) {
  const auto lc = limit_constants(d);
  const int k = d.k();
  IndexEquivalence r;
  if (!lc.C_inf_finite) {
    r.C = kInf;
    r.predicted_gamma = static_cast<double>(k);
  } else {
    r.C = lc.C_inf;
    if (std::fabs(lc.C_inf - 1.0) < 1e-9) {
      r.rapid_variation = true;
      // f must outgrow every power: track ln f - 10 ln t along a geometric
      // ladder kept inside double range (e^t overflows past t ~ 709).
      bool grows = true;
      double prev = std::log(d.f(32.0)) - 10.0 * std::log(32.0);
      double first = prev;
      for (double t = 64.0; t <= 512.0; t *= 2.0) {
        const double cur = std::log(d.f(t)) - 10.0 * std::log(t);
        if (!(cur > prev)) grows = false;
        prev = cur;
      }
      r.superpolynomial_checked = grows && prev > first + std::log(1e4);
      return r;
    }
    r.predicted_gamma = k * lc.C_inf / (lc.C_inf - 1.0);
  }
  const auto meas = karamata::rv_index_at_infinity(
      [&d](double t) { return d.f(t); });
  r.measured_gamma = meas.value;
  r.discrepancy = std::fabs(*r.predicted_gamma - meas.value);
  return r;
}

}  // namespace khess::nonlin
