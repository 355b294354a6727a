#include "khess/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "khess/errors.hpp"
#include "khess/symfun.hpp"

namespace khess::barriers {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// ThetaFunction

ThetaFunction ThetaFunction::constant(double c) {
  if (!(c > 0.0)) throw ArgumentError("theta must be positive");
  ThetaFunction t;
  t.kind_ = Kind::Constant;
  t.c_ = c;
  t.D_ = 1.0;
  return t;
}

ThetaFunction ThetaFunction::power(double beta, double scale) {
  if (!(beta > -1.0))
    throw ArgumentError("theta = t^beta needs beta > -1 for an integrable "
                        "antiderivative");
  if (!(scale > 0.0)) throw ArgumentError("theta scale must be positive");
  ThetaFunction t;
  t.kind_ = Kind::Power;
  t.beta_ = beta;
  t.c_ = scale;
  t.D_ = 1.0 / (beta + 1.0);
  return t;
}

ThetaFunction ThetaFunction::from_callable(num::Fn theta, double delta0) {
  if (!theta) throw ArgumentError("theta callable is empty");
  if (!(delta0 > 0.0)) throw ArgumentError("delta0 must be positive");
  ThetaFunction t;
  t.kind_ = Kind::Callable;
  t.fn_ = std::move(theta);
  t.delta0_ = delta0;
  // D = lim d/dt (Theta/theta): centred differences down a geometric ladder.
  const auto ratio = [&t](double s) {
    return num::integrate(t.fn_, 0.0, s, 1e-11).value / t.fn_(s);
  };
  std::vector<double> samples;
  for (int j = 2; j < 22; ++j) {
    const double s = delta0 * std::pow(2.0, -j);
    const double h = 0.05 * s;
    samples.push_back((ratio(s + h) - ratio(s - h)) / (2.0 * h));
  }
  const auto est = num::aitken_limit(samples);
  if (!std::isfinite(est.value) || est.value < -1e-6)
    throw HypothesisError(
        "theta profile: d/dt(Theta/theta) has no finite nonnegative limit");
  t.D_ = std::max(0.0, est.value);
  return t;
}

double ThetaFunction::theta(double t) const {
  if (!(t > 0.0)) throw DomainError("theta argument must be positive");
  switch (kind_) {
    case Kind::Constant: return c_;
    case Kind::Power: return c_ * std::pow(t, beta_);
    case Kind::Callable: return fn_(t);
  }
  return c_;
}

double ThetaFunction::antiderivative(double t) const {
  if (!(t >= 0.0)) throw DomainError("Theta argument must be nonnegative");
  if (t == 0.0) return 0.0;
  switch (kind_) {
    case Kind::Constant: return c_ * t;
    case Kind::Power: return c_ * std::pow(t, beta_ + 1.0) / (beta_ + 1.0);
    case Kind::Callable: return num::integrate(fn_, 0.0, t, 1e-11).value;
  }
  return c_ * t;
}

// ---------------------------------------------------------------------------
// Weight

namespace {
void check_envelope_constants(double b1, double b2) {
  if (!(b1 >= 0.0) || !(b2 >= b1))
    throw ArgumentError("weight envelope needs 0 <= b1 <= b2");
}
}  // namespace

Weight Weight::power(double lambda, double b1, double b2) {
  check_envelope_constants(b1, b2);
  Weight w;
  w.form_ = WeightForm::Power;
  w.lambda_ = lambda;
  w.b1_ = b1;
  w.b2_ = b2;
  return w;
}

Weight Weight::log_critical(double mu, double b1, double b2) {
  check_envelope_constants(b1, b2);
  if (!(mu > 1.0)) throw ArgumentError("log-critical weight needs mu > 1");
  Weight w;
  w.form_ = WeightForm::LogCritical;
  w.mu_ = mu;
  w.b1_ = b1;
  w.b2_ = b2;
  return w;
}

Weight Weight::karamata(double lambda, karamata::SlowlyVarying Ltilde,
                        double b1, double b2) {
  check_envelope_constants(b1, b2);
  if (Ltilde.orientation() != karamata::Orientation::AtZero)
    throw ArgumentError("karamata weight needs a slowly varying factor "
                        "oriented at zero");
  Weight w;
  w.form_ = WeightForm::Karamata;
  w.lambda_ = lambda;
  w.L_ = std::move(Ltilde);
  w.b1_ = b1;
  w.b2_ = b2;
  return w;
}

Weight Weight::boundary_rate(ThetaFunction theta, double b1, double b2) {
  check_envelope_constants(b1, b2);
  Weight w;
  w.form_ = WeightForm::BoundaryRate;
  w.theta_ = std::move(theta);
  w.b1_ = b1;
  w.b2_ = b2;
  return w;
}

double Weight::lambda() const {
  if (form_ != WeightForm::Power && form_ != WeightForm::Karamata)
    throw ArgumentError("weight form has no lambda parameter");
  return lambda_;
}

double Weight::mu() const {
  if (form_ != WeightForm::LogCritical)
    throw ArgumentError("weight form has no mu parameter");
  return mu_;
}

const karamata::SlowlyVarying& Weight::slowly_varying() const {
  if (!L_) throw ArgumentError("weight has no slowly varying factor");
  return *L_;
}

const ThetaFunction& Weight::theta() const {
  if (!theta_) throw ArgumentError("weight has no boundary-rate profile");
  return *theta_;
}

double Weight::model(double v, double d, int k) const {
  switch (form_) {
    case WeightForm::Power:
      return std::pow(v, lambda_);
    case WeightForm::LogCritical: {
      if (!(v > 0.0) || !(v < 1.0))
        throw DomainError("log-critical weight needs 0 < v < 1");
      const double L = -std::log(v);
      return std::pow(v, -k - 1.0) * std::pow(L, -k * mu_);
    }
    case WeightForm::Karamata:
      return std::pow(v, lambda_) * std::pow(L_->eval(v), k);
    case WeightForm::BoundaryRate:
      return std::pow(theta_->theta(d), k + 1.0);
  }
  return 0.0;
}

double Weight::evaluate(double v, double d, int k) const {
  if (eval_) return eval_(v, d);
  return b1_ * model(v, d, k);
}

Weight Weight::with_evaluator(std::function<double(double, double)> b) const {
  Weight w = *this;
  w.eval_ = std::move(b);
  return w;
}

bool Weight::check_envelope(const geom::BallDomain& dom,
                            const geom::DefiningFunction& dfn, int n) const {
  for (int i = 1; i < n; ++i) {
    const double r = dom.R * i / n;
    const double v = dfn.value_r(r), d = dom.R - r;
    const double m = model(v, d, dom.k);
    const double b = evaluate(v, d, dom.k);
    const double slack = 1e-12 * std::max(1.0, std::fabs(b));
    if (b < b1_ * m - slack || b > b2_ * m + slack) return false;
  }
  return true;
}

double BallProblem::b_at(double r) const {
  return weight.evaluate(dfn.value_r(r), dom.R - r, dom.k);
}

// ---------------------------------------------------------------------------
// BarrierEngine

struct BarrierEngine::Impl {
  BallProblem prob;
  std::optional<nonlin::LimitConstants> lc;
  std::string lc_error;
  std::optional<transforms::PsiTransform> psi;
  std::string psi_error;
  std::optional<transforms::PhiTransform> phi;
  std::string phi_error;
  double phi0_limit = 0.0;  // lim of big_phi at 0+
  // Karamata primitive cache: ln v -> ln W on [W_vlo, W_vhi]
  std::shared_ptr<num::Pchip> W;
  double W_vlo = 0.0, W_vhi = 0.0;
  bool W_ok = false;
  std::string W_error;

  explicit Impl(BallProblem p) : prob(std::move(p)) {
    try {
      lc = nonlin::limit_constants(prob.f);
    } catch (const Error& e) {
      lc_error = e.what();
    }
    try {
      psi.emplace(prob.f);
    } catch (const Error& e) {
      psi_error = e.what();
    }
    if (prob.f.has_antiderivative()) {
      try {
        phi.emplace(prob.f);
        phi0_limit = phi->big_phi(1e-13);
      } catch (const Error& e) {
        phi.reset();
        phi_error = e.what();
      }
    } else {
      phi_error = "antiderivative unavailable";
    }
    if (prob.weight.form() == WeightForm::Karamata) build_primitive();
  }

  void build_primitive() {
    const int k = prob.dom.k;
    const double lam = prob.weight.lambda();
    const auto& L = prob.weight.slowly_varying();
    const double e = (1.0 + lam) / k;  // integrand s^e L(s)
    const num::Fn ig = [&L, e](double s) {
      return std::pow(s, e) * L.eval(s);
    };
    const double vhi = prob.dfn.max_value();
    const double vlo = vhi * 1e-12;
    // base = int_0^vlo, via s = vlo e^{-w} windows with divergence detection
    double base = 0.0;
    double prev_chunk = kInf;
    bool diverged = false;
    for (int win = 0; win < 40; ++win) {
      const double a = 40.0 * win, b = 40.0 * (win + 1);
      const num::Fn sub = [&ig, vlo](double w) {
        const double s = vlo * std::exp(-w);
        return ig(s) * s;
      };
      double chunk;
      try {
        chunk = num::integrate(sub, a, b, 1e-11).value;
      } catch (const Error&) {
        diverged = true;
        break;
      }
      base += chunk;
      if (chunk <= 1e-16 * std::max(base, 1e-300)) break;
      if (win > 2 && chunk > prev_chunk) {
        diverged = true;
        break;
      }
      prev_chunk = chunk;
      if (win == 39) diverged = true;
    }
    if (diverged || !(base > 0.0) || !std::isfinite(base)) {
      W_error =
          "weight primitive int_0^v s^{(1+lambda)/k} Ltilde diverges at zero "
          "(the lambda = -k-1 edge needs Ltilde(s)/s integrable)";
      return;
    }
    const int n = 900;
    std::vector<double> lnv(n), lnW(n);
    double acc = base;
    double prev = vlo;
    const double l0 = std::log(vlo), l1 = std::log(vhi);
    for (int i = 0; i < n; ++i) {
      const double s = std::exp(l0 + (l1 - l0) * i / (n - 1));
      if (i > 0) acc += num::integrate(ig, prev, s, 1e-12).value;
      lnv[i] = std::log(s);
      lnW[i] = std::log(acc);
      prev = s;
    }
    W = std::make_shared<num::Pchip>(lnv, lnW);
    W_vlo = vlo;
    W_vhi = vhi;
    W_ok = true;
  }

  double primitive(double v) const {
    if (!W_ok) throw NumericsError(W_error.empty() ? "no weight primitive" : W_error);
    if (!(v > 0.0)) throw DomainError("weight primitive needs v > 0");
    if (v < W_vlo) {
      const int k = prob.dom.k;
      const double lam = prob.weight.lambda();
      const double e1 = (1.0 + lam) / k + 1.0;
      if (e1 <= 0.0)
        throw RangeError("weight primitive queried below its cache range");
      return std::pow(v, e1) * prob.weight.slowly_varying().eval(v) / e1;
    }
    const double vq = std::min(v, W_vhi);
    return std::exp((*W)(std::log(vq)));
  }

  const nonlin::LimitConstants& limits() const {
    if (!lc) throw NumericsError("index limits unavailable: " + lc_error);
    return *lc;
  }

  const transforms::PsiTransform& require_psi() const {
    if (!psi)
      throw HypothesisError("psi transform unavailable: " + psi_error);
    return *psi;
  }

  const transforms::PhiTransform& require_phi() const {
    if (!phi)
      throw HypothesisError("phi transform unavailable: " + phi_error);
    return *phi;
  }

  // big_psi with the index-limit fallback at the boundary (g -> 0+).
  double big_psi_safe(double g) const {
    if (g > 0.0) {
      try {
        return require_psi().big_psi(g);
      } catch (const RangeError&) {
      }
    }
    const auto& l = limits();
    return l.C_inf_finite ? l.C_inf : kInf;
  }

  double big_phi_safe(double g) const {
    if (g > 0.0) {
      try {
        return require_phi().big_phi(g);
      } catch (const RangeError&) {
      }
    }
    return phi0_limit;
  }

  double omega(int j, double tau, double r) const;
  std::pair<double, double> extremum(int j, double tau, bool want_max,
                                     int n_grid) const;
};

BarrierEngine::BarrierEngine(BallProblem prob)
    : impl_(std::make_shared<Impl>(std::move(prob))) {}

const BallProblem& BarrierEngine::problem() const { return impl_->prob; }
const nonlin::LimitConstants& BarrierEngine::limits() const {
  return impl_->limits();
}
const transforms::PsiTransform& BarrierEngine::psi() const {
  return impl_->require_psi();
}
const transforms::PhiTransform& BarrierEngine::phi() const {
  return impl_->require_phi();
}
double BarrierEngine::karamata_primitive(double v) const {
  return impl_->primitive(v);
}
double BarrierEngine::omega(int j, double tau, double r) const {
  return impl_->omega(j, tau, r);
}

double BarrierEngine::Impl::omega(int j, double tau, double r) const {
  const auto& dom = prob.dom;
  const auto& dfn = prob.dfn;
  const int k = dom.k;
  const double v = dfn.value_r(r);
  const double A = geom::defining_product(dom, dfn, r);
  const double S = geom::submatrix_sum_term(dom, dfn, r);
  switch (j) {
    case 0: {
      const double lam = prob.weight.lambda();
      const auto ge = prob.f.growth_exponent_at_infinity();
      if (!ge || !(*ge > k))
        throw HypothesisError("omega_0 needs power growth exponent > k");
      const double alpha = (k + 1.0 + lam) / (*ge - k);
      return A + (alpha + 1.0) * S;
    }
    case 1:
      return A + S;
    case 2: {
      const double lam = prob.weight.lambda();
      const double eta = (k + 1.0 + lam) / k;
      const double g = v > 0.0 ? tau * std::pow(v, eta) / eta : 0.0;
      const double Psi = big_psi_safe(g);
      return A + (Psi * eta + 1.0 - eta) * S;
    }
    case 3: {
      const double mu = prob.weight.mu();
      if (!(v < 1.0) && v > 0.0)
        throw DomainError("omega_3 needs v < 1");
      const double Lv = v > 0.0 ? -std::log(v) : kInf;
      const double g =
          v > 0.0 ? tau * std::pow(Lv, 1.0 - mu) / (mu - 1.0) : 0.0;
      const double Psi = big_psi_safe(g);
      if (v <= 0.0) return A + S;  // both log corrections vanish at v = 0+
      return A + (Psi * (mu - 1.0) / Lv + 1.0 - mu / Lv) * S;
    }
    case 4: {
      const double lam = prob.weight.lambda();
      if (v <= 0.0) {
        // boundary limit: Q -> (k+1+lambda)/k, y -> 0
        const double eta = (k + 1.0 + lam) / k;
        return A + (big_psi_safe(0.0) * eta - (lam + 1.0) / k) * S;
      }
      const auto& L = prob.weight.slowly_varying();
      const double Wv = primitive(v);
      const double g = tau * Wv;
      const double Q = std::pow(v, (k + 1.0 + lam) / k) * L.eval(v) / Wv;
      const double y = L.y(v);
      return A + (big_psi_safe(g) * Q - (lam + 1.0) / k + y) * S;
    }
    case 5: {
      const double lam = prob.weight.lambda();
      const double kk = static_cast<double>(k);
      const double pref = std::pow(kk / (kk + 1.0), k);
      if (v <= 0.0) {
        const double eta = (k + 1.0 + lam) / k;
        const double Phi = phi0_limit;
        return pref * (Phi * A +
                       (kk / (kk + 1.0) * eta +
                        Phi * (eta / (kk + 1.0) - (lam + 1.0) / kk)) *
                           S);
      }
      const auto& L = prob.weight.slowly_varying();
      const double Wv = primitive(v);
      const double g5 = tau * std::pow(Wv, kk / (kk + 1.0));
      const double Phi = big_phi_safe(g5);
      const double Q = std::pow(v, (k + 1.0 + lam) / k) * L.eval(v) / Wv;
      const double y = L.y(v);
      return pref *
             (Phi * A + (kk / (kk + 1.0) * Q +
                         Phi * (Q / (kk + 1.0) - (lam + 1.0) / kk + y)) *
                            S);
    }
    default:
      throw ArgumentError("omega index j must be 0..5");
  }
}

std::pair<double, double> BarrierEngine::Impl::extremum(int j, double tau,
                                                        bool want_max,
                                                        int n_grid) const {
  const double R = prob.dom.R;
  std::vector<double> nodes = num::chebyshev_nodes(n_grid, 0.0, R);
  std::sort(nodes.begin(), nodes.end());
  if (nodes.front() > 0.0) nodes.insert(nodes.begin(), 0.0);
  if (nodes.back() < R) nodes.push_back(R);
  double best = want_max ? -kInf : kInf;
  std::size_t bi = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double w = omega(j, tau, nodes[i]);
    if (want_max ? (w > best) : (w < best)) {
      best = w;
      bi = i;
    }
  }
  if (!std::isfinite(best)) return {best, nodes[bi]};
  const double lo = bi == 0 ? nodes[0] : nodes[bi - 1];
  const double hi = bi + 1 == nodes.size() ? nodes.back() : nodes[bi + 1];
  double fmin = 0.0;
  const auto obj = [this, j, tau, want_max](double r) {
    const double w = omega(j, tau, r);
    return want_max ? -w : w;
  };
  const double rb = num::golden_min(obj, lo, hi, 1e-12 * R, &fmin);
  const double wb = want_max ? -fmin : fmin;
  if (want_max ? (wb > best) : (wb < best)) return {wb, rb};
  return {best, nodes[bi]};
}

TauResult BarrierEngine::solve_tau(int j, TauSide side, int n_grid) const {
  const auto& im = *impl_;
  const int k = im.prob.dom.k;
  if (j < 2 || j > 5)
    throw ArgumentError("solve_tau applies to omega_2..omega_5");
  const double p = (j == 5) ? k + 1.0 : static_cast<double>(k);
  const bool want_max = side == TauSide::MaxToB1;
  const double b = want_max ? im.prob.weight.b1() : im.prob.weight.b2();
  if (!(b > 0.0))
    throw HypothesisError("solve_tau needs a positive envelope constant");
  // matching weight form
  const auto wf = im.prob.weight.form();
  if ((j == 2 && wf != WeightForm::Power) ||
      (j == 3 && wf != WeightForm::LogCritical) ||
      ((j == 4 || j == 5) && wf != WeightForm::Karamata))
    throw ArgumentError("omega index does not match the weight form");

  const auto fam = im.prob.f.family();
  const bool tau_free = fam == nonlin::Family::Power ||
                        fam == nonlin::Family::Exponential;

  TauResult out;
  double tau = 1.0;
  if (tau_free) {
    const auto [e, re] = im.extremum(j, 1.0, want_max, n_grid);
    if (!std::isfinite(e) || !(e > 0.0))
      throw HypothesisError(
          "coefficient function is not bounded between positive constants");
    tau = std::pow(b / e, 1.0 / p);
    out.tau = tau;
    out.extremum = e;
    out.extremum_radius = re;
    out.residual = std::fabs(std::pow(tau, p) * e - b);
    out.bracket_lo = out.bracket_hi = tau;
    out.closed_form = true;
    return out;
  }

  // boundedness pre-check over a tau ladder and a coarse radial grid
  double beta1 = kInf, beta2 = -kInf;
  for (int ti = -8; ti <= 8; ++ti) {
    const double tprobe = std::pow(2.0, ti);
    for (int ri = 0; ri <= 96; ++ri) {
      const double r = im.prob.dom.R * ri / 96.0;
      const double w = im.omega(j, tprobe, r);
      if (!std::isfinite(w))
        throw HypothesisError(
            "coefficient function unbounded over the probe set");
      beta1 = std::min(beta1, w);
      beta2 = std::max(beta2, w);
    }
  }
  if (!(beta1 > 0.0))
    throw HypothesisError(
        "coefficient function not bounded below by a positive constant "
        "(structure hypotheses fail)");
  double lo = 0.5 * std::pow(b / beta2, 1.0 / p);
  double hi = 2.0 * std::pow(b / beta1, 1.0 / p);
  const int coarse = 257;
  const auto G = [&](double t, int n) {
    return std::pow(t, p) * im.extremum(j, t, want_max, n).first - b;
  };
  double Glo = G(lo, coarse), Ghi = G(hi, coarse);
  int expand = 0;
  while (Glo > 0.0 && expand++ < 60) {
    lo *= 0.5;
    Glo = G(lo, coarse);
  }
  expand = 0;
  while (Ghi < 0.0 && expand++ < 60) {
    hi *= 2.0;
    Ghi = G(hi, coarse);
  }
  if (Glo > 0.0 || Ghi < 0.0)
    throw RangeError("solve_tau: no sign change after 60 bracket doublings");
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  for (int it = 0; it < 100 && (hi - lo) > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (G(mid, coarse) <= 0.0) lo = mid;
    else hi = mid;
  }
  tau = 0.5 * (lo + hi);
  // final polish on the full grid
  double e = 0.0, re = 0.0;
  for (int it = 0; it < 8; ++it) {
    const auto ex = im.extremum(j, tau, want_max, n_grid);
    e = ex.first;
    re = ex.second;
    const double tn = std::pow(b / e, 1.0 / p);
    const bool done = std::fabs(tn - tau) <= 1e-13 * tau;
    tau = tn;
    if (done) break;
  }
  const auto ex = im.extremum(j, tau, want_max, n_grid);
  out.tau = tau;
  out.extremum = ex.first;
  out.extremum_radius = ex.second;
  out.residual = std::fabs(std::pow(tau, p) * ex.first - b);
  (void)re;
  return out;
}

// ---------------------------------------------------------------------------
// build_barrier

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

[[noreturn]] void throw_report(const HypothesisReport& rep) {
  std::string msg = "barrier hypotheses violated:";
  for (const auto& c : rep.checks)
    if (c.rfind("[FAIL]", 0) == 0) msg += "\n  " + c;
  throw HypothesisError(msg);
}

}  // namespace

Barrier BarrierEngine::build(Theorem t, Role role) const {
  const auto& im = *impl_;
  const auto& dom = im.prob.dom;
  const int k = dom.k;

  // Smallness hypothesis of the log-critical construction: rebuild on a
  // rescaled defining function when max v is too large.
  if (t == Theorem::T24 && im.prob.weight.form() == WeightForm::LogCritical) {
    const double mu = im.prob.weight.mu();
    if (!(im.prob.dfn.max_value() < std::exp(-mu))) {
      const double cv = std::exp(-mu) / (2.0 * dom.R * dom.R);
      BallProblem p2(dom, geom::DefiningFunction(dom, cv), im.prob.weight,
                     im.prob.f);
      BarrierEngine e2(p2);
      Barrier b = e2.build(t, role);
      auto rep = std::make_shared<HypothesisReport>(*b.report_);
      rep->notes.insert(rep->notes.begin(),
                        "defining function rescaled to c_v = e^{-mu}/(2R^2) = " +
                            fmt(cv) + " so that max v < e^{-mu}");
      b.report_ = rep;
      return b;
    }
  }

  auto rep = std::make_shared<HypothesisReport>();
  Barrier bar;
  bar.theorem_ = t;
  bar.role_ = role;
  bar.problem_ = std::make_shared<BallProblem>(im.prob);
  const auto& wt = im.prob.weight;
  const bool is_super = role == Role::Super;

  if (!(wt.b1() > 0.0))
    rep->fail("weight lower envelope b1 > 0 (got " + fmt(wt.b1()) + ")");
  else
    rep->pass("weight lower envelope b1 > 0");

  switch (t) {
    case Theorem::T21: {
      if (wt.form() != WeightForm::Power) {
        rep->fail("power weight form required");
        break;
      }
      if (im.prob.f.family() != nonlin::Family::Power) {
        rep->fail("pure power nonlinearity required");
        break;
      }
      const double lam = wt.lambda();
      const double g = *im.prob.f.growth_exponent_at_infinity();
      if (lam > -k - 1.0) rep->pass("lambda > -k-1");
      else rep->fail("lambda > -k-1 (got lambda = " + fmt(lam) + ")");
      if (g > k) rep->pass("growth exponent gamma > k");
      else rep->fail("growth exponent gamma > k (got gamma = " + fmt(g) + ")");
      if (!rep->ok) break;
      const double alpha = (k + 1.0 + lam) / (g - k);
      const double c0 = im.extremum(0, 1.0, false, 4096).first;
      const double C0 = im.extremum(0, 1.0, true, 4096).first;
      const double m0 =
          std::pow(wt.b2() / (std::pow(alpha, k) * c0), 1.0 / (k - g));
      const double M0 =
          std::pow(wt.b1() / (std::pow(alpha, k) * C0), 1.0 / (k - g));
      const double amp = is_super ? M0 : m0;
      bar.alpha_ = alpha;
      bar.amplitude_ = amp;
      bar.profile_ = [amp, alpha](double v) {
        transforms::Derivs d;
        d.value = amp * std::pow(v, -alpha);
        d.d1 = -alpha * amp * std::pow(v, -alpha - 1.0);
        d.d2 = alpha * (alpha + 1.0) * amp * std::pow(v, -alpha - 2.0);
        return d;
      };
      break;
    }
    case Theorem::T22: {
      if (wt.form() != WeightForm::Power) {
        rep->fail("power weight form required");
        break;
      }
      if (im.prob.f.family() != nonlin::Family::Exponential) {
        rep->fail("exponential nonlinearity required");
        break;
      }
      const double lam = wt.lambda();
      if (lam > -k - 1.0) rep->pass("lambda > -k-1");
      else rep->fail("lambda > -k-1 (got lambda = " + fmt(lam) + ")");
      if (!rep->ok) break;
      const double c1 = im.extremum(1, 1.0, false, 4096).first;
      const double C1 = im.extremum(1, 1.0, true, 4096).first;
      const double s = k + 1.0 + lam;
      const double m1 = std::log(c1) + k * std::log(s) - std::log(wt.b2());
      const double M1 = std::log(C1) + k * std::log(s) - std::log(wt.b1());
      const double amp = is_super ? M1 : m1;
      bar.amplitude_ = amp;
      bar.profile_ = [amp, s](double v) {
        transforms::Derivs d;
        d.value = amp - s * std::log(v);
        d.d1 = -s / v;
        d.d2 = s / (v * v);
        return d;
      };
      break;
    }
    case Theorem::T23: {
      if (wt.form() != WeightForm::Power) {
        rep->fail("power weight form required");
        break;
      }
      const double lam = wt.lambda();
      if (lam > -k - 1.0) rep->pass("lambda > -k-1");
      else rep->fail("lambda > -k-1 (got lambda = " + fmt(lam) + ")");
      if (!im.psi) rep->fail("psi transform: " + im.psi_error);
      if (!im.lc) rep->fail("index limits: " + im.lc_error);
      if (!rep->ok) break;
      const double eta = (k + 1.0 + lam) / k;
      const double h0 = im.lc->h0;
      if ((h0 - 1.0) * eta + 1.0 > 0.0)
        rep->pass("(h0 - 1) eta + 1 > 0");
      else
        rep->fail("(h0 - 1) eta + 1 > 0 (h0 = " + fmt(h0) + ", eta = " +
                  fmt(eta) + ")");
      if (is_super && !im.lc->C_inf_finite)
        rep->fail("supersolution needs a finite index limit at infinity");
      if (!rep->ok) break;
      const auto ts =
          solve_tau(2, is_super ? TauSide::MaxToB1 : TauSide::MinToB2);
      bar.tau_ = ts.tau;
      bar.eta_ = eta;
      const double tau = ts.tau;
      const transforms::PsiTransform psi = *im.psi;
      bar.profile_ = [psi, tau, eta](double v) {
        const double g = tau * std::pow(v, eta) / eta;
        const auto pd = psi.derivatives(g);
        transforms::Derivs d;
        d.value = pd.value;
        const double gv = tau * std::pow(v, eta - 1.0);
        const double gvv = tau * (eta - 1.0) * std::pow(v, eta - 2.0);
        d.d1 = pd.d1 * gv;
        d.d2 = pd.d2 * gv * gv + pd.d1 * gvv;
        return d;
      };
      break;
    }
    case Theorem::T24: {
      if (wt.form() != WeightForm::LogCritical) {
        rep->fail("log-critical weight form required");
        break;
      }
      const double mu = wt.mu();
      rep->pass("mu > 1");
      if (!im.psi) rep->fail("psi transform: " + im.psi_error);
      if (!im.lc) rep->fail("index limits: " + im.lc_error);
      if (im.prob.dfn.max_value() < std::exp(-mu))
        rep->pass("max v < e^{-mu}");
      else
        rep->fail("max v < e^{-mu}");
      if (is_super && im.lc && !im.lc->C_inf_finite)
        rep->fail("supersolution needs a finite index limit at infinity");
      if (!rep->ok) break;
      const auto ts =
          solve_tau(3, is_super ? TauSide::MaxToB1 : TauSide::MinToB2);
      bar.tau_ = ts.tau;
      const double tau = ts.tau;
      const transforms::PsiTransform psi = *im.psi;
      bar.profile_ = [psi, tau, mu](double v) {
        const double L = -std::log(v);
        const double g = tau * std::pow(L, 1.0 - mu) / (mu - 1.0);
        const auto pd = psi.derivatives(g);
        transforms::Derivs d;
        d.value = pd.value;
        const double gv = tau * std::pow(L, -mu) / v;
        const double gvv =
            tau * (mu * std::pow(L, -mu - 1.0) - std::pow(L, -mu)) / (v * v);
        d.d1 = pd.d1 * gv;
        d.d2 = pd.d2 * gv * gv + pd.d1 * gvv;
        return d;
      };
      break;
    }
    case Theorem::T25: {
      if (wt.form() != WeightForm::Karamata) {
        rep->fail("karamata weight form required");
        break;
      }
      const double lam = wt.lambda();
      if (lam >= -k - 1.0) rep->pass("lambda >= -k-1");
      else rep->fail("lambda >= -k-1 (got " + fmt(lam) + ")");
      if (!im.W_ok) rep->fail(im.W_error);
      else rep->pass("weight primitive finite near zero");
      if (!im.psi) rep->fail("psi transform: " + im.psi_error);
      if (!im.lc) rep->fail("index limits: " + im.lc_error);
      if (!rep->ok) break;
      const double h0 = im.lc->h0;
      const double cond = k * h0 + (1.0 + lam) * (h0 - 1.0);
      if (cond > 0.0)
        rep->pass("k h0 + (1+lambda)(h0-1) > 0 (threshold read as strict)");
      else
        rep->fail("k h0 + (1+lambda)(h0-1) > 0 (got " + fmt(cond) + ")");
      if (is_super && !im.lc->C_inf_finite)
        rep->fail("supersolution needs a finite index limit at infinity");
      if (!rep->ok) break;
      const auto ts =
          solve_tau(4, is_super ? TauSide::MaxToB1 : TauSide::MinToB2);
      bar.tau_ = ts.tau;
      const double tau = ts.tau;
      const transforms::PsiTransform psi = *im.psi;
      const auto impl = impl_;
      const double e = (1.0 + lam) / k;
      bar.profile_ = [psi, tau, impl, e](double v) {
        const auto& L = impl->prob.weight.slowly_varying();
        const double Lv = L.eval(v);
        const double Wv = impl->primitive(v);
        const double Wp = std::pow(v, e) * Lv;
        const double y = L.y(v);
        const double Wpp = std::pow(v, e - 1.0) * Lv * (e - y);
        const auto pd = psi.derivatives(tau * Wv);
        transforms::Derivs d;
        d.value = pd.value;
        d.d1 = pd.d1 * tau * Wp;
        d.d2 = pd.d2 * tau * tau * Wp * Wp + pd.d1 * tau * Wpp;
        return d;
      };
      break;
    }
    case Theorem::T26: {
      if (wt.form() != WeightForm::Karamata) {
        rep->fail("karamata weight form required");
        break;
      }
      const double lam = wt.lambda();
      if (lam > -k - 1.0 && lam < 0.0)
        rep->pass("-k-1 < lambda < 0");
      else
        rep->fail("-k-1 < lambda < 0 (got " + fmt(lam) + ")");
      if (!im.W_ok) rep->fail(im.W_error);
      if (!im.phi) rep->fail("phi transform: " + im.phi_error);
      if (!rep->ok) break;
      const auto ko = nonlin::keller_osserman(im.prob.f, nonlin::KOOrder::EnergyK1);
      if (ko.tail_converges)
        rep->pass("energy tail integral converges at infinity");
      else
        rep->fail("energy tail integral converges at infinity");
      if (ko.near_zero_diverges.has_value()) {
        if (*ko.near_zero_diverges)
          rep->pass("energy integral diverges at zero");
        else
          rep->fail("energy integral diverges at zero");
      }
      if (!rep->ok) break;
      const auto ts =
          solve_tau(5, is_super ? TauSide::MaxToB1 : TauSide::MinToB2);
      bar.tau_ = ts.tau;
      const double tau = ts.tau;
      const transforms::PhiTransform phi = *im.phi;
      const auto impl = impl_;
      const double e = (1.0 + lam) / k;
      const double q = k / (k + 1.0);
      bar.profile_ = [phi, tau, impl, e, q](double v) {
        const auto& L = impl->prob.weight.slowly_varying();
        const double Lv = L.eval(v);
        const double Wv = impl->primitive(v);
        const double Wp = std::pow(v, e) * Lv;
        const double y = L.y(v);
        const double Wpp = std::pow(v, e - 1.0) * Lv * (e - y);
        const double s = std::pow(Wv, q);
        const double sp = q * std::pow(Wv, q - 1.0) * Wp;
        const double spp = q * (std::pow(Wv, q - 1.0) * Wpp +
                                (q - 1.0) * std::pow(Wv, q - 2.0) * Wp * Wp);
        const auto pd = phi.derivatives(tau * s);
        transforms::Derivs d;
        d.value = pd.value;
        d.d1 = pd.d1 * tau * sp;
        d.d2 = pd.d2 * tau * tau * sp * sp + pd.d1 * tau * spp;
        return d;
      };
      break;
    }
  }
  if (!rep->ok) throw_report(*rep);
  bar.report_ = rep;
  return bar;
}

Barrier build_barrier(const BallProblem& prob, Theorem t, Role role) {
  BarrierEngine eng(prob);
  return eng.build(t, role);
}

double Barrier::value_r(double r) const {
  return profile_(problem_->dfn.value_r(r)).value;
}

double Barrier::value_d(double d) const {
  return profile_(problem_->dfn.value_d(d)).value;
}

// ---------------------------------------------------------------------------
// verify_barrier

VerifyReport verify_barrier(const Barrier& b, const BallProblem& prob,
                            int n_grid) {
  const auto& dom = prob.dom;
  const auto& dfn = prob.dfn;
  const int k = dom.k;
  const double R = dom.R;
  VerifyReport rep;
  rep.worst_margin = kInf;
  // geometric clustering toward the boundary, plus the center
  const double rho = std::pow(1e-6, 1.0 / (n_grid - 1));
  Eigen::VectorXd eigs(dom.N);
  for (int i = 0; i < n_grid; ++i) {
    const double d = R * std::pow(rho, i);
    const double r = R - d;
    const double v = dfn.value_r(r);
    const auto pf = b.profile(v);
    const double Sk = geom::sk_of_v_composition(dom, dfn, pf.d1, pf.d2, r);
    const double target = prob.b_at(r) * prob.f.f(pf.value);
    const double scale = std::max({std::fabs(Sk), std::fabs(target), 1e-300});
    const double margin = (b.role() == Role::Sub ? Sk - target : target - Sk) /
                          scale;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_radius = r;
    }
    if (margin < -1e-9) ++rep.violations;
    // composed radial Hessian spectrum
    const double c = dfn.c_v();
    const double tang = -2.0 * c * pf.d1;
    const double rad = tang + 4.0 * c * c * r * r * pf.d2;
    for (int q = 0; q < dom.N - 1; ++q) eigs[q] = tang;
    eigs[dom.N - 1] = rad;
    if (!symfun::is_k_convex_eigs(eigs, k, true)) ++rep.convexity_failures;
    ++rep.points;
  }
  return rep;
}

VerifyReport verify_barrier(const Barrier& b, int n_grid) {
  return verify_barrier(b, b.problem(), n_grid);
}

double barrier_ordering_margin(const Barrier& sub, const Barrier& super,
                               int n_grid) {
  const auto& dom = sub.problem().dom;
  const double R = dom.R;
  double worst = kInf;
  const double rho = std::pow(1e-6, 1.0 / (n_grid - 1));
  for (int i = 0; i < n_grid; ++i) {
    const double r = R - R * std::pow(rho, i);
    const double lo = sub.value_r(r), hi = super.value_r(r);
    const double scale = std::max({std::fabs(lo), std::fabs(hi), 1.0});
    worst = std::min(worst, (hi - lo) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// rate_constants

RateConstants rate_constants(const BallProblem& prob,
                             std::optional<ThetaFunction> theta) {
  const int k = prob.dom.k;
  const auto lc = nonlin::limit_constants(prob.f);
  RateConstants rc;
  if (!lc.C_inf_finite)
    throw HypothesisError(
        "boundary-rate constants need a finite index limit at infinity");
  rc.C = lc.C_inf;
  double D;
  if (theta) D = theta->D();
  else if (prob.weight.form() == WeightForm::BoundaryRate)
    D = prob.weight.theta().D();
  else
    D = 1.0;  // theta == 1
  rc.D_theta = D;
  if (rc.C < 1.0 - 1e-12)
    throw HypothesisError("index limit at infinity must be >= 1");
  if (std::fabs(rc.C - 1.0) < 1e-12 && !(D > 0.0))
    throw HypothesisError(
        "the rapidly varying branch (C = 1) needs D_theta > 0");
  const double M = num::binomial(prob.dom.N - 1, k - 1) /
                   std::pow(prob.dom.R, k - 1);
  rc.M_plus = rc.M_minus = M;
  const double denom = (k + 1.0) * (rc.C - 1.0) + k * D;
  rc.tau9 = k / (k + 1.0) *
            std::pow(prob.weight.b1() * k / (denom * rc.M_plus), 1.0 / k);
  rc.tau10 = k / (k + 1.0) *
             std::pow(prob.weight.b2() * k / (denom * rc.M_minus), 1.0 / k);
  rc.exponent = 1.0 - rc.C;
  if (std::fabs(rc.C - 1.0) < 1e-12) {
    rc.bracket_lo = rc.bracket_hi = 1.0;
  } else {
    const double a = std::pow(rc.tau10, rc.exponent);
    const double b = std::pow(rc.tau9, rc.exponent);
    rc.bracket_lo = std::min(a, b);
    rc.bracket_hi = std::max(a, b);
  }
  return rc;
}

}  // namespace khess::barriers
