#include "khess/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "khess/barriers.hpp"
#include "khess/errors.hpp"
#include "khess/geometry.hpp"
#include "khess/karamata.hpp"
#include "khess/nonlinearity.hpp"
#include "khess/numerics.hpp"
#include "khess/radial_solver.hpp"
#include "khess/symfun.hpp"
#include "khess/transforms.hpp"

namespace khess::cli {
namespace {

// ---------------------------------------------------------------------------
// Formatting.

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmtg(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// ---------------------------------------------------------------------------
// Effective options: defaults, overwritten by the config file, overwritten
// by explicit CLI flags.

struct Options {
  std::string config_path;
  // problem
  int N = 2;
  int k = 1;
  double R = 1.0;
  double cv = std::numeric_limits<double>::quiet_NaN();  // default 1/(2R^2)
  std::string family = "power";
  double gamma = 3.0;
  double p = 1.0;
  double lambda = 0.0;
  double mu = 2.0;
  std::string weight = "power";
  std::string b;  // shorthand: const:<c> or power:<lambda>
  double b1 = 1.0;
  double b2 = 1.0;
  std::string Ltilde = "const:1";
  std::string theta = "const:1";
  std::string theorem = "auto";
  std::string lambdas;  // sweep schedule, comma separated
  std::string sweep_kind = "log-rate";
  double probe_r = 0.0;
  // solver
  int grid_points = 2048;
  int levels = 24;
  double level_tol = 1e-7;
  double picard_tol = 1e-10;
  int max_sweeps = 800;
  double theta0 = 0.5;
  double delta_report = 1e-3;
  int rk_substeps = 4;
  // output
  std::string csv;
  std::string svg;
  double tmin = 1e-3;
  double tmax = 10.0;
  int points = 200;
};

[[noreturn]] void config_fail(const ConfigFile& cf, const std::string& key,
                              const std::string& msg) {
  int line = 0;
  auto it = cf.lines.find(key);
  if (it != cf.lines.end()) line = it->second;
  throw ConfigError(cf.name + ":" + std::to_string(line) + ": " + msg);
}

double want_num(const ConfigFile& cf, const std::string& key,
                const std::string& val) {
  char* end = nullptr;
  const double x = std::strtod(val.c_str(), &end);
  if (end == val.c_str() || *end != '\0')
    config_fail(cf, key, "key '" + key + "' expects a number, got '" + val + "'");
  return x;
}

int want_int(const ConfigFile& cf, const std::string& key,
             const std::string& val) {
  char* end = nullptr;
  const long x = std::strtol(val.c_str(), &end, 10);
  if (end == val.c_str() || *end != '\0')
    config_fail(cf, key, "key '" + key + "' expects an integer, got '" + val + "'");
  return static_cast<int>(x);
}

void apply_config(Options& o, const ConfigFile& cf) {
  for (const auto& [key, val] : cf.values) {
    if (key == "problem.N") o.N = want_int(cf, key, val);
    else if (key == "problem.k") o.k = want_int(cf, key, val);
    else if (key == "problem.R") o.R = want_num(cf, key, val);
    else if (key == "problem.cv") o.cv = want_num(cf, key, val);
    else if (key == "problem.family") o.family = val;
    else if (key == "problem.gamma") o.gamma = want_num(cf, key, val);
    else if (key == "problem.p") o.p = want_num(cf, key, val);
    else if (key == "problem.lambda") o.lambda = want_num(cf, key, val);
    else if (key == "problem.mu") o.mu = want_num(cf, key, val);
    else if (key == "problem.weight") o.weight = val;
    else if (key == "problem.b") o.b = val;
    else if (key == "problem.b1") o.b1 = want_num(cf, key, val);
    else if (key == "problem.b2") o.b2 = want_num(cf, key, val);
    else if (key == "problem.Ltilde") o.Ltilde = val;
    else if (key == "problem.theta") o.theta = val;
    else if (key == "problem.theorem") o.theorem = val;
    else if (key == "problem.lambdas") o.lambdas = val;
    else if (key == "problem.sweep_kind") o.sweep_kind = val;
    else if (key == "problem.probe_r") o.probe_r = want_num(cf, key, val);
    else if (key == "solver.grid_points") o.grid_points = want_int(cf, key, val);
    else if (key == "solver.levels") o.levels = want_int(cf, key, val);
    else if (key == "solver.level_tol") o.level_tol = want_num(cf, key, val);
    else if (key == "solver.picard_tol") o.picard_tol = want_num(cf, key, val);
    else if (key == "solver.max_sweeps") o.max_sweeps = want_int(cf, key, val);
    else if (key == "solver.theta0") o.theta0 = want_num(cf, key, val);
    else if (key == "solver.delta_report") o.delta_report = want_num(cf, key, val);
    else if (key == "solver.rk_substeps") o.rk_substeps = want_int(cf, key, val);
    else if (key == "output.csv") o.csv = val;
    else if (key == "output.svg") o.svg = val;
    else if (key == "output.tmin") o.tmin = want_num(cf, key, val);
    else if (key == "output.tmax") o.tmax = want_num(cf, key, val);
    else if (key == "output.points") o.points = want_int(cf, key, val);
    else config_fail(cf, key, "unknown key '" + key + "'");
  }
}

// ---------------------------------------------------------------------------
// Builders from option strings.

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

// "name:a,b" -> {name, {a, b}}
std::pair<std::string, std::vector<double>> parse_tagged(const std::string& s,
                                                         const char* what) {
  const auto colon = s.find(':');
  const std::string tag = trim(s.substr(0, colon));
  std::vector<double> nums;
  if (colon != std::string::npos) {
    for (const auto& part : split(s.substr(colon + 1), ',')) {
      char* end = nullptr;
      const double x = std::strtod(part.c_str(), &end);
      if (end == part.c_str() || *end != '\0')
        throw ArgumentError(std::string(what) + " '" + s +
                            "': expected numbers after ':'");
      nums.push_back(x);
    }
  }
  return {tag, nums};
}

void apply_b_shorthand(Options& o) {
  if (o.b.empty()) return;
  const auto [tag, nums] = parse_tagged(o.b, "--b");
  if (tag == "const" && nums.size() == 1) {
    o.weight = "power";
    o.lambda = 0.0;
    o.b1 = o.b2 = nums[0];
  } else if (tag == "power" && nums.size() == 1) {
    o.weight = "power";
    o.lambda = nums[0];
  } else {
    throw ArgumentError("--b expects const:<value> or power:<lambda>, got '" +
                        o.b + "'");
  }
}

nonlin::Nonlinearity make_nonlinearity(const Options& o) {
  if (o.family == "power") return nonlin::Nonlinearity::power(o.gamma, o.k);
  if (o.family == "exp" || o.family == "exponential")
    return nonlin::Nonlinearity::exponential(o.k);
  if (o.family == "neg-power" || o.family == "negative-power-tail")
    return nonlin::Nonlinearity::negative_power_tail(o.gamma, o.k);
  if (o.family == "power-log")
    return nonlin::Nonlinearity::power_log(o.gamma, o.p, o.k);
  if (o.family.rfind("file:", 0) == 0)
    return nonlin::Nonlinearity::from_file(o.family.substr(5), o.k);
  throw ArgumentError(
      "unknown family '" + o.family +
      "' (expected power | exp | neg-power | power-log | file:<path>)");
}

karamata::SlowlyVarying make_ltilde(const Options& o) {
  const auto [tag, nums] = parse_tagged(o.Ltilde, "--Ltilde");
  karamata::SlowlyVarying L = karamata::SlowlyVarying::constant(1.0);
  if (tag == "const" && nums.size() == 1) {
    L = karamata::SlowlyVarying::constant(nums[0]);
  } else if (tag == "log" && nums.size() == 2) {
    L = karamata::SlowlyVarying::log_power(nums[0], nums[1]);
  } else if (tag == "poweps" && nums.size() == 2) {
    L = karamata::SlowlyVarying::power_perturbation(nums[0], nums[1]);
  } else {
    throw ArgumentError(
        "--Ltilde expects const:<c> | log:<c>,<sigma> | poweps:<c>,<eps>, "
        "got '" + o.Ltilde + "'");
  }
  return L.with_orientation(karamata::Orientation::AtZero);
}

barriers::ThetaFunction make_theta(const Options& o) {
  const auto [tag, nums] = parse_tagged(o.theta, "--theta");
  if (tag == "const" && nums.size() == 1)
    return barriers::ThetaFunction::constant(nums[0]);
  if (tag == "power" && nums.size() == 1)
    return barriers::ThetaFunction::power(nums[0]);
  if (tag == "power" && nums.size() == 2)
    return barriers::ThetaFunction::power(nums[0], nums[1]);
  throw ArgumentError(
      "--theta expects const:<c> | power:<beta>[,<scale>], got '" + o.theta +
      "'");
}

barriers::Weight make_weight(const Options& o) {
  if (o.weight == "power") return barriers::Weight::power(o.lambda, o.b1, o.b2);
  if (o.weight == "log-critical" || o.weight == "logcritical")
    return barriers::Weight::log_critical(o.mu, o.b1, o.b2);
  if (o.weight == "karamata")
    return barriers::Weight::karamata(o.lambda, make_ltilde(o), o.b1, o.b2);
  if (o.weight == "boundary-rate")
    return barriers::Weight::boundary_rate(make_theta(o), o.b1, o.b2);
  throw ArgumentError(
      "unknown weight '" + o.weight +
      "' (expected power | log-critical | karamata | boundary-rate)");
}

barriers::BallProblem make_problem(const Options& o) {
  geom::BallDomain dom(o.N, o.k, o.R);
  geom::DefiningFunction dfn =
      std::isnan(o.cv) ? geom::DefiningFunction(dom)
                       : geom::DefiningFunction(dom, o.cv);
  return barriers::BallProblem(dom, dfn, make_weight(o), make_nonlinearity(o));
}

solver::SolveOptions make_solve_options(const Options& o) {
  solver::SolveOptions s;
  s.grid_points = o.grid_points;
  s.levels = o.levels;
  s.level_tol = o.level_tol;
  s.picard_tol = o.picard_tol;
  s.max_sweeps = o.max_sweeps;
  s.theta0 = o.theta0;
  s.delta_report = o.delta_report;
  s.rk_substeps = o.rk_substeps;
  return s;
}

std::string resolved_config(const std::string& cmd, const Options& o) {
  const double cv_eff = std::isnan(o.cv) ? 1.0 / (2.0 * o.R * o.R) : o.cv;
  std::ostringstream s;
  s << "cmd=" << cmd << " N=" << o.N << " k=" << o.k << " R=" << fmtg(o.R)
    << " cv=" << fmtg(cv_eff) << " family=" << o.family
    << " gamma=" << fmtg(o.gamma) << " p=" << fmtg(o.p)
    << " lambda=" << fmtg(o.lambda) << " mu=" << fmtg(o.mu)
    << " weight=" << o.weight << " b1=" << fmtg(o.b1) << " b2=" << fmtg(o.b2)
    << " Ltilde=" << o.Ltilde << " theta=" << o.theta
    << " theorem=" << o.theorem;
  if (!o.lambdas.empty()) s << " lambdas=" << o.lambdas;
  if (cmd == "sweep")
    s << " sweep_kind=" << o.sweep_kind << " probe_r=" << fmtg(o.probe_r);
  s << " grid_points=" << o.grid_points << " levels=" << o.levels
    << " level_tol=" << fmtg(o.level_tol)
    << " picard_tol=" << fmtg(o.picard_tol) << " max_sweeps=" << o.max_sweeps
    << " theta0=" << fmtg(o.theta0) << " delta_report=" << fmtg(o.delta_report)
    << " rk_substeps=" << o.rk_substeps;
  if (cmd == "transform")
    s << " tmin=" << fmtg(o.tmin) << " tmax=" << fmtg(o.tmax)
      << " points=" << o.points;
  return s.str();
}

// ---------------------------------------------------------------------------
// CSV and SVG emission.

void write_csv_rows(std::ostream& os, const std::string& config,
                    const std::vector<std::string>& cols,
                    const std::vector<std::vector<double>>& rows) {
  os << "# " << config << "\n";
  for (std::size_t j = 0; j < cols.size(); ++j)
    os << cols[j] << (j + 1 < cols.size() ? "," : "\n");
  for (const auto& row : rows)
    for (std::size_t j = 0; j < row.size(); ++j)
      os << fmt17(row[j]) << (j + 1 < row.size() ? "," : "\n");
}

void emit_csv(const Options& o, std::ostream& out, const std::string& config,
              const std::vector<std::string>& cols,
              const std::vector<std::vector<double>>& rows) {
  if (o.csv.empty()) return;
  if (o.csv == "-") {
    write_csv_rows(out, config, cols, rows);
    return;
  }
  std::ofstream f(o.csv, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + o.csv + "'");
  write_csv_rows(f, config, cols, rows);
  out << "csv written to " << o.csv << " (" << rows.size() << " rows)\n";
}

struct Series {
  std::string name;
  std::vector<double> x, y;
};

std::vector<double> linear_ticks(double lo, double hi) {
  const double range = hi - lo;
  if (!(range > 0)) return {lo};
  double step = std::pow(10.0, std::floor(std::log10(range / 4.0)));
  const double scaled = range / 4.0 / step;
  if (scaled > 5.0) step *= 10.0;
  else if (scaled > 2.0) step *= 5.0;
  else if (scaled > 1.0) step *= 2.0;
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 0.5 * step; v += step)
    t.push_back(v);
  return t;
}

void write_svg_plot(const Options& o, std::ostream& out,
                    const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, std::vector<Series> series) {
  if (o.svg.empty()) return;
  // log axes whenever every plotted value is positive
  bool logx = true, logy = true;
  bool any = false;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      any = true;
      if (s.x[i] <= 0.0) logx = false;
      if (s.y[i] <= 0.0) logy = false;
    }
  if (!any) throw NumericsError("plot has no finite data points");

  const double W = 800, H = 560, ML = 84, MR = 24, MT = 48, MB = 64;
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  const auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  const auto ty = [&](double v) { return logy ? std::log10(v) : v; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, tx(s.x[i])), xhi = std::max(xhi, tx(s.x[i]));
      ylo = std::min(ylo, ty(s.y[i])), yhi = std::max(yhi, ty(s.y[i]));
    }
  if (xhi - xlo < 1e-12) { xlo -= 0.5; xhi += 0.5; }
  if (yhi - ylo < 1e-12) { ylo -= 0.5; yhi += 0.5; }
  const double padx = 0.04 * (xhi - xlo), pady = 0.06 * (yhi - ylo);
  xlo -= padx, xhi += padx, ylo -= pady, yhi += pady;
  const auto px = [&](double v) {
    return ML + (tx(v) - xlo) / (xhi - xlo) * (W - ML - MR);
  };
  const auto py = [&](double v) {
    return H - MB - (ty(v) - ylo) / (yhi - ylo) * (H - MT - MB);
  };
  char buf[256];
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
         "height=\"560\" viewBox=\"0 0 800 560\">\n"
      << "<rect width=\"800\" height=\"560\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                "fill=\"none\" stroke=\"black\"/>\n",
                ML, MT, W - ML - MR, H - MT - MB);
  svg << buf;

  // ticks: decades on log axes, rounded steps otherwise
  const auto axis_ticks = [&](bool log, double lo, double hi) {
    std::vector<double> t;
    if (log) {
      for (int p = static_cast<int>(std::ceil(lo)); p <= std::floor(hi); ++p)
        t.push_back(std::pow(10.0, p));
      if (t.empty()) t = {std::pow(10.0, 0.5 * (lo + hi))};
    } else {
      t = linear_ticks(lo, hi);
    }
    return t;
  };
  for (double v : axis_ticks(logx, xlo, xhi)) {
    const double X = px(v);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                  "stroke=\"#dddddd\"/>\n",
                  X, MT, X, H - MB);
    svg << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"monospace\" "
                  "font-size=\"12\" text-anchor=\"middle\">%.4g</text>\n",
                  X, H - MB + 18.0, v);
    svg << buf;
  }
  for (double v : axis_ticks(logy, ylo, yhi)) {
    const double Y = py(v);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                  "stroke=\"#dddddd\"/>\n",
                  ML, Y, W - MR, Y);
    svg << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"monospace\" "
                  "font-size=\"12\" text-anchor=\"end\">%.4g</text>\n",
                  ML - 6.0, Y + 4.0, v);
    svg << buf;
  }
  const char* colors[4] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (logx && s.x[i] <= 0.0) continue;
      if (logy && s.y[i] <= 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      pts += buf;
    }
    svg << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\""
        << colors[si % 4] << "\" stroke-width=\"1.5\"/>\n";
    const double ly = MT + 18.0 + 18.0 * si;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                  "stroke=\"%s\" stroke-width=\"1.5\"/>\n",
                  W - MR - 170.0, ly, W - MR - 140.0, ly, colors[si % 4]);
    svg << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"monospace\" "
                  "font-size=\"12\">%s</text>\n",
                  W - MR - 132.0, ly + 4.0, s.name.c_str());
    svg << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-family=\"monospace\" "
                "font-size=\"14\" text-anchor=\"middle\">%s</text>\n",
                ML + (W - ML - MR) / 2.0, MT - 14.0, title.c_str());
  svg << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-family=\"monospace\" "
                "font-size=\"13\" text-anchor=\"middle\">%s%s</text>\n",
                ML + (W - ML - MR) / 2.0, H - 16.0, xlabel.c_str(),
                logx ? " (log)" : "");
  svg << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"18\" y=\"%.2f\" font-family=\"monospace\" "
                "font-size=\"13\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 18 %.2f)\">%s%s</text>\n",
                MT + (H - MT - MB) / 2.0, MT + (H - MT - MB) / 2.0,
                ylabel.c_str(), logy ? " (log)" : "");
  svg << buf;
  svg << "</svg>\n";

  std::ofstream f(o.svg, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + o.svg + "'");
  f << svg.str();
  out << "svg written to " << o.svg << "\n";
}

// ---------------------------------------------------------------------------
// Theorem selection.

barriers::Theorem parse_theorem(const std::string& s) {
  using barriers::Theorem;
  std::string t = s;
  if (!t.empty() && (t[0] == 'T' || t[0] == 't')) t = t.substr(1);
  t.erase(std::remove(t.begin(), t.end(), '.'), t.end());
  if (t == "21") return Theorem::T21;
  if (t == "22") return Theorem::T22;
  if (t == "23") return Theorem::T23;
  if (t == "24") return Theorem::T24;
  if (t == "25") return Theorem::T25;
  if (t == "26") return Theorem::T26;
  throw ArgumentError("unknown theorem '" + s +
                      "' (expected auto or 21 | 22 | 23 | 24 | 25 | 26)");
}

// For the auto path: boundary-rate weights are enveloped by constants so
// the power-weight constructions apply to the original b(x).
barriers::BallProblem envelope_boundary_rate(const barriers::BallProblem& prob) {
  const auto& th = prob.weight.theta();
  const int kk = prob.dom.k;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 1; i <= 512; ++i) {
    const double d = prob.dom.R * i / 512.0;
    const double m = std::pow(th.theta(d), kk + 1);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  if (!(lo > 0.0) || !std::isfinite(hi))
    throw HypothesisError("theta^{k+1} is not bounded between positive "
                          "constants on the ball");
  auto w = barriers::Weight::power(0.0, prob.weight.b1() * lo,
                                   prob.weight.b2() * hi)
               .with_evaluator([w0 = prob.weight, kk](double v, double d) {
                 return w0.evaluate(v, d, kk);
               });
  return barriers::BallProblem(prob.dom, prob.dfn, w, prob.f);
}

std::pair<barriers::Theorem, barriers::BallProblem> select_theorem(
    const barriers::BallProblem& prob) {
  using barriers::Theorem;
  using barriers::WeightForm;
  switch (prob.weight.form()) {
    case WeightForm::BoundaryRate:
      return select_theorem(envelope_boundary_rate(prob));
    case WeightForm::LogCritical:
      return {Theorem::T24, prob};
    case WeightForm::Karamata:
      return {Theorem::T25, prob};
    case WeightForm::Power:
      break;
  }
  switch (prob.f.family()) {
    case nonlin::Family::Power:
      return {Theorem::T21, prob};
    case nonlin::Family::Exponential:
      return {Theorem::T22, prob};
    default:
      return {Theorem::T23, prob};
  }
}

// ---------------------------------------------------------------------------
// Subcommands.

int run_indices(const Options& o, std::ostream& out) {
  const auto f = make_nonlinearity(o);
  const auto lc = nonlin::limit_constants(f);
  out << "f: " << f.describe() << "\n";
  out << "C_f^{+inf} = " << (lc.C_inf_finite ? fmtg(lc.C_inf) : "+inf") << "\n";
  if (lc.C_zero) out << "C_f^{0} = " << fmtg(*lc.C_zero) << "\n";
  if (lc.E_zero) out << "E_f^{0} = " << fmtg(*lc.E_zero) << "\n";
  if (lc.C_neg_inf) out << "C_f^{-inf} = " << fmtg(*lc.C_neg_inf) << "\n";
  if (lc.E_neg_inf) out << "E_f^{-inf} = " << fmtg(*lc.E_neg_inf) << "\n";
  out << "h0 = " << fmtg(lc.h0) << "\n";
  out << "H0 = " << (lc.H0_finite ? fmtg(lc.H0) : "+inf") << "\n";
  const auto eq = nonlin::index_equivalence_check(f);
  if (eq.rapid_variation) {
    out << "index C = 1: rapidly varying growth\n";
  } else if (eq.predicted_gamma && eq.measured_gamma) {
    out << "regular variation cross-check: k C/(C-1) = "
        << fmtg(*eq.predicted_gamma) << ", measured index = "
        << fmtg(*eq.measured_gamma) << " (discrepancy "
        << fmtg(eq.discrepancy) << ")\n";
  }
  return 0;
}

int run_transform(const Options& o, std::ostream& out) {
  const std::string config = resolved_config("transform", o);
  out << "config: " << config << "\n";
  if (!(o.tmin > 0.0) || !(o.tmax > o.tmin) || o.points < 2)
    throw ArgumentError("transform needs 0 < tmin < tmax and points >= 2");
  const auto f = make_nonlinearity(o);
  transforms::PsiTransform psi(f);
  std::optional<transforms::PhiTransform> phi;
  std::string phi_note;
  try {
    phi.emplace(f);
  } catch (const Error& e) {
    phi_note = e.what();
  }

  const double ratio = o.tmax / o.tmin;
  std::vector<std::vector<double>> rows;
  double dev_psi = 0.0, dev_phi = 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < o.points; ++i) {
    const double t =
        o.tmin * std::pow(ratio, static_cast<double>(i) / (o.points - 1));
    const auto dp = psi.derivatives(t);
    std::vector<double> row{t, dp.value, dp.d1, dp.d2, nan, nan, nan};
    if (psi.has_closed_form()) {
      const double num = psi.numeric(t);
      dev_psi = std::max(dev_psi, std::fabs(num - dp.value) /
                                      std::max(1.0, std::fabs(dp.value)));
    }
    if (phi) {
      const auto dq = phi->derivatives(t);
      row[4] = dq.value;
      row[5] = dq.d1;
      row[6] = dq.d2;
      if (phi->has_closed_form()) {
        const double num = phi->numeric(t);
        dev_phi = std::max(dev_phi, std::fabs(num - dq.value) /
                                        std::max(1.0, std::fabs(dq.value)));
      }
    }
    rows.push_back(std::move(row));
  }
  out << "psi(" << fmtg(o.tmin) << ") = " << fmtg(rows.front()[1]) << ", psi("
      << fmtg(o.tmax) << ") = " << fmtg(rows.back()[1]) << "\n";
  if (psi.has_closed_form())
    out << "closed-form cross-check psi: max rel dev " << fmtg(dev_psi)
        << " over " << o.points << " samples\n";
  if (phi) {
    out << "phi(" << fmtg(o.tmin) << ") = " << fmtg(rows.front()[4])
        << ", phi(" << fmtg(o.tmax) << ") = " << fmtg(rows.back()[4]) << "\n";
    if (phi->has_closed_form())
      out << "closed-form cross-check phi: max rel dev " << fmtg(dev_phi)
          << " over " << o.points << " samples\n";
  } else {
    out << "phi unavailable: " << phi_note << "\n";
  }
  emit_csv(o, out, config,
           {"t", "psi", "psi_d1", "psi_d2", "phi", "phi_d1", "phi_d2"}, rows);
  Series spsi{"psi", {}, {}};
  Series sphi{"phi", {}, {}};
  for (const auto& row : rows) {
    spsi.x.push_back(row[0]), spsi.y.push_back(row[1]);
    if (phi) sphi.x.push_back(row[0]), sphi.y.push_back(row[4]);
  }
  std::vector<Series> series{spsi};
  if (phi) series.push_back(sphi);
  write_svg_plot(o, out, "inverse tail transforms", "t", "value", series);
  return 0;
}

void print_report(std::ostream& out, const char* label,
                  const barriers::Barrier& bar) {
  out << label << ": tau = " << fmtg(bar.tau());
  if (bar.amplitude() != 0.0) out << ", amplitude = " << fmtg(bar.amplitude());
  if (bar.alpha() != 0.0) out << ", alpha = " << fmtg(bar.alpha());
  if (bar.eta() != 0.0) out << ", eta = " << fmtg(bar.eta());
  out << "\n";
  for (const auto& line : bar.report().checks) out << "  " << line << "\n";
  for (const auto& line : bar.report().notes) out << "  note: " << line << "\n";
}

int run_barrier(const Options& o, std::ostream& out) {
  const std::string config = resolved_config("barrier", o);
  out << "config: " << config << "\n";
  barriers::BallProblem prob = make_problem(o);
  barriers::Theorem thm;
  if (o.theorem == "auto") {
    auto sel = select_theorem(prob);
    thm = sel.first;
    prob = sel.second;
  } else {
    thm = parse_theorem(o.theorem);
  }

  std::optional<barriers::Barrier> sub, sup;
  try {
    sub = barriers::build_barrier(prob, thm, barriers::Role::Sub);
    sup = barriers::build_barrier(prob, thm, barriers::Role::Super);
  } catch (const HypothesisError&) {
    // the Karamata construction with -k-1 < lambda < 0 has a sharper
    // energy-scale variant; try it before giving up on the auto path
    if (o.theorem == "auto" &&
        prob.weight.form() == barriers::WeightForm::Karamata &&
        prob.weight.lambda() > -prob.dom.k - 1 && prob.weight.lambda() < 0.0) {
      thm = barriers::Theorem::T26;
      sub = barriers::build_barrier(prob, thm, barriers::Role::Sub);
      sup = barriers::build_barrier(prob, thm, barriers::Role::Super);
    } else {
      throw;
    }
  }
  static const char* names[] = {"2.1", "2.2", "2.3", "2.4", "2.5", "2.6"};
  out << "construction: theorem " << names[static_cast<int>(thm)]
      << (o.theorem == "auto" ? " (auto)" : "") << "\n";
  print_report(out, "sub", *sub);
  print_report(out, "super", *sup);

  const auto vr_sub = barriers::verify_barrier(*sub);
  const auto vr_sup = barriers::verify_barrier(*sup);
  const double ordering = barriers::barrier_ordering_margin(*sub, *sup);
  out << "verify sub:   worst margin " << fmtg(vr_sub.worst_margin) << " at r = "
      << fmtg(vr_sub.worst_radius) << ", " << vr_sub.violations
      << " violations, " << vr_sub.convexity_failures
      << " convexity failures\n";
  out << "verify super: worst margin " << fmtg(vr_sup.worst_margin) << " at r = "
      << fmtg(vr_sup.worst_radius) << ", " << vr_sup.violations
      << " violations, " << vr_sup.convexity_failures
      << " convexity failures\n";
  out << "ordering margin min (super - sub)/scale = " << fmtg(ordering) << "\n";

  // sample on the (possibly rescaled) problem the barriers were built for
  const auto& bprob = sub->problem();
  const auto grid = solver::Grid::geometric(bprob.dom, 1024, 1e-6);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.r[i], d = grid.d[i];
    rows.push_back({r, d, bprob.dfn.value_r(r), sub->value_r(r),
                    sup->value_r(r)});
  }
  emit_csv(o, out, config, {"r", "d", "v", "sub", "super"}, rows);
  Series ssub{"sub", {}, {}}, ssup{"super", {}, {}};
  for (const auto& row : rows) {
    ssub.x.push_back(row[1]), ssub.y.push_back(row[3]);
    ssup.x.push_back(row[1]), ssup.y.push_back(row[4]);
  }
  write_svg_plot(o, out, "sub and supersolution profiles", "boundary distance d",
                 "barrier value", {ssub, ssup});
  if (!vr_sub.ok(-1e-6) || !vr_sup.ok(-1e-6) || ordering < -1e-9)
    throw NumericsError("barrier verification failed (see margins above)");
  return 0;
}

solver::RadialSolution solve_problem(const Options& o,
                                     const barriers::BallProblem& prob) {
  return solver::solve_blowup(prob, make_solve_options(o));
}

void print_solution_summary(std::ostream& out,
                            const solver::RadialSolution& sol) {
  out << "levels used = " << sol.levels_used
      << (sol.converged ? " (converged)" : " (NOT converged)")
      << ", last level change = " << fmtg(sol.level_change) << "\n";
  if (!sol.sigma_levels.empty())
    out << "sigma ladder: " << sol.sigma_levels.size() << " levels, final = "
        << fmtg(sol.sigma_levels.back()) << "\n";
  out << "u(0) = " << fmtg(sol.u.front()) << ", u'(R-) = "
      << fmtg(sol.u_prime.back()) << "\n";
  out << "interior residual max = " << fmtg(sol.max_residual_interior)
      << " for r <= " << fmtg(sol.interior_radius) << "\n";
  out << "monotonicity violations = " << sol.monotonicity_violations
      << ", Gamma_k violations = " << sol.gamma_k_violations << "\n";
  if (!sol.note.empty()) out << "note: " << sol.note << "\n";
}

int run_solve(const Options& o, std::ostream& out) {
  const std::string config = resolved_config("solve", o);
  out << "config: " << config << "\n";
  const auto prob = make_problem(o);
  const auto sol = solve_problem(o, prob);
  print_solution_summary(out, sol);
  if (!o.csv.empty()) {
    if (o.csv == "-") {
      solver::write_solution_csv(out, sol, config);
    } else {
      std::ofstream f(o.csv, std::ios::binary);
      if (!f) throw ConfigError("cannot open output file '" + o.csv + "'");
      solver::write_solution_csv(f, sol, config);
      out << "csv written to " << o.csv << " (" << sol.r.size() << " rows)\n";
    }
  }
  Series su{"u", {}, {}};
  for (std::size_t i = 0; i < sol.r.size(); ++i) {
    if (sol.d[i] <= 0.0) continue;
    su.x.push_back(sol.d[i]);
    su.y.push_back(sol.u[i]);
  }
  write_svg_plot(o, out, "blow-up solution", "boundary distance d", "u", {su});
  if (!sol.converged)
    throw NumericsError("boundary ladder did not settle; raise levels or "
                        "loosen level_tol");
  if (sol.monotonicity_violations > 0 || sol.gamma_k_violations > 0)
    throw NumericsError("monotone-scheme invariant violated (" +
                        std::to_string(sol.monotonicity_violations) +
                        " monotonicity, " +
                        std::to_string(sol.gamma_k_violations) + " Gamma_k)");
  return 0;
}

int run_rate(const Options& o, std::ostream& out) {
  const std::string config = resolved_config("rate", o);
  out << "config: " << config << "\n";
  const auto prob = make_problem(o);
  const auto sol = solve_problem(o, prob);
  print_solution_summary(out, sol);

  std::optional<barriers::ThetaFunction> theta;
  if (prob.weight.form() != barriers::WeightForm::BoundaryRate)
    theta = make_theta(o);
  const auto rc = barriers::rate_constants(prob, theta);
  const auto rr = solver::boundary_rate(sol, prob, theta);
  out << "rate constants: tau9 = " << fmtg(rc.tau9) << ", tau10 = "
      << fmtg(rc.tau10) << ", C = " << fmtg(rc.C) << ", exponent 1-C = "
      << fmtg(rc.exponent) << "\n";
  out << "probes (d, u/psi(Theta(d)^{(k+1)/k})):\n";
  for (std::size_t i = 0; i < rr.d_probe.size(); ++i)
    out << "  d = " << fmtg(rr.d_probe[i]) << "  ratio = " << fmtg(rr.ratio[i])
        << "\n";
  out << "extrapolated limit = " << fmtg(rr.limit) << " (est err "
      << fmtg(rr.limit_error) << ")\n";
  out << "bracket [tau10^{1-C}, tau9^{1-C}] = [" << fmtg(rr.bracket_lo) << ", "
      << fmtg(rr.bracket_hi) << "]\n";
  out << "inside bracket: " << (rr.inside ? "yes" : "NO")
      << "; tail monotone: " << (rr.monotone_tail ? "yes" : "no") << "\n";

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rr.d_probe.size(); ++i)
    rows.push_back({rr.d_probe[i], rr.ratio[i]});
  emit_csv(o, out, config, {"d", "ratio"}, rows);
  Series sr{"ratio", rr.d_probe, rr.ratio};
  write_svg_plot(o, out, "boundary rate ratio", "boundary distance d",
                 "u / psi(Theta^{(k+1)/k})", {sr});
  return 0;
}

int run_sweep(const Options& o, std::ostream& out) {
  const std::string config = resolved_config("sweep", o);
  out << "config: " << config << "\n";
  const auto prob = make_problem(o);
  solver::SweepKind kind;
  if (o.sweep_kind == "log-rate") kind = solver::SweepKind::LogRate22;
  else if (o.sweep_kind == "small-lambda")
    kind = solver::SweepKind::RateSmallLambda21;
  else if (o.sweep_kind == "divergence")
    kind = solver::SweepKind::DivergenceLargeLambda21;
  else
    throw ArgumentError("unknown sweep kind '" + o.sweep_kind +
                        "' (expected log-rate | small-lambda | divergence)");

  std::vector<double> lams;
  if (!o.lambdas.empty()) {
    for (const auto& part : split(o.lambdas, ',')) {
      char* end = nullptr;
      const double x = std::strtod(part.c_str(), &end);
      if (end == part.c_str() || *end != '\0')
        throw ArgumentError("--lambdas expects comma-separated numbers, got '" +
                            o.lambdas + "'");
      lams.push_back(x);
    }
  } else if (kind == solver::SweepKind::DivergenceLargeLambda21) {
    lams = {1.0, 2.0, 4.0, 8.0, 16.0};
  } else {
    for (int j = 1; j <= 3; ++j)
      lams.push_back(-o.k - 1 + std::pow(10.0, -j));
  }

  const auto sw =
      solver::parameter_sweep(prob, kind, lams, o.probe_r, make_solve_options(o));
  out << "probe radius = " << fmtg(sw.probe_r) << "\n";
  if (sw.bracket_lo != 0.0 || sw.bracket_hi != 0.0)
    out << "target bracket = [" << fmtg(sw.bracket_lo) << ", "
        << fmtg(sw.bracket_hi) << "]\n";
  std::vector<std::vector<double>> rows;
  for (const auto& row : sw.rows) {
    out << "  lambda = " << fmtg(row.lambda) << "  u(probe) = "
        << fmtg(row.u_probe) << "  ratio = " << fmtg(row.ratio) << "\n";
    rows.push_back({row.lambda, row.u_probe, row.ratio});
  }
  emit_csv(o, out, config, {"lambda", "u_probe", "ratio"}, rows);
  Series sr{"ratio", {}, {}};
  for (const auto& row : sw.rows) {
    sr.x.push_back(row.lambda);
    sr.y.push_back(row.ratio);
  }
  write_svg_plot(o, out, "parameter sweep", "lambda", "normalized value", {sr});
  return 0;
}

// ---------------------------------------------------------------------------
// Self test: fast invariant battery over every module.

int run_selftest(std::ostream& out) {
  int failures = 0;
  const auto check = [&](const std::string& name, const auto& body) {
    try {
      body();
      out << "[ok]   " << name << "\n";
    } catch (const std::exception& e) {
      ++failures;
      out << "[FAIL] " << name << ": " << e.what() << "\n";
    }
  };
  const auto expect = [](bool cond, const std::string& msg) {
    if (!cond) throw NumericsError(msg);
  };
  const auto close = [&](double a, double b, double tol,
                         const std::string& what) {
    const double err = std::fabs(a - b) / std::max({1.0, std::fabs(a),
                                                    std::fabs(b)});
    expect(err <= tol, what + ": " + fmtg(a) + " vs " + fmtg(b) +
                           " (rel err " + fmtg(err) + ")");
  };

  check("quadrature: int_0^1 cos = sin(1)", [&] {
    const auto q = num::integrate([](double x) { return std::cos(x); }, 0, 1);
    close(q.value, std::sin(1.0), 1e-12, "integral");
  });
  check("cumulative integral reproduces sin on a graded grid", [&] {
    std::vector<double> x, y;
    for (int i = 0; i <= 64; ++i) {
      const double xi = std::pow(static_cast<double>(i) / 64, 1.5);
      x.push_back(xi);
      y.push_back(std::cos(xi));
    }
    const auto c = num::cumulative_integral(x, y);
    for (std::size_t i = 0; i < x.size(); ++i)
      close(c[i], std::sin(x[i]), 1e-8, "cumulative at x=" + fmtg(x[i]));
  });
  check("sequence acceleration: 1 + 2^{-n} -> 1", [&] {
    std::vector<double> seq;
    for (int n = 0; n < 20; ++n) seq.push_back(1.0 + std::pow(2.0, -n));
    const auto lim = num::aitken_limit(seq);
    close(lim.value, 1.0, 1e-12, "limit");
  });
  check("psi closed form vs quadrature inversion (f = t^3, k = 1)", [&] {
    transforms::PsiTransform psi(nonlin::Nonlinearity::power(3.0, 1));
    for (int i = 0; i <= 40; ++i) {
      const double t = 1e-4 * std::pow(1e5, i / 40.0);
      close(psi(t), psi.numeric(t), 1e-8, "psi at t=" + fmtg(t));
    }
  });
  check("phi closed form vs quadrature inversion (exponential, k = 2)", [&] {
    transforms::PhiTransform phi(nonlin::Nonlinearity::exponential(2));
    for (int i = 0; i <= 40; ++i) {
      const double t = 1e-4 * std::pow(1e5, i / 40.0);
      close(phi(t), phi.numeric(t), 1e-8, "phi at t=" + fmtg(t));
    }
  });
  check("psi round trip: tail(psi(t)) = t (f = t^4, k = 2)", [&] {
    transforms::PsiTransform psi(nonlin::Nonlinearity::power(4.0, 2));
    for (int i = 0; i <= 20; ++i) {
      const double t = 1e-3 * std::pow(1e4, i / 20.0);
      close(psi.tail(psi(t)), t, 1e-8, "round trip at t=" + fmtg(t));
    }
  });
  check("radial composition matches dense-matrix S_k", [&] {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    std::uniform_real_distribution<double> rad(0.05, 0.95);
    for (int trial = 0; trial < 60; ++trial) {
      const int N = 2 + static_cast<int>(rng() % 3);
      const int k = 1 + static_cast<int>(rng() % N);
      geom::BallDomain dom(N, k, 1.0);
      geom::DefiningFunction dfn(dom);
      const double hp = uni(rng), hpp = uni(rng), r = rad(rng);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
      for (int i = 0; i < N; ++i) x[i] = uni(rng);
      if (x.norm() < 1e-3) x[0] = 1.0;
      x *= r / x.norm();
      const double a = geom::sk_of_v_composition(dom, dfn, hp, hpp, r);
      const double b = geom::sk_of_v_composition_matrix(dom, dfn, hp, hpp, x);
      close(a, b, 1e-10, "composition N=" + std::to_string(N) +
                            " k=" + std::to_string(k));
    }
  });
  check("radial S_k matches the eigenvalue elementary polynomial", [&] {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> uni(0.1, 3.0);
    for (int trial = 0; trial < 40; ++trial) {
      const int N = 2 + static_cast<int>(rng() % 3);
      const int k = 1 + static_cast<int>(rng() % N);
      geom::BallDomain dom(N, k, 1.0);
      const double up = uni(rng), upp = uni(rng), r = 0.05 + 0.3 * uni(rng);
      Eigen::VectorXd eigs(N);
      for (int i = 0; i + 1 < N; ++i) eigs[i] = up / r;
      eigs[N - 1] = upp;
      close(geom::radial_sk(dom, up, upp, r), symfun::elem_sym(eigs, k), 1e-12,
            "radial N=" + std::to_string(N) + " k=" + std::to_string(k));
    }
  });
  check("index constants: f = t^3 with k = 2 gives C = 3", [&] {
    const auto lc =
        nonlin::limit_constants(nonlin::Nonlinearity::power(3.0, 2));
    close(lc.C_inf, 3.0, 1e-12, "C_f^{+inf}");
    close(lc.C_zero.value(), 3.0, 1e-12, "C_f^{0}");
    close(lc.E_zero.value(), 4.0, 1e-12, "E_f^{0}");
  });
  check("index constants: exponential gives C = 1", [&] {
    const auto lc =
        nonlin::limit_constants(nonlin::Nonlinearity::exponential(1));
    close(lc.C_inf, 1.0, 1e-12, "C_f^{+inf}");
    close(lc.h0, 1.0, 1e-12, "h0");
  });
  check("index constants: t^3 ln^2(1+t) with k = 1", [&] {
    const auto lc =
        nonlin::limit_constants(nonlin::Nonlinearity::power_log(3.0, 2.0, 1));
    close(lc.C_inf, 1.5, 1e-12, "C_f^{+inf}");
    close(lc.C_zero.value(), 5.0 / 4.0, 1e-12, "C_f^{0}");
  });
  check("regular-variation index of t^3 at infinity", [&] {
    const auto est = karamata::rv_index_at_infinity(
        [](double t) { return t * t * t; });
    close(est.value, 3.0, 1e-8, "index");
  });
  check("Karamata integral ratio approaches 1 monotonically", [&] {
    const auto L = karamata::SlowlyVarying::log_power(1.0, 1.5);
    double prev = std::numeric_limits<double>::infinity();
    for (int dec = 1; dec <= 4; ++dec) {
      const double t = std::pow(10.0, -dec);
      const double err = std::fabs(
          karamata::asymptotic_integral_ratio(L, -2.5, karamata::Side::AtZero,
                                              t) - 1.0);
      expect(err < prev, "error not decreasing at t=" + fmtg(t));
      prev = err;
    }
  });
  check("power barrier pair verifies and is ordered (N=2, k=1, gamma=3)", [&] {
    geom::BallDomain dom(2, 1, 1.0);
    geom::DefiningFunction dfn(dom);
    barriers::BallProblem prob(dom, dfn, barriers::Weight::power(0.0),
                               nonlin::Nonlinearity::power(3.0, 1));
    const auto sub = barriers::build_barrier(prob, barriers::Theorem::T21,
                                             barriers::Role::Sub);
    const auto sup = barriers::build_barrier(prob, barriers::Theorem::T21,
                                             barriers::Role::Super);
    expect(barriers::verify_barrier(sub).ok(), "sub verification");
    expect(barriers::verify_barrier(sup).ok(), "super verification");
    expect(barriers::barrier_ordering_margin(sub, sup) >= -1e-9, "ordering");
  });
  check("log barrier pair verifies and is ordered (N=2, k=1, exponential)",
        [&] {
          geom::BallDomain dom(2, 1, 1.0);
          geom::DefiningFunction dfn(dom);
          barriers::BallProblem prob(dom, dfn, barriers::Weight::power(0.0),
                                     nonlin::Nonlinearity::exponential(1));
          const auto sub = barriers::build_barrier(prob, barriers::Theorem::T22,
                                                   barriers::Role::Sub);
          const auto sup = barriers::build_barrier(
              prob, barriers::Theorem::T22, barriers::Role::Super);
          expect(barriers::verify_barrier(sub).ok(), "sub verification");
          expect(barriers::verify_barrier(sup).ok(), "super verification");
          expect(barriers::barrier_ordering_margin(sub, sup) >= -1e-9,
                 "ordering");
        });
  check("boundary-rate constant tau9 = 1/4 (N=2, k=1, f=u^3, b=1)", [&] {
    geom::BallDomain dom(2, 1, 1.0);
    geom::DefiningFunction dfn(dom);
    barriers::BallProblem prob(dom, dfn, barriers::Weight::power(0.0),
                               nonlin::Nonlinearity::power(3.0, 1));
    const auto rc = barriers::rate_constants(prob);
    close(rc.tau9, 0.25, 1e-12, "tau9");
  });

  out << "selftest: " << (failures == 0 ? "all checks passed"
                                        : std::to_string(failures) +
                                              " check(s) failed")
      << "\n";
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Flag registration and dispatch.

void add_common_flags(CLI::App* s, Options& o) {
  s->add_option("--config", o.config_path,
                "flat key = value configuration file with [problem], "
                "[solver], [output] sections; explicit flags override it");
  s->add_option("--N", o.N, "space dimension");
  s->add_option("--k", o.k, "Hessian order (1 <= k <= N)");
  s->add_option("--R", o.R, "ball radius");
  s->add_option("--cv", o.cv, "defining function scale (default 1/(2R^2))");
  s->add_option("--family", o.family,
                "reaction family: power | exp | neg-power | power-log | "
                "file:<path>");
  s->add_option("--gamma", o.gamma, "power exponent of the reaction");
  s->add_option("--p", o.p, "log exponent for the power-log family");
  s->add_option("--lambda", o.lambda, "weight exponent");
  s->add_option("--mu", o.mu, "log exponent for the log-critical weight");
  s->add_option("--weight", o.weight,
                "weight form: power | log-critical | karamata | boundary-rate");
  s->add_option("--b", o.b, "weight shorthand: const:<c> or power:<lambda>");
  s->add_option("--b1", o.b1, "lower envelope constant");
  s->add_option("--b2", o.b2, "upper envelope constant");
  s->add_option("--Ltilde", o.Ltilde,
                "slowly varying factor: const:<c> | log:<c>,<sigma> | "
                "poweps:<c>,<eps>");
  s->add_option("--theta", o.theta,
                "boundary rate profile: const:<c> | power:<beta>[,<scale>]");
  s->add_option("--theorem", o.theorem,
                "barrier construction: auto | 21 | 22 | 23 | 24 | 25 | 26");
  s->add_option("--lambdas", o.lambdas, "sweep schedule, comma separated");
  s->add_option("--sweep-kind", o.sweep_kind,
                "log-rate | small-lambda | divergence");
  s->add_option("--probe-r", o.probe_r, "sweep probe radius");
  s->add_option("--grid", o.grid_points, "radial grid points");
  s->add_option("--levels", o.levels, "boundary ladder length");
  s->add_option("--level-tol", o.level_tol, "ladder convergence tolerance");
  s->add_option("--picard-tol", o.picard_tol, "inner solve tolerance");
  s->add_option("--max-sweeps", o.max_sweeps, "inner iteration budget");
  s->add_option("--theta0", o.theta0, "initial damping for picard_iterate");
  s->add_option("--delta-report", o.delta_report,
                "residuals reported for r <= R(1 - delta)");
  s->add_option("--substeps", o.rk_substeps, "integration steps per grid cell");
  s->add_option("--out", o.csv, "CSV output path ('-' for stdout)");
  s->add_option("--plot", o.svg, "SVG plot output path");
  s->add_option("--tmin", o.tmin, "transform sample range start");
  s->add_option("--tmax", o.tmax, "transform sample range end");
  s->add_option("--points", o.points, "transform sample count");
}

std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

}  // namespace

// ---------------------------------------------------------------------------
// Config file parsing.

ConfigFile ConfigFile::parse_text(const std::string& text,
                                  const std::string& name) {
  ConfigFile cf;
  cf.name = name;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto at = [&] { return name + ":" + std::to_string(lineno) + ": "; };
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError(at() + "unterminated section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "problem" && section != "solver" && section != "output")
        throw ConfigError(at() + "unknown section '[" + section +
                          "]' (expected [problem], [solver] or [output])");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(at() + "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(at() + "empty key");
    if (section.empty())
      throw ConfigError(at() + "key '" + key +
                        "' appears before any [section] header");
    const std::string qual = section + "." + key;
    cf.values[qual] = val;
    cf.lines[qual] = lineno;
  }
  return cf;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_text(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Entry points.

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options o;
  try {
    const std::string config_path = find_config_path(args);
    if (!config_path.empty())
      apply_config(o, ConfigFile::parse_file(config_path));

    CLI::App app{"boundary blow-up solutions of the k-Hessian equation "
                 "S_k(D^2 u) = b(x) f(u) on balls"};
    app.require_subcommand(1);
    auto* sc_indices = app.add_subcommand(
        "indices", "index-function limit constants of the reaction term");
    auto* sc_transform = app.add_subcommand(
        "transform", "inverse tail transforms psi and phi");
    auto* sc_barrier = app.add_subcommand(
        "barrier", "build and verify a sub/supersolution pair");
    auto* sc_solve =
        app.add_subcommand("solve", "radial blow-up solve on the ball");
    auto* sc_rate = app.add_subcommand(
        "rate", "boundary rate: measured ratio limit vs predicted bracket");
    auto* sc_sweep = app.add_subcommand(
        "sweep", "re-solve across a schedule of weight exponents");
    auto* sc_selftest =
        app.add_subcommand("selftest", "fast invariant battery, nonzero exit "
                                       "on any failure");
    for (CLI::App* s : {sc_indices, sc_transform, sc_barrier, sc_solve,
                        sc_rate, sc_sweep, sc_selftest})
      add_common_flags(s, o);

    std::vector<const char*> argv;
    argv.push_back("hessian_blowup");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 1;
    }

    apply_b_shorthand(o);
    if (sc_indices->parsed()) return run_indices(o, out);
    if (sc_transform->parsed()) return run_transform(o, out);
    if (sc_barrier->parsed()) return run_barrier(o, out);
    if (sc_solve->parsed()) return run_solve(o, out);
    if (sc_rate->parsed()) return run_rate(o, out);
    if (sc_sweep->parsed()) return run_sweep(o, out);
    if (sc_selftest->parsed()) return run_selftest(out);
    err << "error: no subcommand\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case Error::Kind::Config:
      case Error::Kind::Argument:
        return 1;
      case Error::Kind::Hypothesis:
        return 2;
      default:
        return 3;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace khess::cli
