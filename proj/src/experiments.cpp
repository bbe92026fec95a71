#include "twistlap/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "twistlap/common.hpp"
#include "twistlap/counterexample.hpp"
#include "twistlap/hermite_basis.hpp"
#include "twistlap/hermite_op.hpp"
#include "twistlap/io.hpp"
#include "twistlap/kernels.hpp"
#include "twistlap/laguerre.hpp"
#include "twistlap/quadrature.hpp"
#include "twistlap/riesz.hpp"
#include "twistlap/spectral.hpp"

namespace twistlap::experiments {

using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

// short form for human-readable details
std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "ls_slope: need two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

Check check(const std::string& crit, const std::string& name, bool pass, const std::string& detail) {
  return Check{crit, name, pass, detail};
}

basis::ComplexPoint pt1(double x, double y) { return {{x}, {y}}; }

// ------------------------------------------------------------------ eigen-checks

double boxed_norm(const Field& f, double half) {
  double s = 0.0;
  std::vector<double> c(f.grid.axes());
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    f.grid.coords(i, c.data());
    bool in = true;
    for (double v : c) in = in && std::abs(v) <= half;
    if (in) s += std::norm(f.v[i]);
  }
  return std::sqrt(s * f.grid.cell());
}

double eigen_residual(int a, int b, double h, double half, double inner) {
  const Grid g = Grid::box(1, half, h);
  const basis::EigenfunctionSpec spec{{a}, {b}};
  const Field f = basis::sample_special_hermite(spec, g);
  const Field Lf = basis::apply_twisted_laplacian(f);
  Field r(Lf.grid), fi(Lf.grid);
  double c[2];
  for (std::size_t i = 0; i < Lf.v.size(); ++i) {
    Lf.grid.coords(i, c);
    fi.v[i] = basis::special_hermite(spec, pt1(c[0], c[1]));
    r.v[i] = Lf.v[i] - double(spec.eigenvalue()) * fi.v[i];
  }
  return boxed_norm(r, inner) / boxed_norm(fi, inner);
}

Report eigen_checks(const Config& c, Sink& out) {
  if (c.integer("d") != 1) throw ConfigError("eigen-checks: only d = 1 is supported");
  const int amax = c.integer("amax"), bmax = c.integer("bmax");
  require(amax >= 0 && bmax >= 0, "eigen-checks: amax, bmax >= 0");
  Report rep;

  const Grid g = Grid::box(1, c.real("grid_half_width"), c.real("grid_h"));
  std::vector<Field> fs;
  std::vector<std::pair<int, int>> idx;
  for (int a = 0; a <= amax; ++a)
    for (int b = 0; b <= bmax; ++b) {
      fs.push_back(basis::sample_special_hermite({{a}, {b}}, g));
      idx.push_back({a, b});
    }
  io::Csv orth({"a1", "b1", "a2", "b2", "inner_re", "inner_im", "error"});
  double worst = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i; j < fs.size(); ++j) {
      const cplx ip = inner(fs[i], fs[j]);
      const double e = std::abs(ip - (i == j ? 1.0 : 0.0));
      worst = std::max(worst, e);
      orth.row({io::num((long long)idx[i].first), io::num((long long)idx[i].second), io::num((long long)idx[j].first),
                io::num((long long)idx[j].second), io::num(ip.real()), io::num(ip.imag()), io::num(e)});
    }
  out.table("orthonormality", orth.str());
  const double orth_tol = c.real("orth_tol");
  rep.checks.push_back(check("AC1", "orthonormality", worst <= orth_tol,
                             "max |<Phi, Phi'> - delta| = " + g6(worst) + " (limit " + g6(orth_tol) + ")"));
  rep.summary["orthonormality_error"] = worst;

  io::Csv cf({"a", "b", "x", "y", "closed_re", "closed_im", "oracle_re", "oracle_im", "error"});
  const int np = c.integer("oracle_points");
  const double span = c.real("oracle_span");
  require(np >= 2, "eigen-checks: oracle_points >= 2");
  double worst_cf = 0.0;
  for (int a = 0; a <= amax; ++a)
    for (int b = 0; b <= bmax; ++b)
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j) {
          const double x = -span + 2.0 * span * i / (np - 1), y = -span + 2.0 * span * j / (np - 1);
          const auto p = pt1(x, y);
          const cplx u = basis::special_hermite({{a}, {b}}, p);
          const cplx v = basis::special_hermite_integral_oracle({{a}, {b}}, p);
          const double e = std::abs(u - v);
          worst_cf = std::max(worst_cf, e);
          cf.row({io::num((long long)a), io::num((long long)b), io::num(x), io::num(y), io::num(u.real()),
                  io::num(u.imag()), io::num(v.real()), io::num(v.imag()), io::num(e)});
        }
  out.table("closed_form", cf.str());
  const double cf_tol = c.real("closed_form_tol");
  rep.checks.push_back(check("AC1", "closed_form", worst_cf <= cf_tol,
                             "max |closed - integral| = " + g6(worst_cf) + " (limit " + g6(cf_tol) + ")"));
  rep.summary["closed_form_error"] = worst_cf;

  io::Csv fd({"a", "b", "h", "residual", "order"});
  const auto hs = c.reals("fd_h");
  require(hs.size() >= 2, "eigen-checks: fd_h needs two spacings");
  double min_order = std::numeric_limits<double>::infinity();
  for (auto [a, b] : c.pairs("fd_pairs")) {
    double prev = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const double r = eigen_residual(int(a), int(b), hs[i], c.real("fd_half_width"), c.real("fd_inner"));
      double order = std::numeric_limits<double>::quiet_NaN();
      if (i > 0) {
        order = std::log(prev / r) / std::log(hs[i - 1] / hs[i]);
        min_order = std::min(min_order, order);
      }
      fd.row({io::num(a), io::num(b), io::num(hs[i]), io::num(r), i > 0 ? io::num(order) : std::string()});
      prev = r;
    }
  }
  out.table("finite_difference", fd.str());
  const double om = c.real("min_order");
  rep.checks.push_back(check("AC1", "fd_order", min_order >= om,
                             "min observed order " + g6(min_order) + " (limit " + g6(om) + ")"));
  rep.summary["fd_min_order"] = min_order;
  return rep;
}

// ------------------------------------------------------------------ laguerre-bounds

Report laguerre_bounds(const Config& c, Sink& out) {
  Report rep;
  laguerre::BoundSweep sw;
  sw.ks = c.integers("ks");
  sw.as = c.reals("as");
  sw.points_per_regime = c.integer("points_per_regime");
  sw.gamma = c.real("gamma");
  sw.growth_from_k = c.integer("growth_from_k");
  sw.growth_slack = c.real("growth_slack");
  const auto b = laguerre::verify_laguerre_bounds(sw);
  io::Csv t({"regime", "k", "a", "fitted_C", "n_samples"});
  for (const auto& s : b.samples)
    t.row({std::string(laguerre::regime_name(s.regime)), io::num((long long)s.k), io::num(s.a), io::num(s.fitted_C),
           io::num((long long)s.n_samples)});
  out.table("regime_constants", t.str());
  std::string growing;
  for (auto r : b.growing) growing += std::string(growing.empty() ? "" : ",") + std::string(laguerre::regime_name(r));
  const bool finite = std::isfinite(b.max_ratio);
  rep.checks.push_back(check("AC2", "regime_constants", finite && b.growing.empty(),
                             "max fitted C " + g6(b.max_ratio) + ", growing regimes: " +
                                 (growing.empty() ? std::string("none") : growing)));
  rep.summary["max_fitted_C"] = b.max_ratio;
  rep.summary["gamma"] = sw.gamma;

  io::Csv as({"k", "a", "envelope_ratio"});
  double worst = 0.0;
  const int n = c.integer("envelope_points");
  for (int k : c.integers("asymptotic_ks"))
    for (double a : sw.as) {
      const double r = laguerre::asymptotic_envelope_ratio({k, a}, n);
      worst = std::max(worst, r);
      as.row({io::num((long long)k), io::num(a), io::num(r)});
    }
  out.table("asymptotic", as.str());
  const double lim = c.real("envelope_constant");
  rep.checks.push_back(check("AC2", "asymptotic_envelope", worst <= lim,
                             "max |main - exact| / envelope " + g6(worst) + " (limit " + g6(lim) + ")"));
  rep.summary["envelope_ratio_max"] = worst;
  return rep;
}

// ------------------------------------------------------------------ trace-sweep

Report trace_sweep(const Config& c, Sink& out) {
  Report rep;
  const int d = c.integer("d");
  const int lo = c.integer("mu_min"), hi = c.integer("mu_max"), step = c.integer("mu_step");
  require(step > 0 && lo <= hi, "trace-sweep: mu_min <= mu_max, mu_step > 0");
  spectral::RatioOptions opt;
  opt.method = spectral::parse_method(c.str("method"));
  opt.h = c.real("h");
  opt.seed = c.seed();
  const auto Ms = c.reals("M");
  std::vector<spectral::OperatorRatioReport> rows, band;
  double nmin = std::numeric_limits<double>::infinity(), nmax = 0.0, rmax = 0.0;
  for (int mu = lo; mu <= hi; mu += step)
    for (double M : Ms) {
      rows.push_back(spectral::trace_ratio(d, mu, M, opt));
      nmin = std::min(nmin, rows.back().normalized_ratio);
      nmax = std::max(nmax, rows.back().normalized_ratio);
      rmax = std::max(rmax, rows.back().ratio);
    }
  out.table("trace", spectral::ratio_csv(rows));
  const double spread = nmax / nmin, lim = c.real("max_spread");
  rep.checks.push_back(check("AC3", "normalized_ratio_spread", spread <= lim,
                             "max/min normalized ratio " + g6(spread) + " (limit " + g6(lim) + ")"));
  rep.checks.push_back(check("AC3", "trivial_bound", rmax <= 1.0 + 1e-9, "max ratio " + g6(rmax) + " (limit 1)"));
  rep.summary["normalized_min"] = nmin;
  rep.summary["normalized_max"] = nmax;

  if (c.flag("band")) {
    auto one = [](double) { return 1.0; };
    double bmax = 0.0;
    const int bstep = c.integer("band_mu_step");
    require(bstep > 0, "trace-sweep: band_mu_step > 0");
    for (int mu = lo; mu <= hi; mu += bstep)
      for (double M : Ms) {
        band.push_back(spectral::band_window_ratio(one, d, mu, 0.5 * mu, M, opt));
        bmax = std::max(bmax, band.back().normalized_ratio);
      }
    out.table("band", spectral::ratio_csv(band));
    rep.checks.push_back(check("AC3", "band_variant", bmax <= lim * nmax,
                               "band max normalized " + g6(bmax) + " vs trace max " + g6(nmax) + " (factor limit " +
                                   g6(lim) + ")"));
    rep.summary["band_normalized_max"] = bmax;
  }
  return rep;
}

// ------------------------------------------------------------------ kernel-routes

Report kernel_routes(const Config& c, Sink& out) {
  Report rep;
  const int d = c.integer("d");
  if (d != 1) throw ConfigError("kernel-routes: only d = 1 is supported");
  const kernels::Eta eta;
  kernels::OscOptions opt;
  opt.order = c.integer("order");
  const int pairs = c.integer("pairs");
  require(pairs > 0, "kernel-routes: pairs > 0");
  std::mt19937_64 rng(c.seed());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  io::Csv t({"mu", "R", "pair", "w_x", "w_y", "z_x", "z_y", "spectral_re", "spectral_im", "oscillatory_re",
             "oscillatory_im", "rel_error"});
  io::Csv s({"mu", "R", "nodes", "diagonal_abs", "worst_rel_error"});
  double worst = 0.0;
  for (double mu : c.reals("mu"))
    for (double R : c.reals("R")) {
      const double rad = 1.5 * std::sqrt(mu) + 1.0;
      // |w - z| <= 1.7 sqrt(2) rad for the sampled pairs
      const kernels::OscillatoryMultiplier osc(eta, d, mu, R, 2.5 * rad, opt);
      double w_case = 0.0;
      for (int i = 0; i < pairs; ++i) {
        const double wx = rad * u(rng), wy = 0.7 * rad * u(rng), zx = 0.7 * rad * u(rng), zy = rad * u(rng);
        const auto w = pt1(wx, wy), z = pt1(zx, zy);
        const cplx a = kernels::multiplier_kernel_spectral(eta, d, mu, R, w, z);
        const cplx b = osc(w, z);
        const double den = std::max(std::abs(a), 1e-3 * std::abs(osc.diagonal()));
        const double e = den > 0.0 ? std::abs(a - b) / den : std::abs(a - b);
        w_case = std::max(w_case, e);
        t.row({io::num(mu), io::num(R), io::num((long long)i), io::num(wx), io::num(wy), io::num(zx), io::num(zy),
               io::num(a.real()), io::num(a.imag()), io::num(b.real()), io::num(b.imag()), io::num(e)});
      }
      s.row({io::num(mu), io::num(R), io::num((long long)osc.nodes()), io::num(std::abs(osc.diagonal())),
             io::num(w_case)});
      worst = std::max(worst, w_case);
    }
  out.table("pairs", t.str());
  out.table("cases", s.str());
  const double tol = c.real("tol");
  rep.checks.push_back(check("AC4", "route_agreement", worst <= tol,
                             "worst relative error " + g6(worst) + " (limit " + g6(tol) + ")"));
  rep.summary["worst_rel_error"] = worst;
  return rep;
}

// ------------------------------------------------------------------ decay-report

Report decay_report(const Config& c, Sink& out) {
  Report rep;
  const kernels::Eta eta;
  const int d = c.integer("d");
  const double N = c.real("min_N");
  const int nr = c.integer("radii");
  io::Csv t({"operator", "case", "d", "mu", "R", "fitted_N", "fitted_C", "n_samples", "pass"});
  std::map<std::string, int> good, seen;
  ordered_json fits = ordered_json::array();
  auto add = [&](const kernels::DecayReport& r) {
    t.row({r.op, r.case_name, io::num((long long)r.d), io::num(r.mu), io::num(r.R), io::num(r.fitted_N),
           io::num(r.fitted_C), io::num((long long)r.n_samples), r.pass ? "1" : "0"});
    const std::string key = r.op + ":" + r.case_name;
    ++seen[key];
    if (r.fitted_N >= N) ++good[key];
    fits.push_back(r.to_json());
  };
  for (const std::string& op : split(c.str("operators"), ',')) {
    if (op == "twisted") {
      for (auto [mu, R] : c.pairs("pairs"))
        add(kernels::verify_multiplier_decay(eta, d, mu, R, kernels::default_decay_radii(mu, R, nr), N));
    } else if (op == "hermite") {
      for (auto [mu, R] : c.pairs("pairs"))
        add(hermite::verify_multiplier_decay(eta, d, mu, R, hermite::default_decay_radii(mu, R, nr), N));
    } else {
      throw ConfigError("decay-report: unknown operator '" + op + "' (twisted, hermite)");
    }
  }
  out.table("fits", t.str());
  rep.summary["fits"] = fits;
  const int need = c.integer("pairs_per_case");
  for (const auto& [key, n] : seen) {
    const int ok = good.count(key) ? good[key] : 0;
    rep.checks.push_back(check("AC5", "decay_" + key, ok >= need,
                               std::to_string(ok) + " of " + std::to_string(n) + " pairs with N >= " + g6(N) +
                                   " (need " + std::to_string(need) + ")"));
  }
  return rep;
}

// ------------------------------------------------------------------ lower-set

Report lower_set(const Config& c, Sink& out) {
  Report rep;
  const int d = c.integer("d");
  const double f = c.real("threshold_factor");
  io::Csv t({"mu", "threshold_factor", "measure", "annulus_measure", "upper_max", "samples"});
  double mmin = std::numeric_limits<double>::infinity(), mmax = 0.0, umin = mmin, umax = 0.0;
  for (int mu : c.integers("mu")) {
    const auto r = counterexample::lower_set_measure(d, mu, f, c.real("spacing_factor"));
    t.row({io::num((long long)mu), io::num(f), io::num(r.measure), io::num(r.annulus_measure), io::num(r.upper_max),
           io::num((long long)r.samples)});
    mmin = std::min(mmin, r.measure);
    mmax = std::max(mmax, r.measure);
    umin = std::min(umin, r.upper_max);
    umax = std::max(umax, r.upper_max);
  }
  out.table("lower_set", t.str());
  const double lim = c.real("max_spread");
  const bool lower_ok = mmin > 0.0 && mmax / mmin <= lim;
  rep.checks.push_back(check("AC6", "lower_set_measure", lower_ok,
                             "measure min " + g6(mmin) + " max " + g6(mmax) + " (need min > 0, max/min <= " + g6(lim) +
                                 ")"));
  rep.checks.push_back(check("AC6", "upper_envelope", umin > 0.0 && umax / umin <= lim,
                             "max |P| mu^{-(2d-3)/4} in " + g6(umin) + ".." + g6(umax) + " (max/min <= " + g6(lim) +
                                 ")"));
  rep.summary["measure_min"] = mmin;
  rep.summary["measure_max"] = mmax;
  rep.summary["upper_min"] = umin;
  rep.summary["upper_max"] = umax;
  return rep;
}

// ------------------------------------------------------------------ divergence

counterexample::DivergenceOptions divergence_options(const Config& c) {
  counterexample::DivergenceOptions o;
  o.half_width = c.integer("half_width");
  o.spacing_factor = c.real("spacing_factor");
  o.t_max_factor = c.real("t_max_factor");
  return o;
}

Report divergence(const Config& c, Sink& out) {
  Report rep;
  const int d = c.integer("d"), K = c.integer("K"), mu0 = c.integer("mu0");
  const double p = c.real("p"), beta = c.real("beta"), delta = c.real("delta");
  const auto seq = counterexample::CounterexampleSeq::geometric(d, mu0, K, p, beta, delta);
  seq.validate();
  const auto opt = divergence_options(c);
  const auto low = counterexample::divergence_experiment(seq, opt);
  out.table("divergence", counterexample::divergence_csv(low));
  const double c0 = c.real("c0_fraction") * low.annulus_measure;
  rep.summary["gamma"] = low.gamma;
  rep.summary["annulus_measure"] = low.annulus_measure;
  rep.summary["c0"] = c0;
  rep.summary["maximal_min"] = low.maximal_min;
  rep.summary["maximal_max"] = low.maximal_max;

  double pmin = std::numeric_limits<double>::infinity();
  bool growing = true, dominance = true;
  for (std::size_t i = 0; i < low.rows.size(); ++i) {
    pmin = std::min(pmin, low.rows[i].measure_proxy);
    if (i > 0 && !(low.rows[i].threshold > low.rows[i - 1].threshold)) growing = false;
    if (low.rows[i].k >= 2 && !low.rows[i].dominance_ok) dominance = false;
  }
  rep.checks.push_back(check("AC7", "measure_stays", pmin >= c0,
                             "delta " + g6(delta) + ": min measure proxy " + g6(pmin) + " (c0 " + g6(c0) + ")"));
  rep.checks.push_back(check("AC7", "threshold_growth", growing,
                             "thresholds " + g6(low.rows.front().threshold) + " .. " + g6(low.rows.back().threshold) +
                                 (growing ? " increasing" : " not increasing")));
  rep.checks.push_back(check("AC7", "dominance", dominance, dominance ? "cross terms below main term for k >= 2"
                                                                       : "cross terms exceed main term"));

  const std::string hi = c.str("delta_high");
  if (hi != "none") {
    const double dh = parse_real("delta_high", hi);
    auto sh = seq;
    sh.delta = dh;
    auto oh = opt;
    oh.threshold_delta = delta;  // same fixed levels
    const auto high = counterexample::divergence_experiment(sh, oh);
    out.table("divergence_high", counterexample::divergence_csv(high));
    const double last = high.rows.back().measure_proxy;
    rep.checks.push_back(check("AC7", "high_delta_decay", last < c0 / 10.0,
                               "delta " + g6(dh) + ": measure proxy at k = " + std::to_string(K) + " is " + g6(last) +
                                   " (limit c0/10 = " + g6(c0 / 10.0) + ")"));
    rep.summary["high_last_measure"] = last;
  }
  return rep;
}

// ------------------------------------------------------------------ square-function-trend

Report square_function_trend(const Config& c, Sink& out) {
  Report rep;
  const int members = c.integer("members");
  require(members > 0, "square-function-trend: members > 0");
  const Grid g = Grid::box(1, c.real("grid_half_width"), c.real("grid_h"));
  std::mt19937_64 rng(c.seed());
  std::vector<riesz::SpectralSamples> ens;
  for (int e = 0; e < members; ++e)
    ens.push_back(riesz::from_coefficients(spectral::CoefficientField::random(c.integer("amax"), c.integer("bmax"), rng), g));
  const auto ks = c.integers("k");
  require(ks.size() >= 2, "square-function-trend: need two k values");
  io::Csv t({"alpha", "k", "ratio", "log2_ratio", "argmax"});
  io::Csv m({"alpha", "k", "member", "ratio"});
  const double base = c.real("slope_limit"), slack = c.real("slack");
  for (double alpha : c.reals("alpha")) {
    const double rho = riesz::default_rho(alpha, c.real("eps"));
    std::vector<double> xs, ys;
    for (int k : ks) {
      double best = 0.0;
      int arg = -1;
      for (int e = 0; e < members; ++e) {
        const auto& f = ens[e];
        const auto r = riesz::square_function_norm(k, rho, f, riesz::Weight{alpha}, 2.0 * std::sqrt(f.mu.back()) + 1.0,
                                                    c.integer("per_octave"));
        m.row({io::num(alpha), io::num((long long)k), io::num((long long)e), io::num(r.ratio)});
        if (r.ratio > best) {
          best = r.ratio;
          arg = e;
        }
      }
      xs.push_back(k);
      ys.push_back(std::log2(best));
      t.row({io::num(alpha), io::num((long long)k), io::num(best), io::num(ys.back()), io::num((long long)arg)});
    }
    const double slope = ls_slope(xs, ys);
    rep.summary["slope_alpha_" + g6(alpha)] = slope;
    if (alpha <= 1.0) {
      rep.checks.push_back(check("AC8", "slope_alpha_" + g6(alpha), slope <= base,
                                 "log2 ratio vs k slope " + g6(slope) + " (limit <= " + g6(base) + ")"));
    } else {
      const double lim = base + (alpha - 1.0) / 2.0 - slack;
      rep.checks.push_back(check("AC8", "slope_alpha_" + g6(alpha), slope >= lim,
                                 "log2 ratio vs k slope " + g6(slope) + " (limit >= " + g6(lim) + ")"));
    }
  }
  out.table("trend", t.str());
  out.table("members", m.str());
  return rep;
}

// ------------------------------------------------------------------ riesz-maximal

riesz::SpectralSamples gk_radial(int d, int mu, double rmax_factor, double ppw, int order, int half_width) {
  const double rmax = rmax_factor * std::sqrt(double(mu));
  const double h = 2.0 * kPi / std::sqrt(double(mu)) * order / ppw;
  std::vector<double> br;
  for (double x = 0.0; x < rmax; x += h) br.push_back(x);
  for (double p = 1.0; p < rmax; p *= 2.0) br.push_back(p);  // jumps of the dyadic weight
  br.push_back(rmax);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end(), [](double a, double b) { return b - a < 1e-9; }), br.end());
  const quad::Rule q = quad::composite(br, order);
  std::vector<double> ws(q.w);
  for (std::size_t i = 0; i < ws.size(); ++i) ws[i] *= counterexample::radial_density(d, q.x[i]);
  return counterexample::gk_samples(d, mu, q.x, ws, half_width);
}

Report riesz_maximal(const Config& c, Sink& out) {
  Report rep;
  const int d = c.integer("d");
  const double alpha = c.real("alpha");
  const auto ks = c.integers("k");
  require(ks.size() >= 2, "riesz-maximal: need two k values");
  const auto deltas = c.reals("delta");
  const int mu0 = c.integer("mu0");
  std::vector<riesz::RatioRow> rows;
  std::map<double, std::vector<double>> logs;
  for (int k : ks) {
    require(k >= 1 && k <= 8, "riesz-maximal: 1 <= k <= 8");
    const int mu = counterexample::CounterexampleSeq::geometric(d, mu0, k, riesz::kInf, 0.0, 0.0).mu.back();
    const auto f = gk_radial(d, mu, c.real("rmax_factor"), c.real("points_per_wavelength"), c.integer("order"),
                             c.integer("half_width"));
    for (double delta : deltas) {
      const auto r = riesz::weighted_maximal_ratio(delta, riesz::Weight{alpha}, {f});
      rows.push_back({delta, alpha, double(k), r.ratio});
      logs[delta].push_back(std::log2(r.ratio));
    }
  }
  out.table("ratios", riesz::ratio_csv(rows));
  const double crit = (alpha - 1.0) / 4.0, bounded = c.real("bounded_slope");
  std::vector<double> xs(ks.begin(), ks.end());
  for (double delta : deltas) {
    const double slope = ls_slope(xs, logs[delta]);
    rep.summary["slope_delta_" + g6(delta)] = slope;
    if (delta < crit)
      rep.checks.push_back(check("AC9", "growth_delta_" + g6(delta), slope > 0.0,
                                 "log2 ratio vs k slope " + g6(slope) + " (need > 0, delta below " + g6(crit) + ")"));
    else
      rep.checks.push_back(check("AC9", "bounded_delta_" + g6(delta), slope <= bounded,
                                 "log2 ratio vs k slope " + g6(slope) + " (limit <= " + g6(bounded) + ")"));
  }
  return rep;
}

// ------------------------------------------------------------------ critical-exponents

Report critical_exponents(const Config& c, Sink& out) {
  Report rep;
  const double tol = c.real("tol");
  io::Csv t({"identity", "p", "n", "lhs", "rhs", "error"});
  double w1 = 0, w2 = 0, w3 = 0, w4 = 0;
  for (double n : {1.0, 2.0, 3.0, 4.0, 6.0, 8.0}) {
    const double v = riesz::critical_delta(2.0, n);
    w1 = std::max(w1, std::abs(v));
    t.row({"delta(2,n)=0", "2", io::num(n), io::num(v), "0", io::num(std::abs(v))});
  }
  for (int d = 1; d <= 4; ++d) {
    const double l = riesz::critical_delta(riesz::kInf, 2 * d) / 2, r = (2 * d - 1) / 4.0;
    w2 = std::max(w2, std::abs(l - r));
    t.row({"delta(inf,2d)/2=(2d-1)/4", "inf", io::num((long long)(2 * d)), io::num(l), io::num(r), io::num(std::abs(l - r))});
  }
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0, 6.0, riesz::kInf})
    for (double n : {1.0, 2.0, 4.0, 6.0}) {
      const double l = riesz::critical_gamma(p, n, 0.0), r = riesz::critical_delta(p, n);
      w3 = std::max(w3, std::abs(l - r));
      t.row({"gamma(p,n,0)=delta(p,n)", std::isinf(p) ? "inf" : io::num(p), io::num(n), io::num(l), io::num(r),
             io::num(std::abs(l - r))});
    }
  // phi_0(s) + sum_k 2^{-rho k} phi_k(s) = s^rho
  for (double alpha : {0.0, 1.0, 2.0, 3.0}) {
    const double rho = riesz::default_rho(alpha);
    for (double s : {0.95, 0.6, 0.2, 0.051, 0.003, 1e-4}) {
      double acc = riesz::dyadic_symbol(0, rho, s);
      for (int k = 1; k <= 60; ++k) acc += std::exp2(-rho * k) * riesz::dyadic_symbol(k, rho, s);
      const double r = std::pow(s, rho), e = std::abs(acc - r) / r;
      w4 = std::max(w4, e);
      t.row({"dyadic_reconstruction", "", io::num(alpha), io::num(acc), io::num(r), io::num(e)});
    }
  }
  out.table("identities", t.str());
  rep.checks.push_back(check("AC10", "delta_at_2", w1 == 0.0, "max |delta(2,n)| " + g6(w1)));
  rep.checks.push_back(check("AC10", "half_critical_index", w2 <= tol, "max error " + g6(w2)));
  rep.checks.push_back(check("AC10", "gamma_beta_0", w3 <= tol, "max error " + g6(w3)));
  rep.checks.push_back(check("AC10", "dyadic_reconstruction", w4 <= tol, "max relative error " + g6(w4)));
  return rep;
}

// ------------------------------------------------------------------ Hermite experiments

Report hermite_routes(const Config& c, Sink& out) {
  Report rep;
  const int d = c.integer("d");
  if (d != 1) throw ConfigError("hermite-routes: only d = 1 is supported");
  const kernels::Eta eta;
  kernels::OscOptions opt;
  opt.check = c.flag("refine_check");
  const int pairs = c.integer("pairs");
  std::mt19937_64 rng(c.seed());
  io::Csv t({"mu", "R", "pair", "x", "y", "spectral_re", "spectral_im", "oscillatory_re", "oscillatory_im", "error"});
  io::Csv s({"mu", "R", "nodes", "worst_error"});
  double worst = 0.0;
  for (double mu : c.reals("mu"))
    for (double R : c.reals("R")) {
      const double rad = 1.5 * std::sqrt(mu) + 1.0;
      const hermite::OscillatoryMultiplier K(eta, d, mu, R, rad, opt);
      std::uniform_real_distribution<double> U(-rad, rad);
      std::vector<cplx> a, b;
      std::vector<double> xs, ys;
      double top = 0.0;
      for (int i = 0; i < pairs; ++i) {
        xs.push_back(U(rng));
        ys.push_back(U(rng));
        a.push_back(hermite::multiplier_kernel_spectral(eta, mu, R, {xs.back()}, {ys.back()}));
        b.push_back(K({xs.back()}, {ys.back()}));
        top = std::max(top, std::abs(a.back()));
      }
      double w_case = 0.0;
      for (int i = 0; i < pairs; ++i) {
        const double den = std::max(std::abs(a[i]), 1e-3 * top);
        const double e = den > 0.0 ? std::abs(a[i] - b[i]) / den : std::abs(a[i] - b[i]);
        w_case = std::max(w_case, e);
        t.row({io::num(mu), io::num(R), io::num((long long)i), io::num(xs[i]), io::num(ys[i]), io::num(a[i].real()),
               io::num(a[i].imag()), io::num(b[i].real()), io::num(b[i].imag()), io::num(e)});
      }
      s.row({io::num(mu), io::num(R), io::num((long long)K.nodes()), io::num(w_case)});
      worst = std::max(worst, w_case);
    }
  out.table("pairs", t.str());
  out.table("cases", s.str());
  const double tol = c.real("tol");
  rep.checks.push_back(check("", "hermite_route_agreement", worst <= tol,
                             "worst error " + g6(worst) + " relative to max(|K|, 1e-3 max|K|) (limit " + g6(tol) + ")"));
  rep.summary["worst_error"] = worst;
  return rep;
}

Report hermite_origin(const Config& c, Sink& out) {
  Report rep;
  io::Csv t({"d", "mu", "constant", "spread", "norm_sum", "norm_quadrature", "scaled_norm"});
  io::Csv g({"d", "mu", "r", "quadrature_re", "quadrature_im", "spectral_re", "spectral_im"});
  double worst_c = 0.0, worst_g = 0.0;
  for (int d : c.integers("d")) {
    std::vector<double> scaled;
    for (int mu0 : c.integers("mu0")) {
      const int mu = mu0 + d;
      const auto oc = hermite::origin_constant(d, mu);
      const auto nn = hermite::projection_origin_norm(d, mu);
      scaled.push_back(nn.from_sum * std::pow(double(mu), -(d - 2) / 4.0));
      t.row({io::num((long long)d), io::num((long long)mu), io::num(oc.constant), io::num(oc.spread),
             io::num(nn.from_sum), io::num(nn.from_quadrature), io::num(scaled.back())});
      worst_c = std::max(worst_c, std::abs(std::abs(oc.constant) - std::pow(kPi, -0.5 * d)));
      double scale = 0.0, err = 0.0;
      for (double u : {0.0, 0.2, 0.45, 0.6, 0.8, 1.0, 1.3}) {
        const double r = u * std::sqrt(double(mu));
        const cplx a = hermite::gk_quadrature(d, mu, r), b = hermite::gk_spectral(d, mu, r);
        g.row({io::num((long long)d), io::num((long long)mu), io::num(r), io::num(a.real()), io::num(a.imag()),
               io::num(b.real()), io::num(b.imag())});
        scale = std::max(scale, std::abs(a));
        err = std::max(err, std::abs(a - b));
      }
      worst_g = std::max(worst_g, err / scale);
    }
    const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
    rep.checks.push_back(check("", "origin_norm_scaling_d" + std::to_string(d), *hi / *lo <= 2.0,
                               "mu^{-(d-2)/4} ||Pt(0,.)|| in " + g6(*lo) + ".." + g6(*hi)));
  }
  out.table("origin", t.str());
  out.table("gk_routes", g.str());
  rep.checks.push_back(check("", "origin_constant", worst_c <= 1e-9, "max ||F| - pi^{-d/2}| " + g6(worst_c)));
  rep.checks.push_back(check("", "gk_routes", worst_g <= 1e-6, "max route gap / scale " + g6(worst_g)));
  return rep;
}

Report hermite_phase(const Config& c, Sink& out) {
  Report rep;
  io::Csv t({"d", "n_tilde", "constant", "samples", "applicable", "failures", "worst_ratio"});
  const double mu = c.real("mu");
  for (int d : c.integers("d"))
    for (int nt : {0, 1})
      for (double k : c.reals("constant")) {
        const auto s = hermite::phase_lower_bound_sweep(d, mu, nt, c.integer("samples"), c.seed(), k);
        t.row({io::num((long long)d), io::num((long long)nt), io::num(k), io::num((long long)s.samples),
               io::num((long long)s.applicable), io::num((long long)s.failures), io::num(s.worst_ratio)});
        rep.checks.push_back(check("", "phase_d" + std::to_string(d) + "_n" + std::to_string(nt) + "_c" + g6(k),
                                   s.failures == 0,
                                   std::to_string(s.failures) + " of " + std::to_string(s.applicable) +
                                       " applicable samples below the bound, worst ratio " + g6(s.worst_ratio)));
      }
  out.table("sweep", t.str());
  return rep;
}

Report hermite_divergence(const Config& c, Sink& out) {
  Report rep;
  const int d = c.integer("d");
  const auto seq = hermite::geometric_sequence(d, c.integer("mu0"), c.integer("K"), c.real("p"), c.real("beta"),
                                               c.real("delta"));
  hermite::validate_sequence(seq);
  const auto tab = hermite::divergence_experiment(seq, divergence_options(c));
  out.table("divergence", counterexample::divergence_csv(tab));
  bool dom = true;
  for (const auto& r : tab.rows)
    if (r.k >= 2 && !r.dominance_ok) dom = false;
  rep.checks.push_back(check("", "dominance", dom, dom ? "cross terms below main term for k >= 2" : "cross terms exceed"));
  rep.summary["gamma"] = tab.gamma;
  rep.summary["maximal_min"] = tab.maximal_min;
  rep.summary["maximal_max"] = tab.maximal_max;
  return rep;
}

// ------------------------------------------------------------------ determinism

class MemorySink : public Sink {
 public:
  void table(const std::string& name, const std::string& csv) override { tables.push_back({name, csv}); }
  std::vector<std::pair<std::string, std::string>> tables;
};

std::string csv_file(const Config& c, const std::string& csv) {
  return "# experiment=" + c.experiment() + " seed=" + std::to_string(c.seed()) + "\n" + csv;
}

std::string report_json(const Experiment& e, const Config& c, const Report& r) {
  ordered_json j;
  j["experiment"] = e.name;
  j["criterion"] = e.criterion;
  j["seed"] = c.seed();
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : c.values()) cfg[k] = v;
  j["config"] = cfg;
  j["summary"] = r.summary;
  ordered_json checks = ordered_json::array();
  for (const auto& ch : r.checks) {
    ordered_json x;
    x["criterion"] = ch.criterion;
    x["name"] = ch.name;
    x["pass"] = ch.pass;
    x["detail"] = ch.detail;
    checks.push_back(x);
  }
  j["checks"] = checks;
  return j.dump(2) + "\n";
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
  return buf;
}

std::string manifest_json(const Experiment& e, const Config& c, int threads, const std::string& status,
                          const std::string& message,
                          const std::vector<std::pair<std::string, std::string>>& files) {
  ordered_json j;
  j["experiment"] = e.name;
  j["status"] = status;
  if (!message.empty()) j["message"] = message;
  j["seed"] = c.seed();
  j["threads"] = threads;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : c.values()) cfg[k] = v;
  j["config"] = cfg;
  ordered_json fs = ordered_json::array();
  for (const auto& [name, content] : files) {
    ordered_json f;
    f["file"] = name;
    f["bytes"] = content.size();
    f["fnv1a64"] = hex64(fnv1a(content));
    fs.push_back(f);
  }
  j["files"] = fs;
  return j.dump(2) + "\n";
}

// Every output file of one run, in memory.
std::vector<std::pair<std::string, std::string>> render(const Experiment& e, const Config& c) {
  MemorySink sink;
  const Report r = e.run(c, sink);
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& [name, csv] : sink.tables) files.push_back({e.name + "." + name + ".csv", csv_file(c, csv)});
  files.push_back({e.name + ".report.json", report_json(e, c, r)});
  files.push_back({e.name + ".manifest.json", manifest_json(e, c, 1, "ok", "", files)});
  return files;
}

Report determinism(const Config& c, Sink& out) {
  Report rep;
  io::Csv t({"target", "file", "bytes_first", "bytes_second", "fnv1a64_first", "fnv1a64_second", "identical"});
  bool all = true;
  std::string detail;
  for (const std::string& name : split(c.str("targets"), ',')) {
    if (name == "determinism") throw ConfigError("determinism: cannot target itself");
    const Experiment& e = find(name);
    const Config tc = resolve(e, {}, c.seed());
    const auto a = render(e, tc), b = render(e, tc);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
      const std::string& fa = i < a.size() ? a[i].first : b[i].first;
      const std::string ca = i < a.size() ? a[i].second : "", cb = i < b.size() ? b[i].second : "";
      const bool eq = i < a.size() && i < b.size() && a[i].first == b[i].first && ca == cb;
      same = same && eq;
      t.row({name, fa, io::num((long long)ca.size()), io::num((long long)cb.size()), hex64(fnv1a(ca)), hex64(fnv1a(cb)),
             eq ? "1" : "0"});
    }
    all = all && same;
    detail += (detail.empty() ? "" : ", ") + name + (same ? " identical" : " differs");
  }
  out.table("files", t.str());
  rep.checks.push_back(check("AC11", "byte_identical_rerun", all, detail));
  return rep;
}

// ------------------------------------------------------------------ registry

std::vector<Experiment> build_registry() {
  std::vector<Experiment> r;
  r.push_back({"critical-exponents", "AC10", "unit identities of the critical indices and the dyadic symbol split", 1,
               {{"tol", "1e-10", "absolute/relative tolerance"}}, critical_exponents});
  r.push_back({"decay-report", "AC5", "fitted decay exponents of the multiplier kernels in every (mu, R) case", 600,
               {{"d", "1", "dimension"},
                {"operators", "twisted,hermite", "twisted and/or hermite"},
                {"pairs", "3:8,5:16,101:8,41:4,101:0.5,41:0.25", "mu:R pairs"},
                {"min_N", "4", "requested decay exponent"},
                {"radii", "80", "sample radii per pair"},
                {"pairs_per_case", "2", "passing pairs needed per case"}},
               decay_report});
  r.push_back({"determinism", "AC11", "re-runs targets and compares every output byte", 0,
               {{"targets", "critical-exponents,square-function-trend,lower-set", "experiments re-run with defaults"}},
               determinism});
  r.push_back({"divergence", "AC7", "counterexample signature: measure proxy of the maximal function above thresholds", 1200,
               {{"d", "1", "dimension"},
                {"p", "inf", "Lebesgue exponent"},
                {"beta", "0", "weight exponent"},
                {"delta", "0.1", "Riesz index below the critical value"},
                {"delta_high", "0.4", "index above the critical value, or none"},
                {"K", "5", "number of terms"},
                {"mu0", "25", "mu_k = mu0 4^k (+1 into the spectrum)"},
                {"half_width", "300", "spectral half width of each g_k"},
                {"spacing_factor", "0.2", "annulus grid spacing in units of mu_K^{-1/2}"},
                {"t_max_factor", "2", "t grid up to this times mu_max^{1/2}"},
                {"c0_fraction", "0.25", "c0 as a fraction of the annulus measure"}},
               divergence});
  r.push_back({"eigen-checks", "AC1", "orthonormality, closed form vs integral, finite-difference eigenrelation", 120,
               {{"d", "1", "dimension (1 only)"},
                {"amax", "6", "largest a"},
                {"bmax", "6", "largest b"},
                {"grid_half_width", "12", "orthonormality grid half width"},
                {"grid_h", "0.1", "orthonormality grid spacing"},
                {"orth_tol", "1e-6", "orthonormality tolerance"},
                {"oracle_points", "5", "oracle points per axis"},
                {"oracle_span", "3", "oracle points in [-span, span]^2"},
                {"closed_form_tol", "1e-8", "closed form tolerance"},
                {"fd_pairs", "0:0,1:2,3:1", "a:b pairs for the finite-difference check"},
                {"fd_h", "0.1,0.05", "finite-difference spacings"},
                {"fd_half_width", "6", "finite-difference grid half width"},
                {"fd_inner", "5", "residual measured on [-inner, inner]^2"},
                {"min_order", "1.8", "smallest accepted observed order"}},
               eigen_checks});
  r.push_back({"hermite-divergence", "", "Hermite counterpart of the divergence table", 0,
               {{"d", "2", "dimension"},
                {"p", "inf", "Lebesgue exponent"},
                {"beta", "0", "weight exponent"},
                {"delta", "0.1", "Riesz index"},
                {"K", "3", "number of terms"},
                {"mu0", "25", "mu_k = mu0 4^k + d"},
                {"half_width", "300", "spectral half width"},
                {"spacing_factor", "0.2", "annulus grid spacing in units of mu_K^{-1/2}"},
                {"t_max_factor", "2", "t grid up to this times mu_max^{1/2}"}},
               hermite_divergence});
  r.push_back({"hermite-origin", "", "projection at the origin and the two g~_k routes", 0,
               {{"d", "1,2", "dimensions"}, {"mu0", "40,200,800", "mu = mu0 + d"}}, hermite_origin});
  r.push_back({"hermite-phase", "", "sweep of the phase lower bound on the dyadic support", 0,
               {{"d", "1,2", "dimensions"},
                {"mu", "41", "spectral parameter"},
                {"samples", "20000", "random samples per sweep"},
                {"constant", "0.125,0.00390625", "bound constants"}},
               hermite_phase});
  r.push_back({"hermite-routes", "", "Hermite multiplier kernel: spectral sum vs oscillatory integral", 0,
               {{"d", "1", "dimension (1 only)"},
                {"mu", "5,41,99", "spectral parameters"},
                {"R", "0.5,4,32", "window widths"},
                {"pairs", "20", "random pairs per case"},
                {"tol", "1e-5", "tolerance"},
                {"refine_check", "false", "panel refinement check (doubles the cost)"}},
               hermite_routes});
  r.push_back({"kernel-routes", "AC4", "twisted multiplier kernel: spectral sum vs oscillatory integral", 600,
               {{"d", "1", "dimension (1 only)"},
                {"mu", "5,41,101,199", "spectral parameters"},
                {"R", "0.25,1,8,64", "window widths"},
                {"pairs", "50", "random pairs per case"},
                {"order", "8", "Gauss-Legendre order per panel"},
                {"tol", "1e-5", "relative tolerance"}},
               kernel_routes});
  r.push_back({"laguerre-bounds", "AC2", "regime constants and the asymptotic main term envelope", 60,
               {{"ks", "10,20,50,100,200,500", "orders"},
                {"as", "0,1,2", "types"},
                {"points_per_regime", "200", "samples per regime"},
                {"gamma", "0.05", "exponential regime rate"},
                {"growth_from_k", "50", "growth trend fitted from this k"},
                {"growth_slack", "0.05", "largest log C vs log k slope not counted as growth"},
                {"asymptotic_ks", "100,200", "orders of the envelope check"},
                {"envelope_points", "400", "samples of the envelope check"},
                {"envelope_constant", "4", "envelope constant"}},
               laguerre_bounds});
  r.push_back({"lower-set", "AC6", "measure of the projection kernel lower set on the unit annulus", 120,
               {{"d", "1", "dimension"},
                {"mu", "41,101,201,401", "spectral parameters"},
                {"threshold_factor", "0.25", "threshold in units of mu^{(2d-3)/4}"},
                {"spacing_factor", "0.05", "radial spacing in units of mu^{-1/2}"},
                {"max_spread", "4", "largest accepted max/min"}},
               lower_set});
  r.push_back({"riesz-maximal", "AC9", "weighted L2 ratio of the maximal Riesz means along g_k", 1200,
               {{"d", "1", "dimension"},
                {"alpha", "3", "weight exponent"},
                {"delta", "0.2,0.7", "Riesz indices"},
                {"k", "1,2,3,4", "sequence indices"},
                {"mu0", "25", "mu_k = mu0 4^k (+1 into the spectrum)"},
                {"half_width", "300", "spectral half width of g_k"},
                {"rmax_factor", "3", "radial range in units of mu_k^{1/2}"},
                {"points_per_wavelength", "4", "radial resolution"},
                {"order", "8", "Gauss-Legendre order per panel"},
                {"bounded_slope", "0.05", "largest log2 slope counted as bounded"}},
               riesz_maximal});
  r.push_back({"square-function-trend", "AC8", "square function ratio vs k on a random band-limited ensemble", 900,
               {{"alpha", "0,2", "weight exponents"},
                {"k", "1,2,3,4,5,6", "dyadic pieces"},
                {"members", "20", "ensemble size"},
                {"amax", "4", "largest a in the ensemble"},
                {"bmax", "10", "largest b in the ensemble"},
                {"grid_half_width", "12", "grid half width"},
                {"grid_h", "0.2", "grid spacing"},
                {"eps", "0.05", "rho = eps + max((alpha - 1)/4, 0) - 1/2"},
                {"per_octave", "64", "t nodes per octave"},
                {"slope_limit", "-0.8", "slope limit for alpha <= 1"},
                {"slack", "0.2", "bracket slack for alpha > 1"}},
               square_function_trend});
  r.push_back({"trace-sweep", "AC3", "normalized trace ratio over mu and M, with the band variant", 600,
               {{"d", "1", "dimension"},
                {"mu_min", "1", "first mu"},
                {"mu_max", "401", "last mu"},
                {"mu_step", "2", "mu step"},
                {"M", "1,2,4", "ball radii"},
                {"method", "radial", "radial, svd or power_iteration"},
                {"h", "0.05", "Nystrom spacing"},
                {"band", "true", "also run the sigma = mu/2 variant"},
                {"band_mu_step", "8", "mu step of the band variant"},
                {"max_spread", "8", "largest accepted max/min"}},
               trace_sweep});
  std::sort(r.begin(), r.end(), [](const Experiment& a, const Experiment& b) { return a.name < b.name; });
  return r;
}

}  // namespace

// ------------------------------------------------------------------ config

Config::Config(std::string experiment, std::map<std::string, std::string> values, std::uint64_t seed)
    : experiment_(std::move(experiment)), values_(std::move(values)), seed_(seed) {}

const std::string& Config::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(experiment_ + ": missing parameter '" + key + "'");
  return it->second;
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  std::istringstream is(t);
  is.imbue(std::locale::classic());
  double v;
  if (!(is >> v) || !is.eof() || !std::isfinite(v))
    throw ConfigError("parameter '" + key + "': expected a number, got '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::istringstream is(t);
  is.imbue(std::locale::classic());
  long long v;
  if (!(is >> v) || !is.eof() || v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError("parameter '" + key + "': expected an integer, got '" + text + "'");
  return int(v);
}

std::uint64_t parse_seed(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("seed: expected a non-negative integer, got '" + text + "'");
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw ConfigError("seed: out of range '" + text + "'");
  }
}

int Config::integer(const std::string& key) const { return parse_int(key, str(key)); }
double Config::real(const std::string& key) const { return parse_real(key, str(key)); }

bool Config::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("parameter '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<int> Config::integers(const std::string& key) const {
  std::vector<int> out;
  for (const auto& s : split(str(key), ',')) out.push_back(parse_int(key, s));
  return out;
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split(str(key), ',')) out.push_back(parse_real(key, s));
  return out;
}

std::vector<std::pair<double, double>> Config::pairs(const std::string& key) const {
  std::vector<std::pair<double, double>> out;
  for (const auto& s : split(str(key), ',')) {
    const auto ab = split(s, ':');
    if (ab.size() != 2) throw ConfigError("parameter '" + key + "': expected a:b, got '" + s + "'");
    out.push_back({parse_real(key, ab[0]), parse_real(key, ab[1])});
  }
  return out;
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + text + "'");
  const std::string k = trim(text.substr(0, eq)), v = trim(text.substr(eq + 1));
  if (k.empty()) throw ConfigError("empty key in '" + text + "'");
  return {k, v};
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      auto [k, v] = parse_assignment(t);
      out[k] = v;
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// ------------------------------------------------------------------ registry

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> r = build_registry();
  return r;
}

const Experiment& find(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  std::string names;
  for (const auto& e : registry()) names += (names.empty() ? "" : ", ") + e.name;
  throw ConfigError("unknown experiment '" + name + "'; registered: " + names);
}

Config resolve(const Experiment& e, const std::map<std::string, std::string>& overrides, std::uint64_t seed) {
  std::map<std::string, std::string> v;
  for (const auto& p : e.params) v[p.key] = p.default_value;
  for (const auto& [k, val] : overrides) {
    if (!v.count(k)) {
      std::string keys;
      for (const auto& p : e.params) keys += (keys.empty() ? "" : ", ") + p.key;
      throw ConfigError(e.name + ": unknown parameter '" + k + "'; accepted: " + keys);
    }
    v[k] = val;
  }
  return Config(e.name, v, seed);
}

ordered_json describe(const Experiment& e) {
  ordered_json j;
  j["name"] = e.name;
  j["criterion"] = e.criterion;
  j["summary"] = e.summary;
  ordered_json ps = ordered_json::array();
  for (const auto& p : e.params) {
    ordered_json x;
    x["key"] = p.key;
    x["default"] = p.default_value;
    x["help"] = p.help;
    ps.push_back(x);
  }
  j["parameters"] = ps;
  return j;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ------------------------------------------------------------------ runner

namespace {

class DirSink : public Sink {
 public:
  DirSink(const Experiment& e, const Config& c, std::string dir) : e_(e), c_(c), dir_(std::move(dir)) {}
  void table(const std::string& name, const std::string& csv) override {
    const std::string file = e_.name + "." + name + ".csv";
    const std::string content = csv_file(c_, csv);
    io::write_atomic((std::filesystem::path(dir_) / file).string(), content);
    files.push_back({file, content});
  }
  std::vector<std::pair<std::string, std::string>> files;

 private:
  const Experiment& e_;
  const Config& c_;
  std::string dir_;
};

}  // namespace

RunOutcome run(const Experiment& e, const Config& cfg, const RunOptions& opt) {
  if (opt.threads < 1) throw ConfigError("threads must be >= 1");
  std::filesystem::create_directories(opt.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  DirSink sink(e, cfg, opt.out_dir);
  RunOutcome out;
  auto finish = [&](const std::string& status, const std::string& message) {
    const std::string manifest = e.name + ".manifest.json";
    io::write_atomic((std::filesystem::path(opt.out_dir) / manifest).string(),
                     manifest_json(e, cfg, opt.threads, status, message, sink.files));
    for (const auto& f : sink.files) out.files.push_back(f.first);
    out.files.push_back(manifest);
    out.status = status;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  try {
    out.report = e.run(cfg, sink);
  } catch (const NonConvergence& ex) {
    finish("non_convergence", ex.what());
    throw;
  }
  const std::string report = e.name + ".report.json";
  const std::string content = report_json(e, cfg, out.report);
  io::write_atomic((std::filesystem::path(opt.out_dir) / report).string(), content);
  sink.files.push_back({report, content});
  finish("ok", "");
  return out;
}

}  // namespace twistlap::experiments
