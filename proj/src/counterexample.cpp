#include "twistlap/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "twistlap/io.hpp"
#include "twistlap/kernels.hpp"
#include "twistlap/laguerre.hpp"
#include "twistlap/quadrature.hpp"
#include "twistlap/spectral.hpp"

namespace twistlap::counterexample {

using riesz::kInf;

namespace {

constexpr int kTableMax = 8000;
const double kSuppLo = std::exp2(-2.9), kSuppHi = std::exp2(-1.1);

struct StarRule {
  std::vector<double> t, w;  // w already holds phi*(t) dt / 2 pi
};

const StarRule& star_rule() {
  static const StarRule r = [] {
    const quad::Rule q = quad::composite(kSuppLo, kSuppHi, 600, 20);
    const kernels::CutoffBank b;
    StarRule s;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      const double v = b.phi_star(q.x[i]);
      if (v == 0.0) continue;
      s.t.push_back(q.x[i]);
      s.w.push_back(q.w[i] * v / (2.0 * kPi));
    }
    return s;
  }();
  return r;
}

const std::vector<cplx>& star_table() {
  static std::vector<cplx> tab;
  static std::once_flag once;
  std::call_once(once, [] {
    const StarRule& r = star_rule();
    tab.assign(kTableMax + 1, 0.0);
    std::vector<cplx> rot(r.t.size()), step(r.t.size());
    for (std::size_t i = 0; i < r.t.size(); ++i) step[i] = std::polar(1.0, r.t[i]);
    for (int s = 0; s <= kTableMax; ++s) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < r.t.size(); ++i) {
        if (s % 256 == 0)
          rot[i] = std::polar(1.0, r.t[i] * s);
        else
          rot[i] *= step[i];
        acc += r.w[i] * rot[i];
      }
      tab[s] = acc;
    }
  });
  return tab;
}

double p_origin(int d, int mu) {
  // P_mu(0,0) = (2 pi)^{-d} binom(N + d - 1, d - 1)
  const int N = (mu - d) / 2;
  return std::pow(2.0 * kPi, -d) * std::exp(std::lgamma(N + d) - std::lgamma(N + 1.0) - std::lgamma(double(d)));
}

double sphere_area(int d) { return 2.0 * std::pow(kPi, d) / std::tgamma(double(d)); }

}  // namespace

cplx phi_star_inverse(double s) {
  const double rs = std::round(s);
  if (rs == s && std::abs(s) <= kTableMax) {
    const cplx v = star_table()[std::size_t(std::abs(rs))];
    return s < 0 ? std::conj(v) : v;
  }
  const StarRule& r = star_rule();
  cplx acc = 0.0;
  for (std::size_t i = 0; i < r.t.size(); ++i) acc += r.w[i] * std::polar(1.0, r.t[i] * s);
  return acc;
}

cplx gk_quadrature(int d, int mu_k, double r, const GkOptions& opt) {
  spectral::Eigenvalue::from_mu(d, mu_k);
  require(r >= 0.0, "gk_quadrature: r >= 0");
  const double a = 0.25 * r * r;
  const cplx pref = kernels::propagator_calibration(d).constant / (2.0 * kPi);
  const kernels::CutoffBank bank;
  // panel breaks adapted to |p'| and |p''|^{1/2} of p(t) = a cot t + mu t
  std::vector<double> br{kSuppLo};
  for (double t = kSuppLo; t < kSuppHi;) {
    const double s = std::sin(t);
    const double p1 = std::abs(mu_k - a / (s * s)), p2 = 2.0 * a * std::abs(std::cos(t)) / (s * s * s);
    const double w = std::min(0.01, 2.0 / (p1 + std::sqrt(p2) + 1.0));
    t = std::min(kSuppHi, t + w);
    br.push_back(t);
  }
  auto integrate = [&](const std::vector<double>& b) {
    const quad::Rule q = quad::composite(b, opt.order);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      const double t = q.x[i];
      const double v = bank.phi_star(t);
      if (v == 0.0) continue;
      const double s = std::sin(t);
      acc += q.w[i] * v * std::pow(s, -d) * std::polar(1.0, -(a * std::cos(t) / s + mu_k * t));
    }
    return pref * acc;
  };
  cplx prev = integrate(br);
  // off the stationary range the value is pure cancellation; round-off of the integrand mass bounds what
  // a doubling can still change
  double mass = 0.0;
  const StarRule& sr = star_rule();
  for (std::size_t i = 0; i < sr.t.size(); ++i) mass += 2.0 * kPi * sr.w[i] * std::pow(std::sin(sr.t[i]), -d);
  const double noise = 1e3 * std::numeric_limits<double>::epsilon() * std::abs(pref) * mass;
  const double floor = 1e-6 / std::sqrt(double(mu_k));
  for (int level = 0; level < opt.max_levels; ++level) {
    std::vector<double> fine;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
      fine.push_back(br[i]);
      fine.push_back(0.5 * (br[i] + br[i + 1]));
    }
    fine.push_back(br.back());
    br.swap(fine);
    const cplx cur = integrate(br);
    if (std::abs(cur - prev) <= std::max(opt.tol * std::max(std::abs(cur), floor), noise)) return cur;
    prev = cur;
  }
  throw NonConvergence("gk_quadrature: panel doubling did not settle at r = " + io::num(r));
}

cplx g_k(int mu_k, const basis::ComplexPoint& z, const GkOptions& opt) {
  double r2 = 0.0;
  for (int j = 0; j < z.dim(); ++j) r2 += z.x[j] * z.x[j] + z.y[j] * z.y[j];
  return gk_quadrature(z.dim(), mu_k, std::sqrt(r2), opt);
}

GkSpectral gk_spectral(int d, int mu_k, double r, int half_width) {
  spectral::Eigenvalue::from_mu(d, mu_k);
  require(half_width >= 0 && half_width <= kTableMax, "gk_spectral: half width out of range");
  const int lo = std::max(d, mu_k - half_width), hi = mu_k + half_width;
  const int nlo = (lo - d + 1) / 2, nhi = (hi - d) / 2;
  const auto l = laguerre::laguerre_exp_sequence(d - 1.0, nhi, 0.5 * r * r);
  const double c = std::pow(2.0 * kPi, -d) * (d % 2 ? -1.0 : 1.0);
  GkSpectral out{0.0, 0.0};
  for (int n = nhi; n >= nlo; --n) out.value += phi_star_inverse(2 * n + d - mu_k) * (c * l[n]);
  for (int s = half_width + 1; s <= kTableMax; ++s) {
    if ((s % 2) != 0) continue;
    const double v = std::abs(phi_star_inverse(s));
    out.tail_bound += v * p_origin(d, mu_k + s);
    if (mu_k - s >= d) out.tail_bound += v * p_origin(d, mu_k - s);
  }
  return out;
}

riesz::SpectralSamples gk_samples(int d, int mu_k, const std::vector<double>& radii, const std::vector<double>& weights,
                                  int half_width, cplx scale) {
  std::vector<int> mu;
  std::vector<cplx> co;
  const double sg = d % 2 ? -1.0 : 1.0;
  for (int m = std::max(d, mu_k - half_width); m <= mu_k + half_width; ++m) {
    if ((m - d) % 2) continue;
    mu.push_back(m);
    co.push_back(sg * scale * phi_star_inverse(m - mu_k));
  }
  return riesz::radial_samples(d, mu, co, radii, weights);
}

double radial_density(int d, double r) { return sphere_area(d) * std::pow(r, 2 * d - 1); }

double weighted_lp_norm(const std::vector<double>& radii, const std::vector<double>& weights,
                        const std::vector<cplx>& values, double beta, double p) {
  require(radii.size() == values.size() && weights.size() == values.size(), "weighted_lp_norm: size mismatch");
  require(p >= 1.0, "weighted_lp_norm: p >= 1");
  const riesz::Weight w{beta};
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m = std::max(m, w(radii[i]) * std::abs(values[i]));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += std::pow(w(radii[i]) * std::abs(values[i]), p) * weights[i];
  return std::pow(s, 1.0 / p);
}

GkBoundReport verify_gk_bounds(int d, int mu_k, double plateau_lo, double plateau_hi) {
  spectral::Eigenvalue::from_mu(d, mu_k);
  require(0.0 < plateau_lo && plateau_lo < plateau_hi, "verify_gk_bounds: bad plateau window");
  GkBoundReport rep;
  rep.d = d;
  rep.mu_k = mu_k;
  rep.plateau_lo = plateau_lo;
  rep.plateau_hi = plateau_hi;
  const double sq = std::sqrt(double(mu_k));
  const int n = 600;
  rep.plateau_min = kInf;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int i = 0; i <= n; ++i) {
    const double u = 3.0 * i / n;  // r / mu^{1/2}
    const double v = std::abs(gk_spectral(d, mu_k, u * sq).value) * sq;
    if (u >= plateau_lo && u <= plateau_hi) {
      rep.plateau_min = std::min(rep.plateau_min, v);
      rep.plateau_max = std::max(rep.plateau_max, v);
    }
    // the spectral sum bottoms out near 1e-14, keep well above it
    if (u >= 1.0 && v > 1e-10) {
      const double x = std::log(u), y = std::log(v);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (i == n) rep.far_value = v;
  }
  if (m >= 3) rep.fitted_exponent = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  rep.plateau_ratio = rep.plateau_min > 0 ? rep.plateau_max / rep.plateau_min : kInf;
  rep.pass = rep.plateau_ratio <= 16.0 && rep.fitted_exponent >= 6.0 && rep.far_value <= 1e-6;
  return rep;
}

LowerSetReport lower_set_measure(int d, int mu, double threshold_factor, double spacing_factor) {
  const spectral::Eigenvalue ev = spectral::Eigenvalue::from_mu(d, mu);
  require(threshold_factor >= 0.0 && spacing_factor > 0.0, "lower_set_measure: bad arguments");
  LowerSetReport rep;
  rep.d = d;
  rep.mu = mu;
  rep.threshold_factor = threshold_factor;
  const double scale = std::pow(double(mu), (2.0 * d - 3.0) / 4.0);
  const int n = int(std::ceil(std::sqrt(double(mu)) / spacing_factor));
  const double h = 1.0 / n;
  const double c = std::pow(2.0 * kPi, -d);
  for (int i = 0; i < n; ++i) {
    const double r = 1.0 + (i + 0.5) * h;
    const double p = std::abs(c * laguerre::laguerre_exp({ev.N, d - 1.0}, 0.5 * r * r));
    const double wgt = radial_density(d, r) * h;
    rep.annulus_measure += wgt;
    if (p >= threshold_factor * scale) rep.measure += wgt;
    rep.upper_max = std::max(rep.upper_max, p / scale);
  }
  rep.samples = n;
  return rep;
}

CounterexampleSeq CounterexampleSeq::geometric(int d, int mu0, int K, double p, double beta, double delta) {
  CounterexampleSeq s;
  s.d = d;
  s.p = p;
  s.beta = beta;
  s.delta = delta;
  long long m = mu0;
  for (int k = 1; k <= K; ++k) {
    m *= 4;
    long long v = m;
    if ((v - d) % 2) ++v;
    s.mu.push_back(int(v));
  }
  return s;
}

void CounterexampleSeq::validate() const {
  require(d >= 1, "CounterexampleSeq: d >= 1");
  require(!mu.empty(), "CounterexampleSeq: empty sequence");
  for (std::size_t k = 0; k < mu.size(); ++k) {
    spectral::Eigenvalue::from_mu(d, mu[k]);
    if (k > 0) require(mu[k] >= 4 * mu[k - 1] - 3, "CounterexampleSeq: spacing mu_{k+1}/mu_k >= 4");
  }
  require(p >= 1.0 && beta >= 0.0 && delta >= 0.0, "CounterexampleSeq: bad p, beta or delta");
  const double pmin = 4.0 * d / (2.0 * d - 1.0 + 2.0 * beta);
  require(std::isinf(p) || p > pmin, "CounterexampleSeq: p must exceed 4d/(2d-1+2 beta)");
}

DivergenceTable divergence_experiment(const CounterexampleSeq& seq, const DivergenceOptions& opt) {
  seq.validate();
  const int d = seq.d, K = int(seq.mu.size());
  DivergenceTable tab;
  tab.gamma = riesz::critical_gamma(seq.p, 2.0 * d, seq.beta);

  // normalizations ||Psi_beta g_k||_p on [0, 3 mu_k^{1/2}]
  for (int k = 0; k < K; ++k) {
    const double rmax = 3.0 * std::sqrt(double(seq.mu[k]));
    const int n = 3000;
    std::vector<double> rs(n), ws(n);
    for (int i = 0; i < n; ++i) {
      rs[i] = (i + 0.5) * rmax / n;
      ws[i] = radial_density(d, rs[i]) * rmax / n;
    }
    const auto vals = gk_samples(d, seq.mu[k], rs, ws, opt.half_width).total();
    tab.norms.push_back(weighted_lp_norm(rs, ws, vals, seq.beta, seq.p));
  }

  // f = sum_k 2^{-k} g_k / norm_k on the annulus 1 < |z| <= 2
  const double h = opt.spacing_factor / std::sqrt(double(seq.mu.back()));
  const int na = int(std::ceil(1.0 / h));
  std::vector<double> rs(na), ws(na);
  for (int i = 0; i < na; ++i) {
    rs[i] = 1.0 + (i + 0.5) / na;
    ws[i] = radial_density(d, rs[i]) / na;
    tab.annulus_measure += ws[i];
  }
  const double sg = d % 2 ? -1.0 : 1.0;
  std::map<int, cplx> coeff;
  for (int j = 0; j < K; ++j) {
    const double a = std::ldexp(1.0, -(j + 1)) / tab.norms[j];
    for (int m = std::max(d, seq.mu[j] - opt.half_width); m <= seq.mu[j] + opt.half_width; ++m) {
      if ((m - d) % 2) continue;
      coeff[m] += sg * a * phi_star_inverse(m - seq.mu[j]);
    }
  }
  std::vector<int> mus;
  std::vector<cplx> cs;
  for (const auto& [m, c] : coeff) {
    mus.push_back(m);
    cs.push_back(c);
  }
  const riesz::SpectralSamples f = riesz::radial_samples(d, mus, cs, rs, ws);
  const auto tgrid = riesz::riesz_t_grid(f.mu, opt.t_max_factor * std::sqrt(f.mu.back()));
  const riesz::MaximalResult mx = riesz::maximal_riesz(seq.delta, f, tgrid);
  tab.gap = mx.gap;
  tab.maximal_min = *std::min_element(mx.value.begin(), mx.value.end());
  tab.maximal_max = *std::max_element(mx.value.begin(), mx.value.end());

  const double thr_delta = opt.threshold_delta < 0 ? seq.delta : opt.threshold_delta;
  const double cn = std::pow(2.0 * kPi, -d);
  for (int k = 0; k < K; ++k) {
    DivergenceRow row;
    row.k = k + 1;
    row.mu_k = seq.mu[k];
    const int N = (seq.mu[k] - d) / 2;
    double pmax = 0.0;
    for (double r : rs) pmax = std::max(pmax, std::abs(cn * laguerre::laguerre_exp({N, d - 1.0}, 0.5 * r * r)));
    double cross = 0.0;
    for (int j = 0; j < K; ++j) {
      const double v = std::ldexp(1.0, -(j + 1)) * std::abs(phi_star_inverse(seq.mu[k] - seq.mu[j])) / tab.norms[j];
      if (j == k)
        row.main_term_max = v * pmax;
      else
        cross += v;
    }
    row.cross_term_max = cross * pmax;
    row.dominance_ok = row.cross_term_max <= 0.5 * row.main_term_max;
    tab.rows.push_back(row);
  }
  tab.main_const = tab.rows[0].main_term_max / (0.5 * std::pow(double(seq.mu[0]), tab.gamma / 2.0));
  for (auto& row : tab.rows) {
    row.threshold = 0.5 * tab.main_const * std::ldexp(1.0, -row.k) * std::pow(double(row.mu_k), -thr_delta + tab.gamma / 2.0);
    for (int i = 0; i < na; ++i)
      if (mx.value[i] >= row.threshold) row.measure_proxy += ws[i];
  }
  return tab;
}

std::string divergence_csv(const DivergenceTable& t) {
  io::Csv csv({"k", "mu_k", "threshold", "measure_proxy", "main_term_max", "cross_term_max", "dominance_ok"});
  for (const auto& r : t.rows)
    csv.row({io::num((long long)r.k), io::num((long long)r.mu_k), io::num(r.threshold), io::num(r.measure_proxy),
             io::num(r.main_term_max), io::num(r.cross_term_max), r.dominance_ok ? "true" : "false"});
  return csv.str();
}

}  // namespace twistlap::counterexample
