#include "twistlap/hermite_op.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>

#include "twistlap/hermite_basis.hpp"
#include "twistlap/io.hpp"
#include "twistlap/laguerre.hpp"
#include "twistlap/quadrature.hpp"

namespace twistlap::hermite {

using counterexample::phi_star_inverse;
using riesz::kInf;

double dot(const Point& x, const Point& y) {
  require(x.size() == y.size(), "hermite: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Point& x) { return dot(x, x); }

std::vector<double> projection_sequence(int nmax, const Point& x, const Point& y) {
  require(!x.empty() && x.size() == y.size(), "projection_sequence: dimension mismatch");
  require(nmax >= 0, "projection_sequence: nmax >= 0");
  std::vector<double> acc;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto hx = basis::hermite_fns(nmax, x[j]);
    const auto hy = basis::hermite_fns(nmax, y[j]);
    std::vector<double> q(nmax + 1);
    for (int n = 0; n <= nmax; ++n) q[n] = hx[n] * hy[n];
    if (j == 0) {
      acc = std::move(q);
      continue;
    }
    std::vector<double> c(nmax + 1, 0.0);
    for (int a = 0; a <= nmax; ++a)
      for (int b = 0; a + b <= nmax; ++b) c[a + b] += acc[a] * q[b];
    acc.swap(c);
  }
  return acc;
}

double phase(double t, const Point& x, const Point& y) {
  const double s = std::sin(t);
  return 0.5 * (norm2(x) + norm2(y)) * std::cos(t) / s - dot(x, y) / s;
}

double phase_neg_dt(double t, const Point& x, const Point& y, int n_tilde) {
  const double s2 = std::sin(t) * std::sin(t);
  const double sg = n_tilde % 2 ? -1.0 : 1.0;
  double dxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dxy += (x[i] - y[i]) * (x[i] - y[i]);
  return dxy / (2.0 * s2) + dot(x, y) * (1.0 - sg * std::cos(t)) / s2;
}

cplx sin_power(cplx s, int d) {
  const cplx sn = std::sin(s);
  double arg = std::arg(sn);
  if (arg > 0.5 * kPi) arg -= 2.0 * kPi;
  return std::exp(-0.5 * d * cplx(std::log(std::abs(sn)), arg));
}

cplx abel_propagator_sum(cplx tau, const Point& x, const Point& y, int nmax) {
  require(tau.imag() < 0.0, "abel_propagator_sum: need Im tau < 0");
  const int d = int(x.size());
  const auto p = projection_sequence(nmax, x, y);
  cplx s = 0.0;
  for (int n = nmax; n >= 0; --n) s += std::exp(-0.5 * kI * tau * double(2 * n + d)) * p[n];
  return s;
}

namespace {

cplx kernel_shape(cplx tau, const Point& x, const Point& y) {
  const int d = int(x.size());
  const cplx sn = std::sin(tau);
  const cplx ph = 0.5 * (norm2(x) + norm2(y)) * std::cos(tau) / sn - dot(x, y) / sn;
  return sin_power(tau, d) * std::exp(kI * ph);
}

Calibration calibrate(int d) {
  Calibration c;
  c.d = d;
  c.closed_form = std::pow(2.0 * kPi * kI, -0.5 * d);
  const Point x1(d, 0.4), y1(d, -0.3), x2(d, -0.7), y2(d, 0.5);
  const cplx t1(kPi / 3, -0.2), t2(2.0, -0.3);
  // e^{-0.2 N} below 1e-40 at N = 460
  const cplx c1 = abel_propagator_sum(t1, x1, y1, 460) / kernel_shape(t1, x1, y1);
  const cplx c2 = abel_propagator_sum(t2, x2, y2, 460) / kernel_shape(t2, x2, y2);
  c.constant = c1;
  c.spread = std::abs(c1 - c2) / std::abs(c1);
  c.residual = std::abs(c1 - c.closed_form) / std::abs(c.closed_form);
  return c;
}

}  // namespace

const Calibration& propagator_calibration(int d) {
  require(d >= 1 && d <= 4, "hermite propagator_calibration: d in 1..4");
  static std::mutex mu;
  static std::map<int, Calibration> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, calibrate(d)).first;
  return it->second;
}

namespace {

// reduce to the principal strip: K(t + n pi, x, y) = e^{-i pi n d/2} K(t, x, (-1)^n y)
cplx shifted_kernel(cplx tau, const Point& x, const Point& y) {
  const int d = int(x.size());
  const double n = std::floor(tau.real() / kPi);
  const cplx t0 = tau - n * kPi;
  Point yy = y;
  const bool odd = std::fmod(std::abs(n), 2.0) == 1.0;
  if (odd)
    for (double& v : yy) v = -v;
  const cplx rot = std::polar(1.0, -kPi * std::fmod(n * d / 2.0, 4.0));
  return rot * propagator_calibration(d).constant * kernel_shape(t0, x, yy);
}

}  // namespace

cplx propagator_kernel(double t, const Point& x, const Point& y) {
  require(!x.empty() && x.size() == y.size(), "hermite propagator_kernel: dimension mismatch");
  if (std::abs(std::remainder(t, kPi)) < 1e-9) throw DomainError("hermite propagator_kernel: t too close to pi Z");
  return shifted_kernel(t, x, y);
}

cplx propagator_kernel(cplx tau, const Point& x, const Point& y) {
  require(!x.empty() && x.size() == y.size(), "hermite propagator_kernel: dimension mismatch");
  require(tau.imag() <= 0.0, "hermite propagator_kernel: need Im tau <= 0");
  if (tau.imag() == 0.0) return propagator_kernel(tau.real(), x, y);
  return shifted_kernel(tau, x, y);
}

// ---- multiplier kernels

cplx multiplier_kernel_spectral(const kernels::Eta& eta, double mu, double R, const Point& x, const Point& y) {
  require(R > 0.0, "hermite multiplier kernel: R > 0");
  require(!x.empty() && x.size() == y.size(), "hermite multiplier kernel: dimension mismatch");
  const int d = int(x.size());
  const double hi = mu + 2.0 * R;
  if (hi <= d) return 0.0;
  const int nmax = int(std::ceil((hi - d) / 2.0));
  const auto p = projection_sequence(nmax, x, y);
  double s = 0.0;
  for (int n = nmax; n >= 0; --n) {
    const double u = (mu - (2.0 * n + d)) / R;
    if (std::abs(u) >= 2.0) continue;
    s += eta(u) * p[n];
  }
  return s;
}

cplx periodized_eta_hat(const kernels::Eta& eta, cplx s, double R, double mu, int d, int n_tilde, double* abs_sum) {
  const double cut = 2.0 * kernels::eta_hat_cutoff() / R;
  int nlo = int(std::ceil((-cut - s.real()) / kPi));
  const int nhi = int(std::floor((cut - s.real()) / kPi));
  if (((nlo - n_tilde) % 2 + 2) % 2) ++nlo;
  const double half = 0.5 * (mu - d);
  cplx acc = 0.0;
  double m = 0.0;
  for (int n = nlo; n <= nhi; n += 2) {
    // e^{i n pi (mu - d)/2}, reduced mod 2 before scaling by pi
    const double ph = std::fmod(n * half, 2.0) * kPi;
    const cplx t = eta.hat(0.5 * R * (s + n * kPi));
    acc += std::polar(1.0, ph) * t;
    m += std::abs(t);
  }
  if (abs_sum) *abs_sum = m;
  return acc;
}

namespace {

double cot_freq(cplx s, double amax) {
  const cplx sn = std::sin(s);
  const cplx ct = std::cos(s) / sn;
  double a = amax;
  if (ct.imag() > 0.0) a = std::min(a, 45.0 / ct.imag());
  return a / std::norm(sn);
}

}  // namespace

OscillatoryMultiplier::OscillatoryMultiplier(const kernels::Eta& eta, int d, double mu, double R, double max_radius,
                                             const kernels::OscOptions& opt)
    : d_(d), max_r2_(max_radius * max_radius), opt_(opt) {
  require(d >= 1, "hermite OscillatoryMultiplier: d >= 1");
  require(R > 0.0, "hermite OscillatoryMultiplier: R > 0");
  require(max_radius >= 0.0, "hermite OscillatoryMultiplier: negative radius");
  const double h = 1.0 / (0.5 * std::abs(mu) + R + 1.0);
  // a = |x - y'|^2 / 2 <= 2 rho^2 and |b| <= rho^2
  const double amax = 2.0 * max_r2_, bmax = max_r2_;
  auto freq = [&](cplx s) {
    const double c = std::abs(std::cos(0.5 * s));
    return 0.5 * std::abs(mu) + R + d / std::abs(std::sin(s)) + cot_freq(s, amax) + bmax / (c * c);
  };
  const cplx pref = propagator_calibration(d).constant * R / (4.0 * kPi);
  const kernels::CutoffBank bank;
  auto fill = [&](Precomputed& p, int n_tilde, int split) {
    const kernels::PathRule rule = kernels::path_rule(h, freq, opt.order, split);
    const std::size_t n = rule.s.size();
    p.s = rule.s;
    p.g.resize(n);
    p.g_abs.assign(n, 0.0);
    p.cot.resize(n);
    p.tan_half.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const cplx s = rule.s[j];
      p.cot[j] = std::cos(s) / std::sin(s);
      p.tan_half[j] = std::tan(0.5 * s);
      double es = 1.0;  // eta* is 1 on the ellipse
      if (s.imag() == 0.0 && std::abs(s.real()) > kernels::kPathS0) es = bank.eta_star(s.real());
      if (es == 0.0) {
        p.g[j] = 0.0;
        continue;
      }
      double win = 0.0;
      const cplx f = pref * rule.w[j] * es * std::exp(0.5 * kI * s * mu) * sin_power(s, d);
      p.g[j] = f * periodized_eta_hat(eta, s, R, mu, d, n_tilde, &win);
      p.g_abs[j] = std::abs(f) * win;
    }
  };
  for (int nt = 0; nt < 2; ++nt) {
    fill(base_[nt], nt, 1);
    if (opt.check) fill(fine_[nt], nt, 2);
    for (double g : base_[nt].g_abs) mass_ += g;
  }
  const Precomputed* src = opt.check ? fine_ : base_;
  diag_ = integrate(src[0], 0.0, 0.0) + integrate(src[1], 0.0, 0.0);
}

cplx OscillatoryMultiplier::integrate(const Precomputed& p, double a, double b, double* mass) {
  cplx acc = 0.0;
  double m = 0.0;
  for (std::size_t j = 0; j < p.s.size(); ++j) {
    const cplx e = kI * (a * p.cot[j] - b * p.tan_half[j]);
    if (e.real() < -745.0) continue;
    const cplx x = std::exp(e);
    acc += p.g[j] * x;
    m += p.g_abs[j] * std::abs(x);
  }
  if (mass) *mass += m;
  return acc;
}

cplx OscillatoryMultiplier::operator()(const Point& x, const Point& y) const {
  require(int(x.size()) == d_ && int(y.size()) == d_, "hermite OscillatoryMultiplier: dimension mismatch");
  const double tol_r2 = max_r2_ * (1.0 + 1e-12) + 1e-300;
  require(norm2(x) <= tol_r2 && norm2(y) <= tol_r2, "hermite OscillatoryMultiplier: point beyond the precomputed radius");
  double dm = 0.0, dp = 0.0;
  for (int i = 0; i < d_; ++i) {
    dm += (x[i] - y[i]) * (x[i] - y[i]);
    dp += (x[i] + y[i]) * (x[i] + y[i]);
  }
  const double b = dot(x, y);
  const cplx i1 = integrate(base_[0], 0.5 * dm, b) + integrate(base_[1], 0.5 * dp, -b);
  if (!opt_.check) {
    last_error_ = 0.0;
    return i1;
  }
  double mass = 0.0;
  const cplx i2 = integrate(fine_[0], 0.5 * dm, b, &mass) + integrate(fine_[1], 0.5 * dp, -b, &mass);
  last_error_ = std::abs(i1 - i2);
  // the value can vanish (odd N at the origin, empty window), so round-off of the absolute integrand mass,
  // window terms included, is the last floor
  const double scale = std::max(std::abs(i2), 1e-3 * std::abs(diag_));
  const double noise = 1e3 * std::numeric_limits<double>::epsilon() * std::max(mass, mass_);
  if (last_error_ > std::max(opt_.tol * scale, noise))
    throw NonConvergence("hermite oscillatory multiplier: panel refinement changed the value by " +
                         io::num(last_error_));
  return i2;
}

cplx multiplier_kernel_oscillatory(const kernels::Eta& eta, double mu, double R, const Point& x, const Point& y,
                                   const kernels::OscOptions& opt) {
  const OscillatoryMultiplier k(eta, int(x.size()), mu, R, std::sqrt(std::max(norm2(x), norm2(y))), opt);
  return k(x, y);
}

// ---- decay

std::string decay_case(double mu, double R) { return kernels::decay_case(mu, R) + "'"; }

double decay_scale(double mu, double R) { return kernels::decay_scale(mu, R); }

std::vector<double> default_decay_radii(double mu, double R, int n) {
  require(n >= 2, "hermite default_decay_radii: n >= 2");
  const double s = decay_scale(mu, R);
  const double top = std::max(60.0 * s, 2.5 * std::sqrt(mu + 2.0 * R) + 8.0);
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = s * std::pow(top / s, double(i) / (n - 1));
  return r;
}

kernels::DecayReport verify_multiplier_decay(const kernels::Eta& eta, int d, double mu, double R,
                                             const std::vector<double>& radii, double requested_N, double tol) {
  require(d >= 1, "hermite decay: d >= 1");
  const double scale = decay_scale(mu, R);
  const Point o(d, 0.0);
  const double k0 = std::abs(multiplier_kernel_spectral(eta, mu, R, o, o));
  std::vector<double> rs, vs;
  for (double r : radii) {
    if (r < scale) continue;
    Point y = o;
    y[0] = r;
    rs.push_back(r);
    vs.push_back(std::abs(multiplier_kernel_spectral(eta, mu, R, o, y)));
  }
  const std::string c = decay_case(mu, R);
  const double pref = c == "iii'" ? 1.0 : std::pow(R, 0.5 * d);
  kernels::DecayReport rep = kernels::fit_decay(rs, vs, scale, pref, 10.0 * tol * std::max(k0, 1e-300), requested_N);
  rep.case_name = c;
  rep.op = "hermite";
  rep.d = d;
  rep.mu = mu;
  rep.R = R;
  rep.tol = tol;
  return rep;
}

// ---- projection kernel at the origin

int half_index(int d, int mu) {
  require(d >= 1, "hermite: d >= 1");
  require(mu >= d && (mu - d) % 2 == 0, "hermite: mu must lie in 2N_0 + d");
  const int N = (mu - d) / 2;
  require(N % 2 == 0, "hermite: N = (mu - d)/2 must be even");
  return N;
}

double projection_origin_direct(int d, int mu, const Point& x) {
  require(int(x.size()) == d, "projection_origin_direct: dimension mismatch");
  const int N = half_index(d, mu);
  return projection_sequence(N, Point(d, 0.0), x)[N];
}

double projection_origin_radial(int d, int mu, double r) {
  const int m = half_index(d, mu) / 2;
  require(r >= 0.0, "projection_origin_radial: r >= 0");
  // the Gamma prefactor and |x|^{1-d/2} cancel the normalization of the Laguerre function, leaving
  // L^{d/2-1}_m(r^2) e^{-r^2/2}; this form is finite at r = 0
  return laguerre::laguerre_exp({m, 0.5 * d - 1.0}, r * r);
}

OriginConstant origin_constant(int d, int mu) {
  OriginConstant oc;
  oc.d = d;
  oc.mu = mu;
  std::vector<double> ratios;
  double best = -1.0;
  for (double u : {0.0, 0.13, 0.29, 0.47, 0.61, 0.83}) {
    const double r = u * std::sqrt(double(mu));
    const double rad = projection_origin_radial(d, mu, r);
    // skip points near a node of the Laguerre factor
    if (std::abs(rad) < 1e-3 * std::abs(projection_origin_radial(d, mu, 0.0))) continue;
    Point x(d, 0.0);
    x[0] = r;
    const double q = projection_origin_direct(d, mu, x) / rad;
    ratios.push_back(q);
    if (std::abs(rad) > best) {
      best = std::abs(rad);
      oc.constant = q;
    }
  }
  for (double q : ratios) oc.spread = std::max(oc.spread, std::abs(q - oc.constant) / std::abs(oc.constant));
  return oc;
}

namespace {

double cached_constant(int d, int mu) {
  static std::mutex m;
  static std::map<std::pair<int, int>, double> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find({d, mu});
  if (it == cache.end()) it = cache.emplace(std::make_pair(d, mu), origin_constant(d, mu).constant).first;
  return it->second;
}

}  // namespace

double projection_origin(int d, int mu, const Point& x) {
  require(int(x.size()) == d, "projection_origin: dimension mismatch");
  return std::abs(cached_constant(d, mu)) * std::abs(projection_origin_radial(d, mu, std::sqrt(norm2(x))));
}

double radial_density(int d, double r) {
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d) * std::pow(r, d - 1);
}

OriginNorm projection_origin_norm(int d, int mu) {
  const int N = half_index(d, mu);
  OriginNorm out;
  out.from_sum = std::sqrt(projection_sequence(N, Point(d, 0.0), Point(d, 0.0))[N]);
  const double c = std::abs(cached_constant(d, mu));
  const double rmax = 2.0 * std::sqrt(double(mu)) + 12.0;
  const quad::Rule q = quad::composite(0.0, rmax, std::max(200, 2 * mu), 16);
  double s = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    const double v = c * projection_origin_radial(d, mu, q.x[i]);
    s += q.w[i] * v * v * radial_density(d, q.x[i]);
  }
  out.from_quadrature = std::sqrt(s);
  return out;
}

// ---- counterexample

namespace {

const double kSuppLo = std::exp2(-2.9), kSuppHi = std::exp2(-1.1);

double star_mass(int d) {
  const quad::Rule q = quad::composite(kSuppLo, kSuppHi, 64, 16);
  const kernels::CutoffBank bank;
  double m = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i) m += q.w[i] * bank.phi_star(q.x[i]) * std::pow(std::sin(2.0 * q.x[i]), -0.5 * d);
  return m;
}

}  // namespace

cplx gk_quadrature(int d, int mu_k, double r, const counterexample::GkOptions& opt) {
  half_index(d, mu_k);
  require(r >= 0.0, "hermite gk_quadrature: r >= 0");
  const double a = 0.5 * r * r;
  const cplx pref = propagator_calibration(d).constant / (2.0 * kPi);
  const kernels::CutoffBank bank;
  // phase p(t) = mu t + a cot 2t: p' = mu - 2a / sin^2 2t, p'' = 8a cos 2t / sin^3 2t
  std::vector<double> br{kSuppLo};
  for (double t = kSuppLo; t < kSuppHi;) {
    const double s = std::sin(2.0 * t);
    const double p1 = std::abs(mu_k - 2.0 * a / (s * s)), p2 = 8.0 * a * std::abs(std::cos(2.0 * t)) / (s * s * s);
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
      const double s = std::sin(2.0 * t);
      acc += q.w[i] * v * std::pow(s, -0.5 * d) * std::polar(1.0, a * std::cos(2.0 * t) / s + mu_k * t);
    }
    return pref * acc;
  };
  cplx prev = integrate(br);
  const double noise = 1e3 * std::numeric_limits<double>::epsilon() * std::abs(pref) * star_mass(d);
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
  throw NonConvergence("hermite gk_quadrature: panel doubling did not settle at r = " + io::num(r));
}

namespace {

// eigenvalues mu = 4m + d within the window, with their coefficients phi*^v(mu_k - mu)
void gk_window(int d, int mu_k, int half_width, std::vector<int>& ms, std::vector<cplx>& co) {
  const int mk = half_index(d, mu_k) / 2;
  const int w = half_width / 4;
  for (int m = std::max(0, mk - w); m <= mk + w; ++m) {
    ms.push_back(m);
    co.push_back(phi_star_inverse(double(mu_k - (4 * m + d))));
  }
}

}  // namespace

cplx gk_spectral(int d, int mu_k, double r, int half_width) {
  require(half_width >= 0 && half_width <= 8000, "hermite gk_spectral: half width out of range");
  std::vector<int> ms;
  std::vector<cplx> co;
  gk_window(d, mu_k, half_width, ms, co);
  const auto l = laguerre::laguerre_exp_sequence(0.5 * d - 1.0, ms.back(), r * r);
  const double c = std::pow(kPi, -0.5 * d);
  cplx s = 0.0;
  for (std::size_t i = ms.size(); i-- > 0;) s += co[i] * (c * l[ms[i]]);
  return s;
}

namespace {

riesz::SpectralSamples origin_samples(int d, const std::vector<int>& ms, const std::vector<cplx>& co,
                                      const std::vector<double>& radii, const std::vector<double>& weights) {
  require(radii.size() == weights.size(), "hermite samples: size mismatch");
  riesz::SpectralSamples f;
  f.d = d;
  for (int m : ms) f.mu.push_back(4.0 * m + d);
  f.radius = radii;
  f.weight = weights;
  const std::size_t P = radii.size(), T = ms.size();
  f.re.resize(P, T);
  f.im.resize(P, T);
  const double c = std::pow(kPi, -0.5 * d);
  for (std::size_t i = 0; i < P; ++i) {
    const auto l = laguerre::laguerre_exp_sequence(0.5 * d - 1.0, ms.back(), radii[i] * radii[i]);
    for (std::size_t j = 0; j < T; ++j) {
      const cplx v = co[j] * (c * l[ms[j]]);
      f.re(i, j) = v.real();
      f.im(i, j) = v.imag();
    }
  }
  return f;
}

}  // namespace

riesz::SpectralSamples gk_samples(int d, int mu_k, const std::vector<double>& radii, const std::vector<double>& weights,
                                  int half_width, cplx scale) {
  std::vector<int> ms;
  std::vector<cplx> co;
  gk_window(d, mu_k, half_width, ms, co);
  for (auto& c : co) c *= scale;
  return origin_samples(d, ms, co, radii, weights);
}

double smooth_weight(double beta, double r) { return std::pow(1.0 + r, -beta); }

double weighted_lp_norm(const std::vector<double>& radii, const std::vector<double>& weights,
                        const std::vector<cplx>& values, double beta, double p) {
  require(radii.size() == values.size() && weights.size() == values.size(), "hermite weighted_lp_norm: size mismatch");
  require(p >= 1.0, "hermite weighted_lp_norm: p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m = std::max(m, smooth_weight(beta, radii[i]) * std::abs(values[i]));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    s += std::pow(smooth_weight(beta, radii[i]) * std::abs(values[i]), p) * weights[i];
  return std::pow(s, 1.0 / p);
}

double norm_exponent(int d, double p, double beta) { return (std::isinf(p) ? 0.0 : d / (2.0 * p)) - 0.5 - 0.5 * beta; }

counterexample::CounterexampleSeq geometric_sequence(int d, int mu0, int K, double p, double beta, double delta) {
  require(mu0 >= 1 && K >= 1, "hermite geometric_sequence: mu0, K >= 1");
  counterexample::CounterexampleSeq s;
  s.d = d;
  s.p = p;
  s.beta = beta;
  s.delta = delta;
  long long m = mu0;
  for (int k = 1; k <= K; ++k) {
    m *= 4;
    s.mu.push_back(int(m + d));
  }
  return s;
}

void validate_sequence(const counterexample::CounterexampleSeq& seq) {
  require(seq.d >= 1, "hermite sequence: d >= 1");
  require(!seq.mu.empty(), "hermite sequence: empty");
  for (std::size_t k = 0; k < seq.mu.size(); ++k) {
    half_index(seq.d, seq.mu[k]);
    if (k > 0) require(seq.mu[k] >= 4 * seq.mu[k - 1] - 3 * seq.d, "hermite sequence: spacing mu_{k+1}/mu_k >= 4");
  }
  require(seq.p >= 1.0 && seq.beta >= 0.0 && seq.delta >= 0.0, "hermite sequence: bad p, beta or delta");
  const double den = seq.d - 1.0 + 2.0 * seq.beta;
  require(den > 0.0, "hermite sequence: need d - 1 + 2 beta > 0");
  require(std::isinf(seq.p) || seq.p > 2.0 * seq.d / den, "hermite sequence: p must exceed 2d/(d-1+2 beta)");
}

counterexample::DivergenceTable divergence_experiment(const counterexample::CounterexampleSeq& seq,
                                                      const counterexample::DivergenceOptions& opt) {
  validate_sequence(seq);
  const int d = seq.d, K = int(seq.mu.size());
  counterexample::DivergenceTable tab;
  tab.gamma = riesz::critical_gamma(seq.p, d, seq.beta);

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

  // annulus 1 < |x| <= 2
  const double h = opt.spacing_factor / std::sqrt(double(seq.mu.back()));
  const int na = int(std::ceil(1.0 / h));
  std::vector<double> rs(na), ws(na);
  for (int i = 0; i < na; ++i) {
    rs[i] = 1.0 + (i + 0.5) / na;
    ws[i] = radial_density(d, rs[i]) / na;
    tab.annulus_measure += ws[i];
  }
  std::map<int, cplx> coeff;
  for (int j = 0; j < K; ++j) {
    std::vector<int> ms;
    std::vector<cplx> co;
    gk_window(d, seq.mu[j], opt.half_width, ms, co);
    const double a = std::ldexp(1.0, -(j + 1)) / tab.norms[j];
    for (std::size_t i = 0; i < ms.size(); ++i) coeff[ms[i]] += a * co[i];
  }
  std::vector<int> ms;
  std::vector<cplx> cs;
  for (const auto& [m, c] : coeff) {
    ms.push_back(m);
    cs.push_back(c);
  }
  const riesz::SpectralSamples f = origin_samples(d, ms, cs, rs, ws);
  const auto tgrid = riesz::riesz_t_grid(f.mu, opt.t_max_factor * std::sqrt(f.mu.back()));
  const riesz::MaximalResult mx = riesz::maximal_riesz(seq.delta, f, tgrid);
  tab.gap = mx.gap;
  tab.maximal_min = *std::min_element(mx.value.begin(), mx.value.end());
  tab.maximal_max = *std::max_element(mx.value.begin(), mx.value.end());

  const double thr_delta = opt.threshold_delta < 0 ? seq.delta : opt.threshold_delta;
  const double cn = std::pow(kPi, -0.5 * d);
  for (int k = 0; k < K; ++k) {
    counterexample::DivergenceRow row;
    row.k = k + 1;
    row.mu_k = seq.mu[k];
    const int m = half_index(d, seq.mu[k]) / 2;
    double pmax = 0.0;
    for (double r : rs) pmax = std::max(pmax, std::abs(cn * laguerre::laguerre_exp({m, 0.5 * d - 1.0}, r * r)));
    double cross = 0.0;
    for (int j = 0; j < K; ++j) {
      const double v = std::ldexp(1.0, -(j + 1)) * std::abs(phi_star_inverse(seq.mu[j] - seq.mu[k])) / tab.norms[j];
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
    row.threshold =
        0.5 * tab.main_const * std::ldexp(1.0, -row.k) * std::pow(double(row.mu_k), -thr_delta + tab.gamma / 2.0);
    for (int i = 0; i < na; ++i)
      if (mx.value[i] >= row.threshold) row.measure_proxy += ws[i];
  }
  return tab;
}

// ---- phase lower bound

PhaseSample verify_phase_lower_bound(double mu, double t, const Point& x, const Point& y, int j, int n_tilde,
                                     double constant, double pre) {
  require(x.size() == y.size() && !x.empty(), "verify_phase_lower_bound: dimension mismatch");
  require(mu > 0.0 && constant > 0.0 && pre > 0.0, "verify_phase_lower_bound: bad arguments");
  PhaseSample out;
  double dxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dxy += (x[i] - y[i]) * (x[i] - y[i]);
  out.bound = constant * std::ldexp(1.0, 2 * j) * dxy;
  if (dxy == 0.0) return out;
  const double tj = std::ldexp(1.0, -j);
  const double at = std::abs(t);
  if (tj > pre * std::sqrt(dxy / mu)) return out;
  if (at < std::exp2(1.1) * tj || at > std::exp2(2.9) * tj) return out;
  if (kernels::CutoffBank{}.eta_star(t) <= 0.0 || std::sin(t) == 0.0) return out;
  out.derivative = std::abs(0.5 * mu - phase_neg_dt(t, x, y, n_tilde));
  out.verdict = out.derivative >= out.bound ? BoundCheck::holds : BoundCheck::fails;
  return out;
}

PhaseSweep phase_lower_bound_sweep(int d, double mu, int n_tilde, int samples, std::uint64_t seed, double constant) {
  require(d >= 1 && mu > 0.0 && samples > 0, "phase_lower_bound_sweep: bad arguments");
  std::mt19937_64 rng(seed);
  const double L = 2.0 * std::sqrt(mu);
  std::uniform_real_distribution<double> coord(-L, L), unit(0.0, 1.0);
  const double pre = 0.125;
  PhaseSweep out;
  out.samples = samples;
  out.worst_ratio = kInf;
  for (int s = 0; s < samples; ++s) {
    Point x(d), y(d);
    for (int i = 0; i < d; ++i) {
      x[i] = coord(rng);
      y[i] = coord(rng);
    }
    double dxy = 0.0;
    for (int i = 0; i < d; ++i) dxy += (x[i] - y[i]) * (x[i] - y[i]);
    if (dxy == 0.0) continue;
    // smallest j meeting the separation condition, plus up to four more octaves
    const int j0 = int(std::ceil(std::log2(std::sqrt(mu / dxy) / pre)));
    const int j = std::max(j0, 0) + int(unit(rng) * 5.0);
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    const double t = sign * std::exp2(1.1 + 1.8 * unit(rng) - j);
    const PhaseSample ps = verify_phase_lower_bound(mu, t, x, y, j, n_tilde, constant, pre);
    if (ps.verdict == BoundCheck::not_applicable) continue;
    ++out.applicable;
    out.worst_ratio = std::min(out.worst_ratio, ps.derivative / (std::ldexp(1.0, 2 * j) * dxy));
    if (ps.verdict == BoundCheck::fails) {
      ++out.failures;
      if (out.failure_log.size() < 10)
        out.failure_log.push_back("j=" + std::to_string(j) + " t=" + io::num(t) + " <x,y>=" + io::num(dot(x, y)) +
                                  " |x-y|^2=" + io::num(dxy) + " deriv=" + io::num(ps.derivative) +
                                  " bound=" + io::num(ps.bound));
    }
  }
  return out;
}

// ---- finite differences

double fd_eigen_residual(const std::vector<int>& alpha, double h, double L) {
  const int d = int(alpha.size());
  require(d >= 1 && d <= 3, "fd_eigen_residual: d in 1..3");
  require(h > 0.0 && L > 0.0, "fd_eigen_residual: h, L > 0");
  const int n = 2 * int(std::round(L / h)) + 1;
  const double lo = -0.5 * (n - 1) * h;
  // per-axis samples of the 1D factors
  std::vector<std::vector<double>> f(d, std::vector<double>(n));
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < n; ++i) f[j][i] = basis::hermite_fn(alpha[j], lo + i * h);
  int lam = d;
  for (int a : alpha) lam += 2 * a;
  // H of a tensor product splits into 1D pieces: sum_j (-f_j'' + x_j^2 f_j) prod_{k != j} f_k
  std::vector<std::vector<double>> hf(d, std::vector<double>(n, 0.0));
  for (int j = 0; j < d; ++j)
    for (int i = 1; i + 1 < n; ++i) {
      const double x = lo + i * h;
      hf[j][i] = -(f[j][i + 1] - 2.0 * f[j][i] + f[j][i - 1]) / (h * h) + x * x * f[j][i];
    }
  double worst = 0.0;
  std::vector<int> idx(d, 1);
  while (true) {
    double val = 1.0, hv = 0.0;
    for (int j = 0; j < d; ++j) val *= f[j][idx[j]];
    for (int j = 0; j < d; ++j) {
      double p = hf[j][idx[j]];
      for (int k = 0; k < d; ++k)
        if (k != j) p *= f[k][idx[k]];
      hv += p;
    }
    worst = std::max(worst, std::abs(hv - lam * val));
    int a = 0;
    while (a < d && ++idx[a] == n - 1) idx[a++] = 1;
    if (a == d) break;
  }
  return worst;
}

}  // namespace twistlap::hermite
