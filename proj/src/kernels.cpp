#include "twistlap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "twistlap/quadrature.hpp"
#include "twistlap/spectral.hpp"

namespace twistlap::kernels {

namespace {

double g_exp(double v) { return v > 0.0 ? std::exp(-1.0 / v) : 0.0; }

}  // namespace

double smooth_step(double w, double u) {
  if (u <= -w) return 0.0;
  if (u >= w) return 1.0;
  const double a = g_exp(w + u), b = g_exp(w - u);
  return a / (a + b);
}

double CutoffBank::phi_star(double t) const {
  if (t <= 0.0) return 0.0;
  const double l = std::log2(t);
  return smooth_step(0.4, l + 2.5) - smooth_step(0.4, l + 1.5);
}

double CutoffBank::phi_k(int k, double rho, double t) const {
  require(k >= 1, "phi_k: k >= 1");
  const double u = std::ldexp(t, k);
  const double p = phi_star(u);
  return p == 0.0 ? 0.0 : std::pow(u, rho) * p;
}

double CutoffBank::phi_0(double rho, double t) const {
  if (t <= 0.0) return 0.0;
  const double s = smooth_step(0.4, std::log2(t) + 2.5);
  return s == 0.0 ? 0.0 : std::pow(t, rho) * s;
}

double CutoffBank::eta(double x) const {
  const double q = 1.0 - 0.25 * x * x;
  return q > 0.0 ? std::exp(1.0 - 1.0 / q) : 0.0;
}

double CutoffBank::eta_star(double t) const {
  return smooth_step(0.125, t + kPi / 2) * smooth_step(0.125, kPi / 2 - t);
}

double CutoffBank::psi(double t) const {
  if (t == 0.0) return 0.0;
  const double l = std::log2(std::abs(t));
  return smooth_step(0.4, l - 1.5) - smooth_step(0.4, l - 2.5);
}

double CutoffBank::varphi(double t) const { return smooth_step(0.25, t + 0.5) * smooth_step(0.25, 0.5 - t); }

double CutoffBank::kappa(double t) const { return smooth_step(0.5, 1.5 - t); }

CutoffBank smooth_bump_bank() { return {}; }

double Eta::operator()(double x) const { return amplitude * CutoffBank{}.eta(x); }

// ---- eta_hat Taylor table

namespace {

constexpr double kXiMax = 600.0;
constexpr double kXiStep = 0.25;
constexpr int kOrders = 26;

struct HatTable {
  std::vector<double> d;  // d[i * kOrders + k] = k-th derivative at xi_i
  int n = 0;
};

const HatTable& hat_table() {
  static HatTable tab;
  static std::once_flag once;
  std::call_once(once, [] {
    const quad::Rule r = quad::composite(0.0, 2.0, 100, 20);
    const CutoffBank bank;
    std::vector<double> ex(r.x.size());
    for (std::size_t q = 0; q < r.x.size(); ++q) ex[q] = 2.0 * r.w[q] * bank.eta(r.x[q]);
    tab.n = int(kXiMax / kXiStep) + 2;
    tab.d.assign(std::size_t(tab.n) * kOrders, 0.0);
    std::vector<double> pc(kOrders), ps(kOrders);
    for (int i = 0; i < tab.n; ++i) {
      const double xi = i * kXiStep;
      std::fill(pc.begin(), pc.end(), 0.0);
      std::fill(ps.begin(), ps.end(), 0.0);
      for (std::size_t q = 0; q < r.x.size(); ++q) {
        const double x = r.x[q];
        double c = ex[q] * std::cos(x * xi), s = ex[q] * std::sin(x * xi);
        for (int k = 0; k < kOrders; ++k) {
          pc[k] += c;
          ps[k] += s;
          c *= x;
          s *= x;
        }
      }
      // int eta (-ix)^k e^{-i x xi}: even k keeps the cosine part, odd k the sine part
      for (int k = 0; k < kOrders; ++k) {
        const int m = k % 4;
        double v;
        if (k % 2 == 0)
          v = (m == 0 ? 1.0 : -1.0) * pc[k];
        else
          v = (m == 1 ? -1.0 : 1.0) * ps[k];
        tab.d[std::size_t(i) * kOrders + k] = v;
      }
    }
  });
  return tab;
}

}  // namespace

double eta_hat_cutoff() { return kXiMax; }

cplx eta_hat(cplx xi) {
  if (xi.real() < 0.0) xi = -xi;  // even
  require(std::abs(xi.imag()) <= 0.6, "eta_hat: |Im xi| too large for the Taylor table");
  if (xi.real() > kXiMax) return 0.0;
  const HatTable& t = hat_table();
  const int i = int(std::lround(xi.real() / kXiStep));
  const cplx delta = xi - cplx(i * kXiStep, 0.0);
  const double* dk = &t.d[std::size_t(i) * kOrders];
  // |D_k| <= 2^k eta_hat(0); drop terms below 1e-18 of that
  const double q = 2.0 * std::abs(delta);
  int top = 0;
  for (double term = 1.0; top < kOrders - 1 && term > 1e-18;) term *= q / ++top;
  cplx s = dk[top];
  for (int k = top - 1; k >= 0; --k) s = dk[k] + s * delta / double(k + 1);
  return s;
}

// ---- phase and propagator

double phase_L(double t, const ComplexPoint& z, const ComplexPoint& zp) {
  return basis::dist2(z, zp) * std::cos(t) / (4.0 * std::sin(t)) + 0.5 * basis::symplectic(z, zp);
}

double phase_L_dt(double t, const ComplexPoint& z, const ComplexPoint& zp) {
  const double s = std::sin(t);
  return -basis::dist2(z, zp) / (4.0 * s * s);
}

cplx abel_propagator_sum(cplx tau, const ComplexPoint& z, const ComplexPoint& zp, int nmax) {
  require(tau.imag() < 0.0, "abel_propagator_sum: need Im tau < 0");
  const int d = z.dim();
  const auto p = spectral::projection_kernel_sequence(d, nmax, z, zp);
  cplx s = 0.0;
  for (int n = nmax; n >= 0; --n) s += std::exp(-kI * tau * double(2 * n + d)) * p[n];
  return s;
}

namespace {

cplx kernel_shape(cplx tau, const ComplexPoint& z, const ComplexPoint& zp) {
  const int d = z.dim();
  const cplx sn = std::sin(tau);
  const cplx ph = basis::dist2(z, zp) * std::cos(tau) / (4.0 * sn) + 0.5 * basis::symplectic(z, zp);
  return std::pow(sn, -d) * std::exp(kI * ph);
}

Calibration calibrate(int d) {
  Calibration c;
  c.d = d;
  c.closed_form = std::pow(4.0 * kPi * kI, -d);
  ComplexPoint z1{std::vector<double>(d, 0.3), std::vector<double>(d, -0.2)};
  ComplexPoint z2{std::vector<double>(d, -0.5), std::vector<double>(d, 0.7)};
  const cplx t1(kPi / 3, -0.2), t2(2.0, -0.3);
  // e^{-0.4 N} below 1e-80 at N = 460
  const cplx c1 = abel_propagator_sum(t1, z1, z2, 460) / kernel_shape(t1, z1, z2);
  const cplx c2 = abel_propagator_sum(t2, z2, z1, 460) / kernel_shape(t2, z2, z1);
  c.constant = c1;
  c.spread = std::abs(c1 - c2) / std::abs(c1);
  c.residual = std::abs(c1 - c.closed_form) / std::abs(c.closed_form);
  return c;
}

}  // namespace

const Calibration& propagator_calibration(int d) {
  require(d >= 1 && d <= 4, "propagator_calibration: d in 1..4");
  static std::mutex mu;
  static std::map<int, Calibration> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, calibrate(d)).first;
  return it->second;
}

cplx propagator_kernel(double t, const ComplexPoint& z, const ComplexPoint& zp) {
  require(z.dim() == zp.dim(), "propagator_kernel: dimension mismatch");
  const double m = std::remainder(t, kPi);
  if (std::abs(m) < 1e-9) throw DomainError("propagator_kernel: t too close to pi Z");
  return propagator_calibration(z.dim()).constant * kernel_shape(t, z, zp);
}

cplx propagator_kernel(cplx tau, const ComplexPoint& z, const ComplexPoint& zp) {
  require(z.dim() == zp.dim(), "propagator_kernel: dimension mismatch");
  require(tau.imag() <= 0.0, "propagator_kernel: need Im tau <= 0");
  if (tau.imag() == 0.0) return propagator_kernel(tau.real(), z, zp);
  return propagator_calibration(z.dim()).constant * kernel_shape(tau, z, zp);
}

// ---- multiplier kernels

cplx multiplier_kernel_spectral(const Eta& eta, int d, double mu, double R, const ComplexPoint& w,
                                const ComplexPoint& z) {
  require(R > 0.0, "multiplier kernel: R > 0");
  require(w.dim() == d && z.dim() == d, "multiplier kernel: dimension mismatch");
  const double hi = mu + 2.0 * R;
  if (hi <= d) return 0.0;
  const int nmax = int(std::ceil((hi - d) / 2.0));
  const auto p = spectral::projection_kernel_sequence(d, nmax, w, z);
  cplx s = 0.0;
  for (int n = nmax; n >= 0; --n) {
    const double x = (mu - (2.0 * n + d)) / R;
    if (std::abs(x) >= 2.0) continue;
    s += eta(x) * p[n];
  }
  return s;
}

PathRule path_rule(double h, const std::function<double(cplx)>& freq, int order, int split) {
  require(h > 0.0 && order >= 2 && split >= 1, "path_rule: bad arguments");
  const quad::Rule& gl = quad::gauss_legendre(order);
  PathRule out;
  auto width = [&](cplx s) { return std::min(0.2, kPi / (4.0 * std::max(freq(s), 1e-300))); };
  auto emit_panel = [&](auto param, auto deriv, double a, double b) {
    for (int k = 0; k < split; ++k) {
      const double lo = a + (b - a) * k / split, hi = a + (b - a) * (k + 1) / split;
      const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
      for (std::size_t q = 0; q < gl.x.size(); ++q) {
        const double u = c + r * gl.x[q];
        out.s.push_back(param(u));
        out.w.push_back(deriv(u) * (r * gl.w[q]));
      }
    }
  };
  auto real_param = [](double u) { return cplx(u, 0.0); };
  auto real_deriv = [](double) { return cplx(1.0, 0.0); };
  auto ell = [h](double th) { return cplx(-kPathS0 * std::cos(th), -h * std::sin(th)); };
  auto ell_d = [h](double th) { return cplx(kPathS0 * std::sin(th), -h * std::cos(th)); };
  auto march_real = [&](double a, double b) {
    double u = a;
    while (u < b) {
      double step = width(cplx(u, 0.0));
      // look ahead so the panel width also fits at its right end
      step = std::min(step, width(cplx(std::min(u + step, b), 0.0)));
      const double v = std::min(b, u + step);
      emit_panel(real_param, real_deriv, u, v);
      u = v;
    }
  };
  march_real(-kPathEnd, -kPathS0);
  double th = 0.0;
  while (th < kPi) {
    double step = std::min(0.2, width(ell(th)) / std::abs(ell_d(th)));
    const double th2 = std::min(kPi, th + step);
    step = std::min(step, width(ell(th2)) / std::abs(ell_d(th2)));
    const double v = std::min(kPi, th + step);
    emit_panel(ell, ell_d, th, v);
    th = v;
  }
  march_real(kPathS0, kPathEnd);
  return out;
}

cplx periodized_eta_hat(const Eta& eta, cplx s, double R, double mu, int d) {
  const double cut = eta_hat_cutoff();
  const int nlo = int(std::ceil((-cut / R - s.real()) / kPi));
  const int nhi = int(std::floor((cut / R - s.real()) / kPi));
  cplx acc = 0.0;
  // e^{i n pi (mu + d)} carries the sign (-1)^{nd}
  const double th = kPi * (mu + d);
  cplx rot = std::polar(1.0, nlo * th);
  const cplx step = std::polar(1.0, th);
  for (int n = nlo; n <= nhi; ++n) {
    if ((n - nlo) % 64 == 0) rot = std::polar(1.0, n * th);
    acc += rot * eta.hat(R * (s + n * kPi));
    rot *= step;
  }
  return acc;
}

double eta_R(const Eta& eta, double t, double R, double mu, int d) {
  const double es = CutoffBank{}.eta_star(t);
  if (es == 0.0) return 0.0;
  return std::real(periodized_eta_hat(eta, t, R, mu, d)) * es / (2.0 * kPi);
}

namespace {

// eta_R on the path: eta* is 1 on the ellipse
cplx eta_R_path(const Eta& eta, cplx s, double R, double mu, int d) {
  double es = 1.0;
  if (s.imag() == 0.0 && std::abs(s.real()) > kPathS0) es = CutoffBank{}.eta_star(s.real());
  if (es == 0.0) return 0.0;
  return periodized_eta_hat(eta, s, R, mu, d) * es / (2.0 * kPi);
}

// amplitude cut: e^{-a Im cot s} below e^{-45} needs no resolution
double cot_freq(cplx s, double amax) {
  const cplx sn = std::sin(s);
  const cplx ct = std::cos(s) / sn;
  double a = amax;
  if (ct.imag() > 0.0) a = std::min(a, 45.0 / ct.imag());
  return a / std::norm(sn);
}

}  // namespace

OscillatoryMultiplier::OscillatoryMultiplier(const Eta& eta, int d, double mu, double R, double max_sep,
                                             const OscOptions& opt)
    : d_(d), max_a_(0.25 * max_sep * max_sep), opt_(opt) {
  require(d >= 1, "OscillatoryMultiplier: d >= 1");
  require(R > 0.0, "OscillatoryMultiplier: R > 0");
  require(max_sep >= 0.0, "OscillatoryMultiplier: negative separation");
  const double h = 1.0 / (std::abs(mu) + 2.0 * R + 1.0);
  const double amax = max_a_;
  auto freq = [&](cplx s) { return std::abs(mu) + 2.0 * R + 2.0 * d / std::abs(std::sin(s)) + cot_freq(s, amax); };
  const cplx cd = propagator_calibration(d).constant;
  auto fill = [&](Precomputed& p, int split) {
    const PathRule rule = path_rule(h, freq, opt.order, split);
    p.s = rule.s;
    p.g.resize(rule.s.size());
    p.cot.resize(rule.s.size());
    for (std::size_t j = 0; j < rule.s.size(); ++j) {
      const cplx s = rule.s[j];
      const cplx sn = std::sin(s);
      p.cot[j] = std::cos(s) / sn;
      p.g[j] = cd * R * rule.w[j] * eta_R_path(eta, s, R, mu, d) * std::exp(kI * s * mu) * std::pow(sn, -d);
    }
  };
  fill(base_, 1);
  if (opt.check) fill(fine_, 2);
  diag_ = integrate(opt.check ? fine_ : base_, 0.0);
  for (const cplx& g : base_.g) mass_ += std::abs(g);
}

cplx OscillatoryMultiplier::integrate(const Precomputed& p, double a) const {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < p.s.size(); ++j) {
    const double decay = -a * p.cot[j].imag();
    if (decay < -745.0) continue;
    acc += p.g[j] * std::exp(decay) * std::polar(1.0, a * p.cot[j].real());
  }
  return acc;
}

cplx OscillatoryMultiplier::operator()(const ComplexPoint& w, const ComplexPoint& z) const {
  require(w.dim() == d_ && z.dim() == d_, "OscillatoryMultiplier: dimension mismatch");
  const double a = 0.25 * basis::dist2(w, z);
  require(a <= max_a_ * (1.0 + 1e-12) + 1e-300, "OscillatoryMultiplier: separation beyond the precomputed range");
  const cplx tw = std::polar(1.0, 0.5 * basis::symplectic(w, z));
  const cplx i1 = integrate(base_, a);
  if (!opt_.check) {
    last_error_ = 0.0;
    return tw * i1;
  }
  const cplx i2 = integrate(fine_, a);
  last_error_ = std::abs(i1 - i2);
  const double scale = std::max({std::abs(i2), 1e-3 * std::abs(diag_), 1e-10 * mass_});
  if (last_error_ > opt_.tol * scale)
    throw NonConvergence("oscillatory multiplier: panel refinement changed the value by " + std::to_string(last_error_));
  return tw * i2;
}

cplx multiplier_kernel_oscillatory(const Eta& eta, int d, double mu, double R, const ComplexPoint& w,
                                   const ComplexPoint& z, const OscOptions& opt) {
  const OscillatoryMultiplier k(eta, d, mu, R, std::sqrt(basis::dist2(w, z)), opt);
  return k(w, z);
}

// ---- decay reports

nlohmann::ordered_json DecayReport::to_json() const {
  nlohmann::ordered_json j;
  j["case"] = case_name;
  j["operator"] = op;
  j["d"] = d;
  j["mu"] = mu;
  j["R"] = R;
  j["requested_N"] = requested_N;
  j["fitted_N"] = fitted_N;
  j["fitted_C"] = fitted_C;
  j["n_samples"] = n_samples;
  j["tol"] = tol;
  j["pass"] = pass;
  return j;
}

std::string decay_case(double mu, double R) {
  require(R > 0.0 && mu > 0.0, "decay_case: mu, R > 0");
  if (R >= mu) return "i";
  if (R >= 1.0) return "ii";
  return "iii";
}

double decay_scale(double mu, double R) {
  const std::string c = decay_case(mu, R);
  if (c == "i") return 1.0 / std::sqrt(R);
  if (c == "ii") return std::sqrt(mu) / R;
  return std::sqrt(mu);
}

std::vector<double> default_decay_radii(double mu, double R, int n) {
  const double s = decay_scale(mu, R);
  std::vector<double> r(n);
  // out past the turning point 2 (mu + 2R)^{1/2}, where the kernel drops into its exponential tail
  const double top = std::max(60.0 * s, 2.5 * std::sqrt(mu + 2.0 * R) + 8.0);
  for (int i = 0; i < n; ++i) r[i] = 2.0 * s * std::pow(top / (2.0 * s), double(i) / (n - 1));
  return r;
}

DecayReport fit_decay(const std::vector<double>& radii, const std::vector<double>& values, double scale,
                      double prefactor, double value_floor, double requested_N) {
  require(radii.size() == values.size(), "fit_decay: size mismatch");
  DecayReport rep;
  rep.requested_N = requested_N;
  // upper envelope: sup over r' >= r
  std::vector<std::size_t> idx(radii.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });
  std::vector<double> env(idx.size());
  double run = 0.0;
  for (std::size_t k = idx.size(); k-- > 0;) {
    run = std::max(run, values[idx[k]]);
    env[k] = run;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double rho = radii[idx[k]] / scale;
    const double e = prefactor * std::pow(1.0 + rho, -requested_N);
    rep.fitted_C = std::max(rep.fitted_C, values[idx[k]] / e);
    if (env[k] <= value_floor) continue;
    const double x = std::log(1.0 + rho), y = std::log(env[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  rep.n_samples = n;
  if (n < 3) throw DomainError("decay fit: fewer than 3 admissible radii above the noise floor");
  const double den = n * sxx - sx * sx;
  rep.fitted_N = den > 0.0 ? -(n * sxy - sx * sy) / den : 0.0;
  rep.pass = rep.fitted_N >= requested_N;
  return rep;
}

DecayReport verify_multiplier_decay(const Eta& eta, int d, double mu, double R, const std::vector<double>& radii,
                                    double requested_N, double tol) {
  const double scale = decay_scale(mu, R);
  const ComplexPoint o{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  const double k0 = std::abs(multiplier_kernel_spectral(eta, d, mu, R, o, o));
  std::vector<double> rs, vs;
  for (double r : radii) {
    if (r < 2.0 * scale) continue;
    ComplexPoint z = o;
    z.x[0] = r;
    rs.push_back(r);
    vs.push_back(std::abs(multiplier_kernel_spectral(eta, d, mu, R, o, z)));
  }
  const std::string c = decay_case(mu, R);
  const double pref = c == "iii" ? 1.0 : std::pow(R, d);
  DecayReport rep = fit_decay(rs, vs, scale, pref, 10.0 * tol * std::max(k0, 1e-300), requested_N);
  rep.case_name = c;
  rep.d = d;
  rep.mu = mu;
  rep.R = R;
  rep.tol = tol;
  return rep;
}

}  // namespace twistlap::kernels
