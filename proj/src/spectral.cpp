#include "twistlap/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "twistlap/io.hpp"
#include "twistlap/laguerre.hpp"
#include "twistlap/quadrature.hpp"

namespace twistlap::spectral {

Eigenvalue Eigenvalue::from_mu(int d, int mu) {
  require(d >= 1, "Eigenvalue: d must be >= 1");
  require(mu >= d && (mu - d) % 2 == 0, "Eigenvalue: mu must lie in 2N_0 + d");
  return {d, (mu - d) / 2};
}

void Eigenvalue::validate() const {
  require(d >= 1 && N >= 0, "Eigenvalue: need d >= 1 and N >= 0");
}

namespace {

double twist_phase(const ComplexPoint& w, const ComplexPoint& z) { return 0.5 * basis::symplectic(w, z); }

}  // namespace

cplx projection_kernel(Eigenvalue ev, const ComplexPoint& w, const ComplexPoint& z) {
  ev.validate();
  require(w.dim() == ev.d && z.dim() == ev.d, "projection_kernel: dimension mismatch");
  const double x = 0.5 * basis::dist2(w, z);
  const double rad = laguerre::laguerre_exp({ev.N, double(ev.d - 1)}, x);
  return std::pow(2.0 * kPi, -ev.d) * rad * std::polar(1.0, twist_phase(w, z));
}

std::vector<cplx> projection_kernel_sequence(int d, int nmax, const ComplexPoint& w, const ComplexPoint& z) {
  require(d >= 1 && nmax >= 0, "projection_kernel_sequence: bad arguments");
  require(w.dim() == d && z.dim() == d, "projection_kernel_sequence: dimension mismatch");
  const auto rad = laguerre::laguerre_exp_sequence(double(d - 1), nmax, 0.5 * basis::dist2(w, z));
  const cplx ph = std::pow(2.0 * kPi, -d) * std::polar(1.0, twist_phase(w, z));
  std::vector<cplx> out(nmax + 1);
  for (int n = 0; n <= nmax; ++n) out[n] = rad[n] * ph;
  return out;
}

cplx projection_kernel_eigensum(Eigenvalue ev, const ComplexPoint& w, const ComplexPoint& z, int amax) {
  ev.validate();
  require(ev.d <= 2, "projection_kernel_eigensum: d <= 2");
  require(w.dim() == ev.d && z.dim() == ev.d, "projection_kernel_eigensum: dimension mismatch");
  cplx s = 0.0;
  if (ev.d == 1) {
    for (int a = 0; a <= amax; ++a)
      s += basis::special_hermite_1d(a, ev.N, w.coord(0)) * std::conj(basis::special_hermite_1d(a, ev.N, z.coord(0)));
    return s;
  }
  for (int b1 = 0; b1 <= ev.N; ++b1) {
    const int b2 = ev.N - b1;
    cplx s1 = 0.0, s2 = 0.0;
    for (int a = 0; a <= amax; ++a) {
      s1 += basis::special_hermite_1d(a, b1, w.coord(0)) * std::conj(basis::special_hermite_1d(a, b1, z.coord(0)));
      s2 += basis::special_hermite_1d(a, b2, w.coord(1)) * std::conj(basis::special_hermite_1d(a, b2, z.coord(1)));
    }
    s += s1 * s2;
  }
  return s;
}

Field project_by_kernel(Eigenvalue ev, const Field& f) {
  ev.validate();
  f.grid.validate();
  require(ev.d == 1 && f.grid.d == 1, "project_by_kernel: d = 1 only");
  const Grid& g = f.grid;
  if (g.h > kPi / (2.0 * std::sqrt(double(ev.mu()))))
    throw DomainError("project_by_kernel: aliasing, spacing " + io::num(g.h) + " exceeds pi/(2 mu^{1/2})");
  const int nx = g.n[0], ny = g.n[1];
  const double h = g.h;
  const double c = 1.0 / (2.0 * kPi);
  // radial kernel on integer offsets
  std::vector<double> kt(std::size_t(nx) * ny);
  for (int di = 0; di < nx; ++di)
    for (int dj = 0; dj < ny; ++dj)
      kt[std::size_t(di) * ny + dj] =
          c * laguerre::laguerre_exp({ev.N, 0.0}, 0.5 * h * h * (double(di) * di + double(dj) * dj));
  std::vector<double> xs(nx), ys(ny);
  for (int i = 0; i < nx; ++i) xs[i] = g.origin[0] + i * h;
  for (int j = 0; j < ny; ++j) ys[j] = g.origin[1] + j * h;
  // e^{(i/2)(x_p y_j - y_q x_i)}
  std::vector<cplx> e1(std::size_t(nx) * ny), e2(std::size_t(ny) * nx);
  for (int p = 0; p < nx; ++p)
    for (int j = 0; j < ny; ++j) e1[std::size_t(p) * ny + j] = std::polar(1.0, 0.5 * xs[p] * ys[j]);
  for (int q = 0; q < ny; ++q)
    for (int i = 0; i < nx; ++i) e2[std::size_t(q) * nx + i] = std::polar(1.0, -0.5 * ys[q] * xs[i]);

  Field out(g);
  std::vector<cplx> fp(std::size_t(nx) * ny);
  const double w = h * h;
  for (int p = 0; p < nx; ++p) {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j)
        fp[std::size_t(i) * ny + j] = e1[std::size_t(p) * ny + j] * f.v[std::size_t(i) * ny + j];
    for (int q = 0; q < ny; ++q) {
      cplx acc = 0.0;
      for (int i = 0; i < nx; ++i) {
        const double* krow = &kt[std::size_t(std::abs(p - i)) * ny];
        const cplx* frow = &fp[std::size_t(i) * ny];
        double re = 0.0, im = 0.0;
        for (int j = 0; j < ny; ++j) {
          const double k = krow[std::abs(q - j)];
          re += k * frow[j].real();
          im += k * frow[j].imag();
        }
        acc += e2[std::size_t(q) * nx + i] * cplx(re, im);
      }
      out.v[std::size_t(p) * ny + q] = w * acc;
    }
  }
  return out;
}

ExpansionResult project_by_expansion(Eigenvalue ev, const Field& f, int alpha_cutoff, double tail_tol) {
  ev.validate();
  f.grid.validate();
  require(ev.d == 1 && f.grid.d == 1, "project_by_expansion: d = 1 only");
  require(alpha_cutoff >= 0, "project_by_expansion: negative cutoff");
  const Grid& g = f.grid;
  ExpansionResult res{Field(g), 0.0, true};
  const double fn = f.l2();
  if (fn == 0.0) return res;
  basis::EigenfunctionSpec spec{{0}, {ev.N}};
  for (int a = 0; a <= alpha_cutoff; ++a) {
    spec.alpha[0] = a;
    const Field phi = basis::sample_special_hermite(spec, g);
    const cplx c = inner(f, phi);
    if (a + 3 > alpha_cutoff) res.tail = std::max(res.tail, std::abs(c) / fn);
    for (std::size_t k = 0; k < phi.v.size(); ++k) res.field.v[k] += c * phi.v[k];
  }
  res.cutoff_ok = res.tail <= tail_tol;
  return res;
}

cplx CoefficientField::eval(cplx z) const {
  cplx s = 0.0;
  for (const auto& [ab, c] : this->c) s += c * basis::special_hermite_1d(ab.first, ab.second, z);
  return s;
}

Field CoefficientField::sample(const Grid& g) const {
  g.validate();
  require(g.d == 1, "CoefficientField::sample: d = 1 only");
  Field f(g);
  double xy[2];
  for (std::size_t k = 0; k < g.size(); ++k) {
    g.coords(k, xy);
    f.v[k] = eval({xy[0], xy[1]});
  }
  return f;
}

CoefficientField CoefficientField::project(int N) const {
  CoefficientField out;
  for (const auto& [ab, v] : c)
    if (ab.second == N) out.c[ab] = v;
  return out;
}

double CoefficientField::l2() const {
  double s = 0.0;
  for (const auto& kv : c) s += std::norm(kv.second);
  return std::sqrt(s);
}

int CoefficientField::max_b() const {
  int m = -1;
  for (const auto& kv : c) m = std::max(m, kv.first.second);
  return m;
}

CoefficientField CoefficientField::random(int amax, int bmax, std::mt19937_64& rng) {
  require(amax >= 0 && bmax >= 0, "CoefficientField::random: negative bounds");
  std::normal_distribution<double> nd;
  CoefficientField out;
  double s = 0.0;
  for (int a = 0; a <= amax; ++a)
    for (int b = 0; b <= bmax; ++b) {
      const double re = nd(rng), im = nd(rng);
      out.c[{a, b}] = {re, im};
      s += re * re + im * im;
    }
  const double inv = 1.0 / std::sqrt(s);
  for (auto& kv : out.c) kv.second *= inv;
  return out;
}

std::string_view method_name(NormMethod m) {
  switch (m) {
    case NormMethod::radial: return "radial";
    case NormMethod::svd: return "svd";
    case NormMethod::power_iteration: return "power_iteration";
  }
  return "?";
}

NormMethod parse_method(std::string_view s) {
  if (s == "radial") return NormMethod::radial;
  if (s == "svd") return NormMethod::svd;
  if (s == "power_iteration" || s == "power") return NormMethod::power_iteration;
  throw DomainError("unknown norm method: " + std::string(s));
}

namespace {

struct Window {
  std::vector<int> Ns;  // eigenvalue indices with omega != 0
  std::vector<double> w;
  double sup = 0.0;
};

Window make_window(const std::function<double(double)>& omega, int d, double mu, double sigma) {
  Window win;
  for (int N = 0;; ++N) {
    const double m = 2.0 * N + d;
    if (m >= mu + sigma) break;
    if (m <= mu - sigma) continue;
    const double v = omega(m);
    if (v == 0.0) continue;
    win.Ns.push_back(N);
    win.w.push_back(v);
    win.sup = std::max(win.sup, std::abs(v));
  }
  return win;
}

double lambda_max_psd(const Eigen::MatrixXd& a) {
  if (a.rows() == 1) return a(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Radial/block evaluation. For fixed m = alpha - beta the operator acts on span{Phi_{beta+m,beta}}
// and its restriction to the ball is the Gram matrix of normalized Laguerre functions on [0, M^2/2].
OperatorRatioReport radial_1d(const Window& win, double M, long long& nodes) {
  OperatorRatioReport r;
  const double X = 0.5 * M * M;
  const int nmax = win.Ns.empty() ? 0 : win.Ns.back();
  const int amax = nmax + int(std::ceil(X + 8.0 * std::sqrt(X) + 12.0));
  const double ell = 4.0 * nmax + 2.0 * amax + 2.0;
  const int panels = int(std::ceil(std::sqrt(ell * X) / 4.0)) + 2;
  const quad::Rule rule = quad::composite(0.0, std::sqrt(X), panels, 20);
  const std::size_t nq = rule.x.size();
  nodes = (long long)nq;
  std::vector<double> xw(nq), xx(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    xx[q] = rule.x[q] * rule.x[q];
    xw[q] = 2.0 * rule.x[q] * rule.w[q];
  }
  std::vector<std::vector<double>> S(nq);
  double best = 0.0;
  const int B = int(win.Ns.size());
  for (int a = 0; a <= amax; ++a) {
    for (std::size_t q = 0; q < nq; ++q) S[q] = laguerre::laguerre_norm_sequence(double(a), nmax, xx[q]);
    for (int sgn : {1, -1}) {
      if (a == 0 && sgn == -1) continue;
      // basis element i has Laguerre order n_i
      std::vector<int> ns;
      std::vector<double> ws;
      for (int i = 0; i < B; ++i) {
        const int n = sgn > 0 ? win.Ns[i] : win.Ns[i] - a;
        if (n < 0) continue;
        ns.push_back(n);
        ws.push_back(win.w[i]);
      }
      if (ns.empty()) continue;
      const int b = int(ns.size());
      double tr = 0.0;
      std::vector<double> diag(b, 0.0);
      for (int i = 0; i < b; ++i) {
        for (std::size_t q = 0; q < nq; ++q) diag[i] += xw[q] * S[q][ns[i]] * S[q][ns[i]];
        tr += ws[i] * ws[i] * diag[i];
      }
      if (tr <= best) continue;
      Eigen::MatrixXd G(b, b);
      for (int i = 0; i < b; ++i) {
        G(i, i) = ws[i] * ws[i] * diag[i];
        for (int j = 0; j < i; ++j) {
          double s = 0.0;
          for (std::size_t q = 0; q < nq; ++q) s += xw[q] * S[q][ns[i]] * S[q][ns[j]];
          G(i, j) = G(j, i) = ws[i] * ws[j] * s;
        }
      }
      best = std::max(best, lambda_max_psd(G));
    }
  }
  r.ratio = best;
  return r;
}

OperatorRatioReport radial_2d(const Window& win, double M, long long& nodes) {
  OperatorRatioReport r;
  const double X = 0.5 * M * M;
  const int nmax = win.Ns.empty() ? 0 : win.Ns.back();
  require(nmax <= 40, "trace ratio at d = 2 is limited to N <= 40");
  const int amax = nmax + int(std::ceil(X + 8.0 * std::sqrt(X) + 12.0));
  const double ell = 4.0 * nmax + 2.0 * amax + 2.0;
  const int panels = int(std::ceil(std::sqrt(ell * X) / 4.0)) + 2;
  // u1 = sqrt(X) sin(theta), u2 = s sqrt(X) cos(theta)
  const quad::Rule rt = quad::composite(0.0, 0.5 * kPi, panels, 20);
  const quad::Rule rs = quad::composite(0.0, 1.0, panels, 20);
  const std::size_t no = rt.x.size(), ni = rs.x.size();
  nodes = (long long)(no * ni);
  const double sx = std::sqrt(X);
  const int NA = amax + 1, NN = nmax + 1;
  std::vector<double> w1(no), T1(no * NA * NN), H(no * NA * NN * NN, 0.0);
  for (std::size_t i = 0; i < no; ++i) {
    const double u1 = sx * std::sin(rt.x[i]), c1 = sx * std::cos(rt.x[i]);
    w1[i] = 2.0 * u1 * c1 * rt.w[i];
    for (int a = 0; a < NA; ++a) {
      const auto s1 = laguerre::laguerre_norm_sequence(double(a), nmax, u1 * u1);
      std::copy(s1.begin(), s1.end(), &T1[(i * NA + a) * NN]);
    }
    for (std::size_t j = 0; j < ni; ++j) {
      const double u2 = rs.x[j] * c1;
      const double w2 = 2.0 * u2 * c1 * rs.w[j];
      for (int a = 0; a < NA; ++a) {
        const auto s2 = laguerre::laguerre_norm_sequence(double(a), nmax, u2 * u2);
        double* hb = &H[((i * NA + a) * NN) * NN];
        for (int n = 0; n < NN; ++n)
          for (int m = 0; m <= n; ++m) hb[n * NN + m] += w2 * s2[n] * s2[m];
      }
    }
    for (int a = 0; a < NA; ++a) {
      double* hb = &H[((i * NA + a) * NN) * NN];
      for (int n = 0; n < NN; ++n)
        for (int m = 0; m < n; ++m) hb[m * NN + n] = hb[n * NN + m];
    }
  }
  struct Elem {
    int n1, n2;
    double w;
  };
  double best = 0.0;
  for (int m1 = -nmax; m1 <= amax; ++m1)
    for (int m2 = -nmax; m2 <= amax; ++m2) {
      const int a1 = std::abs(m1), a2 = std::abs(m2);
      std::vector<Elem> el;
      for (std::size_t k = 0; k < win.Ns.size(); ++k)
        for (int b1 = 0; b1 <= win.Ns[k]; ++b1) {
          const int b2 = win.Ns[k] - b1;
          const int n1 = b1 + std::min(m1, 0), n2 = b2 + std::min(m2, 0);
          if (n1 >= 0 && n2 >= 0) el.push_back({n1, n2, win.w[k]});
        }
      if (el.empty()) continue;
      const int b = int(el.size());
      auto gram = [&](const Elem& p, const Elem& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < no; ++i)
          s += w1[i] * T1[(i * NA + a1) * NN + p.n1] * T1[(i * NA + a1) * NN + q.n1] *
               H[((i * NA + a2) * NN + p.n2) * NN + q.n2];
        return p.w * q.w * s;
      };
      double tr = 0.0;
      std::vector<double> diag(b);
      for (int i = 0; i < b; ++i) tr += diag[i] = gram(el[i], el[i]);
      if (tr <= best) continue;
      Eigen::MatrixXd G(b, b);
      for (int i = 0; i < b; ++i) {
        G(i, i) = diag[i];
        for (int j = 0; j < i; ++j) G(i, j) = G(j, i) = gram(el[i], el[j]);
      }
      best = std::max(best, lambda_max_psd(G));
    }
  r.ratio = best;
  return r;
}

// Nystrom on the ball with a sharp mask, d = 1. Matrix h^2 sum omega^2 P(z_i, z_j).
OperatorRatioReport nystrom_1d(const Window& win, double M, const RatioOptions& opt) {
  require(opt.h > 0.0, "Nystrom spacing must be positive");
  std::vector<ComplexPoint> pts;
  const int K = int(std::floor(M / opt.h));
  for (int i = -K; i <= K; ++i)
    for (int j = -K; j <= K; ++j) {
      const double x = i * opt.h, y = j * opt.h;
      if (x * x + y * y <= M * M) pts.push_back({{x}, {y}});
    }
  const int n = int(pts.size());
  OperatorRatioReport r;
  r.grid_n = n;
  if (win.Ns.empty() || n == 0) return r;
  const int nmax = win.Ns.back();
  Eigen::MatrixXcd A(n, n);
  const double w = opt.h * opt.h;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const auto seq = projection_kernel_sequence(1, nmax, pts[i], pts[j]);
      cplx s = 0.0;
      for (std::size_t k = 0; k < win.Ns.size(); ++k) s += win.w[k] * win.w[k] * seq[win.Ns[k]];
      A(i, j) = w * s;
      A(j, i) = std::conj(A(i, j));
    }
  if (opt.method == NormMethod::svd) {
    require(n <= opt.svd_max_side, "svd: matrix side exceeds the dense limit");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
    r.ratio = std::max(0.0, es.eigenvalues().maxCoeff());
    return r;
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = {nd(rng), nd(rng)};
  v.normalize();
  double lam = 0.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Eigen::VectorXcd av = A * v;
    const double nl = std::real(v.dot(av));
    const double nrm = av.norm();
    if (nrm == 0.0) {
      r.iterations = it;
      return r;
    }
    v = av / nrm;
    if (it > 1 && std::abs(nl - lam) <= opt.tol * std::abs(nl)) {
      r.ratio = nl;
      r.iterations = it;
      return r;
    }
    lam = nl;
  }
  throw NonConvergence("power iteration: no convergence after " + std::to_string(opt.max_iter) + " iterations");
}

OperatorRatioReport run_ratio(const Window& win, int d, double M, const RatioOptions& opt) {
  require(d == 1 || d == 2, "operator ratios need d in {1, 2}");
  require(M > 0.0, "ball radius must be positive");
  OperatorRatioReport r;
  if (opt.method == NormMethod::radial) {
    long long nodes = 0;
    r = d == 1 ? radial_1d(win, M, nodes) : radial_2d(win, M, nodes);
    r.grid_n = nodes;
  } else {
    require(d == 1, "Nystrom norms are implemented for d = 1");
    r = nystrom_1d(win, M, opt);
  }
  r.method = opt.method;
  r.d = d;
  r.M = M;
  return r;
}

}  // namespace

OperatorRatioReport trace_ratio(int d, int mu, double M, const RatioOptions& opt) {
  const Eigenvalue ev = Eigenvalue::from_mu(d, mu);
  if (d == 1) require(mu <= 600, "trace_ratio: mu <= 600 at d = 1");
  Window win{{ev.N}, {1.0}, 1.0};
  OperatorRatioReport r = run_ratio(win, d, M, opt);
  r.mu = mu;
  r.normalized_ratio = r.ratio * std::sqrt(double(mu)) / M;
  return r;
}

OperatorRatioReport band_window_ratio(const std::function<double(double)>& omega, int d, double mu, double sigma,
                                      double M, const RatioOptions& opt) {
  require(sigma > 0.0 && sigma <= mu, "band_window_ratio: need 0 < sigma <= mu");
  const Window win = make_window(omega, d, mu, sigma);
  OperatorRatioReport r = run_ratio(win, d, M, opt);
  r.mu = mu;
  r.sigma = sigma;
  const double norm = std::max(1.0, sigma) * M / std::sqrt(mu) * win.sup * win.sup;
  r.normalized_ratio = norm > 0.0 ? r.ratio / norm : 0.0;
  return r;
}

std::string ratio_csv(const std::vector<OperatorRatioReport>& rows) {
  io::Csv csv({"d", "mu", "M", "sigma", "ratio", "normalized_ratio", "method", "grid_n"});
  for (const auto& r : rows)
    csv.row({io::num((long long)r.d), io::num(r.mu), io::num(r.M), io::num(r.sigma), io::num(r.ratio),
             io::num(r.normalized_ratio), std::string(method_name(r.method)), io::num(r.grid_n)});
  return csv.str();
}

}  // namespace twistlap::spectral
