#include "twistlap/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twistlap/io.hpp"
#include "twistlap/kernels.hpp"
#include "twistlap/laguerre.hpp"

namespace twistlap::riesz {

double critical_delta(double p, double n) { return critical_gamma(p, n, 0.0); }

double critical_gamma(double p, double n, double beta) {
  require(p >= 1.0, "critical exponent: p >= 1");
  require(n >= 1.0, "critical exponent: n >= 1");
  require(beta >= 0.0, "critical exponent: beta >= 0");
  const double inv = std::isinf(p) ? 0.0 : 1.0 / p;
  return std::max(0.0, beta + n * (0.5 - inv) - 0.5);
}

int Weight::annulus(double r) {
  if (r <= 1.0) return 0;
  int e;
  const double m = std::frexp(r, &e);  // r = m 2^e, m in [1/2, 1)
  return m == 0.5 ? e - 1 : e;
}

double Weight::operator()(double r) const {
  if (alpha == 0.0) return 1.0;
  return std::exp2(-alpha * annulus(r));
}

void RieszParams::validate() const {
  require(delta >= 0.0, "RieszParams: delta >= 0");
  require(t > 0.0, "RieszParams: t > 0");
}

double riesz_symbol(double delta, double mu, double t) {
  const double x = 1.0 - mu / (t * t);
  if (x < 0.0) return 0.0;
  return delta == 0.0 ? 1.0 : std::pow(x, delta);
}

// ---- spectral samples

void SpectralSamples::validate() const {
  require(std::size_t(re.rows()) == points() && std::size_t(im.rows()) == points(), "SpectralSamples: row count");
  require(std::size_t(re.cols()) == terms() && std::size_t(im.cols()) == terms(), "SpectralSamples: column count");
  require(weight.size() == points(), "SpectralSamples: weight count");
  require(std::is_sorted(mu.begin(), mu.end()), "SpectralSamples: eigenvalues must increase");
}

std::vector<cplx> SpectralSamples::apply(const std::function<double(double)>& symbol) const {
  Eigen::VectorXd m(terms());
  for (std::size_t j = 0; j < terms(); ++j) m[j] = symbol(mu[j]);
  const Eigen::VectorXd a = re * m, b = im * m;
  std::vector<cplx> out(points());
  for (std::size_t i = 0; i < points(); ++i) out[i] = {a[i], b[i]};
  return out;
}

std::vector<cplx> SpectralSamples::total() const {
  return apply([](double) { return 1.0; });
}

namespace {

SpectralSamples grid_frame(const Grid& g, std::size_t terms) {
  SpectralSamples s;
  s.d = g.d;
  s.radius.resize(g.size());
  s.weight.assign(g.size(), g.cell());
  std::vector<double> c(g.axes());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, c.data());
    double r2 = 0.0;
    for (double v : c) r2 += v * v;
    s.radius[i] = std::sqrt(r2);
  }
  s.re.setZero(g.size(), terms);
  s.im.setZero(g.size(), terms);
  return s;
}

}  // namespace

SpectralSamples from_coefficients(const spectral::CoefficientField& cf, const Grid& g) {
  g.validate();
  require(g.d == 1, "from_coefficients: d = 1 only");
  const int nb = cf.max_b() + 1;
  require(nb > 0, "from_coefficients: empty coefficient field");
  SpectralSamples s = grid_frame(g, nb);
  for (int b = 0; b < nb; ++b) s.mu.push_back(2.0 * b + 1.0);
  double xy[2];
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, xy);
    const cplx z(xy[0], xy[1]);
    for (const auto& [ab, c] : cf.c) {
      const cplx v = c * basis::special_hermite_1d(ab.first, ab.second, z);
      s.re(i, ab.second) += v.real();
      s.im(i, ab.second) += v.imag();
    }
  }
  return s;
}

SpectralSamples decompose(const Field& f, int mu_max, int alpha_cutoff) {
  f.grid.validate();
  require(f.grid.d == 1, "decompose: d = 1 only");
  require(mu_max >= 1, "decompose: mu_max >= 1");
  const int nN = (mu_max - 1) / 2 + 1;
  SpectralSamples s = grid_frame(f.grid, nN);
  for (int N = 0; N < nN; ++N) {
    s.mu.push_back(2.0 * N + 1.0);
    const auto r = spectral::project_by_expansion({1, N}, f, alpha_cutoff);
    for (std::size_t i = 0; i < r.field.v.size(); ++i) {
      s.re(i, N) = r.field.v[i].real();
      s.im(i, N) = r.field.v[i].imag();
    }
  }
  return s;
}

SpectralSamples radial_samples(int d, const std::vector<int>& mu, const std::vector<cplx>& coeff,
                               const std::vector<double>& radii, const std::vector<double>& weights) {
  require(d >= 1, "radial_samples: d >= 1");
  require(mu.size() == coeff.size(), "radial_samples: coefficient count");
  require(radii.size() == weights.size(), "radial_samples: weight count");
  require(std::is_sorted(mu.begin(), mu.end()), "radial_samples: eigenvalues must increase");
  SpectralSamples s;
  s.d = d;
  s.radius = radii;
  s.weight = weights;
  s.re.setZero(radii.size(), mu.size());
  s.im.setZero(radii.size(), mu.size());
  int nmax = 0;
  for (int m : mu) {
    spectral::Eigenvalue::from_mu(d, m);
    nmax = std::max(nmax, (m - d) / 2);
    s.mu.push_back(m);
  }
  const double c = std::pow(2.0 * kPi, -d);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const auto l = laguerre::laguerre_exp_sequence(d - 1.0, nmax, 0.5 * radii[i] * radii[i]);
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const double p = c * l[(mu[j] - d) / 2];
      s.re(i, j) = p * coeff[j].real();
      s.im(i, j) = p * coeff[j].imag();
    }
  }
  return s;
}

Field to_field(const std::vector<cplx>& v, const Grid& g) {
  require(v.size() == g.size(), "to_field: size mismatch");
  Field f(g);
  f.v = v;
  return f;
}

// ---- Bochner-Riesz means

std::vector<cplx> bochner_riesz(const RieszParams& p, const SpectralSamples& f) {
  p.validate();
  return f.apply([&](double mu) { return riesz_symbol(p.delta, mu, p.t); });
}

Field bochner_riesz(const RieszParams& p, const Field& f, int alpha_cutoff) {
  p.validate();
  require(f.grid.d == 1, "bochner_riesz: d = 1 only");
  Field out(f.grid);
  for (int N = 0; 2 * N + 1 <= p.t * p.t; ++N) {
    const double m = riesz_symbol(p.delta, 2 * N + 1, p.t);
    if (m == 0.0) continue;
    const auto r = spectral::project_by_expansion({1, N}, f, alpha_cutoff);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += m * r.field.v[i];
  }
  return out;
}

Field bochner_riesz_kernel(const RieszParams& p, const Field& f) {
  p.validate();
  Field out(f.grid);
  for (int N = 0; 2 * N + 1 <= p.t * p.t; ++N) {
    const double m = riesz_symbol(p.delta, 2 * N + 1, p.t);
    if (m == 0.0) continue;
    const Field q = spectral::project_by_kernel({1, N}, f);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += m * q.v[i];
  }
  return out;
}

std::vector<double> riesz_t_grid(const std::vector<double>& mu, double t_max) {
  require(!mu.empty(), "riesz_t_grid: empty spectrum");
  const double lo = std::sqrt(mu.front()), mmax = mu.back();
  require(t_max >= lo, "riesz_t_grid: t_max below the spectrum");
  const double q = 1.0 + 1.0 / (4.0 * mmax);
  std::vector<double> t;
  for (double x = lo; x < t_max; x *= q) t.push_back(x);
  t.push_back(t_max);
  for (double m : mu)
    if (std::sqrt(m) <= t_max) t.push_back(std::sqrt(m));
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

MaximalResult maximal_multiplier(const std::function<double(double, double)>& symbol, const SpectralSamples& f,
                                 const std::vector<double>& t_grid, bool include_limit) {
  f.validate();
  const std::size_t np = f.points(), nt = f.terms();
  MaximalResult res;
  res.value.assign(np, 0.0);
  std::vector<double> prev;
  constexpr std::size_t kBlock = 96;
  std::vector<double> ts = t_grid;
  if (include_limit) ts.push_back(kInf);
  res.t_nodes = ts.size();
  Eigen::MatrixXd M(nt, kBlock);
  for (std::size_t b0 = 0; b0 < ts.size(); b0 += kBlock) {
    const std::size_t nb = std::min(kBlock, ts.size() - b0);
    M.setZero();
    std::size_t jlo = nt, jhi = 0;
    for (std::size_t c = 0; c < nb; ++c) {
      const double t = ts[b0 + c];
      for (std::size_t j = 0; j < nt; ++j) {
        const double v = std::isinf(t) ? symbol(f.mu[j], kInf) : symbol(f.mu[j], t);
        M(j, c) = v;
        if (v != 0.0) {
          jlo = std::min(jlo, j);
          jhi = std::max(jhi, j + 1);
        }
      }
    }
    Eigen::MatrixXd A, B;
    if (jlo < jhi) {
      const auto Ms = M.block(jlo, 0, jhi - jlo, nb);
      A.noalias() = f.re.middleCols(jlo, jhi - jlo) * Ms;
      B.noalias() = f.im.middleCols(jlo, jhi - jlo) * Ms;
    } else {
      A.setZero(np, nb);
      B.setZero(np, nb);
    }
    for (std::size_t c = 0; c < nb; ++c) {
      for (std::size_t i = 0; i < np; ++i) {
        const double v = std::hypot(A(i, c), B(i, c));
        res.value[i] = std::max(res.value[i], v);
        // the limit column is not a grid neighbour
        if (!prev.empty() && !std::isinf(ts[b0 + c])) res.gap = std::max(res.gap, std::abs(v - prev[i]));
      }
      prev.resize(np);
      for (std::size_t i = 0; i < np; ++i) prev[i] = std::hypot(A(i, c), B(i, c));
    }
  }
  return res;
}

MaximalResult maximal_riesz(double delta, const SpectralSamples& f, const std::vector<double>& t_grid) {
  require(delta >= 0.0, "maximal_riesz: delta >= 0");
  return maximal_multiplier(
      [delta](double mu, double t) { return std::isinf(t) ? 1.0 : riesz_symbol(delta, mu, t); }, f, t_grid, true);
}

MaximalResult maximal_riesz(double delta, const SpectralSamples& f) {
  return maximal_riesz(delta, f, riesz_t_grid(f.mu, 2.0 * std::sqrt(f.mu.back())));
}

double weighted_l2(const std::vector<cplx>& v, const Weight& w, const SpectralSamples& at) {
  require(v.size() == at.points(), "weighted_l2: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += std::norm(v[i]) * w(at.radius[i]) * at.weight[i];
  return std::sqrt(s);
}

double weighted_l2(const std::vector<double>& v, const Weight& w, const SpectralSamples& at) {
  require(v.size() == at.points(), "weighted_l2: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * v[i] * w(at.radius[i]) * at.weight[i];
  return std::sqrt(s);
}

double weighted_l2(const Field& f, const Weight& w) {
  const Grid& g = f.grid;
  std::vector<double> c(g.axes());
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, c.data());
    double r2 = 0.0;
    for (double x : c) r2 += x * x;
    s += std::norm(f.v[i]) * w(std::sqrt(r2));
  }
  return std::sqrt(s * g.cell());
}

// ---- dyadic pieces

double default_rho(double alpha, double eps) { return eps + std::max((alpha - 1.0) / 4.0, 0.0) - 0.5; }

double dyadic_symbol(int k, double rho, double s) {
  require(k >= 0, "dyadic_symbol: k >= 0");
  const kernels::CutoffBank b;
  return k == 0 ? b.phi_0(rho, s) : b.phi_k(k, rho, s);
}

std::vector<cplx> dyadic_piece(int k, double rho, double t, const SpectralSamples& f) {
  require(t > 0.0, "dyadic_piece: t > 0");
  return f.apply([&](double mu) { return dyadic_symbol(k, rho, 1.0 - mu / (t * t)); });
}

SquareFunctionResult square_function_norm(int k, double rho, const SpectralSamples& f, const Weight& w,
                                          double t_max, int per_octave) {
  f.validate();
  require(k >= 0 && t_max > 1.0 && per_octave >= 4, "square_function_norm: bad arguments");
  // symbol support in s = 1 - mu/t^2
  const double s_lo = std::exp2(-k - 2.9), s_hi = k == 0 ? 1.0 : std::exp2(-k - 1.1);
  const double lt_max = std::log(t_max);
  const double single = k == 0 ? kInf : 0.5 * (std::log1p(-s_lo) - std::log1p(-s_hi));
  const double hmax = std::min(std::log(2.0) / per_octave, 2.0 * single / per_octave);
  std::vector<std::pair<double, double>> iv;
  for (double m : f.mu) {
    const double a = std::max(0.0, 0.5 * (std::log(m) - std::log1p(-s_lo)));
    const double b = k == 0 ? lt_max : std::min(lt_max, 0.5 * (std::log(m) - std::log1p(-s_hi)));
    if (a < b) iv.push_back({a, b});
  }
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& p : iv) {
    if (!merged.empty() && p.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, p.second);
    else
      merged.push_back(p);
  }
  std::vector<double> nodes, wts;
  for (const auto& [a, b] : merged) {
    const int n = std::max(2, int(std::ceil((b - a) / hmax)));
    const double h = (b - a) / n;
    for (int i = 0; i <= n; ++i) {
      nodes.push_back(a + i * h);
      wts.push_back(i == 0 || i == n ? 0.5 * h : h);
    }
  }
  SquareFunctionResult res;
  res.t_nodes = int(nodes.size());
  std::vector<double> pw(f.points());
  for (std::size_t i = 0; i < pw.size(); ++i) pw[i] = w(f.radius[i]) * f.weight[i];
  constexpr std::size_t kBlock = 64;
  Eigen::MatrixXd M(f.terms(), kBlock);
  for (std::size_t b0 = 0; b0 < nodes.size(); b0 += kBlock) {
    const std::size_t nb = std::min(kBlock, nodes.size() - b0);
    M.setZero();
    for (std::size_t c = 0; c < nb; ++c) {
      const double t = std::exp(nodes[b0 + c]);
      for (std::size_t j = 0; j < f.terms(); ++j) M(j, c) = dyadic_symbol(k, rho, 1.0 - f.mu[j] / (t * t));
    }
    const Eigen::MatrixXd A = f.re * M.leftCols(nb), B = f.im * M.leftCols(nb);
    for (std::size_t c = 0; c < nb; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < pw.size(); ++i) s += (A(i, c) * A(i, c) + B(i, c) * B(i, c)) * pw[i];
      res.integral += wts[b0 + c] * s;
    }
  }
  const double fn = weighted_l2(f.total(), w, f);
  res.f_norm2 = fn * fn;
  require(res.f_norm2 > 0.0, "square_function_norm: zero field");
  res.ratio = res.integral / res.f_norm2;
  return res;
}

namespace {

EnsembleRatio ensemble_ratio(const std::vector<SpectralSamples>& ensemble, const Weight& w,
                             const std::function<MaximalResult(const SpectralSamples&)>& maximal) {
  require(!ensemble.empty(), "weighted_maximal_ratio: empty ensemble");
  EnsembleRatio out;
  for (std::size_t e = 0; e < ensemble.size(); ++e) {
    const double den = weighted_l2(ensemble[e].total(), w, ensemble[e]);
    if (den == 0.0) throw DomainError("weighted_maximal_ratio: zero field in the ensemble");
    const double num = weighted_l2(maximal(ensemble[e]).value, w, ensemble[e]);
    const double r = (num / den) * (num / den);
    out.members.push_back(r);
    if (r > out.ratio) {
      out.ratio = r;
      out.argmax = int(e);
    }
  }
  return out;
}

}  // namespace

EnsembleRatio weighted_maximal_ratio(double delta, const Weight& w, const std::vector<SpectralSamples>& ensemble) {
  return ensemble_ratio(ensemble, w, [delta](const SpectralSamples& f) { return maximal_riesz(delta, f); });
}

EnsembleRatio weighted_maximal_ratio_phi0(double rho, const Weight& w, const std::vector<SpectralSamples>& ensemble) {
  auto sym = [rho](double mu, double t) { return std::isinf(t) ? 1.0 : dyadic_symbol(0, rho, 1.0 - mu / (t * t)); };
  return ensemble_ratio(ensemble, w, [&](const SpectralSamples& f) {
    return maximal_multiplier(sym, f, riesz_t_grid(f.mu, 2.0 * std::sqrt(f.mu.back())), true);
  });
}

std::string ratio_csv(const std::vector<RatioRow>& rows) {
  io::Csv csv({"delta", "alpha", "k_or_t", "ratio"});
  for (const auto& r : rows) csv.row({io::num(r.delta), io::num(r.alpha), io::num(r.k_or_t), io::num(r.ratio)});
  return csv.str();
}

}  // namespace twistlap::riesz
