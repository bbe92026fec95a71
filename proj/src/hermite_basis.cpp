#include "twistlap/hermite_basis.hpp"

#include <cmath>
#include <numeric>

#include "twistlap/laguerre.hpp"
#include "twistlap/quadrature.hpp"

namespace twistlap::basis {

int total(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

double symplectic(const ComplexPoint& z, const ComplexPoint& w) {
  require(z.dim() == w.dim(), "symplectic: dimension mismatch");
  double s = 0.0;
  for (int j = 0; j < z.dim(); ++j) s += z.x[j] * w.y[j] - z.y[j] * w.x[j];
  return s;
}

double dist2(const ComplexPoint& z, const ComplexPoint& w) {
  require(z.dim() == w.dim(), "dist2: dimension mismatch");
  double s = 0.0;
  for (int j = 0; j < z.dim(); ++j) s += std::pow(z.x[j] - w.x[j], 2) + std::pow(z.y[j] - w.y[j], 2);
  return s;
}

void EigenfunctionSpec::validate() const {
  require(alpha.size() == beta.size() && !alpha.empty(), "EigenfunctionSpec: alpha and beta need equal length d >= 1");
  for (int a : alpha) require(a >= 0, "EigenfunctionSpec: negative index");
  for (int b : beta) require(b >= 0, "EigenfunctionSpec: negative index");
}

std::vector<double> hermite_fns(int nmax, double x) {
  require(nmax >= 0, "hermite_fns: n must be >= 0");
  std::vector<double> out(nmax + 1);
  double logs = -0.25 * std::log(kPi) - 0.5 * x * x;
  double p0 = 1.0;
  out[0] = std::exp(logs);
  if (nmax == 0) return out;
  double p1 = std::sqrt(2.0) * x;
  out[1] = p1 * std::exp(logs);
  for (int n = 1; n < nmax; ++n) {
    const double p2 = std::sqrt(2.0 / (n + 1)) * x * p1 - std::sqrt(double(n) / (n + 1)) * p0;
    p0 = p1;
    p1 = p2;
    if (std::abs(p1) > 1e150) {
      p0 *= 1e-150;
      p1 *= 1e-150;
      logs += 150.0 * std::log(10.0);
    }
    out[n + 1] = p1 * std::exp(logs);
  }
  return out;
}

double hermite_fn(int n, double x) { return hermite_fns(n, x)[n]; }

cplx special_hermite_1d(int a, int b, cplx z) {
  require(a >= 0 && b >= 0, "special_hermite_1d: negative index");
  const double r = std::abs(z);
  const double c = 1.0 / std::sqrt(2.0 * kPi);
  if (a != b && r == 0.0) return 0.0;
  const int m = std::abs(b - a);
  const int k = std::min(a, b);
  const double rad = laguerre::laguerre_norm({k, double(m)}, 0.5 * r * r);
  if (m == 0) return c * rad;
  const cplx unit = a <= b ? kI * z / r : kI * std::conj(z) / r;
  return c * std::pow(unit, m) * rad;
}

cplx special_hermite(const EigenfunctionSpec& spec, const ComplexPoint& z) {
  spec.validate();
  require(z.dim() == spec.d(), "special_hermite: dimension mismatch");
  cplx p = 1.0;
  for (int j = 0; j < spec.d(); ++j) p *= special_hermite_1d(spec.alpha[j], spec.beta[j], z.coord(j));
  return p;
}

namespace {

cplx oracle_1d(int a, int b, double x, double y, const OracleOptions& opt) {
  const double L = 0.5 * std::abs(y) + std::sqrt(2.0 * std::max(a, b) + 1.0) + 7.0;
  auto eval = [&](int panels) {
    const auto rule = quad::composite(-L, L, panels, opt.order);
    cplx s{};
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double xi = rule.x[i];
      s += rule.w[i] * std::polar(1.0, x * xi) * hermite_fn(a, xi + 0.5 * y) * hermite_fn(b, xi - 0.5 * y);
    }
    return s / std::sqrt(2.0 * kPi);
  };
  int panels = 4;
  cplx prev = eval(panels);
  for (int lvl = 0; lvl < opt.max_levels; ++lvl) {
    panels *= 2;
    const cplx cur = eval(panels);
    const double diff = std::abs(cur - prev);
    if (diff < 1e-14 || (lvl >= 2 && diff < 1e-3 * opt.tol)) return cur;
    prev = cur;
  }
  const cplx last = eval(panels * 2);
  if (std::abs(last - prev) > opt.tol) throw NonConvergence("special_hermite_integral_oracle: refinement did not settle");
  return last;
}

}  // namespace

cplx special_hermite_integral_oracle(const EigenfunctionSpec& spec, const ComplexPoint& z, const OracleOptions& opt) {
  spec.validate();
  require(z.dim() == spec.d(), "special_hermite_integral_oracle: dimension mismatch");
  require(spec.d() <= 2, "special_hermite_integral_oracle: d <= 2 only");
  for (int j = 0; j < spec.d(); ++j)
    require(spec.alpha[j] <= 12 && spec.beta[j] <= 12, "special_hermite_integral_oracle: indices above oracle scale");
  cplx p = 1.0;
  for (int j = 0; j < spec.d(); ++j) p *= oracle_1d(spec.alpha[j], spec.beta[j], z.x[j], z.y[j], opt);
  return p;
}

Field sample_special_hermite(const EigenfunctionSpec& spec, const Grid& g) {
  spec.validate();
  g.validate();
  require(g.d == spec.d(), "sample_special_hermite: dimension mismatch");
  Field f(g);
  std::vector<double> c(g.axes());
  ComplexPoint z{std::vector<double>(g.d), std::vector<double>(g.d)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, c.data());
    for (int j = 0; j < g.d; ++j) {
      z.x[j] = c[j];
      z.y[j] = c[g.d + j];
    }
    f.v[i] = special_hermite(spec, z);
  }
  return f;
}

Field apply_twisted_laplacian(const Field& f) {
  const Grid& g = f.grid;
  g.validate();
  require(f.v.size() == g.size(), "apply_twisted_laplacian: field/grid size mismatch");
  for (int k : g.n) require(k >= 5, "apply_twisted_laplacian: need at least 5 points per axis");
  Grid out = g;
  for (int a = 0; a < g.axes(); ++a) {
    out.n[a] = g.n[a] - 2;
    out.origin[a] = g.origin[a] + g.h;
  }
  Field res(out);
  const int A = g.axes(), d = g.d;
  std::vector<std::size_t> stride(A, 1);
  for (int a = A - 2; a >= 0; --a) stride[a] = stride[a + 1] * g.n[a + 1];
  const double ih2 = 1.0 / (g.h * g.h), i2h = 0.5 / g.h;
  std::vector<double> c(A);
  for (std::size_t o = 0; o < out.size(); ++o) {
    out.coords(o, c.data());
    std::size_t src = 0, rem = o;
    for (int a = A - 1; a >= 0; --a) {
      src += (rem % out.n[a] + 1) * stride[a];
      rem /= out.n[a];
    }
    const cplx f0 = f.v[src];
    cplx acc{};
    for (int j = 0; j < d; ++j) {
      const std::size_t sx = stride[j], sy = stride[d + j];
      const cplx fxp = f.v[src + sx], fxm = f.v[src - sx], fyp = f.v[src + sy], fym = f.v[src - sy];
      const double x = c[j], y = c[d + j];
      acc += -(fxp - 2.0 * f0 + fxm) * ih2 - (fyp - 2.0 * f0 + fym) * ih2;
      acc += kI * (y * (fxp - fxm) * i2h - x * (fyp - fym) * i2h);
      acc += 0.25 * (x * x + y * y) * f0;
    }
    res.v[o] = acc;
  }
  return res;
}

}  // namespace twistlap::basis
