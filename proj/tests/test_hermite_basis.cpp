#include <boost/multiprecision/cpp_bin_float.hpp>
#include <catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "twistlap/hermite_basis.hpp"
#include "twistlap/laguerre.hpp"

using namespace twistlap;
using namespace twistlap::basis;
using Catch::Approx;

namespace {

// physicists' H_n by the three-term recurrence in 50-digit floats
double hermite_oracle(int n, double xd) {
  using big = boost::multiprecision::cpp_bin_float_50;
  big x = xd, h0 = 1, h1 = 2 * x;
  if (n == 0) h1 = h0;
  for (int k = 1; k < n; ++k) {
    big h2 = 2 * x * h1 - 2 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  big norm = 1;
  for (int k = 1; k <= n; ++k) norm *= 2 * k;
  const big pi = boost::math::constants::pi<big>();
  return static_cast<double>(h1 * exp(-x * x / 2) / sqrt(norm * sqrt(pi)));
}

// interior L2 norm restricted to the box |coord| <= b
double boxed_norm(const Field& f, double b) {
  std::vector<double> c(f.grid.axes());
  double s = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    f.grid.coords(i, c.data());
    bool in = true;
    for (double x : c) in = in && std::abs(x) <= b + 1e-12;
    if (in) s += std::norm(f.v[i]);
  }
  return std::sqrt(s * f.grid.cell());
}

double eigen_residual(int a, int b, double h) {
  const Grid g = Grid::box(1, 6.0, h);
  const EigenfunctionSpec spec{{a}, {b}};
  const Field f = sample_special_hermite(spec, g);
  const Field Lf = apply_twisted_laplacian(f);
  Field r(Lf.grid);
  Field fi(Lf.grid);
  std::vector<double> c(2);
  for (std::size_t i = 0; i < Lf.v.size(); ++i) {
    Lf.grid.coords(i, c.data());
    fi.v[i] = special_hermite(spec, ComplexPoint::from({c[0], c[1]}));
    r.v[i] = Lf.v[i] - double(spec.eigenvalue()) * fi.v[i];
  }
  return boxed_norm(r, 5.0) / boxed_norm(fi, 5.0);
}

}  // namespace

TEST_CASE("hermite functions") {
  CHECK(hermite_fn(0, 0.0) == Approx(std::pow(kPi, -0.25)).epsilon(1e-15));
  CHECK(hermite_fn(1, 0.0) == 0.0);
  // frozen from a 40-digit evaluation of H_7(1.3) e^{-x^2/2} / sqrt(2^7 7! sqrt(pi))
  CHECK(hermite_fn(7, 1.3) == Approx(0.40609866425190537779).epsilon(1e-12));
  CHECK(hermite_oracle(7, 1.3) == Approx(0.40609866425190537779).epsilon(1e-15));
  for (int n : {0, 3, 12, 40})
    for (double x : {-2.2, 0.4, 5.0}) CHECK(hermite_fn(n, x) == Approx(hermite_oracle(n, x)).epsilon(1e-11).margin(1e-300));
  CHECK(std::isfinite(hermite_fn(3000, 80.0)));
}

TEST_CASE("special hermite closed form values") {
  const double c = 1.0 / std::sqrt(2.0 * kPi);
  const cplx z{0.7, -1.1};
  CHECK(std::abs(special_hermite_1d(0, 0, z) - c * std::exp(-std::norm(z) / 4.0)) < 1e-15);
  // phase (i z/|z|) at z = sqrt 2 is +i; the defining integral confirms this sign
  const cplx v = special_hermite_1d(0, 1, {std::sqrt(2.0), 0.0});
  CHECK(std::abs(v - c * kI * std::exp(-0.5)) < 1e-15);
  const cplx o = special_hermite_integral_oracle({{0}, {1}}, ComplexPoint::from({std::sqrt(2.0), 0.0}));
  CHECK(std::abs(o - v) < 1e-10);
  // a > b branch uses the conjugate phase and L^{a-b}_b
  const cplx w = special_hermite_1d(3, 1, z);
  const cplx u = kI * std::conj(z) / std::abs(z);
  CHECK(std::abs(w - c * u * u * laguerre::laguerre_norm({1, 2.0}, std::norm(z) / 2.0)) < 1e-15);
  CHECK(special_hermite_1d(2, 5, 0.0) == cplx(0.0));
}

TEST_CASE("product structure") {
  const ComplexPoint z0{{0.0, 0.0}, {0.0, 0.0}};
  CHECK(std::abs(special_hermite({{0, 0}, {0, 0}}, z0) - 1.0 / (2.0 * kPi)) < 1e-15);
  const ComplexPoint z{{0.0, 1.2}, {0.0, -0.3}};
  CHECK(special_hermite({{1, 2}, {0, 1}}, z) == cplx(0.0));
  const cplx q{1.3, 0.4};
  CHECK(special_hermite({{4}, {2}}, ComplexPoint::from(q)) == special_hermite_1d(4, 2, q));
  CHECK_THROWS_AS(special_hermite({{1, 2}, {0, 1}}, ComplexPoint::from(q)), DomainError);
}

TEST_CASE("closed form matches defining integral") {
  double worst = 0.0;
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 6; ++b)
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          const cplx z{-3.0 + 1.5 * i, -3.0 + 1.5 * j};
          const auto p = ComplexPoint::from(z);
          worst = std::max(worst, std::abs(special_hermite({{a}, {b}}, p) - special_hermite_integral_oracle({{a}, {b}}, p)));
        }
  CHECK(worst < 1e-8);
  const auto p2 = ComplexPoint{{0.4, -1.0}, {1.1, 0.3}};
  CHECK(std::abs(special_hermite({{2, 0}, {1, 3}}, p2) - special_hermite_integral_oracle({{2, 0}, {1, 3}}, p2)) < 1e-8);
  CHECK(std::abs(special_hermite_integral_oracle({{0}, {0}}, ComplexPoint::from(0.0)) - 1.0 / std::sqrt(2.0 * kPi)) < 1e-12);
}

TEST_CASE("oracle conjugation symmetry") {
  for (int a : {0, 2, 5})
    for (int b : {1, 3})
      for (cplx z : {cplx(0.8, -1.7), cplx(-2.1, 0.4)}) {
        const cplx lhs = special_hermite_integral_oracle({{a}, {b}}, ComplexPoint::from(-z));
        const cplx rhs = std::conj(special_hermite_integral_oracle({{b}, {a}}, ComplexPoint::from(z)));
        CHECK(std::abs(lhs - rhs) < 1e-8);
      }
}

TEST_CASE("modulus is radial") {
  for (int a : {0, 3})
    for (int b : {0, 4}) {
      const double r = 1.7;
      const double ref = std::abs(special_hermite_1d(a, b, r));
      for (double t : {0.3, 1.9, 4.0}) CHECK(std::abs(special_hermite_1d(a, b, std::polar(r, t))) == Approx(ref).epsilon(1e-13));
    }
}

TEST_CASE("orthonormality on a grid") {
  const Grid g = Grid::box(1, 12.0, 0.1);
  std::vector<Field> fs;
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 6; ++b) fs.push_back(sample_special_hermite({{a}, {b}}, g));
  double worst = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i; j < fs.size(); ++j) worst = std::max(worst, std::abs(inner(fs[i], fs[j]) - (i == j ? 1.0 : 0.0)));
  CHECK(worst < 1e-6);
}

TEST_CASE("finite-difference eigenrelation") {
  for (auto [a, b] : {std::pair{0, 0}, std::pair{1, 2}, std::pair{3, 1}}) {
    const double r1 = eigen_residual(a, b, 0.1);
    const double r2 = eigen_residual(a, b, 0.05);
    INFO("a=" << a << " b=" << b << " r1=" << r1 << " r2=" << r2);
    CHECK(r2 < 0.05);
    CHECK(std::log2(r1 / r2) >= 1.8);
  }
  Field zero(Grid::box(1, 1.0, 0.25));
  const Field out = apply_twisted_laplacian(zero);
  for (const auto& v : out.v) CHECK(v == cplx(0.0));
  CHECK_THROWS_AS(apply_twisted_laplacian(Field(Grid::box(1, 0.3, 0.2))), DomainError);
}

TEST_CASE("field binary round trip") {
  const Grid g = Grid::box(1, 2.0, 0.5);
  const Field f = sample_special_hermite({{1}, {2}}, g);
  const auto path = (std::filesystem::temp_directory_path() / "twistlap_field_rt.bin").string();
  write_field(path, f);
  CHECK(std::filesystem::file_size(path) == 8 * (1 + 2 + 1 + 2) + 16 * g.size());
  const Field h = read_field(path);
  CHECK(h.grid.n == g.n);
  CHECK(h.grid.origin == g.origin);
  CHECK(h.grid.h == g.h);
  CHECK(h.v == f.v);
  std::filesystem::remove(path);
}
