#include <catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "twistlap/spectral.hpp"

using namespace twistlap;
using namespace twistlap::spectral;
using basis::ComplexPoint;
using Catch::Approx;

namespace {

ComplexPoint pt1(double x, double y) { return {{x}, {y}}; }

double rel_err(const Field& a, const Field& b) {
  Field d(a.grid);
  for (std::size_t i = 0; i < a.v.size(); ++i) d.v[i] = a.v[i] - b.v[i];
  return d.l2() / b.l2();
}

}  // namespace

TEST_CASE("eigenvalue indexing") {
  CHECK(Eigenvalue::from_mu(1, 41).N == 20);
  CHECK(Eigenvalue::from_mu(2, 8).N == 3);
  CHECK_THROWS_AS(Eigenvalue::from_mu(1, 4), DomainError);
  CHECK_THROWS_AS(Eigenvalue::from_mu(2, 0), DomainError);
}

TEST_CASE("kernel diagonal values") {
  const double c1 = 1.0 / (2.0 * kPi);
  for (int N : {0, 3, 17, 120}) {
    CHECK(std::abs(projection_kernel({1, N}, pt1(0.3, -1.2), pt1(0.3, -1.2)) - c1) < 1e-15);
    CHECK(std::abs(projection_kernel({1, N}, pt1(5.0, 2.0), pt1(5.0, 2.0)) - c1) < 1e-15);
  }
  const ComplexPoint z{{0.4, -1.1}, {2.0, 0.7}};
  CHECK(std::abs(projection_kernel({2, 3}, z, z) - 4.0 * c1 * c1) < 1e-15);
  CHECK(std::abs(projection_kernel({2, 10}, z, z) - 11.0 * c1 * c1) < 1e-14);
}

TEST_CASE("ground state kernel") {
  const ComplexPoint w = pt1(0.7, -0.2), z = pt1(-1.1, 0.9);
  const double r2 = basis::dist2(w, z);
  const cplx expect = std::exp(-r2 / 4.0) / (2.0 * kPi) * std::polar(1.0, 0.5 * (0.7 * 0.9 - (-0.2) * (-1.1)));
  CHECK(std::abs(projection_kernel({1, 0}, w, z) - expect) < 1e-15);
}

TEST_CASE("kernel matches eigenfunction sum") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int N : {0, 1, 4, 9}) {
    for (int s = 0; s < 12; ++s) {
      const ComplexPoint w = pt1(u(rng), u(rng)), z = pt1(u(rng), u(rng));
      const cplx k = projection_kernel({1, N}, w, z);
      const cplx o = projection_kernel_eigensum({1, N}, w, z, 120);
      CHECK(std::abs(k - o) < 1e-10);
    }
  }
  for (int N : {0, 2, 5}) {
    for (int s = 0; s < 5; ++s) {
      const ComplexPoint w{{u(rng), u(rng)}, {u(rng), u(rng)}}, z{{u(rng), u(rng)}, {u(rng), u(rng)}};
      CHECK(std::abs(projection_kernel({2, N}, w, z) - projection_kernel_eigensum({2, N}, w, z, 100)) < 1e-10);
    }
  }
}

TEST_CASE("kernel Hermitian symmetry and sequence") {
  const ComplexPoint w{{1.3, -0.4}, {0.2, 2.2}}, z{{-0.6, 0.9}, {1.5, -1.0}};
  for (int N : {0, 5, 33}) {
    const cplx a = projection_kernel({2, N}, w, z), b = projection_kernel({2, N}, z, w);
    CHECK(a == std::conj(b));
  }
  const auto seq = projection_kernel_sequence(1, 30, pt1(1.0, 2.0), pt1(-0.5, 0.3));
  for (int N : {0, 7, 30})
    CHECK(std::abs(seq[N] - projection_kernel({1, N}, pt1(1.0, 2.0), pt1(-0.5, 0.3))) < 1e-14);
}

TEST_CASE("kernel projection fixes and kills eigenfunctions") {
  const Grid g = Grid::box(1, 12.0, 0.2);
  const Field phi = basis::sample_special_hermite({{4}, {20}}, g);
  const Field p = project_by_kernel(Eigenvalue::from_mu(1, 41), phi);
  CHECK(rel_err(p, phi) < 1e-4);
  const Field q = project_by_kernel(Eigenvalue::from_mu(1, 39), phi);
  CHECK(q.l2() < 1e-4 * phi.l2());
  const Field small = basis::sample_special_hermite({{2}, {1}}, g);
  CHECK(rel_err(project_by_kernel(Eigenvalue::from_mu(1, 3), small), small) < 1e-4);
  CHECK(project_by_kernel(Eigenvalue::from_mu(1, 5), small).l2() < 1e-4 * small.l2());
}

TEST_CASE("kernel projection idempotent and reproducing") {
  const Grid g = Grid::box(1, 13.0, 0.2);
  std::mt19937_64 rng(11);
  const Field f = CoefficientField::random(5, 12, rng).sample(g);
  const Eigenvalue ev = Eigenvalue::from_mu(1, 15);
  const Field p = project_by_kernel(ev, f);
  const Field pp = project_by_kernel(ev, p);
  CHECK(rel_err(pp, p) < 1e-4);

  // int P(w,u) P(u,z) du = P(w,z)
  const ComplexPoint z = pt1(0.5, -1.0);
  Field k(g);
  double xy[2];
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, xy);
    k.v[i] = projection_kernel(ev, pt1(xy[0], xy[1]), z);
  }
  const Field kk = project_by_kernel(ev, k);
  CHECK(rel_err(kk, k) < 1e-4);
}

TEST_CASE("aliasing guard") {
  const Grid g = Grid::box(1, 4.0, 0.3);
  Field f(g);
  CHECK_THROWS_AS(project_by_kernel(Eigenvalue::from_mu(1, 41), f), DomainError);
  CHECK_NOTHROW(project_by_kernel(Eigenvalue::from_mu(1, 5), f));
}

TEST_CASE("expansion route agrees with kernel route") {
  const Grid g = Grid::box(1, 15.0, 0.2);
  std::mt19937_64 rng(3);
  const CoefficientField cf = CoefficientField::random(8, 20, rng);
  const Field f = cf.sample(g);
  for (int mu : {1, 21, 41}) {
    const Eigenvalue ev = Eigenvalue::from_mu(1, mu);
    const Field pk = project_by_kernel(ev, f);
    const ExpansionResult pe = project_by_expansion(ev, f, 30);
    CHECK(pe.cutoff_ok);
    CHECK(rel_err(pe.field, pk) < 1e-5);
    // exact coefficients
    const Field ex = cf.project(ev.N).sample(g);
    CHECK(rel_err(pe.field, ex) < 1e-8);
  }
  const ExpansionResult zero = project_by_expansion(Eigenvalue::from_mu(1, 7), Field(g), 10);
  CHECK(zero.field.l2() == 0.0);
  // cutoff below the band is flagged
  CHECK_FALSE(project_by_expansion(Eigenvalue::from_mu(1, 11), f, 4).cutoff_ok);
}

TEST_CASE("expansion completeness") {
  const Grid g = Grid::box(1, 13.0, 0.2);
  std::mt19937_64 rng(5);
  const Field f = CoefficientField::random(6, 10, rng).sample(g);
  Field s(g);
  for (int N = 0; N <= 14; ++N) {
    const auto r = project_by_expansion({1, N}, f, 25);
    for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] += r.field.v[i];
  }
  CHECK(rel_err(s, f) < 1e-8);
}

TEST_CASE("trace ratio ground state closed form") {
  for (double M : {0.5, 1.0, 2.0, 4.0}) {
    const auto r = trace_ratio(1, 1, M);
    CHECK(r.ratio == Approx(1.0 - std::exp(-0.5 * M * M)).epsilon(1e-10));
    CHECK(r.normalized_ratio == Approx(r.ratio / M).epsilon(1e-12));
  }
}

TEST_CASE("trace ratio radial vs Nystrom") {
  RatioOptions dense;
  dense.method = NormMethod::svd;
  dense.h = 0.05;
  RatioOptions power = dense;
  power.method = NormMethod::power_iteration;
  for (auto [mu, M] : {std::pair{5, 1.0}, std::pair{21, 1.0}, std::pair{41, 0.8}}) {
    const auto rr = trace_ratio(1, mu, M);
    const auto rs = trace_ratio(1, mu, M, dense);
    const auto rp = trace_ratio(1, mu, M, power);
    CHECK(rs.ratio == Approx(rr.ratio).epsilon(0.05));
    CHECK(rp.ratio == Approx(rs.ratio).epsilon(1e-6));
    CHECK(rp.iterations > 0);
  }
}

TEST_CASE("trace ratio trivial bounds") {
  for (int mu : {1, 3, 21, 101, 401})
    for (double M : {1.0, 2.0, 4.0}) {
      const auto r = trace_ratio(1, mu, M);
      CHECK(r.ratio <= 1.0 + 1e-6);
      CHECK(r.ratio > 0.0);
    }
  // ball much larger than the eigenfunction scale
  CHECK(trace_ratio(1, 9, 12.0).ratio == Approx(1.0).epsilon(1e-8));
  CHECK(trace_ratio(2, 6, 7.0).ratio == Approx(1.0).epsilon(1e-6));
  for (int mu : {2, 4, 10}) CHECK(trace_ratio(2, mu, 1.5).ratio <= 1.0 + 1e-6);
  CHECK_THROWS_AS(trace_ratio(1, 601, 1.0), DomainError);
  CHECK_THROWS_AS(trace_ratio(3, 3, 1.0), DomainError);
}

TEST_CASE("d = 2 ground state") {
  // |P_2 chi|^2 with block m = 0: int over x1 + x2 <= X of e^{-x1-x2}
  const double M = 1.5, X = 0.5 * M * M;
  CHECK(trace_ratio(2, 2, M).ratio == Approx(1.0 - std::exp(-X) * (1.0 + X)).epsilon(1e-9));
}

TEST_CASE("band window ratio") {
  auto one = [](double) { return 1.0; };
  for (int mu : {5, 41}) {
    const auto t = trace_ratio(1, mu, 2.0);
    const auto b = band_window_ratio(one, 1, mu, 1.0, 2.0);
    CHECK(b.ratio == Approx(t.ratio).epsilon(1e-12));
    CHECK(b.normalized_ratio == Approx(t.normalized_ratio).epsilon(1e-12));
  }
  const auto z = band_window_ratio([](double) { return 0.0; }, 1, 41, 20, 2.0);
  CHECK(z.ratio == 0.0);
  CHECK(z.normalized_ratio == 0.0);
  // window sum dominated by the full projection onto the band
  auto tri = [](double m) { return 1.0 - std::abs(m - 41.0) / 20.5; };
  const auto w = band_window_ratio(tri, 1, 41, 20.5, 2.0);
  CHECK(w.ratio <= 1.0 + 1e-9);
  CHECK(w.ratio >= trace_ratio(1, 41, 2.0).ratio - 1e-12);
  RatioOptions dense;
  dense.method = NormMethod::svd;
  dense.h = 0.05;
  const auto ws = band_window_ratio(tri, 1, 11, 5.5, 1.0, dense);
  const auto wr = band_window_ratio(tri, 1, 11, 5.5, 1.0);
  CHECK(ws.ratio == Approx(wr.ratio).epsilon(0.05));
}

TEST_CASE("ratio csv") {
  const auto r = trace_ratio(1, 1, 1.0);
  const std::string s = ratio_csv({r});
  CHECK(s.rfind("d,mu,M,sigma,ratio,normalized_ratio,method,grid_n\n1,1,1,0,", 0) == 0);
  CHECK(s.find(",radial,") != std::string::npos);
}
