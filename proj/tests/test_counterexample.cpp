#include <catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "twistlap/counterexample.hpp"
#include "twistlap/kernels.hpp"
#include "twistlap/quadrature.hpp"
#include "twistlap/spectral.hpp"

using namespace twistlap;
using namespace twistlap::counterexample;
using Catch::Approx;

namespace {

double pk_origin(int d, int mu, double r) {
  const auto ev = spectral::Eigenvalue::from_mu(d, mu);
  basis::ComplexPoint z0, z;
  z0.x.assign(d, 0.0);
  z0.y.assign(d, 0.0);
  z = z0;
  z.x[0] = r;
  return std::abs(spectral::projection_kernel(ev, z0, z));
}

}  // namespace

TEST_CASE("phi* inverse transform") {
  CHECK(phi_star_inverse(0).real() > 0.0);
  CHECK(std::abs(phi_star_inverse(0).imag()) < 1e-14);
  // conjugate symmetry of a real bump
  for (int s : {1, 7, 40, 333})
    CHECK(std::abs(phi_star_inverse(-s) - std::conj(phi_star_inverse(s))) < 1e-15);

  // the table is built by a recurrence; compare a few entries with direct Gauss-Legendre
  const double lo = std::exp2(-2.9), hi = std::exp2(-1.1);
  for (double s : {0.0, 3.0, 40.0, 160.0, 1001.0, -250.0}) {
    const quad::Rule q = quad::composite(lo, hi, 450, 24);
    const kernels::CutoffBank bank;
    cplx ref = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) ref += q.w[i] * bank.phi_star(q.x[i]) * std::exp(cplx(0.0, q.x[i] * s));
    ref /= 2.0 * kPi;
    INFO("s = " << s);
    CHECK(std::abs(phi_star_inverse(s) - ref) < 1e-15 + 1e-10 * std::abs(ref));
  }
  // non-integer s goes through direct quadrature
  CHECK(std::abs(phi_star_inverse(10.5)) > 0.0);
  // rapid decay
  CHECK(std::abs(phi_star_inverse(640)) < 1e-5 * std::abs(phi_star_inverse(0)));
  CHECK(std::abs(phi_star_inverse(1280)) < 1e-7 * std::abs(phi_star_inverse(0)));
}

TEST_CASE("g_k quadrature and spectral routes agree") {
  for (int d : {1, 2}) {
    for (int mu : {d == 1 ? 101 : 102, d == 1 ? 401 : 402}) {
      const double sq = std::sqrt(double(mu));
      double worst = 0.0, scale = 0.0, tail = 0.0;
      for (double u : {0.0, 0.2, 0.45, 0.6, 0.8, 1.0, 1.3}) {
        const cplx a = gk_quadrature(d, mu, u * sq);
        const GkSpectral b = gk_spectral(d, mu, u * sq);
        tail = std::max(tail, b.tail_bound);
        worst = std::max(worst, std::abs(a - b.value));
        scale = std::max(scale, std::abs(a));
      }
      INFO("d = " << d << " mu = " << mu);
      CHECK(worst < 1e-6 * scale);
      // a triangle-inequality bound over thousands of terms at the table's round-off floor
      CHECK(tail < 1e-5 * scale);
    }
  }
}

TEST_CASE("g_k refinement and radial symmetry") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-12.0, 12.0);
  GkOptions fine;
  fine.order = 24;
  fine.tol = 1e-12;
  const int mu = 101;
  for (int i = 0; i < 20; ++i) {
    const basis::ComplexPoint z{{U(rng)}, {U(rng)}};
    const cplx a = g_k(mu, z), b = g_k(mu, z, fine);
    CHECK(std::abs(a - b) < 1e-8 * std::max(std::abs(b), 1e-4));
  }
  for (double r : {0.5, 3.0, 6.0, 9.0}) {
    const cplx ref = g_k(mu, basis::ComplexPoint{{r}, {0.0}});
    for (double th : {0.3, 1.9, 4.0}) {
      const cplx v = g_k(mu, basis::ComplexPoint{{r * std::cos(th)}, {r * std::sin(th)}});
      CHECK(std::abs(std::abs(v) - std::abs(ref)) < 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
  CHECK_THROWS_AS(g_k(100, basis::ComplexPoint{{1.0}, {0.0}}), DomainError);
}

TEST_CASE("g_k plateau and decay") {
  for (int mu : {101, 401}) {
    const GkBoundReport r = verify_gk_bounds(1, mu);
    INFO("mu = " << mu << " ratio " << r.plateau_ratio << " exponent " << r.fitted_exponent << " far "
                      << r.far_value);
    CHECK(r.plateau_ratio <= 4.0);
    CHECK(r.fitted_exponent >= 6.0);
    CHECK(r.far_value <= 1e-6);
    CHECK(r.pass);
  }
  // the stationary range ends near 0.9 mu^{1/2}; a window straddling it is far from flat
  const GkBoundReport wide = verify_gk_bounds(1, 101, 0.8, 1.2);
  CHECK(wide.plateau_ratio > 16.0);
  CHECK_THROWS_AS(verify_gk_bounds(1, 101, 0.6, 0.4), DomainError);
}

TEST_CASE("weighted norm scaling of g_k") {
  const int d = 1;
  for (double p : {riesz::kInf, 4.0}) {
    for (double beta : {0.0, 1.0}) {
      std::vector<double> scaled;
      for (int mu : {101, 401, 1601}) {
        const double rmax = 3.0 * std::sqrt(double(mu));
        const int n = 3000;
        std::vector<double> rs(n), ws(n);
        for (int i = 0; i < n; ++i) {
          rs[i] = (i + 0.5) * rmax / n;
          ws[i] = radial_density(d, rs[i]) * rmax / n;
        }
        const auto v = gk_samples(d, mu, rs, ws, 300).total();
        const double nrm = weighted_lp_norm(rs, ws, v, beta, p);
        const double ex = (std::isinf(p) ? 0.0 : d / p) - 0.5 - beta / 2.0;
        scaled.push_back(nrm * std::pow(double(mu), -ex));

        // normalized profile has unit norm
        std::vector<cplx> f(v);
        for (auto& x : f) x /= nrm;
        CHECK(weighted_lp_norm(rs, ws, f, beta, p) == Approx(1.0).epsilon(1e-12));
      }
      const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
      INFO("p = " << p << " beta = " << beta);
      CHECK(*hi / *lo <= 4.0);
    }
  }
}

TEST_CASE("projection of g_j onto a neighbouring eigenspace") {
  // g_j truncated to |mu - mu_j| <= 40 is an exact finite combination, so its projection onto mu_k is
  // (-1)^d phi*^v(mu_k - mu_j) P_{mu_k}(0, .)
  const int d = 1, mu_j = 9, hw = 40;
  const Grid g = Grid::box(1, 16.0, 0.2);
  Field f(g);
  double c[2];
  const auto s = gk_samples(d, mu_j, [&] {
    std::vector<double> r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.coords(i, c);
      r[i] = std::hypot(c[0], c[1]);
    }
    return r;
  }(), std::vector<double>(g.size(), g.cell()), hw);
  f.v = s.total();

  for (int mu_k : {9, 13, 21}) {
    const auto ev = spectral::Eigenvalue::from_mu(d, mu_k);
    const auto pr = spectral::project_by_expansion(ev, f, 60);
    const cplx a = -phi_star_inverse(mu_k - mu_j);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.coords(i, c);
      const cplx want = a * spectral::projection_kernel(ev, basis::ComplexPoint{{0.0}, {0.0}},
                                                         basis::ComplexPoint{{c[0]}, {c[1]}});
      err = std::max(err, std::abs(pr.field.v[i] - want));
      ref = std::max(ref, std::abs(want));
    }
    INFO("mu_k = " << mu_k);
    CHECK(err < 1e-6 * ref);
  }
}

TEST_CASE("lower set on the unit annulus") {
  std::vector<double> upper;
  for (int mu : {41, 101, 201, 401}) {
    const LowerSetReport r = lower_set_measure(1, mu, 0.25);
    CHECK(r.annulus_measure == Approx(3.0 * kPi).epsilon(1e-12));
    CHECK(r.measure >= 0.0);
    CHECK(r.measure <= r.annulus_measure);
    upper.push_back(r.upper_max);
    // the oscillating profile crosses a small threshold on a fixed fraction of the annulus
    const LowerSetReport low = lower_set_measure(1, mu, 0.05);
    CHECK(low.measure > 0.3 * low.annulus_measure);
    CHECK(lower_set_measure(1, mu, 1e9).measure == 0.0);
    CHECK(lower_set_measure(1, mu, 0.0).measure == Approx(r.annulus_measure));
  }
  const auto [lo, hi] = std::minmax_element(upper.begin(), upper.end());
  CHECK(*hi / *lo < 1.2);
  // spot check the sampled maximum against the kernel itself
  CHECK(pk_origin(1, 41, 1.3) * std::pow(41.0, 0.25) <= upper[0] + 1e-12);
  CHECK_THROWS_AS(lower_set_measure(1, 40, 0.25), DomainError);
}

TEST_CASE("counterexample sequence") {
  const auto s = CounterexampleSeq::geometric(1, 25, 4, riesz::kInf, 0.0, 0.1);
  REQUIRE(s.mu.size() == 4);
  CHECK(s.mu[0] == 101);
  CHECK(s.mu[3] == 6401);
  s.validate();
  const auto s2 = CounterexampleSeq::geometric(2, 25, 3, riesz::kInf, 0.0, 0.1);
  CHECK(s2.mu[0] == 100);
  s2.validate();

  CounterexampleSeq bad = s;
  bad.mu = {101, 201};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = s;
  bad.p = 3.0;  // needs p > 4
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad.p = 5.0;
  CHECK_NOTHROW(bad.validate());
  bad = s;
  bad.mu = {100};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("small divergence run") {
  const auto s = CounterexampleSeq::geometric(1, 25, 2, riesz::kInf, 0.0, 0.1);
  const DivergenceTable t = divergence_experiment(s);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.gamma == Approx(0.5));
  CHECK(t.annulus_measure == Approx(3.0 * kPi).epsilon(1e-12));
  for (double nrm : t.norms) CHECK(nrm > 0.0);
  for (const auto& r : t.rows) {
    CHECK(r.main_term_max > 0.0);
    CHECK(r.dominance_ok);
    CHECK(r.measure_proxy >= 0.0);
    CHECK(r.measure_proxy <= t.annulus_measure + 1e-12);
  }
  // thresholds follow 2^{-k} mu_k^{gamma/2 - delta}
  const double ratio = t.rows[1].threshold / t.rows[0].threshold;
  CHECK(ratio == Approx(0.5 * std::pow(double(s.mu[1]) / s.mu[0], 0.25 - 0.1)).epsilon(1e-12));
  CHECK(t.maximal_min > 0.0);
  CHECK(t.maximal_max >= t.maximal_min);

  const std::string csv = divergence_csv(t);
  CHECK(csv.rfind("k,mu_k,threshold,measure_proxy,main_term_max,cross_term_max,dominance_ok\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(divergence_csv(divergence_experiment(s)) == csv);
}
