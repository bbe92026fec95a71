#include <catch_amalgamated.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "twistlap/common.hpp"
#include "twistlap/laguerre.hpp"
#include "twistlap/quadrature.hpp"

using namespace twistlap;
using namespace twistlap::laguerre;
using Catch::Approx;

TEST_CASE("trivial polynomial values") {
  CHECK(laguerre_poly({0, 3.0}, 7.5) == 1.0);
  CHECK(laguerre_poly({1, 2.0}, 1.0) == 2.0);
  CHECK_THROWS_AS(laguerre_poly({1, -1.0}, 1.0), DomainError);
  CHECK_THROWS_AS(laguerre_poly({1, -2.0}, 1.0), DomainError);
}

TEST_CASE("polynomial at k=2 against exact rational value") {
  // L^1_2(x) = (x^2 - 6x + 6)/2 -> at x = 2: -1
  CHECK(laguerre_poly({2, 1.0}, 2.0) == Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("normalized function trivial values") {
  CHECK(laguerre_norm({5, 0.0}, 0.0) == 1.0);
  CHECK(laguerre_norm({0, 2.0}, 2.0) == Approx(std::sqrt(0.5) * 2.0 * std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("normalized function against extended-precision table") {
  std::ifstream in(std::string(TWISTLAP_TEST_DATA) + "/laguerre_oracle.txt");
  REQUIRE(in.good());
  in.imbue(std::locale::classic());
  int rows = 0, checked = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    ss.imbue(std::locale::classic());
    int k;
    double a, x, hi, lo;
    ss >> k >> a >> x >> hi >> lo;
    ++rows;
    const double ref = hi + lo;
    if (std::abs(ref) <= 1e-280) continue;
    const double got = laguerre_norm({k, a}, x);
    INFO("k=" << k << " a=" << a << " x=" << x << " ref=" << ref << " got=" << got);
    CHECK(std::abs(got - ref) <= 1e-10 * std::abs(ref));
    ++checked;
  }
  CHECK(rows > 100);
  CHECK(checked > 100);
}

TEST_CASE("sequence sweep matches single evaluations") {
  for (double a : {0.0, 1.0, 2.5})
    for (double x : {0.3, 12.0, 250.0}) {
      const auto seq = laguerre_norm_sequence(a, 120, x);
      const auto ex = laguerre_exp_sequence(a, 120, x);
      for (int k : {0, 1, 7, 60, 120}) {
        CHECK(seq[k] == Approx(laguerre_norm({k, a}, x)).epsilon(1e-13).margin(1e-300));
        CHECK(ex[k] == Approx(laguerre_exp({k, a}, x)).epsilon(1e-13).margin(1e-300));
      }
    }
}

TEST_CASE("finite at extreme orders and arguments") {
  CHECK(std::isfinite(laguerre_norm({1000000, 2.0}, 3.0e6)));
  CHECK(std::isfinite(laguerre_norm({1000, 1.0}, 1.0e7)));
  CHECK(std::isfinite(laguerre_norm({200000, 0.0}, 5.0)));
}

TEST_CASE("orthonormality in dx") {
  // integrate on [0, X] after x = u^2 so the small-x behaviour is smooth
  for (double a : {0.0, 1.0, 2.0}) {
    const int K = 30;
    const double X = 4.0 * K + 2.0 * a + 80.0;
    const auto rule = quad::composite(0.0, std::sqrt(X), 120, 20);
    std::vector<std::vector<double>> vals(rule.x.size());
    for (std::size_t i = 0; i < rule.x.size(); ++i) vals[i] = laguerre_norm_sequence(a, K, rule.x[i] * rule.x[i]);
    for (int k = 0; k <= K; k += 3)
      for (int kp = k; kp <= K; kp += 2) {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * 2.0 * rule.x[i] * vals[i][k] * vals[i][kp];
        CHECK(s == Approx(k == kp ? 1.0 : 0.0).margin(1e-8));
      }
  }
}

TEST_CASE("zero count equals the order") {
  for (int k : {0, 1, 4, 17, 40})
    for (double a : {0.0, 2.0}) {
      const double top = 4.0 * k + 2.0 * a + 2.0 + 40.0;
      int changes = 0;
      double prev = laguerre_norm({k, a}, 1e-6);
      for (int i = 1; i <= 40000; ++i) {
        const double v = laguerre_norm({k, a}, 1e-6 + top * i / 40000.0);
        if (v * prev < 0.0) ++changes;
        if (v != 0.0) prev = v;
      }
      CHECK(changes == k);
    }
}

TEST_CASE("regime classification") {
  const LaguerreIndex idx{10, 0.0};
  CHECK(idx.ell() == 42.0);
  auto b = regime_bound(idx, 0.01);
  CHECK(b.regime == Regime::small);
  CHECK(b.bound_value == 1.0);
  b = regime_bound(idx, 10.0);
  CHECK(b.regime == Regime::oscillatory);
  CHECK(b.bound_value == Approx(std::pow(420.0, -0.25)).epsilon(1e-15));
  b = regime_bound(idx, 200.0, 0.3);
  CHECK(b.regime == Regime::exponential);
  CHECK(b.bound_value == Approx(std::exp(-60.0)).epsilon(1e-14));
  // boundaries partition [0, inf)
  CHECK(regime_bound(idx, 1.0 / 42.0).regime == Regime::small);
  CHECK(regime_bound(idx, std::nextafter(1.0 / 42.0, 1.0)).regime == Regime::oscillatory);
  CHECK(regime_bound(idx, 21.0).regime == Regime::oscillatory);
  CHECK(regime_bound(idx, std::nextafter(21.0, 22.0)).regime == Regime::turning);
  CHECK(regime_bound(idx, std::nextafter(63.0, 0.0)).regime == Regime::turning);
  CHECK(regime_bound(idx, 63.0).regime == Regime::exponential);
}

TEST_CASE("asymptotic main term") {
  const LaguerreIndex i100{100, 0.0};
  const double l = i100.ell();
  const double r = l / 2;
  const double err = std::abs(laguerre_asymptotic_main(i100, r) - laguerre_norm(i100, r));
  CHECK(err <= 4.0 * asymptotic_remainder_envelope(i100, r));
  // zero of the cosine: solve l(2t - sin 2t) - pi = 2 pi (m + 1/2) for theta by bisection
  const double target = kPi + 4.0 * kPi * 40.5;
  double lo = 0.2, hi = 1.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (l * (2 * mid - std::sin(2 * mid)) < target ? lo : hi) = mid;
  }
  const double rz = l * std::pow(std::cos(0.5 * (lo + hi)), 2);
  CHECK(std::abs(laguerre_asymptotic_main(i100, rz)) < 1e-12);
  const LaguerreIndex i200{200, 1.0};
  CHECK(std::abs(laguerre_asymptotic_main(i200, 50.0) - laguerre_norm(i200, 50.0)) <=
        4.0 * asymptotic_remainder_envelope(i200, 50.0));
  CHECK_THROWS_AS(laguerre_asymptotic_main(i100, 0.5), DomainError);
  CHECK_THROWS_AS(laguerre_asymptotic_main(i100, l), DomainError);
}

TEST_CASE("bound sweep report") {
  BoundSweep sw;
  sw.ks = {10, 20, 50, 100, 200, 500};
  sw.as = {0.0, 1.0, 2.0};
  const auto rep = verify_laguerre_bounds(sw);
  CHECK(std::isfinite(rep.max_ratio));
  CHECK(rep.growing.empty());
  for (const auto& s : rep.samples) CHECK(rep.max_ratio >= s.fitted_C);
  // explicit single point dominated by the report
  const LaguerreIndex idx{50, 1.0};
  const double r = 37.0;
  const auto one = verify_laguerre_bounds(BoundSweep{{50}, {1.0}}, {r});
  CHECK(one.max_ratio == Approx(std::abs(laguerre_norm(idx, r)) / regime_bound(idx, r).bound_value));
  const auto empty = verify_laguerre_bounds(sw, std::vector<double>{});
  CHECK(empty.samples.empty());
  CHECK(empty.max_ratio == 0.0);
}
