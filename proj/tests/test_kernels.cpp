#include <catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "twistlap/kernels.hpp"
#include "twistlap/quadrature.hpp"
#include "twistlap/spectral.hpp"

using namespace twistlap;
using namespace twistlap::kernels;
using basis::ComplexPoint;
using Catch::Approx;

namespace {

ComplexPoint pt1(double x, double y) { return {{x}, {y}}; }

// trapezoid DFT of eta on [-2, 2]; the integrand is flat at the ends so this converges fast
cplx eta_dft(cplx xi, int n = 20000) {
  const CutoffBank b;
  const double h = 4.0 / n;
  cplx s = 0.0;
  for (int i = 1; i < n; ++i) {
    const double x = -2.0 + i * h;
    s += b.eta(x) * std::exp(-kI * x * xi);
  }
  return s * h;
}

}  // namespace

TEST_CASE("smooth step") {
  CHECK(smooth_step(0.4, -0.4) == 0.0);
  CHECK(smooth_step(0.4, 0.5) == 1.0);
  CHECK(smooth_step(0.4, 0.0) == Approx(0.5));
  for (double u : {-0.3, -0.1, 0.05, 0.27}) CHECK(smooth_step(0.4, u) + smooth_step(0.4, -u) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("cutoff bank partitions and supports") {
  const CutoffBank b = smooth_bump_bank();
  for (double t : {0.011, 0.07, 0.2, 0.31, 0.44}) {
    double s = 0.0;
    for (int k = -6; k <= 8; ++k) s += b.phi_star(std::ldexp(t, k));
    CHECK(s == Approx(1.0).epsilon(1e-14));
  }
  CHECK(b.phi_star(std::exp2(-2.95)) == 0.0);
  CHECK(b.phi_star(std::exp2(-1.05)) == 0.0);
  CHECK(b.phi_star(0.25) > 0.0);
  // decomposition of t_+^rho at the symbol level
  for (double rho : {0.0, 0.3, -0.2}) {
    for (double t : {0.9, 0.5, 0.13, 0.02, 1e-3}) {
      double s = b.phi_0(rho, t);
      for (int k = 1; k <= 40; ++k) s += std::exp2(-rho * k) * b.phi_k(k, rho, t);
      CHECK(s == Approx(std::pow(t, rho)).epsilon(1e-10));
    }
    CHECK(b.phi_0(rho, -0.1) == 0.0);
  }
  CHECK(b.eta(0.0) == 1.0);
  CHECK(b.eta(2.0) == 0.0);
  CHECK(b.eta(-1.3) == b.eta(1.3));
  for (double t : {-1.4, 0.0, 0.3, 1.1, 1.6}) {
    double s = 0.0;
    for (int n = -2; n <= 2; ++n) s += b.eta_star(t + n * kPi);
    CHECK(s == Approx(1.0).epsilon(1e-14));
  }
  CHECK(b.eta_star(kPi / 2 + 0.13) == 0.0);
  CHECK(b.psi(std::exp2(1.05)) == 0.0);
  CHECK(b.psi(std::exp2(2.95)) == 0.0);
  CHECK(b.psi(-5.0) == b.psi(5.0));
  CHECK(b.varphi(0.25) == 1.0);
  CHECK(b.varphi(-0.75) == 0.0);
  CHECK(b.kappa(1.0) == 1.0);
  CHECK(b.kappa(2.0) == 0.0);
}

TEST_CASE("eta hat against DFT") {
  for (double xi : {0.0, 0.3, 1.7, 10.0, 55.5, 200.1})
    CHECK(std::abs(eta_hat(xi) - eta_dft(xi)) < 1e-12);
  for (cplx xi : {cplx(3.3, -0.5), cplx(40.1, 0.6), cplx(-7.2, 0.2)})
    CHECK(std::abs(eta_hat(xi) - eta_dft(xi)) < 1e-10 * std::max(1.0, std::abs(eta_dft(xi))));
  CHECK(eta_hat(700.0) == 0.0);
  CHECK(std::abs(eta_hat(599.0)) < 1e-14);
  CHECK_THROWS_AS(eta_hat(cplx(1.0, 0.9)), DomainError);
  const Eta zero{0.0};
  CHECK(zero.hat(2.0) == 0.0);
}

TEST_CASE("propagator calibration") {
  for (int d : {1, 2}) {
    const Calibration& c = propagator_calibration(d);
    CHECK(c.residual < 1e-12);
    CHECK(c.spread < 1e-12);
    CHECK(std::abs(c.closed_form - std::pow(4.0 * kPi * kI, -d)) < 1e-15);
  }
  CHECK_THROWS_AS(propagator_calibration(5), DomainError);
}

TEST_CASE("propagator modulus, periodicity and guard") {
  const ComplexPoint z{{0.3, -1.0}, {1.2, 0.4}}, zp{{-0.7, 0.5}, {0.0, 2.0}};
  for (double t : {0.4, 1.3, 2.9}) {
    for (int d : {1, 2}) {
      const ComplexPoint a = d == 1 ? pt1(0.3, 1.2) : z, b = d == 1 ? pt1(-0.7, 0.0) : zp;
      const cplx k = propagator_kernel(t, a, b);
      CHECK(std::abs(k) == Approx(std::pow(4.0 * kPi, -d) * std::pow(std::abs(std::sin(t)), -d)).epsilon(1e-13));
      const cplx k2 = propagator_kernel(t + kPi, a, b);
      CHECK(std::abs(k2 - (d % 2 ? -1.0 : 1.0) * k) < 1e-12 * std::abs(k));
    }
  }
  CHECK_THROWS_AS(propagator_kernel(kPi, z, zp), DomainError);
  CHECK_THROWS_AS(propagator_kernel(0.0, z, zp), DomainError);
  CHECK_NOTHROW(propagator_kernel(1e-6, z, zp));
  CHECK_THROWS_AS(propagator_kernel(cplx(1.0, 0.1), z, zp), DomainError);
}

TEST_CASE("propagator matches Abel sum") {
  const ComplexPoint z = pt1(0.4, -0.9), zp = pt1(-1.1, 0.3);
  for (cplx tau : {cplx(0.7, -0.15), cplx(2.4, -0.4)})
    CHECK(std::abs(abel_propagator_sum(tau, z, zp, 600) - propagator_kernel(tau, z, zp)) < 1e-12);
  // epsilon -> 0 by linear extrapolation from two damped sums
  const double t = kPi / 3;
  const cplx s1 = abel_propagator_sum(cplx(t, -0.02), z, zp, 3000);
  const cplx s2 = abel_propagator_sum(cplx(t, -0.01), z, zp, 3000);
  const cplx lim = 2.0 * s2 - s1;
  const cplx k = propagator_kernel(t, z, zp);
  CHECK(std::abs(lim - k) < 1e-3 * std::abs(k));
}

TEST_CASE("propagator group law") {
  const cplx t1(0.6, -0.3), t2(0.9, -0.3);
  const ComplexPoint w = pt1(0.5, -0.2), z = pt1(-0.3, 0.8);
  const quad::Rule r = quad::composite(-9.0, 9.0, 36, 16);
  cplx s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i)
    for (std::size_t j = 0; j < r.x.size(); ++j) {
      const ComplexPoint u = pt1(r.x[i], r.x[j]);
      s += r.w[i] * r.w[j] * propagator_kernel(t1, w, u) * propagator_kernel(t2, u, z);
    }
  const cplx k = propagator_kernel(t1 + t2, w, z);
  CHECK(std::abs(s - k) < 1e-3 * std::abs(k));
}

TEST_CASE("phase derivative") {
  const ComplexPoint z = pt1(1.0, 0.5), zp = pt1(-0.2, 1.4);
  const double t = 0.8, h = 1e-5;
  const double fd = (phase_L(t + h, z, zp) - phase_L(t - h, z, zp)) / (2 * h);
  CHECK(phase_L_dt(t, z, zp) == Approx(fd).epsilon(1e-8));
}

TEST_CASE("spectral multiplier trivial cases") {
  const Eta eta;
  const ComplexPoint w = pt1(0.4, 1.0), z = pt1(-0.6, 0.2);
  // one eigenvalue in the window
  CHECK(std::abs(multiplier_kernel_spectral(eta, 1, 41, 0.5, w, z) - spectral::projection_kernel({1, 20}, w, z)) < 1e-15);
  // window between eigenvalues
  CHECK(multiplier_kernel_spectral(eta, 1, 42, 0.4, w, z) == 0.0);
  CHECK(multiplier_kernel_spectral(Eta{0.0}, 1, 41, 8, w, z) == 0.0);
  CHECK(multiplier_kernel_oscillatory(Eta{0.0}, 1, 41, 8, w, z) == 0.0);
  const ComplexPoint w2{{0.4, 0.1}, {1.0, -0.3}}, z2{{-0.6, 0.7}, {0.2, 0.0}};
  CHECK(multiplier_kernel_spectral(eta, 2, 10, 3, w2, z2) == std::conj(multiplier_kernel_spectral(eta, 2, 10, 3, z2, w2)));
}

TEST_CASE("route equivalence sample") {
  const Eta eta;
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct C {
    double mu, R;
  };
  for (C c : {C{41, 8}, C{5, 0.25}, C{21, 1}, C{101, 64}}) {
    const double rad = 1.5 * std::sqrt(c.mu) + 1.0;
    const OscillatoryMultiplier osc(eta, 1, c.mu, c.R, 2.5 * rad);  // covers |w - z| <= 1.7 sqrt(2) rad
    for (int s = 0; s < 8; ++s) {
      const ComplexPoint w = pt1(rad * u(rng), rad * u(rng) * 0.7), z = pt1(rad * u(rng) * 0.7, rad * u(rng));
      const cplx a = multiplier_kernel_spectral(eta, 1, c.mu, c.R, w, z);
      const cplx b = osc(w, z);
      CHECK(std::abs(a - b) <= 1e-5 * std::max(std::abs(a), 1e-3 * std::abs(osc.diagonal())));
    }
  }
  // Hermitian symmetry of the oscillatory route
  const OscillatoryMultiplier osc(eta, 1, 21, 4, 5.0);
  const ComplexPoint w = pt1(1.0, -0.5), z = pt1(-1.2, 0.9);
  CHECK(std::abs(osc(w, z) - std::conj(osc(z, w))) < 1e-9 * std::abs(osc(w, z)));
  CHECK_THROWS_AS(osc(pt1(0, 0), pt1(10, 0)), DomainError);
}

TEST_CASE("eta_R derivative bounds") {
  const Eta eta;
  for (double R : {4.0, 16.0, 64.0}) {
    double c[3] = {0, 0, 0};
    const double h = 1e-3 / R;
    for (int i = 0; i <= 1500; ++i) {
      const double t = -kPathEnd + 2.0 * kPathEnd * i / 1500.0;
      const double f0 = eta_R(eta, t, R, 41, 1), fp = eta_R(eta, t + h, R, 41, 1), fm = eta_R(eta, t - h, R, 41, 1);
      const double dk[3] = {std::abs(f0), std::abs(fp - fm) / (2 * h), std::abs(fp - 2 * f0 + fm) / (h * h)};
      for (int k = 0; k < 3; ++k) c[k] = std::max(c[k], dk[k] / (std::pow(R, k) * std::pow(1.0 + R * std::abs(t), -4.0)));
    }
    for (double v : c) CHECK(v < 500.0);
  }
  CHECK(eta_R(eta, 2.0, 4.0, 41, 1) == 0.0);
}

TEST_CASE("decay reports") {
  const Eta eta;
  CHECK(decay_case(5, 64) == "i");
  CHECK(decay_case(41, 4) == "ii");
  CHECK(decay_case(101, 0.5) == "iii");
  const auto rep = verify_multiplier_decay(eta, 1, 101, 0.5, default_decay_radii(101, 0.5));
  CHECK(rep.pass);
  CHECK(rep.fitted_N >= 4.0);
  CHECK(rep.case_name == "iii");
  const auto r2 = verify_multiplier_decay(eta, 1, 41, 4, default_decay_radii(41, 4));
  CHECK(r2.fitted_N >= 4.0);

  // case i sample against the fitted envelope
  const auto r1 = verify_multiplier_decay(eta, 1, 5, 64, default_decay_radii(5, 64));
  const double k8 = std::abs(multiplier_kernel_spectral(eta, 1, 5, 64, pt1(0, 0), pt1(1.0, 0)));
  CHECK(k8 <= r1.fitted_C * 64.0 * std::pow(9.0, -4) * (1 + 1e-12));

  const auto j = rep.to_json();
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"case", "operator", "d", "mu", "R", "requested_N", "fitted_N", "fitted_C",
                                         "n_samples", "tol", "pass"});

  // constant dominates every sample ratio
  const std::vector<double> rs{1, 2, 4, 8}, vs{0.5, 0.2, 0.01, 0.003};
  const auto f = fit_decay(rs, vs, 1.0, 1.0, 0.0, 2.0);
  for (std::size_t i = 0; i < rs.size(); ++i) CHECK(f.fitted_C >= vs[i] * std::pow(1.0 + rs[i], 2.0));
  CHECK_THROWS_AS(fit_decay({1, 2}, {0.1, 0.01}, 1.0, 1.0, 0.0, 2.0), DomainError);
  CHECK_THROWS_AS(verify_multiplier_decay(eta, 1, 41, 4, {0.1, 0.2, 0.3}), DomainError);
}
