#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twistlap/common.hpp"
#include "twistlap/counterexample.hpp"
#include "twistlap/kernels.hpp"
#include "twistlap/riesz.hpp"

// Hermite operator H = -Delta + |x|^2 on R^d: eigenvalues 2N + d, tensor Hermite eigenfunctions.
namespace twistlap::hermite {

using Point = std::vector<double>;

double dot(const Point& x, const Point& y);
double norm2(const Point& x);

// Projection kernels Pt_N(x, y) = sum_{|alpha| = N} Phi_alpha(x) Phi_alpha(y) for N = 0..nmax
// (convolution of the coordinate sequences).
std::vector<double> projection_sequence(int nmax, const Point& x, const Point& y);

// phi_H(t, x, y) = (|x|^2 + |y|^2) cot t / 2 - <x, y> csc t
double phase(double t, const Point& x, const Point& y);
// -d/dt phi_H(t, x, (-1)^n y) = |x - y|^2 / (2 sin^2 t) + <x, y>(1 - (-1)^n cos t) / sin^2 t
double phase_neg_dt(double t, const Point& x, const Point& y, int n_tilde);

// (sin s)^{-d/2} continued through the lower half plane from s in (0, pi); on (-pi, 0) this gives the
// branch i^{d} |sin s|^{-d/2}.
cplx sin_power(cplx s, int d);

// sum_N e^{-i tau (2N + d)/2} Pt_N(x, y), Im tau < 0.
cplx abel_propagator_sum(cplx tau, const Point& x, const Point& y, int nmax);

struct Calibration {
  int d = 1;
  cplx constant;          // calibrated
  cplx closed_form;       // (2 pi i)^{-d/2}
  double residual = 0.0;  // relative gap to the closed form
  double spread = 0.0;    // gap between two calibration points
};
const Calibration& propagator_calibration(int d);

// e^{-i(t/2)H}(x, y) = Ct_d (sin t)^{-d/2} e^{i phi_H}; other half periods through
// K(t + n pi, x, y) = e^{-i pi n d/2} K(t, x, (-1)^n y). Rejects t within 1e-9 of pi Z.
cplx propagator_kernel(double t, const Point& x, const Point& y);
// Im tau < 0, principal strip 0 < Re tau < pi.
cplx propagator_kernel(cplx tau, const Point& x, const Point& y);

// sum over the spectrum in (mu - 2R, mu + 2R) of eta((mu - mu')/R) Pt_mu'(x, y)
cplx multiplier_kernel_spectral(const kernels::Eta& eta, double mu, double R, const Point& x, const Point& y);

// Window of the t-integral, split by the parity n~ of the half period:
// sum_{n = n~ mod 2} e^{i n pi (mu - d)/2} eta_hat(R(s + n pi)/2). abs_sum receives sum |eta_hat| of the terms.
cplx periodized_eta_hat(const kernels::Eta& eta, cplx s, double R, double mu, int d, int n_tilde,
                        double* abs_sum = nullptr);

// Oscillatory route, precomputed for pairs with |x|, |y| <= max_radius.
class OscillatoryMultiplier {
 public:
  OscillatoryMultiplier(const kernels::Eta& eta, int d, double mu, double R, double max_radius,
                        const kernels::OscOptions& opt = {});
  cplx operator()(const Point& x, const Point& y) const;
  double last_error() const { return last_error_; }
  std::size_t nodes() const { return base_[0].s.size() + base_[1].s.size(); }
  cplx diagonal() const { return diag_; }  // K(0, 0)

 private:
  struct Precomputed {
    std::vector<cplx> s, g, cot, tan_half;
    std::vector<double> g_abs;  // |g| with the window replaced by its absolute term sum
  };
  // sum_j g_j exp(i(a cot s_j - b tan(s_j / 2))), a = |x - y'|^2 / 2, b = <x, y'>; adds the absolute mass to *mass
  static cplx integrate(const Precomputed& p, double a, double b, double* mass = nullptr);
  int d_;
  double max_r2_;
  kernels::OscOptions opt_;
  Precomputed base_[2], fine_[2];
  cplx diag_;
  double mass_ = 0.0;
  mutable double last_error_ = 0.0;
};

cplx multiplier_kernel_oscillatory(const kernels::Eta& eta, double mu, double R, const Point& x, const Point& y,
                                   const kernels::OscOptions& opt = {});

// Cases i' (R >= mu), ii' (1 <= R < mu), iii' (R < 1); distance unit R^{-1/2}, mu^{1/2}/R, mu^{1/2}.
std::string decay_case(double mu, double R);
double decay_scale(double mu, double R);
// Geometric radii from one distance unit out past the turning point. Hermite functions turn at |x| ~ mu^{1/2},
// which is the unit of case iii', so the admissible range starts at 1 unit rather than 2.
std::vector<double> default_decay_radii(double mu, double R, int n = 80);
// |K(0, r e_1)| for r >= scale fitted against R^{d/2}(1 + r/scale)^{-N} (no prefactor in case iii').
kernels::DecayReport verify_multiplier_decay(const kernels::Eta& eta, int d, double mu, double R,
                                             const std::vector<double>& radii, double requested_N = 4,
                                             double tol = 1e-12);

// mu = 2N + d with N even.
int half_index(int d, int mu);
// Pt_mu(0, x) from the eigenfunction sum.
double projection_origin_direct(int d, int mu, const Point& x);
// (Gamma(N/2 + d/2) / Gamma(N/2 + 1))^{1/2} |x|^{1 - d/2} Lnorm^{d/2-1}_{N/2}(|x|^2), i.e. without the constant.
double projection_origin_radial(int d, int mu, double r);

struct OriginConstant {
  int d = 1, mu = 0;
  double constant = 0.0;  // direct / radial
  double spread = 0.0;    // relative variation over the sample radii
};
OriginConstant origin_constant(int d, int mu);
// |F| times the radial formula.
double projection_origin(int d, int mu, const Point& x);
// ||Pt_mu(0, .)||_2 two ways: sum |Phi_alpha(0)|^2 and radial quadrature of the formula.
struct OriginNorm {
  double from_sum = 0.0, from_quadrature = 0.0;
};
OriginNorm projection_origin_norm(int d, int mu);

// gt_k(x) = phi*^v(mu_k - H)(0, x) at |x| = r by t-quadrature:
// (1 / 2 pi) int phi*(t) e^{i t mu_k} e^{-itH}(0, x) dt.
cplx gk_quadrature(int d, int mu_k, double r, const counterexample::GkOptions& opt = {});
// sum over mu = 2N + d, N even, |mu - mu_k| <= half_width of phi*^v(mu_k - mu) Pt_mu(0, x).
cplx gk_spectral(int d, int mu_k, double r, int half_width = 2500);
riesz::SpectralSamples gk_samples(int d, int mu_k, const std::vector<double>& radii,
                                  const std::vector<double>& weights, int half_width, cplx scale = 1.0);

// |S^{d-1}| r^{d-1}
double radial_density(int d, double r);
// (1 + |x|)^{-beta}
double smooth_weight(double beta, double r);
// ||psi_beta g||_p from radial samples, p = inf allowed.
double weighted_lp_norm(const std::vector<double>& radii, const std::vector<double>& weights,
                        const std::vector<cplx>& values, double beta, double p);
// d/(2p) - 1/2 - beta/2
double norm_exponent(int d, double p, double beta);

// mu_k = mu0 4^k + d so that N_k = mu0 4^k / 2 is even (mu0 even).
counterexample::CounterexampleSeq geometric_sequence(int d, int mu0, int K, double p, double beta, double delta);
// Spectrum with N_k even, spacing at least 4, p > 2d/(d - 1 + 2 beta).
void validate_sequence(const counterexample::CounterexampleSeq& seq);

// Same table as the twisted experiment with n = d, the smooth weight and the annulus 1 < |x| <= 2 in R^d.
counterexample::DivergenceTable divergence_experiment(const counterexample::CounterexampleSeq& seq,
                                                      const counterexample::DivergenceOptions& opt = {});

enum class BoundCheck { holds, fails, not_applicable };
struct PhaseSample {
  double derivative = 0.0;  // |d/dt (mu t/2 + phi_H(t, x, (-1)^n y))|
  double bound = 0.0;       // constant 2^{2j} |x - y|^2
  BoundCheck verdict = BoundCheck::not_applicable;
};
// Preconditions: x != y, 2^{-j} <= pre mu^{-1/2} |x - y|, 2^{1.1 - j} <= |t| <= 2^{2.9 - j}, eta*(t) > 0.
PhaseSample verify_phase_lower_bound(double mu, double t, const Point& x, const Point& y, int j, int n_tilde,
                                     double constant = 0.125, double pre = 0.125);

struct PhaseSweep {
  int samples = 0, applicable = 0, failures = 0;
  double worst_ratio = 0.0;  // min derivative / (2^{2j}|x-y|^2) over applicable samples
  std::vector<std::string> failure_log;  // first few failures
};
PhaseSweep phase_lower_bound_sweep(int d, double mu, int n_tilde, int samples, std::uint64_t seed,
                                   double constant = 0.125);

// Central-difference H applied to the tensor Hermite function h_alpha on [-L, L]^d, step h; max interior
// residual |H f - (2|alpha| + d) f|.
double fd_eigen_residual(const std::vector<int>& alpha, double h, double L = 8.0);

}  // namespace twistlap::hermite
