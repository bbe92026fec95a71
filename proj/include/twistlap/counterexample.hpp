#pragma once

#include <string>
#include <vector>

#include "twistlap/common.hpp"
#include "twistlap/hermite_basis.hpp"
#include "twistlap/riesz.hpp"

namespace twistlap::counterexample {

// (2 pi)^{-1} int phi*(t) e^{i t s} dt. Integer s with |s| <= 8000 come from a cached table.
cplx phi_star_inverse(double s);

struct GkOptions {
  int order = 16;
  double tol = 1e-10;  // accepted change between two panel doublings, relative to max(|g|, 1e-6 mu^{-1/2});
                       // never below 1e3 eps times the integrand mass
  int max_levels = 8;
};

// (C_d / 2 pi) int phi*(t) (sin t)^{-d} e^{-i(r^2 cot t / 4 + mu_k t)} dt at |z| = r.
cplx gk_quadrature(int d, int mu_k, double r, const GkOptions& opt = {});
cplx g_k(int mu_k, const basis::ComplexPoint& z, const GkOptions& opt = {});

struct GkSpectral {
  cplx value;
  double tail_bound = 0.0;  // sum over the dropped terms of |phi*^v| P_mu(0,0)
};
// (-1)^d sum_{|mu - mu_k| <= half_width} phi*^v(mu - mu_k) P_mu(0, z); the sign comes from running the
// propagator backwards.
GkSpectral gk_spectral(int d, int mu_k, double r, int half_width = 2500);

// Radial samples of g_k (spectral form) with every component kept separately.
riesz::SpectralSamples gk_samples(int d, int mu_k, const std::vector<double>& radii,
                                  const std::vector<double>& weights, int half_width, cplx scale = 1.0);

// Radial measure of the unit sphere bundle: |S^{2d-1}| r^{2d-1}.
double radial_density(int d, double r);

// ||Psi_beta g||_p from radial samples, p = inf allowed; Psi_beta is the dyadic weight.
double weighted_lp_norm(const std::vector<double>& radii, const std::vector<double>& weights,
                        const std::vector<cplx>& values, double beta, double p);

struct GkBoundReport {
  int d = 1, mu_k = 0;
  double plateau_lo = 0.4, plateau_hi = 0.65;  // window in units of mu_k^{1/2}
  double plateau_min = 0, plateau_max = 0;     // |g| mu_k^{1/2} over the window
  double plateau_ratio = 0;
  double fitted_exponent = 0;  // decay of |g| against r / mu_k^{1/2} on [1, 3] mu_k^{1/2}
  double far_value = 0;        // |g(3 mu_k^{1/2})| mu_k^{1/2}
  bool pass = false;           // plateau_ratio <= 16, exponent >= 6, far_value <= 1e-6
};

GkBoundReport verify_gk_bounds(int d, int mu_k, double plateau_lo = 0.4, double plateau_hi = 0.65);

struct LowerSetReport {
  int d = 1, mu = 0;
  double threshold_factor = 0.25;
  double measure = 0;       // |{z in A_1 : |P_mu(0,z)| >= factor mu^{(2d-3)/4}}|
  double annulus_measure = 0;
  double upper_max = 0;     // max over A_1 of |P_mu(0,z)| mu^{-(2d-3)/4}
  int samples = 0;
};

// Radial midpoint grid on 1 < |z| <= 2 with spacing <= spacing_factor mu^{-1/2}.
LowerSetReport lower_set_measure(int d, int mu, double threshold_factor, double spacing_factor = 0.05);

struct CounterexampleSeq {
  int d = 1;
  std::vector<int> mu;  // mu_k for k = 1..K
  double p = riesz::kInf;
  double beta = 0.0;
  double delta = 0.1;
  // geometric mu_k = mu0 4^k (+1 when needed to land in the spectrum)
  static CounterexampleSeq geometric(int d, int mu0, int K, double p, double beta, double delta);
  void validate() const;
};

struct DivergenceOptions {
  int half_width = 300;        // spectral window of each g_k
  double spacing_factor = 0.2;  // annulus grid spacing in units of mu_K^{-1/2}
  double t_max_factor = 2.0;    // t grid up to t_max_factor mu_max^{1/2}
  double threshold_delta = -1;  // delta used in the threshold; negative means seq.delta
  GkOptions gk;
};

struct DivergenceRow {
  int k = 0, mu_k = 0;
  double threshold = 0, measure_proxy = 0;
  double main_term_max = 0, cross_term_max = 0;
  bool dominance_ok = false;
};

struct DivergenceTable {
  double gamma = 0;       // gamma(p, 2d, beta)
  double main_const = 0;  // main term constant at k = 1
  double annulus_measure = 0;
  double gap = 0;         // t-grid discretization gap of the maximal function
  double maximal_min = 0, maximal_max = 0;  // of S_*f over the annulus
  std::vector<double> norms;  // ||Psi_beta g_k||_p
  std::vector<DivergenceRow> rows;
};

DivergenceTable divergence_experiment(const CounterexampleSeq& seq, const DivergenceOptions& opt = {});

// k,mu_k,threshold,measure_proxy,main_term_max,cross_term_max,dominance_ok
std::string divergence_csv(const DivergenceTable& t);

}  // namespace twistlap::counterexample
