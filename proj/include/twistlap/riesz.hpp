#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twistlap/common.hpp"
#include "twistlap/field.hpp"
#include "twistlap/spectral.hpp"

namespace twistlap::riesz {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// max(0, n(1/2 - 1/p) - 1/2); p = inf means 1/p = 0
double critical_delta(double p, double n);
// max(0, beta + n(1/2 - 1/p) - 1/2)
double critical_gamma(double p, double n, double beta);

struct CriticalExponents {
  double p = 2, n = 1, beta = 0;
  double delta() const { return critical_delta(p, n); }
  double gamma() const { return critical_gamma(p, n, beta); }
};

// Dyadic weight: 1 on |z| <= 1, 2^{-alpha j} on 2^{j-1} < |z| <= 2^j.
struct Weight {
  double alpha = 0.0;
  double operator()(double r) const;
  static int annulus(double r);  // j with z in A_j
};

struct RieszParams {
  double delta = 0.0;
  double t = 1.0;
  void validate() const;
};

// (1 - mu/t^2)_+^delta; 1 at mu = t^2 when delta = 0
double riesz_symbol(double delta, double mu, double t);

// f = sum_mu F_mu with every component sampled on a common point set.
struct SpectralSamples {
  int d = 1;
  std::vector<double> mu;             // increasing
  Eigen::MatrixXd re, im;             // points x eigenvalues
  std::vector<double> radius;         // |z| per point
  std::vector<double> weight;         // quadrature weight per point

  std::size_t points() const { return radius.size(); }
  std::size_t terms() const { return mu.size(); }
  // sum_mu m(mu) F_mu
  std::vector<cplx> apply(const std::function<double(double)>& symbol) const;
  std::vector<cplx> total() const;
  void validate() const;
};

// Exact components of a finite special Hermite combination, sampled on the grid (d = 1).
SpectralSamples from_coefficients(const spectral::CoefficientField& cf, const Grid& g);
// Components P_mu f for mu <= mu_max through the expansion route (d = 1).
SpectralSamples decompose(const Field& f, int mu_max, int alpha_cutoff);
// Radial samples sum_j a_j P_{mu_j}(0, z) at |z| = r_i; weights are the caller's radial measure.
SpectralSamples radial_samples(int d, const std::vector<int>& mu, const std::vector<cplx>& coeff,
                               const std::vector<double>& radii, const std::vector<double>& weights);
Field to_field(const std::vector<cplx>& v, const Grid& g);

std::vector<cplx> bochner_riesz(const RieszParams& p, const SpectralSamples& f);
// Expansion route on a grid field.
Field bochner_riesz(const RieszParams& p, const Field& f, int alpha_cutoff);
// Kernel route, d = 1: sum of kernel projections.
Field bochner_riesz_kernel(const RieszParams& p, const Field& f);

// Geometric nodes with ratio 1 + 1/(4 mu_max) from the lowest eigenvalue up to t_max, merged with the
// kinks t = mu^{1/2}.
std::vector<double> riesz_t_grid(const std::vector<double>& mu, double t_max);

struct MaximalResult {
  std::vector<double> value;
  double gap = 0.0;  // largest change of |S_t f| between neighbouring nodes
  std::size_t t_nodes = 0;
};

// sup over the grid (and t = inf) of |sum_mu symbol(mu, t) F_mu|.
MaximalResult maximal_multiplier(const std::function<double(double, double)>& symbol, const SpectralSamples& f,
                                 const std::vector<double>& t_grid, bool include_limit);
MaximalResult maximal_riesz(double delta, const SpectralSamples& f, const std::vector<double>& t_grid);
// default grid up to t_max^2 = 4 mu_max
MaximalResult maximal_riesz(double delta, const SpectralSamples& f);

double weighted_l2(const std::vector<cplx>& v, const Weight& w, const SpectralSamples& at);
double weighted_l2(const std::vector<double>& v, const Weight& w, const SpectralSamples& at);
double weighted_l2(const Field& f, const Weight& w);

// eps + max((alpha - 1)/4, 0) - 1/2
double default_rho(double alpha, double eps = 0.05);
// phi_k(s) for k >= 1, phi_0(s) for k = 0
double dyadic_symbol(int k, double rho, double s);
std::vector<cplx> dyadic_piece(int k, double rho, double t, const SpectralSamples& f);

struct SquareFunctionResult {
  double integral = 0.0;  // int int |phi_k(1 - L/t^2) f|^2 Psi dt/t
  double f_norm2 = 0.0;   // ||f||^2 in L^2(Psi)
  double ratio = 0.0;
  int t_nodes = 0;
};

// Log-trapezoid in t on [1, t_max] restricted to where the symbol can be nonzero. Spacing is at most
// ln 2 / per_octave and at most 2 / per_octave of the support width of a single eigenvalue's window.
SquareFunctionResult square_function_norm(int k, double rho, const SpectralSamples& f, const Weight& w,
                                          double t_max, int per_octave = 64);

struct EnsembleRatio {
  double ratio = 0.0;   // max over the ensemble
  int argmax = -1;
  std::vector<double> members;
};

// ||S_*^delta f||^2 / ||f||^2 in L^2(Psi_alpha), maximized over the ensemble.
EnsembleRatio weighted_maximal_ratio(double delta, const Weight& w, const std::vector<SpectralSamples>& ensemble);
// Same with sup_R |phi_0(1 - L/R^2) f|.
EnsembleRatio weighted_maximal_ratio_phi0(double rho, const Weight& w, const std::vector<SpectralSamples>& ensemble);

struct RatioRow {
  double delta, alpha, k_or_t, ratio;
};
// delta,alpha,k_or_t,ratio
std::string ratio_csv(const std::vector<RatioRow>& rows);

}  // namespace twistlap::riesz
