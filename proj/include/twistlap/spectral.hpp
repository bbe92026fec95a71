#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "twistlap/common.hpp"
#include "twistlap/field.hpp"
#include "twistlap/hermite_basis.hpp"

namespace twistlap::spectral {

using basis::ComplexPoint;

// mu = 2N + d
struct Eigenvalue {
  int d = 1;
  int N = 0;
  int mu() const { return 2 * N + d; }
  static Eigenvalue from_mu(int d, int mu);
  void validate() const;
};

// P_mu(w, z) = (2 pi)^{-d} L^{d-1}_N(|w-z|^2/2) e^{-|w-z|^2/4} e^{(i/2)<w,Sz>}
cplx projection_kernel(Eigenvalue ev, const ComplexPoint& w, const ComplexPoint& z);
// P for N = 0..nmax at one pair of points.
std::vector<cplx> projection_kernel_sequence(int d, int nmax, const ComplexPoint& w, const ComplexPoint& z);
// sum_{|beta| = N} sum_{alpha_j <= amax} Phi_{alpha,beta}(w) conj(Phi_{alpha,beta}(z)); d <= 2.
cplx projection_kernel_eigensum(Eigenvalue ev, const ComplexPoint& w, const ComplexPoint& z, int amax);

// Discrete kernel application with weights h^2. d = 1 only; rejects h > pi/(2 mu^{1/2}).
Field project_by_kernel(Eigenvalue ev, const Field& f);

struct ExpansionResult {
  Field field;
  double tail = 0.0;  // largest |<f, Phi>| / |f| over the last three alpha below the cutoff
  bool cutoff_ok = true;
};

// Coefficient-space projection over alpha = 0..alpha_cutoff; d = 1.
ExpansionResult project_by_expansion(Eigenvalue ev, const Field& f, int alpha_cutoff, double tail_tol = 1e-8);

// Finite combination sum c_{a,b} Phi_{a,b} on C (d = 1).
struct CoefficientField {
  std::map<std::pair<int, int>, cplx> c;

  cplx eval(cplx z) const;
  Field sample(const Grid& g) const;
  // keep b == N
  CoefficientField project(int N) const;
  double l2() const;  // exact, from coefficients
  int max_b() const;
  // Gaussian coefficients for a <= amax, b <= bmax, normalized to unit L^2 norm.
  static CoefficientField random(int amax, int bmax, std::mt19937_64& rng);
};

enum class NormMethod { radial, svd, power_iteration };
std::string_view method_name(NormMethod m);
NormMethod parse_method(std::string_view s);

struct RatioOptions {
  NormMethod method = NormMethod::radial;
  double h = 0.05;  // Nystrom spacing
  int max_iter = 5000;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  int svd_max_side = 4096;
};

struct OperatorRatioReport {
  int d = 1;
  double mu = 0;
  double M = 0;
  double sigma = 0;  // 0 for the single projection
  double ratio = 0;
  double normalized_ratio = 0;
  NormMethod method = NormMethod::radial;
  long long grid_n = 0;  // quadrature nodes (radial) or matrix side
  int iterations = 0;
};

// ||chi_B(M) P_mu||^2; normalized by M mu^{-1/2}.
OperatorRatioReport trace_ratio(int d, int mu, double M, const RatioOptions& opt = {});

// ||chi_B(M) omega(L)||^2 over the spectrum in (mu - sigma, mu + sigma); normalized by
// max(1, sigma) M mu^{-1/2} sup|omega|^2 on that spectrum.
OperatorRatioReport band_window_ratio(const std::function<double(double)>& omega, int d, double mu, double sigma,
                                      double M, const RatioOptions& opt = {});

// d,mu,M,sigma,ratio,normalized_ratio,method,grid_n
std::string ratio_csv(const std::vector<OperatorRatioReport>& rows);

}  // namespace twistlap::spectral
