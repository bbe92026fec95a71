#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistlap/common.hpp"
#include "twistlap/hermite_basis.hpp"

namespace twistlap::kernels {

using basis::ComplexPoint;

// 0 for u <= -w, 1 for u >= w, smooth in between, and step(w,u) + step(w,-u) = 1.
double smooth_step(double w, double u);

struct CutoffBank {
  double phi_star(double t) const;                // supp (2^{-2.9}, 2^{-1.1}), sum_k phi*(2^k t) = 1
  double phi_k(int k, double rho, double t) const;  // (2^k t)_+^rho phi*(2^k t), k >= 1
  double phi_0(double rho, double t) const;       // t_+^rho (1 - sum_{k>=1} phi*(2^k t))
  double eta(double x) const;                     // exp(1 - 1/(1 - x^2/4)) on (-2, 2)
  double eta_star(double t) const;                // sum_n eta*(t + n pi) = 1
  double psi(double t) const;                     // supp 2^{1.1} <= |t| <= 2^{2.9}
  double varphi(double t) const;                  // 1 on [-1/4, 1/4], supp (-3/4, 3/4)
  double kappa(double t) const;                   // 1 on (-inf, 1], 0 on [2, inf)
};

CutoffBank smooth_bump_bank();

// Fourier transform int eta(x) e^{-i x xi} dx of the bank's eta, from a cached Taylor table.
// Accepts |Im xi| <= 0.6; returns 0 for |Re xi| > eta_hat_cutoff().
cplx eta_hat(cplx xi);
double eta_hat_cutoff();

// Multiplier profile amplitude * eta.
struct Eta {
  double amplitude = 1.0;
  double operator()(double x) const;
  cplx hat(cplx xi) const { return amplitude * eta_hat(xi); }
};

// phi_L(t, z, z') = |z - z'|^2 cot t / 4 + <z, S z'>/2 and its t-derivative.
double phase_L(double t, const ComplexPoint& z, const ComplexPoint& zp);
double phase_L_dt(double t, const ComplexPoint& z, const ComplexPoint& zp);

struct Calibration {
  int d = 1;
  cplx constant;     // numerically calibrated
  cplx closed_form;  // (4 pi i)^{-d}
  double residual = 0.0;  // relative gap between the two
  double spread = 0.0;    // gap between two independent calibration points
};

// Abel-regularized spectral sum sum_N e^{-i tau (2N+d)} P_N(z, z'), Im tau < 0.
cplx abel_propagator_sum(cplx tau, const ComplexPoint& z, const ComplexPoint& zp, int nmax);
// Computed once per dimension.
const Calibration& propagator_calibration(int d);

// e^{-it L}(z, z') = C_d (sin t)^{-d} e^{i phi_L}; rejects t within 1e-9 of pi Z.
cplx propagator_kernel(double t, const ComplexPoint& z, const ComplexPoint& zp);
// Complex time with Im tau <= 0.
cplx propagator_kernel(cplx tau, const ComplexPoint& z, const ComplexPoint& zp);

// sum over spectrum in (mu - 2R, mu + 2R) of eta((mu - mu')/R) P_mu'(w, z)
cplx multiplier_kernel_spectral(const Eta& eta, int d, double mu, double R, const ComplexPoint& w,
                                const ComplexPoint& z);

// Integration path for the periodized t-integral: real pieces on s0 <= |s| <= pi/2 + 1/8 and the lower
// half ellipse s = -s0 cos th - i h sin th in between.
struct PathRule {
  std::vector<cplx> s;
  std::vector<cplx> w;  // complex weights ds
};
inline constexpr double kPathS0 = kPi / 2 - 0.125;
inline constexpr double kPathEnd = kPi / 2 + 0.125;
// Panel width <= min(0.2, pi / (4 freq(s))); every panel split into `split` equal parts.
PathRule path_rule(double h, const std::function<double(cplx)>& freq, int order, int split);

// sum_n sign(n) e^{i n pi mu} eta_hat(R(s + n pi)) over terms with |R Re(s + n pi)| <= cutoff.
// sign(n) = (-1)^{n d}.
cplx periodized_eta_hat(const Eta& eta, cplx s, double R, double mu, int d);
// eta_R on the real line: (2 pi)^{-1} periodized sum times eta*(t).
double eta_R(const Eta& eta, double t, double R, double mu, int d);

struct OscOptions {
  int order = 8;
  double tol = 1e-7;  // relative to max(|K|, 1e-3 |K(z,z)|)
  bool check = true;  // compare against the split-panel rule
};

// Oscillatory route, precomputed for all pairs with |w - z| <= max_sep.
class OscillatoryMultiplier {
 public:
  OscillatoryMultiplier(const Eta& eta, int d, double mu, double R, double max_sep, const OscOptions& opt = {});
  cplx operator()(const ComplexPoint& w, const ComplexPoint& z) const;
  double last_error() const { return last_error_; }
  std::size_t nodes() const { return base_.s.size(); }
  cplx diagonal() const { return diag_; }

 private:
  struct Precomputed {
    std::vector<cplx> s, g, cot;
  };
  cplx integrate(const Precomputed& p, double a) const;
  int d_;
  double max_a_;
  OscOptions opt_;
  Precomputed base_, fine_;
  cplx diag_;
  double mass_ = 0.0;  // sum |g| on the base rule
  mutable double last_error_ = 0.0;
};

cplx multiplier_kernel_oscillatory(const Eta& eta, int d, double mu, double R, const ComplexPoint& w,
                                   const ComplexPoint& z, const OscOptions& opt = {});

struct DecayReport {
  std::string case_name;  // "i", "ii", "iii" (Hermite: "i'", ...)
  std::string op = "twisted";
  int d = 1;
  double mu = 0, R = 0;
  double requested_N = 4;
  double fitted_N = 0;
  double fitted_C = 0;
  int n_samples = 0;
  double tol = 0;
  bool pass = false;
  nlohmann::ordered_json to_json() const;
};

// Shared fitting step: radii with |kernel| values, dimensionless scale and envelope prefactor.
DecayReport fit_decay(const std::vector<double>& radii, const std::vector<double>& values, double scale,
                      double prefactor, double value_floor, double requested_N);

// Case from (mu, R): i for R >= mu, ii for 1 <= R < mu, iii for R < 1.
std::string decay_case(double mu, double R);
double decay_scale(double mu, double R);  // distance unit of the case
std::vector<double> default_decay_radii(double mu, double R, int n = 80);

// |K(0, r)| over the admissible radii (r >= 2 scale), fitted against (1 + r/scale)^{-N}.
DecayReport verify_multiplier_decay(const Eta& eta, int d, double mu, double R, const std::vector<double>& radii,
                                    double requested_N = 4, double tol = 1e-12);

}  // namespace twistlap::kernels
