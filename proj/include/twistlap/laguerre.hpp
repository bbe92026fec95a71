#pragma once

#include <string_view>
#include <vector>

namespace twistlap::laguerre {

// Order k and type a of L^a_k; a > -1 is accepted although the estimates are stated for integer a >= 0.
struct LaguerreIndex {
  int k = 0;
  double a = 0.0;
  double ell() const { return 4.0 * k + 2.0 * a + 2.0; }
  void validate() const;
};

enum class Regime { small, oscillatory, turning, exponential };
std::string_view regime_name(Regime r);

struct RegimeBound {
  Regime regime;
  double bound_value;
  double r;
};

// Exponential-regime rate. The asymptotic decay rate at r = 3l/2 is about 0.066, so anything above that
// makes the fitted constant grow with k.
inline constexpr double kDefaultGamma = 1.0 / 20.0;

// Signed value stored as log|v| and sign (sign == 0 means exact zero).
struct LogValue {
  double logabs = 0.0;
  int sign = 1;
  double value() const;
};

double laguerre_poly(LaguerreIndex idx, double x);

// (k!/(k+a)!)^{1/2} x^{a/2} L^a_k(x) e^{-x/2}
double laguerre_norm(LaguerreIndex idx, double x);
LogValue laguerre_norm_log(LaguerreIndex idx, double x);

// L^a_k(x) e^{-x/2}; finite at x = 0 for every a > -1.
double laguerre_exp(LaguerreIndex idx, double x);

// Normalized functions for k = 0..kmax at a fixed argument, one forward sweep.
std::vector<double> laguerre_norm_sequence(double a, int kmax, double x);
// L^a_k(x) e^{-x/2} for k = 0..kmax.
std::vector<double> laguerre_exp_sequence(double a, int kmax, double x);

RegimeBound regime_bound(LaguerreIndex idx, double r, double gamma = kDefaultGamma);

// Main term of the large-k expansion, valid on [1, l - l^{1/3}].
double laguerre_asymptotic_main(LaguerreIndex idx, double r);
// l^{1/4}(l-r)^{-7/4} + (r l)^{-3/4}
double asymptotic_remainder_envelope(LaguerreIndex idx, double r);
// max over n sample points of |main - exact| / envelope.
double asymptotic_envelope_ratio(LaguerreIndex idx, int n);

struct RegimeSample {
  Regime regime;
  int k;
  double a;
  double fitted_C;  // max |L| / bound over the sampled r in this regime
  int n_samples;
};

struct LaguerreBoundReport {
  double gamma = kDefaultGamma;
  std::vector<RegimeSample> samples;
  double max_ratio = 0.0;
  // regimes whose fitted constant trends upward in k for k >= growth_from_k
  std::vector<Regime> growing;
  double growth_slack = 0.0;
};

struct BoundSweep {
  std::vector<int> ks;
  std::vector<double> as;
  int points_per_regime = 200;
  double gamma = kDefaultGamma;
  int growth_from_k = 50;
  double growth_slack = 0.05;  // largest log C vs log k slope not counted as growth
};

LaguerreBoundReport verify_laguerre_bounds(const BoundSweep& sweep);
// Same sweep on an explicit r-grid shared by all indices.
LaguerreBoundReport verify_laguerre_bounds(const BoundSweep& sweep, const std::vector<double>& r_grid);

}  // namespace twistlap::laguerre
