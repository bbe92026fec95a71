#include "twistlap/laguerre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "twistlap/common.hpp"

namespace twistlap::laguerre {

namespace {

constexpr double kRescale = 1e150;
const double kLogRescale = std::log(kRescale);

// Forward sweep of q_n = (n!/Gamma(n+a+1))^{1/2} L^a_n(x), times exp(-lgamma(a+1)/2).
// The callback receives (n, q_n, log of the accumulated scale).
template <class F>
void normalized_sweep(double a, int kmax, double x, F&& emit) {
  double logs = -0.5 * std::lgamma(a + 1.0);
  double p0 = 1.0;
  emit(0, p0, logs);
  if (kmax == 0) return;
  double p1 = (1.0 + a - x) / std::sqrt(1.0 + a);
  emit(1, p1, logs);
  for (int n = 1; n < kmax; ++n) {
    const double p2 = ((2.0 * n + 1.0 + a - x) * p1 - std::sqrt(n * (n + a)) * p0) /
                      std::sqrt((n + 1.0) * (n + 1.0 + a));
    p0 = p1;
    p1 = p2;
    if (std::abs(p1) > kRescale) {
      p0 /= kRescale;
      p1 /= kRescale;
      logs += kLogRescale;
    }
    emit(n + 1, p1, logs);
  }
}

LogValue to_log(double p, double logs, double extra) {
  if (p == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
  return {std::log(std::abs(p)) + logs + extra, p > 0 ? 1 : -1};
}

double prefactor_log(double a, double x) {
  // log of x^{a/2} e^{-x/2}
  return 0.5 * a * std::log(x) - 0.5 * x;
}

}  // namespace

void LaguerreIndex::validate() const {
  require(k >= 0, "laguerre: order k must be >= 0");
  require(a > -1.0, "laguerre: type a must be > -1");
}

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::small: return "small";
    case Regime::oscillatory: return "oscillatory";
    case Regime::turning: return "turning";
    case Regime::exponential: return "exponential";
  }
  return "?";
}

double LogValue::value() const {
  if (sign == 0) return 0.0;
  return sign * std::exp(logabs);
}

double laguerre_poly(LaguerreIndex idx, double x) {
  idx.validate();
  require(x >= 0.0, "laguerre_poly: x must be >= 0");
  const double a = idx.a;
  double l0 = 1.0;
  if (idx.k == 0) return l0;
  double l1 = 1.0 + a - x;
  for (int n = 1; n < idx.k; ++n) {
    const double l2 = ((2.0 * n + 1.0 + a - x) * l1 - (n + a) * l0) / (n + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

LogValue laguerre_norm_log(LaguerreIndex idx, double x) {
  idx.validate();
  require(x >= 0.0, "laguerre_norm: x must be >= 0");
  if (x == 0.0) {
    if (idx.a > 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    if (idx.a < 0.0) return {std::numeric_limits<double>::infinity(), 1};
  }
  double p = 0.0, logs = 0.0;
  normalized_sweep(idx.a, idx.k, x, [&](int n, double v, double s) {
    if (n == idx.k) {
      p = v;
      logs = s;
    }
  });
  const double extra = x == 0.0 ? 0.0 : prefactor_log(idx.a, x);
  return to_log(p, logs, extra);
}

double laguerre_norm(LaguerreIndex idx, double x) { return laguerre_norm_log(idx, x).value(); }

double laguerre_exp(LaguerreIndex idx, double x) {
  idx.validate();
  require(x >= 0.0, "laguerre_exp: x must be >= 0");
  double p = 0.0, logs = 0.0;
  normalized_sweep(idx.a, idx.k, x, [&](int n, double v, double s) {
    if (n == idx.k) {
      p = v;
      logs = s;
    }
  });
  const double extra = 0.5 * (std::lgamma(idx.k + idx.a + 1.0) - std::lgamma(idx.k + 1.0)) - 0.5 * x;
  return to_log(p, logs, extra).value();
}

std::vector<double> laguerre_norm_sequence(double a, int kmax, double x) {
  LaguerreIndex{kmax, a}.validate();
  require(x >= 0.0, "laguerre_norm_sequence: x must be >= 0");
  std::vector<double> out(kmax + 1, 0.0);
  if (x == 0.0 && a != 0.0) {
    std::fill(out.begin(), out.end(), a > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    return out;
  }
  const double extra = x == 0.0 ? 0.0 : prefactor_log(a, x);
  normalized_sweep(a, kmax, x, [&](int n, double v, double s) { out[n] = to_log(v, s, extra).value(); });
  return out;
}

std::vector<double> laguerre_exp_sequence(double a, int kmax, double x) {
  LaguerreIndex{kmax, a}.validate();
  require(x >= 0.0, "laguerre_exp_sequence: x must be >= 0");
  std::vector<double> out(kmax + 1, 0.0);
  normalized_sweep(a, kmax, x, [&](int n, double v, double s) {
    const double extra = 0.5 * (std::lgamma(n + a + 1.0) - std::lgamma(n + 1.0)) - 0.5 * x;
    out[n] = to_log(v, s, extra).value();
  });
  return out;
}

RegimeBound regime_bound(LaguerreIndex idx, double r, double gamma) {
  idx.validate();
  require(r >= 0.0, "regime_bound: r must be >= 0");
  require(gamma > 0.0, "regime_bound: gamma must be > 0");
  const double l = idx.ell();
  if (r <= 1.0 / l) {
    const double v = idx.a == 0.0 ? 1.0 : std::pow(r * l, 0.5 * idx.a);
    return {Regime::small, v, r};
  }
  if (r <= 0.5 * l) return {Regime::oscillatory, std::pow(r * l, -0.25), r};
  if (r < 1.5 * l)
    return {Regime::turning, std::pow(l, -0.25) * std::pow(std::cbrt(l) + std::abs(l - r), -0.25), r};
  return {Regime::exponential, std::exp(-gamma * r), r};
}

double laguerre_asymptotic_main(LaguerreIndex idx, double r) {
  idx.validate();
  const double l = idx.ell();
  if (!(r >= 1.0 && r <= l - std::cbrt(l)))
    throw DomainError("laguerre_asymptotic_main: r outside [1, l - l^{1/3}]");
  const double theta = std::acos(std::sqrt(r / l));
  const double sgn = idx.k % 2 == 0 ? 1.0 : -1.0;
  return std::sqrt(2.0 / kPi) * sgn * std::pow(r, -0.25) * std::pow(l - r, -0.25) *
         std::cos((l * (2.0 * theta - std::sin(2.0 * theta)) - kPi) / 4.0);
}

double asymptotic_remainder_envelope(LaguerreIndex idx, double r) {
  const double l = idx.ell();
  return std::pow(l, 0.25) * std::pow(l - r, -1.75) + std::pow(r * l, -0.75);
}

double asymptotic_envelope_ratio(LaguerreIndex idx, int n) {
  const double l = idx.ell();
  const double hi = l - std::cbrt(l);
  require(hi > 1.0 && n >= 2, "asymptotic_envelope_ratio: empty range");
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = 1.0 + (hi - 1.0) * i / (n - 1);
    const double err = std::abs(laguerre_asymptotic_main(idx, r) - laguerre_norm(idx, r));
    worst = std::max(worst, err / asymptotic_remainder_envelope(idx, r));
  }
  return worst;
}

namespace {

std::vector<double> regime_grid(Regime reg, double l, int n) {
  std::vector<double> r(n);
  auto logspace = [&](double lo, double hi) {
    for (int i = 0; i < n; ++i) r[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : double(i) / (n - 1));
  };
  auto linspace = [&](double lo, double hi) {
    for (int i = 0; i < n; ++i) r[i] = lo + (hi - lo) * (n == 1 ? 0.0 : double(i) / (n - 1));
  };
  switch (reg) {
    case Regime::small: logspace(1e-3 / l, 1.0 / l); break;
    case Regime::oscillatory: logspace(1.0 / l, 0.5 * l); break;
    case Regime::turning: linspace(0.5 * l, 1.5 * l); break;
    case Regime::exponential: linspace(1.5 * l, 3.0 * l); break;
  }
  return r;
}

// log of |L| / bound; handles underflow of both factors in the exponential regime
double log_ratio(LaguerreIndex idx, double r, double gamma, Regime* reg) {
  const RegimeBound b = regime_bound(idx, r, gamma);
  *reg = b.regime;
  const LogValue v = laguerre_norm_log(idx, r);
  if (v.sign == 0) return -std::numeric_limits<double>::infinity();
  if (b.regime == Regime::exponential) return v.logabs + gamma * r;
  if (b.bound_value == 0.0) return -std::numeric_limits<double>::infinity();
  return v.logabs - std::log(b.bound_value);
}

void finish(LaguerreBoundReport& rep, const BoundSweep& sweep) {
  rep.growth_slack = sweep.growth_slack;
  for (const auto& s : rep.samples) rep.max_ratio = std::max(rep.max_ratio, s.fitted_C);
  for (Regime reg : {Regime::small, Regime::oscillatory, Regime::turning, Regime::exponential}) {
    bool grows = false;
    for (double a : sweep.as) {
      std::map<int, double> byk;
      for (const auto& s : rep.samples)
        if (s.regime == reg && s.a == a && s.k >= sweep.growth_from_k && s.n_samples > 0) byk[s.k] = s.fitted_C;
      // least-squares slope of log C against log k; sampling jitter of a few percent is not growth
      if (byk.size() < 2) continue;
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (const auto& [k, c] : byk) {
        const double x = std::log(double(k)), y = std::log(std::max(c, 1e-300));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
      }
      const double n = double(byk.size());
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      if (slope > sweep.growth_slack) grows = true;
    }
    if (grows) rep.growing.push_back(reg);
  }
}

}  // namespace

LaguerreBoundReport verify_laguerre_bounds(const BoundSweep& sweep) {
  LaguerreBoundReport rep;
  rep.gamma = sweep.gamma;
  if (sweep.points_per_regime <= 0) return rep;
  for (double a : sweep.as)
    for (int k : sweep.ks) {
      const LaguerreIndex idx{k, a};
      idx.validate();
      for (Regime reg : {Regime::small, Regime::oscillatory, Regime::turning, Regime::exponential}) {
        double best = 0.0;
        int n = 0;
        for (double r : regime_grid(reg, idx.ell(), sweep.points_per_regime)) {
          Regime got;
          const double lr = log_ratio(idx, r, sweep.gamma, &got);
          if (got != reg) continue;
          ++n;
          best = std::max(best, std::exp(lr));
        }
        rep.samples.push_back({reg, k, a, best, n});
      }
    }
  finish(rep, sweep);
  return rep;
}

LaguerreBoundReport verify_laguerre_bounds(const BoundSweep& sweep, const std::vector<double>& r_grid) {
  LaguerreBoundReport rep;
  rep.gamma = sweep.gamma;
  if (r_grid.empty()) return rep;
  for (double a : sweep.as)
    for (int k : sweep.ks) {
      const LaguerreIndex idx{k, a};
      idx.validate();
      double best[4] = {0, 0, 0, 0};
      int n[4] = {0, 0, 0, 0};
      for (double r : r_grid) {
        Regime got;
        const double lr = log_ratio(idx, r, sweep.gamma, &got);
        const int g = static_cast<int>(got);
        ++n[g];
        best[g] = std::max(best[g], std::exp(lr));
      }
      for (int g = 0; g < 4; ++g) rep.samples.push_back({static_cast<Regime>(g), k, a, best[g], n[g]});
    }
  finish(rep, sweep);
  return rep;
}

}  // namespace twistlap::laguerre
