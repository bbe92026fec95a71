#include "twistlap/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>

#include "twistlap/common.hpp"

namespace twistlap::quad {

namespace {

Rule golub_welsch(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int k = 0; k < n; ++k) {
    r.x[k] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    r.w[k] = 2.0 * v * v;
  }
  // polish nodes with a Newton step on P_n
  for (int k = 0; k < n; ++k) {
    double x = r.x[k];
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pm = n == 1 ? 1.0 : p0;
      const double dp = n * (x * pn - pm) / (x * x - 1.0);
      x -= pn / dp;
      if (it == 2) r.w[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    r.x[k] = x;
  }
  return r;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: order must be >= 1");
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, golub_welsch(n)).first;
  return it->second;
}

Rule composite(double a, double b, int panels, int order) {
  std::vector<double> br(panels + 1);
  for (int p = 0; p <= panels; ++p) br[p] = a + (b - a) * p / panels;
  return composite(br, order);
}

Rule composite(const std::vector<double>& breaks, int order) {
  const Rule& g = gauss_legendre(order);
  Rule r;
  if (breaks.size() < 2) return r;
  r.x.reserve((breaks.size() - 1) * order);
  r.w.reserve((breaks.size() - 1) * order);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double c = 0.5 * (breaks[p] + breaks[p + 1]);
    const double h = 0.5 * (breaks[p + 1] - breaks[p]);
    for (int k = 0; k < order; ++k) {
      r.x.push_back(c + h * g.x[k]);
      r.w.push_back(h * g.w[k]);
    }
  }
  return r;
}

}  // namespace twistlap::quad
