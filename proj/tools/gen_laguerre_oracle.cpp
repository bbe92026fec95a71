// Writes the extended-precision reference table for the normalized Laguerre functions.
// Independent of the library: explicit power sum evaluated with 1024-bit binary floats.
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <vector>

using big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<1024>>;

static big normalized(int k, const big& a, const big& x) {
  using boost::math::tgamma;
  big sum = 0;
  big coef = tgamma(big(k) + a + 1) / (tgamma(big(k) + 1) * tgamma(a + 1));  // binom(k+a, k)
  big xp = 1;
  for (int j = 0; j <= k; ++j) {
    big term = coef * xp;
    sum += (j % 2 == 0) ? term : big(-term);
    // binom(k+a, k-j-1) / binom(k+a, k-j) = (k-j) / (a+j+1); x^{j+1}/(j+1)!
    coef = coef * big(k - j) / (a + big(j + 1));
    xp = xp * x / big(j + 1);
  }
  big pre = sqrt(tgamma(big(k) + 1) / tgamma(big(k) + a + 1));
  big xa = x == 0 ? (a == 0 ? big(1) : big(0)) : pow(x, a / 2);
  return pre * xa * sum * exp(-x / 2);
}

int main(int argc, char** argv) {
  const char* path = argc > 1 ? argv[1] : "laguerre_oracle.txt";
  struct Pt { int k; double a; double x; };
  std::vector<Pt> pts;
  for (int k : {0, 1, 2, 5, 10, 20, 50, 100, 200})
    for (double a : {0.0, 0.5, 1.0, 2.0, 3.0})
      for (double x : {0.0, 0.01, 0.5, 2.0, 7.5, 40.0, 150.0, 400.0, 900.0}) pts.push_back({k, a, x});
  pts.push_back({2, 1.0, 2.0});
  pts.push_back({0, 2.0, 2.0});
  pts.push_back({50, 3.0, 40.0});
  std::ofstream out(path);
  out.imbue(std::locale::classic());
  char buf[256];
  for (const auto& p : pts) {
    const big v = normalized(p.k, big(p.a), big(p.x));
    const double hi = static_cast<double>(v);
    const double lo = static_cast<double>(v - big(hi));
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g %.17g\n", p.k, p.a, p.x, hi, lo);
    out << buf;
  }
  std::cerr << "wrote " << pts.size() << " rows to " << path << "\n";
  return 0;
}
