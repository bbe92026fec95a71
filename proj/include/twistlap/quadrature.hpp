#pragma once

#include <vector>

namespace twistlap::quad {

// Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

// Nodes come from the Golub-Welsch eigenproblem; rules are cached per order.
const Rule& gauss_legendre(int n);

// Composite rule: `panels` equal panels of order `order` on [a, b].
Rule composite(double a, double b, int panels, int order);

// Composite rule on explicit breakpoints.
Rule composite(const std::vector<double>& breaks, int order);

}  // namespace twistlap::quad
