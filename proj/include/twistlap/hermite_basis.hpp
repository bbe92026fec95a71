#pragma once

#include <vector>

#include "twistlap/common.hpp"
#include "twistlap/field.hpp"

namespace twistlap::basis {

using MultiIndex = std::vector<int>;
int total(const MultiIndex& a);

// z = x + iy in C^d.
struct ComplexPoint {
  std::vector<double> x, y;
  int dim() const { return static_cast<int>(x.size()); }
  cplx coord(int j) const { return {x[j], y[j]}; }
  static ComplexPoint from(cplx z) { return {{z.real()}, {z.imag()}}; }
};

// <z, S w> = x_z . y_w - y_z . x_w
double symplectic(const ComplexPoint& z, const ComplexPoint& w);
double dist2(const ComplexPoint& z, const ComplexPoint& w);

struct EigenfunctionSpec {
  MultiIndex alpha, beta;
  int d() const { return static_cast<int>(alpha.size()); }
  int eigenvalue() const { return 2 * total(beta) + d(); }
  void validate() const;
};

// L^2(R)-normalized Hermite function.
double hermite_fn(int n, double x);
// Values for n = 0..nmax.
std::vector<double> hermite_fns(int nmax, double x);

// Closed form of Phi_{a,b} on C. The phase in the a <= b branch is (i z/|z|)^{b-a}; this is the sign
// that reproduces the defining integral.
cplx special_hermite_1d(int a, int b, cplx z);
cplx special_hermite(const EigenfunctionSpec& spec, const ComplexPoint& z);

struct OracleOptions {
  double tol = 1e-8;  // largest accepted change between the last two refinements
  int order = 20;
  int max_levels = 10;
};

// (2 pi)^{-d/2} int e^{i<x,xi>} Phi_alpha(xi + y/2) Phi_beta(xi - y/2) d xi by panel-doubling Gauss-Legendre.
cplx special_hermite_integral_oracle(const EigenfunctionSpec& spec, const ComplexPoint& z,
                                     const OracleOptions& opt = {});

Field sample_special_hermite(const EigenfunctionSpec& spec, const Grid& g);

// Second-order central differences of -sum (d_x - i y/2)^2 + (d_y + i x/2)^2; returns the interior
// (one grid ring removed on each side).
Field apply_twisted_laplacian(const Field& f);

}  // namespace twistlap::basis
