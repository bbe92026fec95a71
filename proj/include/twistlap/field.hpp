#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twistlap/common.hpp"

namespace twistlap {

// Uniform grid on C^d = R^{2d}; axes ordered x_1..x_d, y_1..y_d, row-major with axis 0 slowest.
struct Grid {
  int d = 1;
  std::vector<int> n;  // 2d axis sizes
  double h = 0.1;
  std::vector<double> origin;  // 2d

  static Grid box(int d, double half_width, double h);
  int axes() const { return 2 * d; }
  std::size_t size() const;
  double cell() const;  // quadrature weight h^{2d}
  void coords(std::size_t flat, double* out) const;
  void validate() const;
};

struct Field {
  Grid grid;
  std::vector<cplx> v;

  explicit Field(Grid g = {});
  double l2() const;
};

cplx inner(const Field& f, const Field& g);  // sum f conj(g) h^{2d}

// Binary layout: int64 d, 2d x int64 axis sizes, float64 spacing, 2d x float64 origin,
// then interleaved re/im float64 in row-major order; everything little-endian.
void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);

}  // namespace twistlap
