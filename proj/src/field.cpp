#include "twistlap/field.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace twistlap {

Grid Grid::box(int d, double half_width, double h) {
  require(d >= 1 && half_width > 0.0 && h > 0.0, "Grid::box: bad arguments");
  Grid g;
  g.d = d;
  g.h = h;
  const int m = static_cast<int>(std::llround(half_width / h));
  g.n.assign(2 * d, 2 * m + 1);
  g.origin.assign(2 * d, -m * h);
  return g;
}

std::size_t Grid::size() const {
  std::size_t s = 1;
  for (int k : n) s *= static_cast<std::size_t>(k);
  return s;
}

double Grid::cell() const { return std::pow(h, 2 * d); }

void Grid::coords(std::size_t flat, double* out) const {
  for (int a = axes() - 1; a >= 0; --a) {
    const std::size_t i = flat % n[a];
    flat /= n[a];
    out[a] = origin[a] + h * static_cast<double>(i);
  }
}

void Grid::validate() const {
  require(d >= 1, "Grid: d must be >= 1");
  require(static_cast<int>(n.size()) == 2 * d && static_cast<int>(origin.size()) == 2 * d,
          "Grid: axis arrays must have length 2d");
  require(h > 0.0, "Grid: spacing must be positive");
}

Field::Field(Grid g) : grid(std::move(g)) {
  if (!grid.n.empty()) v.assign(grid.size(), cplx{});
}

double Field::l2() const {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s * grid.cell());
}

cplx inner(const Field& f, const Field& g) {
  require(f.v.size() == g.v.size(), "inner: size mismatch");
  cplx s{};
  for (std::size_t i = 0; i < f.v.size(); ++i) s += f.v[i] * std::conj(g.v[i]);
  return s * f.grid.cell();
}

namespace {

static_assert(std::endian::native == std::endian::little, "field I/O assumes a little-endian host");

template <class T>
void put(std::ofstream& o, T v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::ifstream& i) {
  T v;
  i.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!i) throw DomainError("read_field: truncated file");
  return v;
}

}  // namespace

void write_field(const std::string& path, const Field& f) {
  f.grid.validate();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary);
    if (!o) throw std::runtime_error("write_field: cannot open " + tmp);
    put<std::int64_t>(o, f.grid.d);
    for (int k : f.grid.n) put<std::int64_t>(o, k);
    put<double>(o, f.grid.h);
    for (double x : f.grid.origin) put<double>(o, x);
    for (const auto& x : f.v) {
      put<double>(o, x.real());
      put<double>(o, x.imag());
    }
  }
  std::filesystem::rename(tmp, path);
}

Field read_field(const std::string& path) {
  std::ifstream i(path, std::ios::binary);
  if (!i) throw DomainError("read_field: cannot open " + path);
  Grid g;
  g.d = static_cast<int>(get<std::int64_t>(i));
  require(g.d >= 1 && g.d <= 8, "read_field: bad dimension");
  for (int a = 0; a < 2 * g.d; ++a) g.n.push_back(static_cast<int>(get<std::int64_t>(i)));
  g.h = get<double>(i);
  for (int a = 0; a < 2 * g.d; ++a) g.origin.push_back(get<double>(i));
  g.validate();
  Field f(g);
  for (auto& x : f.v) {
    const double re = get<double>(i);
    const double im = get<double>(i);
    x = {re, im};
  }
  return f;
}

}  // namespace twistlap
