#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace twistlap {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// Invalid argument or precondition violation.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Quadrature refinement or iterative solver did not meet its tolerance.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad experiment configuration (unknown key, malformed value).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DomainError(msg);
}

}  // namespace twistlap
