#pragma once

#include <Eigen/Dense>

#include <cstdio>
#include <stdexcept>
#include <string>

namespace condtrans {

// Dense column vectors / matrices of 64-bit floats carry all data in this
// library: datasets Y, sparse codes X, transforms W and their factors.
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr const char* kVersion = "0.1.0";

// A numerical routine could not produce a valid result (failed factorization,
// violated invariant, singular input where an invertible one is required).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File input/output failure (missing file, malformed format).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

// Round-trip decimal formatting used by every serialized float, so equal
// values always produce equal bytes.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace condtrans
