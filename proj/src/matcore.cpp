#include "condtrans/matcore.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace condtrans {

double orthogonality_defect(const DenseMatrix& q) {
  return (q.transpose() * q - DenseMatrix::Identity(q.cols(), q.cols())).norm();
}

SvdTriplet svd(const DenseMatrix& m) {
  require(m.rows() == m.cols(), "svd: matrix must be square, got " +
                                    std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()));
  require(m.allFinite(), "svd: matrix has non-finite entries");
  const Index n = m.rows();

  Eigen::BDCSVD<DenseMatrix> dec(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdTriplet out{dec.matrixU(), dec.singularValues(), dec.matrixV()};

  const double scale = 1.0 + m.norm();
  const double recon_err = (out.reconstruct() - m).norm();
  const double ortho_u = orthogonality_defect(out.u);
  const double ortho_v = orthogonality_defect(out.v);
  if (recon_err > 1e-9 * scale || ortho_u > 1e-10 * static_cast<double>(n) ||
      ortho_v > 1e-10 * static_cast<double>(n)) {
    throw NumericalError("svd did not converge: reconstruction residual " +
                         std::to_string(recon_err) + " for input of norm " +
                         std::to_string(m.norm()));
  }
  return out;
}

DenseMatrix polar_orthogonal_factor(const DenseMatrix& m) {
  const SvdTriplet f = svd(m);
  return f.u * f.v.transpose();
}

double condition_number(const DenseMatrix& m) {
  require(m.rows() == m.cols(), "condition_number: matrix must be square");
  Eigen::BDCSVD<DenseMatrix> dec(m);
  const Vector& s = dec.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (smax == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;  // smin == 0 yields +inf
}

Vector hard_threshold_column(const Vector& x, Index s) {
  require(s >= 0, "hard_threshold_column: sparsity must be nonnegative");
  const Index n = x.size();
  s = std::min(s, n);
  Vector out = Vector::Zero(n);
  if (s == 0) return out;
  if (s == n) return x;

  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  // magnitude descending, ties keep the lowest index
  std::nth_element(idx.begin(), idx.begin() + (s - 1), idx.end(),
                   [&x](Index a, Index b) {
                     const double fa = std::abs(x(a));
                     const double fb = std::abs(x(b));
                     if (fa != fb) return fa > fb;
                     return a < b;
                   });
  for (Index k = 0; k < s; ++k) out(idx[static_cast<std::size_t>(k)]) = x(idx[static_cast<std::size_t>(k)]);
  return out;
}

DenseMatrix hard_threshold(const DenseMatrix& m, Index s) {
  require(s >= 0, "hard_threshold: sparsity must be nonnegative");
  DenseMatrix out(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    out.col(j) = hard_threshold_column(m.col(j), s);
  }
  return out;
}

DenseMatrix dct_kron_init(Index n) {
  require(n >= 1, "dct_kron_init: size must be positive");
  const Index p = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  require(p * p == n, "dct_kron_init: size " + std::to_string(n) + " is not a perfect square");

  DenseMatrix d(p, p);
  const double pd = static_cast<double>(p);
  for (Index k = 0; k < p; ++k) {
    const double ck = (k == 0) ? std::sqrt(1.0 / pd) : std::sqrt(2.0 / pd);
    for (Index j = 0; j < p; ++j) {
      d(k, j) = ck * std::cos(M_PI * (2.0 * static_cast<double>(j) + 1.0) *
                              static_cast<double>(k) / (2.0 * pd));
    }
  }

  DenseMatrix out(n, n);
  for (Index k1 = 0; k1 < p; ++k1)
    for (Index k2 = 0; k2 < p; ++k2)
      for (Index j1 = 0; j1 < p; ++j1)
        for (Index j2 = 0; j2 < p; ++j2)
          out(k1 * p + k2, j1 * p + j2) = d(k1, j1) * d(k2, j2);
  return out;
}

}  // namespace condtrans
