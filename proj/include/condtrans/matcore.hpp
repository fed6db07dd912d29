#pragma once

#include "condtrans/common.hpp"

namespace condtrans {

// Full SVD of a square matrix, M = u * diag(sigma) * v^T, with sigma sorted
// nonincreasing and nonnegative (signs absorbed into u).
struct SvdTriplet {
  DenseMatrix u;
  Vector sigma;
  DenseMatrix v;

  DenseMatrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

// ||Q^T Q - I||_F, used by orthogonality checks.
double orthogonality_defect(const DenseMatrix& q);

// Factorizes a square matrix with finite entries. Throws NumericalError if the
// factorization fails its reconstruction/orthogonality checks.
SvdTriplet svd(const DenseMatrix& m);

// Orthogonal polar factor Q = P R^T where m = P S R^T is the SVD. Q maximizes
// trace(Q^T m) over orthogonal matrices, which makes it the solution of the
// orthogonal Procrustes problem min ||Q A - X||_F at m = X A^T. For
// rank-deficient m the maximizer is not unique; the factor returned here uses
// the singular-vector completion of the underlying SVD, which is a valid
// maximizer.
DenseMatrix polar_orthogonal_factor(const DenseMatrix& m);

// sigma_max / sigma_min; +inf when sigma_min is zero (IEEE semantics, and the
// all-zero matrix maps to +inf as well).
double condition_number(const DenseMatrix& m);

// Keeps the s largest-magnitude entries of x and zeroes the rest; the result
// is a best s-sparse approximation of x in the l2 sense. Ties in magnitude
// keep the lowest index. s larger than the vector length is clamped.
Vector hard_threshold_column(const Vector& x, Index s);

// Column-wise hard thresholding.
DenseMatrix hard_threshold(const DenseMatrix& m, Index s);

// Orthonormal DCT-II Kronecker square D (x) D of size n x n, n a perfect
// square, D of size sqrt(n) x sqrt(n):
//   D(k, j) = c_k * cos(pi * (2j + 1) * k / (2 * sqrt(n))),
//   c_0 = sqrt(1 / sqrt(n)), c_k = sqrt(2 / sqrt(n)) for k > 0.
DenseMatrix dct_kron_init(Index n);

}  // namespace condtrans
