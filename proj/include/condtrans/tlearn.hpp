#pragma once

#include "condtrans/common.hpp"
#include "condtrans/matcore.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace condtrans {

// Explicit knobs of the constrained model: condition bound rho >= 1, fixed
// Frobenius norm tau > 0, per-column sparsity s.
struct TransformConstraints {
  double cond_bound{1.0};
  double frob_target{1.0};
  Index sparsity{1};
};

// Penalty-model weights: log-det weight mu and Frobenius weight rho_pen. The
// literature uses the same letter for rho_pen and the condition bound; they
// are distinct knobs and deliberately named apart here.
struct PenaltyParams {
  double mu{0.0};
  double rho_pen{0.0};
  Index sparsity{1};
};

// W kept as its SVD factors so the condition and norm constraints act on the
// spectrum directly.
struct TransformFactors {
  DenseMatrix u;
  Vector sigma;
  DenseMatrix v;

  DenseMatrix to_matrix() const { return u * sigma.asDiagonal() * v.transpose(); }
};

// Factors of an invertible square matrix; throws NumericalError when the
// smallest singular value vanishes (sigma entries must stay positive).
TransformFactors factors_from(const DenseMatrix& w);

struct FitRecord {
  int iter{0};
  double objective{0.0};  // ||X - W Y||_F^2 at the end of the iteration
  double err{0.0};        // ||X - W Y||_F
  double err_normalized{0.0};  // ||X - W Y||_F / ||W Y||_F
  double kappa{0.0};
  double frob{0.0};
  bool v_step_increase{false};
  double ms{0.0};

  // Objective trace across the blocks of one iteration (diagnostics; not part
  // of the CSV schema).
  double f_before{0.0};
  double f_after_u{0.0};
  double f_after_sigma{0.0};
  double f_after_v{0.0};
  // Method-specific model objective (penalized objective for the log-det
  // baseline; equals `objective` for the constrained and orthogonal methods).
  double model_objective{0.0};
  Index max_col_nnz{0};
};

struct FitLog {
  std::vector<FitRecord> records;

  // One row per iteration: iter, objective, err, err_normalized, kappa, frob,
  // v_step_increase_flag [, ms]. Wall-clock is off by default so identical
  // runs serialize to identical bytes; header_comments are written first as
  // '#' lines.
  void write_csv(std::ostream& out,
                 const std::vector<std::string>& header_comments = {},
                 bool include_timing = false) const;
  std::string to_json(bool include_timing = false) const;
};

struct FitResult {
  DenseMatrix w;
  DenseMatrix codes;
  TransformFactors factors;  // populated by the factored (proposed) solver
  FitLog log;
};

// ||X - W Y||_F^2
double objective(const DenseMatrix& w, const DenseMatrix& x, const DenseMatrix& y);

// X = H_s(W Y)
DenseMatrix update_codes(const DenseMatrix& w, const DenseMatrix& y, Index s);

// Procrustes step for U: minimizes ||U A - X||_F over orthogonal U with
// A = diag(sigma) V^T Y, solved by the polar factor of X A^T.
DenseMatrix update_u(const TransformFactors& f, const DenseMatrix& x,
                     const DenseMatrix& y);

// Spectrum step: builds the projection instance d_i = <Y^T v_i, X^T u_i> / r_i,
// r_i = ||Y^T v_i||_2, solves it under kappa <= cond_bound, maps the result
// back through sigma_i = s_i / r_i, flips U columns where the target was
// negative, and renormalizes sigma to ||sigma||_2 = frob_target. Updates
// f.sigma (and possibly f.u) in place and returns the new sigma.
Vector update_sigma(TransformFactors& f, const DenseMatrix& x,
                    const DenseMatrix& y, const TransformConstraints& c);

// Surrogate Procrustes step for V: minimizes ||Y^T V - X^T U Sigma^{-1}||_F
// over orthogonal V via the polar factor of Y X^T U Sigma^{-1}. This bounds
// the true objective from above, so the true objective may increase here.
DenseMatrix update_v(const TransformFactors& f, const DenseMatrix& x,
                     const DenseMatrix& y);

// One full U -> Sigma -> V pass at fixed codes.
void proposed_sweep(TransformFactors& f, const DenseMatrix& x,
                    const DenseMatrix& y, const TransformConstraints& c);

// Alternating minimization under the explicit condition/norm constraints:
// per iteration U-step, Sigma-step (with norm renormalization), V-step,
// W = U Sigma V^T, X = H_s(W Y). w0 is rescaled to frob_target before
// factorization; initial codes are X0 = H_s(W0 Y).
FitResult fit_proposed(const DenseMatrix& y, const TransformConstraints& c,
                       const DenseMatrix& w0, int iters);

// Closed-form minimizer of ||X - W Y||_F^2 - mu log|det W| + rho_pen/2 ||W||_F^2
// over W. Factor Y Y^T + rho_pen/2 I = L L^T, decompose L^{-1} Y X^T =
// Q S R^T, then W = 1/2 R (S + (S^2 + 2 mu I)^{1/2}) Q^T L^{-1}. The result is
// checked against the stationarity condition 2(W Y - X)Y^T + rho_pen W
// - mu W^{-T} = 0 and refined by descent steps if the residual is out of
// tolerance.
DenseMatrix bresler_transform_update(const DenseMatrix& y, const DenseMatrix& x,
                                     const PenaltyParams& params);

// Penalized objective value (the model objective of the log-det baseline).
double bresler_objective(const DenseMatrix& w, const DenseMatrix& x,
                         const DenseMatrix& y, const PenaltyParams& params);

// Alternates the closed-form transform update with hard-thresholded codes.
FitResult fit_bresler(const DenseMatrix& y, const PenaltyParams& params,
                      const DenseMatrix& w0, int iters);

// Orthogonal baseline: W = polar factor of X Y^T, X = H_s(W Y).
FitResult fit_ortho(const DenseMatrix& y, Index sparsity, const DenseMatrix& w0,
                    int iters);

}  // namespace condtrans
