#pragma once

#include "condtrans/common.hpp"
#include "condtrans/imaging.hpp"
#include "condtrans/tlearn.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace condtrans {

enum class Method { proposed, bresler, ortho };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct DenoiseConfig {
  Method method{Method::proposed};
  double sigma_noise{0.0};
  double c_factor{1.15};  // sparsity threshold factor C in eps = C sqrt(n) sigma
  double beta{-1.0};      // <= 0 selects the default 0.01 * patch count
  int patch_size{11};
  int stride{1};
  int outer_iters{20};
  int inner_transform_iters{12};
  bool subtract_mean{true};
  bool accelerated_sparsity{false};
  std::uint64_t seed{0};

  // Proposed-method constraints. cond_bound < 1 requests the matched default:
  // run the penalty method on the same image first and adopt the condition
  // number and Frobenius norm of its final transform.
  TransformConstraints constraints{0.0, 0.0, 1};
  // Penalty-method weights; mu <= 0 selects mu = rho_pen = 2.1e-6 ||W0 Y||_F^2
  // evaluated once at the initial transform.
  PenaltyParams penalty{0.0, 0.0, 1};
};

struct DenoiseIterationRecord {
  int iter{0};
  double objective{0.0};   // ||W Yhat - X||_F^2 + beta ||Y - Yhat||_F^2
  double fit_term{0.0};
  double proximity_term{0.0};
  double kappa{0.0};
  double frob{0.0};
  double mean_sparsity{0.0};
  bool w_step_increase{false};
  bool code_step_increase{false};
};

struct DenoiseReport {
  std::string method;
  double sigma_noise{0.0};
  double epsilon{0.0};
  double beta_used{0.0};
  double rho_used{0.0};
  double tau_used{0.0};
  double mu_used{0.0};
  double rho_pen_used{0.0};
  int patch_size{0};
  int stride{0};
  int outer_iters{0};
  int inner_transform_iters{0};
  bool subtract_mean{true};
  std::uint64_t seed{0};
  Index patch_count{0};

  std::vector<DenoiseIterationRecord> iterations;

  double psnr_vs_clean{std::numeric_limits<double>::quiet_NaN()};
  double ssim_vs_clean{std::numeric_limits<double>::quiet_NaN()};
  double psnr_noisy_vs_clean{std::numeric_limits<double>::quiet_NaN()};
  double elapsed_ms{0.0};

  // Deterministic JSON; wall-clock only with include_timing.
  std::string to_json(bool include_timing = false) const;
};

// Per column j finds the smallest s in {1, ..., n} with
// ||yhat_j - W^{-1} H_s(W yhat_j)||_2 <= epsilon (capped at n) and returns
// X with x_j = H_{s_j}(W yhat_j) plus the chosen sparsity levels. The
// accelerated flag switches to doubling plus bisection and verifies it lands
// on the same minimal level as the linear scan would.
std::pair<DenseMatrix, std::vector<int>> variable_sparsity_codes(
    const DenseMatrix& w, const DenseMatrix& y_hat, double epsilon,
    bool accelerated = false);

// Unique minimizer of ||W Yhat - X||_F^2 + beta ||Y - Yhat||_F^2 over Yhat,
// i.e. the solution of (W^T W + beta I) Yhat = W^T X + beta Y.
DenseMatrix update_clean_patches(const DenseMatrix& w, const DenseMatrix& x,
                                 const DenseMatrix& y, double beta);

// Full pipeline: patch extraction, alternating transform / variable-sparsity
// code / clean-patch updates, overlap-averaged reconstruction. When `clean`
// is provided the report carries PSNR/SSIM against it (computed on the float
// images, before any save-time clamping).
std::pair<ImageBuffer, DenoiseReport> denoise(const ImageBuffer& noisy,
                                              const DenoiseConfig& cfg,
                                              const ImageBuffer* clean = nullptr);

}  // namespace condtrans
