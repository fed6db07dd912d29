#include "condtrans/tlearn.hpp"

#include "condtrans/specproj.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace condtrans {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

Index max_column_nnz(const DenseMatrix& x) {
  Index best = 0;
  for (Index j = 0; j < x.cols(); ++j) {
    Index nnz = 0;
    for (Index i = 0; i < x.rows(); ++i)
      if (x(i, j) != 0.0) ++nnz;
    best = std::max(best, nnz);
  }
  return best;
}

void validate_fit_inputs(const DenseMatrix& y, const DenseMatrix& w0, Index sparsity,
                         int iters) {
  require(w0.rows() == w0.cols(), "fit: w0 must be square");
  require(w0.rows() == y.rows(), "fit: w0 and y row counts differ");
  require(y.cols() >= 1, "fit: empty dataset");
  require(sparsity >= 1 && sparsity <= y.rows(),
          "fit: sparsity must lie in [1, n]");
  require(iters >= 1, "fit: iteration count must be positive");
  require(y.allFinite() && w0.allFinite(), "fit: non-finite inputs");
}

double log_abs_det(const DenseMatrix& w) {
  Eigen::PartialPivLU<DenseMatrix> lu(w);
  double log_det = 0.0;
  for (Index i = 0; i < w.rows(); ++i) {
    const double pivot = std::abs(lu.matrixLU()(i, i));
    if (pivot == 0.0) return -std::numeric_limits<double>::infinity();
    log_det += std::log(pivot);
  }
  return log_det;
}

DenseMatrix bresler_gradient(const DenseMatrix& w, const DenseMatrix& x,
                             const DenseMatrix& y, const PenaltyParams& p) {
  const DenseMatrix w_inv_t = w.partialPivLu().inverse().transpose();
  return 2.0 * (w * y - x) * y.transpose() + p.rho_pen * w - p.mu * w_inv_t;
}

// Backtracking descent on the penalized objective; only reached when the
// closed form misses its stationarity tolerance.
DenseMatrix bresler_refine(DenseMatrix w, const DenseMatrix& x, const DenseMatrix& y,
                           const PenaltyParams& p, double target_residual) {
  double f = bresler_objective(w, x, y, p);
  for (int it = 0; it < 500; ++it) {
    const DenseMatrix grad = bresler_gradient(w, x, y, p);
    if (grad.norm() <= target_residual) break;
    double step = 1.0 / (1.0 + grad.norm());
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const DenseMatrix cand = w - step * grad;
      const double fc = bresler_objective(cand, x, y, p);
      if (fc < f - 1e-4 * step * grad.squaredNorm()) {
        w = cand;
        f = fc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return w;
}

}  // namespace

TransformFactors factors_from(const DenseMatrix& w) {
  const SvdTriplet f = svd(w);
  const double smax = f.sigma(0);
  const double smin = f.sigma(f.sigma.size() - 1);
  if (!(smin > 1e-14 * smax)) {
    throw NumericalError("factors_from: matrix is numerically rank-deficient");
  }
  return TransformFactors{f.u, f.sigma, f.v};
}

double objective(const DenseMatrix& w, const DenseMatrix& x, const DenseMatrix& y) {
  require(w.rows() == w.cols() && w.cols() == y.rows() && x.rows() == y.rows() &&
              x.cols() == y.cols(),
          "objective: dimension mismatch");
  return (x - w * y).squaredNorm();
}

DenseMatrix update_codes(const DenseMatrix& w, const DenseMatrix& y, Index s) {
  return hard_threshold(w * y, s);
}

DenseMatrix update_u(const TransformFactors& f, const DenseMatrix& x,
                     const DenseMatrix& y) {
  const DenseMatrix a = f.sigma.asDiagonal() * (f.v.transpose() * y);
  return polar_orthogonal_factor(x * a.transpose());
}

Vector update_sigma(TransformFactors& f, const DenseMatrix& x, const DenseMatrix& y,
                    const TransformConstraints& c) {
  const Index n = f.sigma.size();
  const DenseMatrix yt_v = y.transpose() * f.v;  // columns Y^T v_i
  const DenseMatrix xt_u = x.transpose() * f.u;  // columns X^T u_i

  ProjectionInstance inst{Vector(n), Vector(n), c.cond_bound};
  for (Index i = 0; i < n; ++i) {
    const double r = yt_v.col(i).norm();
    inst.r(i) = r;
    inst.d(i) = r > 0.0 ? yt_v.col(i).dot(xt_u.col(i)) / r : 0.0;
  }

  ProjectionSolution sol;
  try {
    sol = solve_projection(inst);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("sigma update failed (is Y rank-deficient?): ") +
                         e.what());
  }

  Vector sigma(n);
  if (sol.zero_target) {
    // Targets vanish, so every feasible spectrum scores the same; keep the
    // equal spectrum, which satisfies any condition bound.
    sigma.setOnes();
  } else {
    for (Index i = 0; i < n; ++i) {
      if (sol.flipped[static_cast<std::size_t>(i)]) f.u.col(i) = -f.u.col(i);
      sigma(i) = sol.degenerate[static_cast<std::size_t>(i)]
                     ? sol.l_star
                     : sol.s_star(i) / inst.r(i);
    }
  }

  const double norm = sigma.norm();
  if (!(norm > 0.0)) {
    throw NumericalError("sigma update produced a zero spectrum");
  }
  sigma *= c.frob_target / norm;
  f.sigma = sigma;
  return sigma;
}

DenseMatrix update_v(const TransformFactors& f, const DenseMatrix& x,
                     const DenseMatrix& y) {
  const double smax = f.sigma.maxCoeff();
  const double smin = f.sigma.minCoeff();
  if (!(smin > 1e-14 * smax)) {
    throw NumericalError("v update: singular spectrum, cannot form Sigma^{-1}");
  }
  const DenseMatrix u_sig_inv = f.u * f.sigma.cwiseInverse().asDiagonal();
  return polar_orthogonal_factor(y * (x.transpose() * u_sig_inv));
}

void proposed_sweep(TransformFactors& f, const DenseMatrix& x, const DenseMatrix& y,
                    const TransformConstraints& c) {
  f.u = update_u(f, x, y);
  update_sigma(f, x, y, c);
  f.v = update_v(f, x, y);
}

FitResult fit_proposed(const DenseMatrix& y, const TransformConstraints& c,
                       const DenseMatrix& w0, int iters) {
  validate_fit_inputs(y, w0, c.sparsity, iters);
  require(c.cond_bound >= 1.0, "fit_proposed: condition bound must be >= 1");
  require(c.frob_target > 0.0, "fit_proposed: Frobenius target must be positive");

  const double w0_norm = w0.norm();
  require(w0_norm > 0.0, "fit_proposed: w0 is zero");

  FitResult res;
  const DenseMatrix w_init = w0 * (c.frob_target / w0_norm);
  TransformFactors f = factors_from(w_init);
  res.codes = update_codes(w_init, y, c.sparsity);
  res.log.records.reserve(static_cast<std::size_t>(iters));

  for (int t = 1; t <= iters; ++t) {
    const auto t0 = Clock::now();
    FitRecord rec;
    rec.iter = t;
    rec.f_before = objective(f.to_matrix(), res.codes, y);

    f.u = update_u(f, res.codes, y);
    rec.f_after_u = objective(f.to_matrix(), res.codes, y);

    update_sigma(f, res.codes, y, c);
    rec.f_after_sigma = objective(f.to_matrix(), res.codes, y);

    f.v = update_v(f, res.codes, y);
    rec.f_after_v = objective(f.to_matrix(), res.codes, y);
    rec.v_step_increase =
        rec.f_after_v > rec.f_after_sigma + 1e-10 * (1.0 + rec.f_after_sigma);

    res.w = f.to_matrix();
    const DenseMatrix wy = res.w * y;
    res.codes = hard_threshold(wy, c.sparsity);

    rec.objective = (res.codes - wy).squaredNorm();
    rec.err = std::sqrt(rec.objective);
    rec.err_normalized = rec.err / wy.norm();
    rec.kappa = condition_number(res.w);
    rec.frob = res.w.norm();
    rec.model_objective = rec.objective;
    rec.max_col_nnz = max_column_nnz(res.codes);
    rec.ms = elapsed_ms(t0);
    res.log.records.push_back(rec);
  }
  res.factors = f;
  return res;
}

double bresler_objective(const DenseMatrix& w, const DenseMatrix& x,
                         const DenseMatrix& y, const PenaltyParams& p) {
  const double lad = log_abs_det(w);
  if (!std::isfinite(lad)) return std::numeric_limits<double>::infinity();
  return (x - w * y).squaredNorm() - p.mu * lad + 0.5 * p.rho_pen * w.squaredNorm();
}

DenseMatrix bresler_transform_update(const DenseMatrix& y, const DenseMatrix& x,
                                     const PenaltyParams& p) {
  require(p.mu > 0.0 && p.rho_pen > 0.0,
          "bresler update: penalty weights must be positive");
  require(x.rows() == y.rows() && x.cols() == y.cols(),
          "bresler update: dimension mismatch");

  DenseMatrix gram = y * y.transpose();
  gram.diagonal().array() += 0.5 * p.rho_pen;
  Eigen::LLT<DenseMatrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("bresler update: Cholesky factorization failed");
  }

  const DenseMatrix b = llt.matrixL().solve(y * x.transpose());
  Eigen::BDCSVD<DenseMatrix> dec(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& shat = dec.singularValues();
  Vector gains(shat.size());
  for (Index i = 0; i < shat.size(); ++i) {
    gains(i) = 0.5 * (shat(i) + std::sqrt(shat(i) * shat(i) + 2.0 * p.mu));
  }
  const DenseMatrix m = dec.matrixV() * gains.asDiagonal() * dec.matrixU().transpose();
  DenseMatrix w = llt.matrixU().solve(m.transpose()).transpose();

  const double tol = 1e-6 * (1.0 + w.norm());
  double residual = bresler_gradient(w, x, y, p).norm();
  if (residual > 0.5 * tol) {
    w = bresler_refine(w, x, y, p, 0.25 * tol);
    residual = bresler_gradient(w, x, y, p).norm();
  }
  if (residual > tol) {
    throw NumericalError("bresler update: stationarity residual " +
                         std::to_string(residual) + " exceeds tolerance");
  }
  return w;
}

FitResult fit_bresler(const DenseMatrix& y, const PenaltyParams& p,
                      const DenseMatrix& w0, int iters) {
  validate_fit_inputs(y, w0, p.sparsity, iters);
  require(p.mu > 0.0 && p.rho_pen > 0.0,
          "fit_bresler: penalty weights must be positive");

  FitResult res;
  res.w = w0;
  res.codes = update_codes(res.w, y, p.sparsity);
  res.log.records.reserve(static_cast<std::size_t>(iters));

  for (int t = 1; t <= iters; ++t) {
    const auto t0 = Clock::now();
    FitRecord rec;
    rec.iter = t;
    rec.f_before = bresler_objective(res.w, res.codes, y, p);

    res.w = bresler_transform_update(y, res.codes, p);
    const DenseMatrix wy = res.w * y;
    res.codes = hard_threshold(wy, p.sparsity);

    rec.objective = (res.codes - wy).squaredNorm();
    rec.err = std::sqrt(rec.objective);
    rec.err_normalized = rec.err / wy.norm();
    rec.kappa = condition_number(res.w);
    rec.frob = res.w.norm();
    rec.model_objective = bresler_objective(res.w, res.codes, y, p);
    rec.max_col_nnz = max_column_nnz(res.codes);
    rec.ms = elapsed_ms(t0);
    res.log.records.push_back(rec);
  }
  return res;
}

FitResult fit_ortho(const DenseMatrix& y, Index sparsity, const DenseMatrix& w0,
                    int iters) {
  validate_fit_inputs(y, w0, sparsity, iters);

  FitResult res;
  res.w = w0;
  res.codes = update_codes(res.w, y, sparsity);
  res.log.records.reserve(static_cast<std::size_t>(iters));

  for (int t = 1; t <= iters; ++t) {
    const auto t0 = Clock::now();
    FitRecord rec;
    rec.iter = t;
    rec.f_before = objective(res.w, res.codes, y);

    res.w = polar_orthogonal_factor(res.codes * y.transpose());
    const DenseMatrix wy = res.w * y;
    res.codes = hard_threshold(wy, sparsity);

    rec.objective = (res.codes - wy).squaredNorm();
    rec.err = std::sqrt(rec.objective);
    rec.err_normalized = rec.err / wy.norm();
    rec.kappa = condition_number(res.w);
    rec.frob = res.w.norm();
    rec.model_objective = rec.objective;
    rec.max_col_nnz = max_column_nnz(res.codes);
    rec.ms = elapsed_ms(t0);
    res.log.records.push_back(rec);
  }
  return res;
}

void FitLog::write_csv(std::ostream& out, const std::vector<std::string>& header_comments,
                       bool include_timing) const {
  for (const auto& line : header_comments) out << "# " << line << "\n";
  out << "iter,objective,err,err_normalized,kappa,frob,v_step_increase_flag";
  if (include_timing) out << ",ms";
  out << "\n";
  for (const auto& r : records) {
    out << r.iter << ',' << format_double(r.objective) << ',' << format_double(r.err)
        << ',' << format_double(r.err_normalized) << ',' << format_double(r.kappa)
        << ',' << format_double(r.frob) << ',' << (r.v_step_increase ? 1 : 0);
    if (include_timing) out << ',' << format_double(r.ms);
    out << "\n";
  }
}

std::string FitLog::to_json(bool include_timing) const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json rec{{"iter", r.iter},
                       {"objective", r.objective},
                       {"err", r.err},
                       {"err_normalized", r.err_normalized},
                       {"kappa", r.kappa},
                       {"frob", r.frob},
                       {"v_step_increase_flag", r.v_step_increase}};
    if (include_timing) rec["ms"] = r.ms;
    arr.push_back(std::move(rec));
  }
  return arr.dump();
}

}  // namespace condtrans
