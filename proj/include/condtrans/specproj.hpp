#pragma once

#include "condtrans/common.hpp"

#include <cstdint>
#include <vector>

namespace condtrans {

// Weighted spectrum projection with an explicit condition bound:
//
//   min_{s, l}  ||s - d||_2^2   subject to   l * r_i <= s_i <= l * r_i * kappa
//
// d_i are per-direction targets, r_i >= 0 are weights, kappa >= 1 bounds the
// ratio max_i(s_i / r_i) / min_i(s_i / r_i). For fixed l the optimal s clamps
// d onto the box [l r, kappa l r]; eliminating s leaves the convex piecewise
// quadratic
//
//   g(l) = sum_{i in A(l)} (d_i - r_i l)^2 + sum_{i in B(l)} (d_i - kappa r_i l)^2
//
// with A(l) = {i : d_i <= l r_i} (lower bound active) and
// B(l) = {i : d_i >= kappa r_i l} (upper bound active).
struct ProjectionInstance {
  Vector d;
  Vector r;
  double kappa{1.0};

  Index size() const { return d.size(); }
};

struct ProjectionSolution {
  Vector s_star;        // optimal spectrum (nonnegative; see `flipped`)
  double l_star{0.0};   // optimal lower-bound multiplier
  double objective{0.0};  // g(l_star), summed over non-degenerate indices

  // d_i < 0 is handled by solving against |d_i|; `flipped[i]` records the sign
  // so the caller can negate the matching direction (e.g. a column of U).
  std::vector<std::uint8_t> flipped;
  // Indices with r_i <= 1e-12 * max r are excluded from the ratio constraint;
  // their s_star entry is the lower bound l_star * r_i.
  std::vector<std::uint8_t> degenerate;

  bool already_feasible{false};  // ratio of d was within kappa, s_star == d
  bool zero_target{false};       // d == 0: any feasible scaling is optimal
  // Sign changes of g' seen by the solver/oracle across its search range;
  // -1 when the code path did not scan (feasible or zero-target shortcuts).
  int g_prime_sign_changes{-1};
};

// Active index sets at multiplier l: A = lower bound, B = upper bound.
struct IndexSets {
  std::vector<Index> at_lower;
  std::vector<Index> at_upper;
};
IndexSets index_sets(double l, const ProjectionInstance& inst);

// g and g' evaluated directly from the definitions above. Intended for
// nonnegative d (callers normalize signs first).
double g_value(double l, const ProjectionInstance& inst);
double g_derivative(double l, const ProjectionInstance& inst);

// Exact solver. Shortcuts: already-feasible instances return s = |d|; d == 0
// returns s = 0 with zero_target set; kappa == 1 uses the weighted-mean closed
// form l = sum(r_i d_i) / sum(r_i^2). Otherwise runs the sorted breakpoint
// sweep: between consecutive breakpoints {d_i / r_i} and {d_i / (kappa r_i)}
// the active sets are constant and g is a plain quadratic, so each interval is
// minimized by its clamped stationary point
//
//   l = (sum_A r_i d_i + kappa sum_B r_i d_i) / (sum_A r_i^2 + kappa^2 sum_B r_i^2)
//
// and the global best interval wins. Throws NumericalError when every r_i is
// degenerate, or if convexity of g is violated during the sweep.
ProjectionSolution solve_projection(const ProjectionInstance& inst);

// The sweep itself; solve_projection delegates here. Kept as a named entry
// point so tests can pit it against independent oracles.
ProjectionSolution breakpoint_scan(const ProjectionInstance& inst);

// Dense 1-D search oracle: scans grid_points values of l over the bracket
// [min(d/r) * 0.99, max(d/r) / kappa * 1.01], applies the clamp formula at
// each, then refines around the best point with 50 trisection rounds.
// grid_points must be at least 1000.
ProjectionSolution grid_oracle(const ProjectionInstance& inst, int grid_points);

}  // namespace condtrans
