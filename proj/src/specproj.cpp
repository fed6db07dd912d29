#include "condtrans/specproj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace condtrans {

namespace {

constexpr double kDegenerateWeightScale = 1e-12;

struct Prepared {
  Vector d;  // |d|
  Vector r;
  double kappa{1.0};
  std::vector<std::uint8_t> flipped;
  std::vector<std::uint8_t> degenerate;
  std::vector<Index> active;
  double ratio_min{0.0};  // min over active of d_i / r_i
  double ratio_max{0.0};
};

Prepared prepare(const ProjectionInstance& inst) {
  require(inst.d.size() == inst.r.size(),
          "projection: d and r must have equal length");
  require(inst.size() >= 1, "projection: empty instance");
  require(inst.d.allFinite() && inst.r.allFinite(),
          "projection: non-finite entries");
  require(std::isfinite(inst.kappa) && inst.kappa >= 1.0,
          "projection: kappa must be >= 1");
  require((inst.r.array() >= 0.0).all(),
          "projection: weights r must be nonnegative");

  const Index n = inst.size();
  Prepared p;
  p.kappa = inst.kappa;
  p.d = inst.d.cwiseAbs();
  p.r = inst.r;
  p.flipped.assign(static_cast<std::size_t>(n), 0);
  p.degenerate.assign(static_cast<std::size_t>(n), 0);

  const double eps_r = kDegenerateWeightScale * inst.r.maxCoeff();
  p.ratio_min = std::numeric_limits<double>::infinity();
  p.ratio_max = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (p.r(i) <= eps_r) {
      p.degenerate[static_cast<std::size_t>(i)] = 1;
      continue;
    }
    p.flipped[static_cast<std::size_t>(i)] = inst.d(i) < 0.0 ? 1 : 0;
    p.active.push_back(i);
    const double t = p.d(i) / p.r(i);
    p.ratio_min = std::min(p.ratio_min, t);
    p.ratio_max = std::max(p.ratio_max, t);
  }
  if (p.active.empty()) {
    throw NumericalError(
        "projection: every weight r_i is degenerate; the data matrix is "
        "rank-deficient along all directions");
  }
  return p;
}

// Optimal s for a fixed multiplier: clamp d onto [l r, kappa l r] on active
// indices, pin degenerate indices to the lower bound.
Vector clamp_spectrum(const Prepared& p, double l) {
  const Index n = p.d.size();
  Vector s(n);
  for (Index i = 0; i < n; ++i) {
    const double lo = l * p.r(i);
    if (p.degenerate[static_cast<std::size_t>(i)]) {
      s(i) = lo;
    } else {
      s(i) = std::clamp(p.d(i), lo, p.kappa * lo);
    }
  }
  return s;
}

double clamp_objective(const Prepared& p, const Vector& s) {
  double obj = 0.0;
  for (Index i : p.active) {
    const double diff = s(i) - p.d(i);
    obj += diff * diff;
  }
  return obj;
}

ProjectionSolution compose(const Prepared& p, double l_star, int sign_changes) {
  ProjectionSolution sol;
  sol.l_star = l_star;
  sol.s_star = clamp_spectrum(p, l_star);
  sol.objective = clamp_objective(p, sol.s_star);
  sol.flipped = p.flipped;
  sol.degenerate = p.degenerate;
  sol.g_prime_sign_changes = sign_changes;
  return sol;
}

bool all_targets_zero(const Prepared& p) {
  for (Index i : p.active)
    if (p.d(i) != 0.0) return false;
  return true;
}

ProjectionSolution zero_target_solution(const Prepared& p) {
  ProjectionSolution sol = compose(p, 0.0, -1);
  sol.zero_target = true;
  return sol;
}

ProjectionSolution feasible_solution(const Prepared& p) {
  ProjectionSolution sol = compose(p, p.ratio_min, -1);
  sol.already_feasible = true;
  return sol;
}

double weighted_mean_multiplier(const Prepared& p) {
  double num = 0.0, den = 0.0;
  for (Index i : p.active) {
    num += p.r(i) * p.d(i);
    den += p.r(i) * p.r(i);
  }
  return num / den;
}

}  // namespace

IndexSets index_sets(double l, const ProjectionInstance& inst) {
  require(l > 0.0, "index_sets: multiplier must be positive");
  IndexSets sets;
  for (Index i = 0; i < inst.size(); ++i) {
    if (inst.d(i) <= l * inst.r(i)) sets.at_lower.push_back(i);
    if (inst.d(i) >= inst.kappa * inst.r(i) * l) sets.at_upper.push_back(i);
  }
  return sets;
}

double g_value(double l, const ProjectionInstance& inst) {
  double g = 0.0;
  for (Index i = 0; i < inst.size(); ++i) {
    const double lo = l * inst.r(i);
    if (inst.d(i) <= lo) {
      const double diff = inst.d(i) - lo;
      g += diff * diff;
    } else if (inst.d(i) >= inst.kappa * lo) {
      const double diff = inst.d(i) - inst.kappa * lo;
      g += diff * diff;
    }
  }
  return g;
}

double g_derivative(double l, const ProjectionInstance& inst) {
  double gp = 0.0;
  for (Index i = 0; i < inst.size(); ++i) {
    const double lo = l * inst.r(i);
    if (inst.d(i) <= lo) {
      gp += 2.0 * inst.r(i) * (lo - inst.d(i));
    } else if (inst.d(i) >= inst.kappa * lo) {
      gp += 2.0 * inst.kappa * inst.r(i) * (inst.kappa * lo - inst.d(i));
    }
  }
  return gp;
}

ProjectionSolution breakpoint_scan(const ProjectionInstance& inst) {
  const Prepared p = prepare(inst);
  if (all_targets_zero(p)) return zero_target_solution(p);
  if (p.ratio_max <= p.kappa * p.ratio_min) return feasible_solution(p);
  if (p.kappa == 1.0) {
    // Both bounds coincide: s = l r, the weighted-mean multiplier is optimal.
    return compose(p, weighted_mean_multiplier(p), -1);
  }

  // Events along increasing l: an index leaves B at l = t_i / kappa and
  // enters A at l = t_i, t_i = d_i / r_i. Boundary terms vanish, so g and g'
  // stay continuous across events and membership at exact breakpoints is
  // immaterial.
  struct Event {
    double value;
    Index i;
    bool enters_lower;  // false: leaves upper set
  };
  std::vector<Event> events;
  events.reserve(2 * p.active.size());

  double sa_rr = 0.0, sa_rd = 0.0, sb_rr = 0.0, sb_rd = 0.0;
  double sa_dd = 0.0, sb_dd = 0.0;
  double gp_scale = 1.0;
  for (Index i : p.active) {
    const double t = p.d(i) / p.r(i);
    gp_scale += p.r(i) * p.d(i);
    if (t == 0.0) {
      sa_rr += p.r(i) * p.r(i);  // d_i = 0 sits in A for every l > 0
    } else {
      sb_rr += p.r(i) * p.r(i);
      sb_rd += p.r(i) * p.d(i);
      sb_dd += p.d(i) * p.d(i);
      events.push_back({t / p.kappa, i, false});
      events.push_back({t, i, true});
    }
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.value < b.value; });

  const double kappa = p.kappa;
  const auto eval_g = [&](double l) {
    return (sa_dd - 2.0 * l * sa_rd + l * l * sa_rr) +
           (sb_dd - 2.0 * kappa * l * sb_rd + kappa * kappa * l * l * sb_rr);
  };
  const auto eval_gp = [&](double l) {
    return 2.0 * (sa_rr * l - sa_rd) + 2.0 * kappa * (kappa * sb_rr * l - sb_rd);
  };

  double best_g = std::numeric_limits<double>::infinity();
  double best_l = 0.0;
  int sign_changes = 0;
  int last_sign = 0;
  double prev_gp = -std::numeric_limits<double>::infinity();
  const double gp_tol = 1e-12 * gp_scale;

  const auto track_sign = [&](double gp) {
    const int s = gp > gp_tol ? 1 : (gp < -gp_tol ? -1 : 0);
    if (s != 0) {
      if (last_sign != 0 && s != last_sign) ++sign_changes;
      last_sign = s;
    }
  };

  const auto process_interval = [&](double lo, double hi) {
    const double denom = sa_rr + kappa * kappa * sb_rr;
    if (denom > 0.0) {
      double lc = (sa_rd + kappa * sb_rd) / denom;
      lc = std::max(lc, lo);
      if (std::isfinite(hi)) lc = std::min(lc, hi);
      const double g = eval_g(lc);
      if (g < best_g) {
        best_g = g;
        best_l = lc;
      }
    }
    // Convexity diagnostics: g' is linear and nondecreasing on the interval
    // and continuous across events, so it must be monotone over the sweep.
    const double gp_lo = eval_gp(lo);
    if (gp_lo < prev_gp - 1e-9 * (1.0 + std::abs(gp_lo) + std::abs(prev_gp))) {
      throw NumericalError("projection: derivative monotonicity violated during sweep");
    }
    track_sign(gp_lo);
    const double hi_probe = std::isfinite(hi) ? hi : 2.0 * lo + 1.0;
    const double gp_hi = eval_gp(hi_probe);
    track_sign(gp_hi);
    prev_gp = std::isfinite(hi) ? gp_hi : prev_gp;
  };

  double prev_value = 0.0;
  std::size_t k = 0;
  while (k < events.size()) {
    const double value = events[k].value;
    if (value > prev_value) {
      process_interval(prev_value, value);
      prev_value = value;
    }
    while (k < events.size() && events[k].value == value) {
      const Event& e = events[k];
      const double ri = p.r(e.i), di = p.d(e.i);
      if (e.enters_lower) {
        sa_rr += ri * ri;
        sa_rd += ri * di;
        sa_dd += di * di;
      } else {
        sb_rr -= ri * ri;
        sb_rd -= ri * di;
        sb_dd -= di * di;
      }
      ++k;
    }
  }
  process_interval(prev_value, std::numeric_limits<double>::infinity());

  ProjectionSolution sol = compose(p, best_l, sign_changes);
  if (!(sol.l_star > 0.0)) {
    throw NumericalError("projection: sweep produced a nonpositive multiplier");
  }
  return sol;
}

ProjectionSolution solve_projection(const ProjectionInstance& inst) {
  return breakpoint_scan(inst);
}

ProjectionSolution grid_oracle(const ProjectionInstance& inst, int grid_points) {
  require(grid_points >= 1000, "grid_oracle: need at least 1000 grid points");
  const Prepared p = prepare(inst);
  if (all_targets_zero(p)) return zero_target_solution(p);
  if (p.ratio_max <= p.kappa * p.ratio_min) return feasible_solution(p);

  constexpr double kMargin = 0.01;
  double lo = p.ratio_min * (1.0 - kMargin);
  double hi = p.ratio_max / p.kappa * (1.0 + kMargin);
  if (hi < lo) std::swap(lo, hi);

  const auto value_at = [&](double l) {
    return clamp_objective(p, clamp_spectrum(p, l));
  };

  // Cleaned instance (|d|, active weights only) for derivative sign counting.
  const Index na = static_cast<Index>(p.active.size());
  ProjectionInstance cleaned{Vector(na), Vector(na), p.kappa};
  for (Index k = 0; k < na; ++k) {
    cleaned.d(k) = p.d(p.active[static_cast<std::size_t>(k)]);
    cleaned.r(k) = p.r(p.active[static_cast<std::size_t>(k)]);
  }

  double best_l = lo;
  double best_g = std::numeric_limits<double>::infinity();
  int best_idx = 0;
  int sign_changes = 0;
  int last_sign = 0;
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  for (int k = 0; k < grid_points; ++k) {
    const double l = lo + step * static_cast<double>(k);
    const double g = value_at(l);
    if (g < best_g) {
      best_g = g;
      best_l = l;
      best_idx = k;
    }
    const double gp = g_derivative(l, cleaned);
    const int s = gp > 0.0 ? 1 : (gp < 0.0 ? -1 : 0);
    if (s != 0) {
      if (last_sign != 0 && s != last_sign) ++sign_changes;
      last_sign = s;
    }
  }

  // Trisection refinement over the bracket around the best grid point.
  double a = lo + step * static_cast<double>(std::max(best_idx - 1, 0));
  double b = lo + step * static_cast<double>(std::min(best_idx + 1, grid_points - 1));
  for (int round = 0; round < 50; ++round) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    if (value_at(m1) <= value_at(m2)) {
      b = m2;
    } else {
      a = m1;
    }
  }
  const double refined = 0.5 * (a + b);
  if (value_at(refined) <= best_g) best_l = refined;

  return compose(p, best_l, sign_changes);
}

}  // namespace condtrans
