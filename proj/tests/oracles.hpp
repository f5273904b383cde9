#pragma once

// Test-only oracles, independent of the library's solution paths: dense
// linear algebra for eigenvector cross-checks, 1-D grid search for proximal
// values, explicit Kronecker products, and sign-pattern enumeration for the
// small-dimension lasso.

#include "netgame/prox.hpp"
#include "netgame/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace netgame::oracles {

/// Left PF eigenvector by dense linear solve of (A^T - I) q = 0 with a
/// normalization row appended; unit 2-norm, positive orientation.
inline Vec pf_linear_solve(const Mat& a) {
  const Eigen::Index n = a.rows();
  Mat system(n + 1, n);
  system.topRows(n) = a.transpose() - Mat::Identity(n, n);
  system.bottomRows(1) = Eigen::RowVectorXd::Ones(n);
  Vec rhs = Vec::Zero(n + 1);
  rhs[n] = 1.0;
  Vec q = system.colPivHouseholderQr().solve(rhs);
  if (q.sum() < 0.0) q = -q;
  return q / q.norm();
}

/// (A (x) I_n) x via the explicit Kronecker product.
inline Vec kron_mix(const Mat& a, const Vec& x, int block) {
  const Eigen::Index n = a.rows();
  Mat big = Mat::Zero(n * block, n * block);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      big.block(i * block, j * block, block, block) = a(i, j) * Mat::Identity(block, block);
  return big * x;
}

/// Minimizes a 1-D convex function over [lo, hi] by coarse grid search plus
/// golden-section refinement; accurate to ~1e-9 on the argmin.
inline double grid_min_1d(const std::function<double(double)>& f, double lo, double hi) {
  const int coarse = 4000;
  double best_x = lo, best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= coarse; ++i) {
    const double x = lo + (hi - lo) * i / coarse;
    const double v = f(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - (hi - lo) / coarse);
  double b = std::min(hi, best_x + (hi - lo) / coarse);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  return 0.5 * (a + b);
}

/// Componentwise grid-search prox for separable maps: minimizes
/// lambda*f_c(y) + (w/2)(y - z_c)^2 per component over the box (or a wide
/// interval when unbounded).
inline Vec grid_prox(const ProximalMap& map, const Vec& z, double lambda) {
  Vec out(z.size());
  for (Eigen::Index c = 0; c < z.size(); ++c) {
    double lo = map.has_box ? map.lo[c] : z[c] - 50.0;
    double hi = map.has_box ? map.hi[c] : z[c] + 50.0;
    lo = std::max(lo, z[c] - 1e3);  // the prox never moves past the data scale
    hi = std::min(hi, z[c] + 1e3);
    if (lo > hi) std::swap(lo, hi);
    auto cost = [&](double y) {
      double f = 0.0;
      switch (map.kind) {
        case ProxKind::box_indicator:
          break;
        case ProxKind::fj_quadratic: {
          const double a = (1.0 - map.stubbornness) / map.stubbornness;
          f = a * (y - map.anchor[c]) * (y - map.anchor[c]);
          break;
        }
        case ProxKind::l1:
          f = map.l1_weight * std::abs(y);
          break;
        default:
          throw UnsupportedKindError("grid_prox: non-separable kind");
      }
      return lambda * f + 0.5 * map.penalty_weight * (y - z[c]) * (y - z[c]);
    };
    out[c] = grid_min_1d(cost, lo, hi);
  }
  return out;
}

/// Exact small-dimension lasso: enumerate sign patterns of
/// argmin ||B x - y||^2 + tau ||x||_1, solve each smooth KKT system, keep
/// the best feasible candidate. Exponential in dim; intended for dim <= 3.
inline Vec lasso_sign_enumeration(const Mat& data, const Vec& obs, double tau) {
  const Eigen::Index n = data.cols();
  const Mat gram = 2.0 * data.transpose() * data;
  const Vec rhs = 2.0 * data.transpose() * obs;
  auto objective = [&](const Vec& x) {
    return (data * x - obs).squaredNorm() + tau * x.lpNorm<1>();
  };

  Vec best = Vec::Zero(n);
  double best_v = objective(best);
  std::vector<int> pattern(static_cast<std::size_t>(n), 0);
  const long total = static_cast<long>(std::pow(3.0, static_cast<double>(n)));
  for (long code = 0; code < total; ++code) {
    long rem = code;
    for (Eigen::Index i = 0; i < n; ++i) {
      pattern[static_cast<std::size_t>(i)] = static_cast<int>(rem % 3) - 1;  // -1, 0, +1
      rem /= 3;
    }
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < n; ++i)
      if (pattern[static_cast<std::size_t>(i)] != 0) active.push_back(i);
    Vec x = Vec::Zero(n);
    if (!active.empty()) {
      Mat sub(active.size(), active.size());
      Vec sub_rhs(active.size());
      for (std::size_t r = 0; r < active.size(); ++r) {
        sub_rhs[static_cast<Eigen::Index>(r)] =
            rhs[active[r]] - tau * pattern[static_cast<std::size_t>(active[r])];
        for (std::size_t cidx = 0; cidx < active.size(); ++cidx)
          sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cidx)) = gram(active[r], active[cidx]);
      }
      const Vec sol = sub.colPivHouseholderQr().solve(sub_rhs);
      bool consistent = true;
      for (std::size_t r = 0; r < active.size(); ++r) {
        if (sol[static_cast<Eigen::Index>(r)] * pattern[static_cast<std::size_t>(active[r])] < 0.0)
          consistent = false;
        x[active[r]] = sol[static_cast<Eigen::Index>(r)];
      }
      if (!consistent) continue;
    }
    const double v = objective(x);
    if (v < best_v) {
      best_v = v;
      best = x;
    }
  }
  return best;
}

}  // namespace netgame::oracles
