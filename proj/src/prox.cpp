#include "netgame/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace netgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

Vec clamp_box(const ProximalMap& map, Vec v) {
  if (!map.has_box) return v;
  for (Eigen::Index c = 0; c < v.size(); ++c) v[c] = std::clamp(v[c], map.lo[c], map.hi[c]);
  return v;
}

void require_dim(const ProximalMap& map, const Vec& z, const char* who) {
  if (z.size() != map.state_dim) {
    std::ostringstream os;
    os << who << ": input length " << z.size() << " != state_dim " << map.state_dim;
    throw DimensionError(os.str());
  }
}

void require_lambda(double lambda, const char* who) {
  if (!(lambda > 0.0)) throw ParameterError(std::string(who) + ": lambda must be positive");
}

double power_iteration_lmax(const Mat& sym, long iters = 5000, double tol = 1e-13) {
  if (sym.rows() == 0) return 0.0;
  Vec v = Vec::Ones(sym.rows()).normalized();
  double lambda = 0.0;
  for (long k = 0; k < iters; ++k) {
    const Vec w = sym * v;
    const double rayleigh = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (k > 0 && std::abs(rayleigh - lambda) <= tol * std::max(1.0, std::abs(rayleigh)))
      return rayleigh;
    lambda = rayleigh;
  }
  return lambda;
}

// Inner proximal-gradient solve for least_squares_l1:
//   argmin_y ||B y - yobs||^2 + tau ||y||_1 + iota_box + (1/(2s)) ||y - z||^2
// with fixed step 1/(L + 1/s), L = lmax(2 B^T B).
Vec least_squares_l1_prox(const ProximalMap& map, const Vec& z, double s, const Vec* warm) {
  const double lip = map.smooth_lipschitz + 1.0 / s;
  const double step = 1.0 / lip;

  Vec y = clamp_box(map, warm ? *warm : z);
  double diff_threshold = map.inner_tol;
  for (long k = 0; k < map.inner_max_iter; ++k) {
    const Vec grad = map.gram * y - map.data_rhs + (y - z) / s;
    Vec next = y - step * grad;
    for (Eigen::Index c = 0; c < next.size(); ++c) next[c] = soft(next[c], step * map.l1_weight);
    next = clamp_box(map, next);
    const double diff = (next - y).lpNorm<Eigen::Infinity>();
    y = next;
    if (diff < diff_threshold) {
      // The step criterion alone does not certify optimality; confirm with
      // the subdifferential residual and tighten if needed.
      const double res = subgradient_residual(map, y, z, s);
      if (res <= map.inner_tol) return y;
      diff_threshold *= 0.1;
    }
  }
  throw IterationLimitError("least_squares_l1 prox: inner solver hit iteration cap", y,
                            subgradient_residual(map, y, z, s));
}

}  // namespace

ProximalMap make_box_map(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() < 1) throw DimensionError("make_box_map: bound length mismatch");
  if (((hi - lo).array() < 0.0).any()) throw ParameterError("make_box_map: requires lo <= hi componentwise");
  ProximalMap m;
  m.kind = ProxKind::box_indicator;
  m.state_dim = static_cast<int>(lo.size());
  m.lo = std::move(lo);
  m.hi = std::move(hi);
  m.has_box = true;
  return m;
}

ProximalMap make_identity_map(int state_dim) {
  if (state_dim < 1) throw DimensionError("make_identity_map: state_dim must be >= 1");
  ProximalMap m;
  m.kind = ProxKind::box_indicator;
  m.state_dim = state_dim;
  m.has_box = false;
  return m;
}

ProximalMap make_fj_map(Vec anchor, double stubbornness, Vec lo, Vec hi) {
  if (!(stubbornness > 0.0 && stubbornness <= 1.0))
    throw ParameterError("make_fj_map: stubbornness must lie in (0, 1]");
  ProximalMap m = make_box_map(std::move(lo), std::move(hi));
  if (anchor.size() != m.state_dim) throw DimensionError("make_fj_map: anchor length mismatch");
  m.kind = ProxKind::fj_quadratic;
  m.anchor = std::move(anchor);
  m.stubbornness = stubbornness;
  m.penalty_weight = 2.0;  // FJ cost carries ||y - z||^2, not (1/2)||y - z||^2
  return m;
}

ProximalMap make_l1_map(int state_dim, double tau) {
  if (state_dim < 1) throw DimensionError("make_l1_map: state_dim must be >= 1");
  if (tau < 0.0) throw ParameterError("make_l1_map: tau must be nonnegative");
  ProximalMap m;
  m.kind = ProxKind::l1;
  m.state_dim = state_dim;
  m.l1_weight = tau;
  m.has_box = false;
  return m;
}

ProximalMap make_l1_map(double tau, Vec lo, Vec hi) {
  ProximalMap m = make_box_map(std::move(lo), std::move(hi));
  if (tau < 0.0) throw ParameterError("make_l1_map: tau must be nonnegative");
  m.kind = ProxKind::l1;
  m.l1_weight = tau;
  return m;
}

ProximalMap make_least_squares_l1_map(Mat data, Vec observations, double tau, double inner_tol) {
  if (data.rows() != observations.size() || data.cols() < 1)
    throw DimensionError("make_least_squares_l1_map: data/observation shapes inconsistent");
  if (tau < 0.0) throw ParameterError("make_least_squares_l1_map: tau must be nonnegative");
  if (!(inner_tol > 0.0)) throw ParameterError("make_least_squares_l1_map: inner_tol must be positive");
  ProximalMap m;
  m.kind = ProxKind::least_squares_l1;
  m.state_dim = static_cast<int>(data.cols());
  m.l1_weight = tau;
  m.inner_tol = inner_tol;
  m.gram = 2.0 * data.transpose() * data;
  m.data_rhs = 2.0 * data.transpose() * observations;
  m.smooth_lipschitz = power_iteration_lmax(m.gram) * (1.0 + 1e-9);
  m.data = std::move(data);
  m.observations = std::move(observations);
  return m;
}

ProximalMap make_custom_map(int state_dim, std::function<Vec(const Vec&, double)> prox) {
  if (state_dim < 1) throw DimensionError("make_custom_map: state_dim must be >= 1");
  ProximalMap m;
  m.kind = ProxKind::custom;
  m.state_dim = state_dim;
  m.custom_prox = std::move(prox);
  return m;
}

namespace {

Vec prox_eval_impl(const ProximalMap& map, const Vec& z, double lambda, const Vec* warm) {
  require_dim(map, z, "prox_eval");
  require_lambda(lambda, "prox_eval");
  if (!z.allFinite()) throw ParameterError("prox_eval: input must be finite");

  // Scale on f once the penalty weight is normalized away:
  // argmin lambda f + (w/2)||.-z||^2 == prox_{(lambda/w) f}(z).
  const double s = lambda / map.penalty_weight;

  switch (map.kind) {
    case ProxKind::box_indicator:
      return clamp_box(map, z);
    case ProxKind::fj_quadratic: {
      const double a = (1.0 - map.stubbornness) / map.stubbornness;
      const double denom = 1.0 + 2.0 * s * a;
      return clamp_box(map, Vec((z + 2.0 * s * a * map.anchor) / denom));
    }
    case ProxKind::l1: {
      Vec y(z.size());
      for (Eigen::Index c = 0; c < z.size(); ++c) y[c] = soft(z[c], s * map.l1_weight);
      return clamp_box(map, std::move(y));
    }
    case ProxKind::least_squares_l1:
      return least_squares_l1_prox(map, z, s, warm);
    case ProxKind::custom:
      return map.custom_prox(z, lambda);
  }
  throw UnsupportedKindError("prox_eval: unknown kind");
}

}  // namespace

Vec prox_eval(const ProximalMap& map, const Vec& z, double lambda) {
  return prox_eval_impl(map, z, lambda, nullptr);
}

Vec prox_eval_warm(const ProximalMap& map, const Vec& z, double lambda, const Vec& warm_start) {
  require_dim(map, warm_start, "prox_eval_warm");
  return prox_eval_impl(map, z, lambda, &warm_start);
}

Vec block_prox(const std::vector<ProximalMap>& maps, const Vec& z, const std::vector<double>& lambdas) {
  if (maps.size() != lambdas.size()) throw DimensionError("block_prox: one lambda per map required");
  Eigen::Index total = 0;
  for (const auto& m : maps) total += m.state_dim;
  if (z.size() != total) throw DimensionError("block_prox: stacked input length mismatch");

  Vec out(total);
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const Eigen::Index dim = maps[i].state_dim;
    out.segment(offset, dim) = prox_eval(maps[i], z.segment(offset, dim), lambdas[i]);
    offset += dim;
  }
  return out;
}

Vec block_prox(const std::vector<ProximalMap>& maps, const Vec& z) {
  return block_prox(maps, z, std::vector<double>(maps.size(), 1.0));
}

double subgradient_residual(const ProximalMap& map, const Vec& candidate, const Vec& z, double lambda) {
  require_dim(map, candidate, "subgradient_residual");
  require_dim(map, z, "subgradient_residual");
  require_lambda(lambda, "subgradient_residual");
  if (map.kind == ProxKind::custom)
    throw UnsupportedKindError("subgradient_residual: custom maps expose no subdifferential");

  const double w = map.penalty_weight;
  const Vec& p = candidate;

  // Smooth part of lambda*df(p) + w(p - z), componentwise.
  Vec smooth = w * (p - z);
  if (map.kind == ProxKind::fj_quadratic) {
    const double a = (1.0 - map.stubbornness) / map.stubbornness;
    smooth += lambda * 2.0 * a * (p - map.anchor);
  } else if (map.kind == ProxKind::least_squares_l1) {
    smooth += lambda * (map.gram * p - map.data_rhs);
  }

  const bool has_l1 = map.kind == ProxKind::l1 || map.kind == ProxKind::least_squares_l1;

  double sq = 0.0;
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    // Subdifferential interval [lo, hi] of the nonsmooth terms at p[c],
    // shifted by the smooth part.
    double lo = smooth[c];
    double hi = smooth[c];
    if (has_l1) {
      const double t = lambda * map.l1_weight;
      if (p[c] > 0.0) {
        lo += t;
        hi += t;
      } else if (p[c] < 0.0) {
        lo -= t;
        hi -= t;
      } else {
        lo -= t;
        hi += t;
      }
    }
    if (map.has_box) {
      if (p[c] < map.lo[c] || p[c] > map.hi[c]) return kInf;  // outside dom(f)
      if (p[c] <= map.lo[c]) lo = -kInf;
      if (p[c] >= map.hi[c]) hi = kInf;
    }
    double d = 0.0;
    if (lo > 0.0)
      d = lo;
    else if (hi < 0.0)
      d = -hi;
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace netgame
