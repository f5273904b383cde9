#pragma once

#include "netgame/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace netgame {

enum class ProxKind {
  box_indicator,    // f = 0 on a box
  fj_quadratic,     // anchor quadratic a*||y - x0||^2 plus a box
  l1,               // tau*||y||_1, optional box
  least_squares_l1, // ||B y - yobs||^2 + tau*||y||_1, large box
  custom,           // caller-supplied prox callback
};

/// One agent's local behavior: the evaluatable operator
///   z |-> argmin_y  f(y) + (w/2) ||y - z||^2
/// with f lower semi-continuous convex (here: one of the catalogued kinds).
/// The penalty weight w is 1 except for Friedkin-Johnsen maps, whose cost
/// puts coefficient 1 (not 1/2) on the coupling term; those carry w = 2.
struct ProximalMap {
  ProxKind kind = ProxKind::box_indicator;
  int state_dim = 0;
  double penalty_weight = 1.0;

  // box bounds (box_indicator, fj_quadratic, optional for l1)
  Vec lo, hi;
  bool has_box = false;

  // fj_quadratic
  Vec anchor;              // x0
  double stubbornness = 1; // mu in (0,1]; anchor weight is (1-mu)/mu

  // l1 / least_squares_l1
  double l1_weight = 0.0;  // tau >= 0

  // least_squares_l1
  Mat data;        // B, rows x state_dim
  Vec observations;
  double inner_tol = 1e-10;
  long inner_max_iter = 200000;

  // custom: callback returning argmin lambda*f(y) + (w/2)||y - z||^2
  std::function<Vec(const Vec&, double)> custom_prox;

  // cached products for the inner solver (filled by the factory)
  Mat gram;        // 2 B^T B
  Vec data_rhs;    // 2 B^T yobs
  double smooth_lipschitz = 0.0;  // largest eigenvalue of 2 B^T B
};

/// Builders validate their parameters and fill caches.
ProximalMap make_box_map(Vec lo, Vec hi);
ProximalMap make_fj_map(Vec anchor, double stubbornness, Vec lo, Vec hi);
ProximalMap make_l1_map(int state_dim, double tau);
ProximalMap make_l1_map(double tau, Vec lo, Vec hi);
ProximalMap make_least_squares_l1_map(Mat data, Vec observations, double tau,
                                      double inner_tol = 1e-10);
ProximalMap make_identity_map(int state_dim);  // box (-inf, inf): prox = id
ProximalMap make_custom_map(int state_dim, std::function<Vec(const Vec&, double)> prox);

/// argmin_y  lambda * f(y) + (w/2) ||y - z||^2 for the map's f and penalty
/// weight w. Closed form for every kind except least_squares_l1, which runs
/// a proximal-gradient inner solve to the map's inner_tol (throwing
/// IterationLimitError with the last iterate on failure).
Vec prox_eval(const ProximalMap& map, const Vec& z, double lambda);

/// Same, but iterative kinds start from `warm_start` instead of z. The
/// result is identical to prox_eval up to the inner tolerance; a good warm
/// start only saves inner iterations.
Vec prox_eval_warm(const ProximalMap& map, const Vec& z, double lambda, const Vec& warm_start);

/// Stacked operator: block i of the result is
/// prox_eval(maps[i], block i of z, lambdas[i]).
Vec block_prox(const std::vector<ProximalMap>& maps, const Vec& z, const std::vector<double>& lambdas);

/// All lambdas equal to one.
Vec block_prox(const std::vector<ProximalMap>& maps, const Vec& z);

/// dist(0, lambda * df(p) + w (p - z)): the optimality certificate for a
/// candidate prox value p. Zero (within tolerance) iff p = prox_eval(z).
/// Throws UnsupportedKindError for custom maps.
double subgradient_residual(const ProximalMap& map, const Vec& candidate, const Vec& z, double lambda);

}  // namespace netgame
