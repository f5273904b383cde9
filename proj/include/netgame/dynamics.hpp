#pragma once

#include "netgame/graph.hpp"
#include "netgame/prox.hpp"
#include "netgame/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace netgame {

/// A network game: N agents with n-dimensional states, one proximal map per
/// agent, one validated communication matrix. Immutable once built.
struct GameSpec {
  GameSpec(std::vector<ProximalMap> maps_in, RowStochasticMatrix matrix_in);

  int n_agents() const { return matrix.n_agents(); }
  int state_dim() const { return state_dim_; }
  Eigen::Index stacked_dim() const { return static_cast<Eigen::Index>(n_agents()) * state_dim_; }

  std::vector<ProximalMap> maps;
  RowStochasticMatrix matrix;

 private:
  int state_dim_ = 0;
};

enum class CertificateKind { nwe, pnwe, gnwe };

struct Certificate {
  CertificateKind kind = CertificateKind::nwe;
  bool passed = false;
  double tolerance = 0.0;
  // nwe / pnwe: worst infinity-norm fixed-point gap (over matrices for pnwe)
  double fixed_point_residual = 0.0;
  // gnwe extras
  double feasibility_violation = 0.0;
  double complementarity = 0.0;
};

/// Per-run record: decimated iterates, dense residual series, convergence
/// flag, and the equilibrium certificate evaluated at the final iterate.
struct TrajectoryRecord {
  std::vector<Vec> iterates;
  std::vector<std::int64_t> iterate_steps;
  std::vector<double> residuals;
  std::vector<std::int64_t> residual_steps;
  bool converged = false;
  std::int64_t iterations = 0;
  double tolerance = 0.0;
  double final_residual = 0.0;
  std::optional<Certificate> certificate;

  // Filled only by constrained (gnwe) runs.
  std::vector<Vec> sigma_iterates;
  std::vector<double> violations;
  std::vector<std::int64_t> violation_steps;

  // Filled only by asynchronous runs: who updated at each step.
  std::vector<int> active_agents;
};

/// One synchronous step: x+ = block_prox(maps, (A (x) I_n) x).
Vec step_sync(const GameSpec& game, const Vec& x);

/// Relaxed step x+ = (1-alpha) x + alpha step_sync(x); shares fixed points
/// with the unrelaxed map. alpha must lie in (0,1).
Vec step_krasnoselskii(const GameSpec& game, const Vec& x, double alpha);

/// Fixed-point gap ||x - step_sync(x)|| in the Q-weighted norm with
/// Q = diag(q) (x) I_n. Defaults to the communication matrix's PF vector.
double residual(const GameSpec& game, const Vec& x, const Vec& q_weights);
double residual(const GameSpec& game, const Vec& x);

/// Infinity-norm fixed-point gap (the norm used by stopping rules and NWE
/// certificates).
double residual_inf(const GameSpec& game, const Vec& x);

struct RunOptions {
  double tol = 1e-9;
  std::int64_t max_iter = 100000;
  std::optional<double> relaxation;  // Krasnoselskii alpha
  std::int64_t store_every = 1;      // iterate decimation; residuals stay dense
};

/// Iterates the (possibly relaxed) synchronous dynamics from x0 until the
/// fixed-point residual drops below tol in both the infinity norm and the
/// Q-weighted norm, or until max_iter. Non-convergence is reported, never
/// thrown; the certificate is verify_nwe at the final iterate.
TrajectoryRecord run_sync(const GameSpec& game, const Vec& x0, const RunOptions& opts = {});

/// True iff ||xbar - step_sync(xbar)||_inf <= tol.
bool verify_nwe(const GameSpec& game, const Vec& xbar, double tol);
Certificate certify_nwe(const GameSpec& game, const Vec& xbar, double tol);

/// Time-varying communication: a finite set of validated matrices with
/// precomputed PF vectors, plus a switching signal (an index sequence that
/// repeats periodically when shorter than the run).
struct MatrixSet {
  explicit MatrixSet(std::vector<RowStochasticMatrix> matrices_in);
  std::vector<RowStochasticMatrix> matrices;
};

/// One step of the modified time-varying dynamics
///   x+ = block_prox(maps, [I + Q_k (A_k - I)] x)
/// where Q_k = diag(q_k) and q_k is the PF vector of A_k. The mixing matrix
/// is doubly stochastic with positive diagonal.
Vec step_tv_modified(const std::vector<ProximalMap>& maps, const RowStochasticMatrix& matrix_k,
                     const Vec& q_k, const Vec& x);

/// Worst fixed-point gap of the ORIGINAL dynamics over the whole set:
/// max_m ||x - block_prox(maps, A_m x)||_inf. Zero exactly on the
/// persistent-equilibrium set.
double pnwe_residual(const std::vector<ProximalMap>& maps, const MatrixSet& set, const Vec& x);

/// Runs the modified dynamics under `signal` (cycled) and certifies the
/// final iterate with verify_pnwe against the original dynamics.
TrajectoryRecord run_tv(const std::vector<ProximalMap>& maps, const MatrixSet& set,
                        const std::vector<int>& signal, const Vec& x0, const RunOptions& opts = {});

/// True iff xbar is a fixed point of block_prox o A_m for EVERY matrix in
/// the set, each within tol. Vacuously true on an empty set.
bool verify_pnwe(const std::vector<ProximalMap>& maps, const MatrixSet& set, const Vec& xbar, double tol);
Certificate certify_pnwe(const std::vector<ProximalMap>& maps, const MatrixSet& set, const Vec& xbar,
                         double tol);

}  // namespace netgame
