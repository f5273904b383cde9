#pragma once

#include "netgame/dynamics.hpp"

#include <optional>
#include <vector>

namespace netgame {

/// Affine coupling constraints C x <= c with C stored as N agent blocks
/// C_i in R^{M x n}. Slater feasibility of the coupled feasible set is the
/// caller's obligation; it is not checked here.
struct CouplingConstraints {
  CouplingConstraints(std::vector<Mat> blocks_in, Vec rhs_in);

  /// Assembles blocks from a dense C in R^{M x (N n)}.
  static CouplingConstraints from_dense(const Mat& C, Vec rhs, int n_agents);

  /// Equality constraints E x = e encoded as the stacked inequality pair
  /// [E; -E] x <= [e; -e].
  static CouplingConstraints equalities_from_dense(const Mat& E, const Vec& e, int n_agents);

  int n_agents() const { return static_cast<int>(blocks.size()); }
  int n_constraints() const { return static_cast<int>(rhs.size()); }
  int state_dim() const { return static_cast<int>(blocks.front().cols()); }

  Mat dense() const;

  /// C x for a stacked state.
  Vec apply(const Vec& x) const;

  /// C^T sigma restricted to agent i's block: C_i^T sigma.
  Vec block_transpose_apply(int i, const Vec& sigma) const;

  std::vector<Mat> blocks;  // C_i, each M x n
  Vec rhs;                  // c
};

/// Prox-GNWE step sizes. The inequalities
///   r_i - a_ii < 1/delta_i <= 1/gamma - r_i - a_ii   and   p < beta <= 1/gamma - p
/// tie them to the Gerschgorin radii of the preconditioner.
struct GnweParams {
  Vec alpha;        // positive weights splitting the shared multiplier
  Vec delta;        // per-agent inverse step weights, delta_i > 0
  double beta = 0;  // coordinator step weight
  double gamma = 0; // global step size
};

struct GnweRadii {
  Vec r;      // r_i = (1/2) sum_{j != i}(a_ij + a_ji) + (1 + alpha_i) ||C_i^T||_inf
  double p;   // max_j (1 + alpha_j) ||C_j^T||_inf (conservative over agents)
};

/// Gerschgorin radii entering the Prox-GNWE parameter conditions.
/// ||C_i^T||_inf is the infinity-induced norm of the transposed block, i.e.
/// the largest absolute column sum of C_i.
GnweRadii radii(const RowStochasticMatrix& matrix, const CouplingConstraints& constraints,
                const Vec& alpha);

/// Picks delta, beta (interval midpoints) for a given gamma, or, when gamma
/// is absent, the largest step size (with a 0.95 safety factor) for which
/// every interval is nonempty. Throws ParameterError naming the violated
/// inequality when a given gamma admits no parameters.
GnweParams feasible_params(const RowStochasticMatrix& matrix, const CouplingConstraints& constraints,
                           const Vec& alpha, std::optional<double> gamma = std::nullopt);

struct Preconditioner {
  Mat phi;  // [[diag(1/delta) + A (x) I_n, -Lambda C^T], [C, beta I_M]]
  Mat u;    // symmetric part
  Mat s;    // skew part
  double u_min_eigenvalue = 0.0;
  double u_norm = 0.0;  // ||U||_2
};

/// Assembles the non-self-adjoint preconditioner and its symmetric/skew
/// split; diagnostic only, never used by the iteration. Throws
/// ParameterError if U is not positive definite at the given params.
Preconditioner preconditioner(const RowStochasticMatrix& matrix, const CouplingConstraints& constraints,
                              const GnweParams& params);

struct GnweState {
  Vec x;      // stacked strategies
  Vec sigma;  // shared multiplier, kept nonnegative by the projection step
};

/// One Prox-GNWE step: local scaled prox, coordinator projection, then the
/// two inertia updates. Implemented directly from the four-equation form;
/// no matrix inverses. `x_tilde_cache`, when given, warm-starts the inner
/// prox solves with the previous step's local solutions and receives the
/// new ones (a pure speedup for iterative map kinds).
GnweState step_prox_gnwe(const GameSpec& game, const CouplingConstraints& constraints,
                         const GnweParams& params, const GnweState& state,
                         Vec* x_tilde_cache = nullptr);

struct GnweRunOptions {
  double tol = 1e-9;          // on the joint update norm ||state+ - state||_inf
  std::int64_t max_iter = 200000;
  std::int64_t store_every = 1;
  double certificate_tol = 1e-6;
};

/// Runs Prox-GNWE from (x0, sigma0); the trajectory record is augmented
/// with the sigma series and the constraint-violation series
/// ||max(0, C x - c)||_inf. Certificate: verify_gnwe at the limit.
TrajectoryRecord run_prox_gnwe(const GameSpec& game, const CouplingConstraints& constraints,
                               const GnweParams& params, const Vec& x0, const Vec& sigma0,
                               const GnweRunOptions& opts = {});

struct GnweReport {
  double fixed_point_residual = 0.0;   // ||(x, sigma) - R(G(x, sigma))||_inf
  double feasibility_violation = 0.0;  // ||max(0, C x - c)||_inf
  double complementarity = 0.0;        // |sigma^T (C x - c)|
  bool passed = false;
};

/// Equilibrium certificate: fixed point of R o G, primal feasibility and
/// complementary slackness, each within tol.
GnweReport verify_gnwe(const GameSpec& game, const CouplingConstraints& constraints, const Vec& alpha,
                       const Vec& xbar, const Vec& sigma_bar, double tol);

struct MonotonicityResult {
  bool holds = false;
  double min_eigenvalue = 0.0;   // smallest eigenvalue of sym(Qbar (I - G))
  double min_sample_inner = 0.0; // smallest sampled <(I-G)(u-v), u-v>_Qbar
};

/// Numerical check that Id - G is monotone in the Qbar-weighted space,
/// where G is the linear part of the extended-game affine map. Both routes
/// are computed: a dense symmetric eigensolve and `samples` random pairs.
MonotonicityResult monotonicity_check_G(const RowStochasticMatrix& matrix,
                                        const CouplingConstraints& constraints, const Vec& alpha,
                                        const Mat& qbar, int samples, std::uint64_t rng_seed);

}  // namespace netgame
