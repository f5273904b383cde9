#pragma once

#include "netgame/dynamics.hpp"
#include "netgame/gnwe.hpp"
#include "netgame/rng.hpp"

#include <vector>

namespace netgame {

/// Friedkin-Johnsen population: initial opinions in [0,1]^(N n) and one
/// stubbornness value per agent.
struct FjProfile {
  Vec initial_opinions;       // stacked, entries in [0,1]
  std::vector<double> stubbornness;  // mu_i in (0,1]
  int topics = 1;             // n

  int n_agents() const { return static_cast<int>(stubbornness.size()); }
};

/// Game whose maps reproduce the opinion update
///   x+_i = proj_{[0,1]^n}((1 - mu_i) x_i(0) + mu_i sum_j a_ij x_j).
/// Throws ParameterError when some mu_i = 0 (the anchor weight diverges).
GameSpec build_friedkin_johnsen(const FjProfile& profile, RowStochasticMatrix matrix);

struct DegrootGame {
  std::vector<ProximalMap> maps;  // pure box projections (f_i = 0)
  MatrixSet matrices;
};

/// Bounded-confidence DeGroot game: per-agent opinion boxes [lo_i, hi_i]
/// and a finite set of communication matrices to switch over.
DegrootGame build_degroot_bounded(const std::vector<std::pair<double, double>>& boxes,
                                  std::vector<RowStochasticMatrix> matrix_set);

/// Synthetic time-varying DeGroot instance with two negative extremists
/// ([0, 0.25]), four neutralists ([0,1]) and two positive extremists
/// ([0.75, 1]), plus `n_matrices` random strongly connected matrices built
/// so that a common equilibrium exists: extremists pinned at 0.25 / 0.75
/// and neutral rows averaging their targets exactly.
struct DegrootTvInstance {
  std::vector<std::pair<double, double>> boxes;
  std::vector<Mat> matrices;
  Vec designed_equilibrium;
};
DegrootTvInstance make_degroot_tv_instance(std::uint64_t seed, int n_matrices = 3);

/// Distributed LASSO data: per-agent covariate blocks and observations,
/// the l1 weight, and the consensus Laplacian of the communication graph.
struct LassoInstance {
  std::vector<Mat> data_blocks;   // B_i, d_i x n
  std::vector<Vec> observations;  // y~_i
  double tau = 1.0;
  Mat laplacian;                  // N x N, zero row sums, off-diagonals <= 0

  int n_agents() const { return static_cast<int>(data_blocks.size()); }
  int dim() const { return static_cast<int>(data_blocks.front().cols()); }
  Mat stacked_data() const;
  Vec stacked_observations() const;
};

struct LassoSynthesis {
  LassoInstance instance;
  RowStochasticMatrix matrix;   // noise-aware communication weights
  Vec x_true;                   // generating model parameters
  Vec y_clean;                  // B x_true (noiseless outputs)
  Vec noise_std;                // per-agent sigma_i
};

/// Draws a synthetic model-fitting problem: x_true and B Gaussian, per-agent
/// noise standard deviations sigma_i ~ U[0, sigma_max], communication
/// weights inversely proportional to the noise (row-normalized, self-loop
/// floor 0.1), Laplacian L = I - A.
LassoSynthesis make_lasso_synthesis(int n_agents, int dim, int total_rows, double sigma_max,
                                    double tau, std::uint64_t seed);

struct LassoGame {
  GameSpec game;
  CouplingConstraints constraints;  // [L (x) I_n; -L (x) I_n] x <= 0
};

/// Game with least-squares-plus-l1 maps f_i = ||B_i x - y~_i||^2 + tau||x||_1
/// on a large box, and the consensus constraint L x = 0 encoded as a
/// stacked inequality pair.
LassoGame build_distributed_lasso(const LassoInstance& instance, RowStochasticMatrix matrix);

/// Proximal-gradient solve of the centralized objective
/// ||B x - y~||^2 + tau ||x||_1 to a subgradient residual <= tol.
Vec centralized_lasso_oracle(const Mat& data, const Vec& observations, double tau, double tol,
                             long max_iter = 1000000);

/// MSE series (1/N) sum_i ||B xhat_i(k) - y_true||^2 along a stored
/// trajectory; `normalized` divides by the k = 0 value.
std::vector<double> mse_curve(const std::vector<Vec>& iterates, const Mat& data, const Vec& y_true,
                              bool normalized = false);

/// Random strongly connected row-stochastic matrix: self-loops drawn from
/// [self_lo, self_hi], a directed ring guaranteeing connectivity, dense
/// random remainder.
Mat random_row_stochastic(Rng& rng, int n_agents, double self_lo, double self_hi);

}  // namespace netgame
