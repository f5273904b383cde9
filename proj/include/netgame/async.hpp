#pragma once

#include "netgame/dynamics.hpp"
#include "netgame/rng.hpp"

#include <deque>
#include <vector>

namespace netgame {

enum class DelayModel { uniform_random, fixed, adversarial_max };

/// Configuration of the simulated asynchronous dynamics: the activation
/// distribution, the delay process, and the step scaling psi.
struct AsyncConfig {
  std::vector<double> activation_probs;  // positive, sums to 1
  int max_delay = 0;                     // uniform delay bound
  double psi = 1.0;                      // constant scaling factor
  std::vector<double> psi_schedule;      // optional; cycled when nonempty
  DelayModel delay_model = DelayModel::uniform_random;
  int fixed_delay = 0;  // used by DelayModel::fixed

  void validate(int n_agents) const;
  double psi_at(std::int64_t k) const;
  double p_min() const;
};

/// Ring buffer holding the last max_delay+1 collective iterates, newest
/// first. An agent's own state is always read at delay zero.
class DelayBuffer {
 public:
  DelayBuffer() = default;

  /// Fills the buffer with x0 replicated max_delay+1 times.
  void seed(const Vec& x0, int max_delay);

  bool seeded() const { return !history_.empty(); }
  int max_delay() const { return static_cast<int>(history_.size()) - 1; }

  const Vec& current() const { return history_.front(); }

  /// State as of `delay` steps ago (0 = current).
  const Vec& at_delay(int delay) const { return history_.at(static_cast<std::size_t>(delay)); }

  void push(Vec x);

 private:
  std::deque<Vec> history_;
};

/// Right-hand side of the admissible-delay condition
///   max_delay < N sqrt(p_min) / (2 (1 - a_floor)) - 1 / (2 sqrt(p_min)).
/// Returns +infinity when a_floor = 1 (the dynamics degenerate to A = I).
double delay_bound(int n_agents, double p_min, double a_floor);

/// Upper bound on the scaling factor,
///   N p_min / ((2 max_delay sqrt(p_min) + 1) (1 - a_floor)).
double psi_bound(int n_agents, double p_min, double a_floor, int max_delay);

struct AsyncStepResult {
  int active_agent = -1;
  std::vector<int> drawn_delays;  // per agent; own entry is 0
};

/// One asynchronous step: samples the active agent i_k from the activation
/// distribution, assembles the delayed read xhat (own block fresh), and
/// applies
///   x+_{i_k} = x_{i_k} + psi_k (prox_{f_{i_k}}(sum_j a_{i_k,j} xhat_j) - xhat_{i_k}).
/// Other blocks are unchanged. The buffer is advanced with the new state.
AsyncStepResult step_async(const GameSpec& game, DelayBuffer& buffer, const AsyncConfig& config,
                           Rng& rng, std::int64_t k);

struct AsyncRunOptions {
  double tol = 1e-9;
  std::int64_t max_iter = 1000000;
  int window = 20;          // consecutive under-tol checks required
  std::int64_t store_every = 0;  // 0: store only first/last iterate
};

/// Runs the asynchronous dynamics from x0. The convergence monitor is the
/// synchronous fixed-point residual, sampled every N steps; the run stops
/// after `window` consecutive samples at or below tol.
TrajectoryRecord run_async(const GameSpec& game, const Vec& x0, const AsyncConfig& config,
                           std::uint64_t seed, const AsyncRunOptions& opts = {});

}  // namespace netgame
