#include "netgame/async.hpp"

#include <cmath>
#include <limits>

namespace netgame {

void AsyncConfig::validate(int n_agents) const {
  if (static_cast<int>(activation_probs.size()) != n_agents)
    throw DimensionError("AsyncConfig: one activation probability per agent required");
  double sum = 0.0;
  for (double p : activation_probs) {
    if (!(p > 0.0)) throw ParameterError("AsyncConfig: activation probabilities must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ParameterError("AsyncConfig: activation probabilities must sum to 1");
  if (max_delay < 0) throw ParameterError("AsyncConfig: max_delay must be >= 0");
  if (!(psi > 0.0)) throw ParameterError("AsyncConfig: psi must be positive");
  for (double v : psi_schedule)
    if (!(v > 0.0)) throw ParameterError("AsyncConfig: psi schedule entries must be positive");
  if (fixed_delay < 0 || fixed_delay > max_delay)
    throw ParameterError("AsyncConfig: fixed_delay must lie in [0, max_delay]");
}

double AsyncConfig::psi_at(std::int64_t k) const {
  if (psi_schedule.empty()) return psi;
  return psi_schedule[static_cast<std::size_t>(k % static_cast<std::int64_t>(psi_schedule.size()))];
}

double AsyncConfig::p_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double p : activation_probs) m = std::min(m, p);
  return m;
}

void DelayBuffer::seed(const Vec& x0, int max_delay) {
  if (max_delay < 0) throw ParameterError("DelayBuffer: max_delay must be >= 0");
  history_.assign(static_cast<std::size_t>(max_delay) + 1, x0);
}

void DelayBuffer::push(Vec x) {
  if (history_.empty()) throw PreconditionError("DelayBuffer: push before seed");
  history_.pop_back();
  history_.push_front(std::move(x));
}

double delay_bound(int n_agents, double p_min, double a_floor) {
  if (!(p_min > 0.0 && p_min <= 1.0)) throw ParameterError("delay_bound: p_min must lie in (0,1]");
  if (!(a_floor > 0.0 && a_floor <= 1.0)) throw ParameterError("delay_bound: a_floor must lie in (0,1]");
  if (a_floor == 1.0) return std::numeric_limits<double>::infinity();
  const double root = std::sqrt(p_min);
  return static_cast<double>(n_agents) * root / (2.0 * (1.0 - a_floor)) - 1.0 / (2.0 * root);
}

double psi_bound(int n_agents, double p_min, double a_floor, int max_delay) {
  if (!(p_min > 0.0 && p_min <= 1.0)) throw ParameterError("psi_bound: p_min must lie in (0,1]");
  if (!(a_floor > 0.0 && a_floor <= 1.0)) throw ParameterError("psi_bound: a_floor must lie in (0,1]");
  if (max_delay < 0) throw ParameterError("psi_bound: max_delay must be >= 0");
  if (a_floor == 1.0) return std::numeric_limits<double>::infinity();
  const double root = std::sqrt(p_min);
  return static_cast<double>(n_agents) * p_min /
         ((2.0 * max_delay * root + 1.0) * (1.0 - a_floor));
}

AsyncStepResult step_async(const GameSpec& game, DelayBuffer& buffer, const AsyncConfig& config,
                           Rng& rng, std::int64_t k) {
  if (!buffer.seeded()) throw PreconditionError("step_async: buffer must be seeded with x0");
  config.validate(game.n_agents());
  if (buffer.max_delay() != config.max_delay)
    throw PreconditionError("step_async: buffer depth does not match config.max_delay");

  const int n_agents = game.n_agents();
  const int n = game.state_dim();

  AsyncStepResult result;
  result.active_agent = rng.categorical(config.activation_probs);
  result.drawn_delays.assign(n_agents, 0);

  const int i = result.active_agent;
  const Vec& x = buffer.current();

  // Delayed read: own block fresh, each neighbor at its drawn lag.
  Vec local_mix = Vec::Zero(n);
  for (int j = 0; j < n_agents; ++j) {
    int d = 0;
    if (j != i) {
      switch (config.delay_model) {
        case DelayModel::uniform_random:
          d = static_cast<int>(rng.uniform_int(0, config.max_delay));
          break;
        case DelayModel::fixed:
          d = config.fixed_delay;
          break;
        case DelayModel::adversarial_max:
          d = config.max_delay;
          break;
      }
    }
    result.drawn_delays[j] = d;
    const double a = game.matrix.entry(i, j);
    if (a != 0.0) local_mix += a * buffer.at_delay(d).segment(static_cast<Eigen::Index>(j) * n, n);
  }

  const Vec proxed = prox_eval(game.maps[i], local_mix, 1.0);
  const double psi = config.psi_at(k);

  Vec next = x;
  const auto own = Eigen::seqN(static_cast<Eigen::Index>(i) * n, n);
  // xhat_i = x_i: the agent always reads its own strategy fresh.
  next(own) = x(own) + psi * (proxed - x(own));
  buffer.push(next);
  return result;
}

TrajectoryRecord run_async(const GameSpec& game, const Vec& x0, const AsyncConfig& config,
                           std::uint64_t seed, const AsyncRunOptions& opts) {
  if (x0.size() != game.stacked_dim()) throw DimensionError("run_async: x0 length mismatch");
  config.validate(game.n_agents());

  Rng rng(seed);
  DelayBuffer buffer;
  buffer.seed(x0, config.max_delay);

  TrajectoryRecord rec;
  rec.tolerance = opts.tol;
  rec.iterates.push_back(x0);
  rec.iterate_steps.push_back(0);

  const int n_agents = game.n_agents();
  int consecutive_ok = 0;

  for (std::int64_t k = 0; k < opts.max_iter; ++k) {
    rec.active_agents.push_back(step_async(game, buffer, config, rng, k).active_agent);
    rec.iterations = k + 1;

    if (opts.store_every > 0 && (k + 1) % opts.store_every == 0) {
      rec.iterates.push_back(buffer.current());
      rec.iterate_steps.push_back(k + 1);
    }

    // Residual of the full synchronous map, sampled every N steps; per-step
    // change is a biased signal under single-agent updates.
    if ((k + 1) % n_agents == 0) {
      const double res = residual_inf(game, buffer.current());
      rec.residuals.push_back(res);
      rec.residual_steps.push_back(k + 1);
      rec.final_residual = res;
      consecutive_ok = res <= opts.tol ? consecutive_ok + 1 : 0;
      if (consecutive_ok >= opts.window) {
        rec.converged = true;
        break;
      }
    }
  }

  if (rec.iterate_steps.back() != rec.iterations) {
    rec.iterates.push_back(buffer.current());
    rec.iterate_steps.push_back(rec.iterations);
  }
  rec.certificate = certify_nwe(game, buffer.current(), opts.tol);
  return rec;
}

}  // namespace netgame
