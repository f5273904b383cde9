#include "netgame/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace netgame {

GameSpec::GameSpec(std::vector<ProximalMap> maps_in, RowStochasticMatrix matrix_in)
    : maps(std::move(maps_in)), matrix(std::move(matrix_in)) {
  if (maps.empty() || static_cast<int>(maps.size()) != matrix.n_agents())
    throw DimensionError("GameSpec: one proximal map per agent required");
  state_dim_ = maps.front().state_dim;
  for (const auto& m : maps)
    if (m.state_dim != state_dim_)
      throw DimensionError("GameSpec: all agents must share the state dimension");
}

Vec step_sync(const GameSpec& game, const Vec& x) {
  return block_prox(game.maps, mix(game.matrix, x, game.state_dim()));
}

Vec step_krasnoselskii(const GameSpec& game, const Vec& x, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ParameterError("step_krasnoselskii: alpha must lie in (0,1)");
  return (1.0 - alpha) * x + alpha * step_sync(game, x);
}

double residual(const GameSpec& game, const Vec& x, const Vec& q_weights) {
  if (q_weights.size() != game.n_agents())
    throw DimensionError("residual: weight vector length mismatch");
  const Vec gap = x - step_sync(game, x);
  const int n = game.state_dim();
  double sq = 0.0;
  for (int i = 0; i < game.n_agents(); ++i)
    sq += q_weights[i] * gap.segment(static_cast<Eigen::Index>(i) * n, n).squaredNorm();
  return std::sqrt(sq);
}

double residual(const GameSpec& game, const Vec& x) {
  return residual(game, x, game.matrix.pf_vector());
}

double residual_inf(const GameSpec& game, const Vec& x) {
  return (x - step_sync(game, x)).lpNorm<Eigen::Infinity>();
}

bool verify_nwe(const GameSpec& game, const Vec& xbar, double tol) {
  return residual_inf(game, xbar) <= tol;
}

Certificate certify_nwe(const GameSpec& game, const Vec& xbar, double tol) {
  Certificate cert;
  cert.kind = CertificateKind::nwe;
  cert.tolerance = tol;
  cert.fixed_point_residual = residual_inf(game, xbar);
  cert.passed = cert.fixed_point_residual <= tol;
  return cert;
}

TrajectoryRecord run_sync(const GameSpec& game, const Vec& x0, const RunOptions& opts) {
  if (x0.size() != game.stacked_dim()) throw DimensionError("run_sync: x0 length mismatch");
  if (opts.relaxation && !(*opts.relaxation > 0.0 && *opts.relaxation < 1.0))
    throw ParameterError("run_sync: relaxation must lie in (0,1)");

  const Vec& q = game.matrix.pf_vector();

  TrajectoryRecord rec;
  rec.tolerance = opts.tol;
  rec.iterates.push_back(x0);
  rec.iterate_steps.push_back(0);

  Vec x = x0;
  Vec tx = step_sync(game, x);
  for (std::int64_t k = 1; k <= opts.max_iter; ++k) {
    x = opts.relaxation ? Vec((1.0 - *opts.relaxation) * x + *opts.relaxation * tx) : tx;
    tx = step_sync(game, x);
    rec.iterations = k;

    const Vec gap = x - tx;
    const double gap_inf = gap.lpNorm<Eigen::Infinity>();
    double sq = 0.0;
    for (int i = 0; i < game.n_agents(); ++i)
      sq += q[i] * gap.segment(static_cast<Eigen::Index>(i) * game.state_dim(), game.state_dim()).squaredNorm();
    const double gap_q = std::sqrt(sq);

    rec.residuals.push_back(gap_q);
    rec.residual_steps.push_back(k);
    if (k % opts.store_every == 0 || k == opts.max_iter) {
      rec.iterates.push_back(x);
      rec.iterate_steps.push_back(k);
    }
    rec.final_residual = std::max(gap_inf, gap_q);
    if (rec.final_residual <= opts.tol) {
      rec.converged = true;
      if (rec.iterate_steps.back() != k) {
        rec.iterates.push_back(x);
        rec.iterate_steps.push_back(k);
      }
      break;
    }
  }
  rec.certificate = certify_nwe(game, x, opts.tol);
  return rec;
}

MatrixSet::MatrixSet(std::vector<RowStochasticMatrix> matrices_in) : matrices(std::move(matrices_in)) {
  for (auto& m : matrices) m.pf_vector();  // precompute and cache
  for (std::size_t i = 1; i < matrices.size(); ++i)
    if (matrices[i].n_agents() != matrices[0].n_agents())
      throw DimensionError("MatrixSet: all matrices must share N");
}

Vec step_tv_modified(const std::vector<ProximalMap>& maps, const RowStochasticMatrix& matrix_k,
                     const Vec& q_k, const Vec& x) {
  const int n_agents = matrix_k.n_agents();
  if (q_k.size() != n_agents) throw DimensionError("step_tv_modified: PF vector length mismatch");
  if (q_k.minCoeff() <= 0.0) throw PreconditionError("step_tv_modified: PF vector must be positive");
  const int n = static_cast<int>(x.size() / n_agents);
  if (static_cast<Eigen::Index>(n_agents) * n != x.size())
    throw DimensionError("step_tv_modified: state length not divisible by N");

  // [I + Q_k (A_k - I)] x, blockwise: block i is (1 - q_i) x_i + q_i [A]_i x.
  const Vec mixed = mix(matrix_k, x, n);
  Vec arg(x.size());
  for (int i = 0; i < n_agents; ++i) {
    const auto seg = Eigen::seqN(static_cast<Eigen::Index>(i) * n, n);
    arg(seg) = (1.0 - q_k[i]) * x(seg) + q_k[i] * mixed(seg);
  }
  return block_prox(maps, arg);
}

double pnwe_residual(const std::vector<ProximalMap>& maps, const MatrixSet& set, const Vec& x) {
  double worst = 0.0;
  for (const auto& m : set.matrices) {
    const int n = static_cast<int>(x.size() / m.n_agents());
    const Vec gap = x - block_prox(maps, mix(m, x, n));
    worst = std::max(worst, gap.lpNorm<Eigen::Infinity>());
  }
  return worst;
}

bool verify_pnwe(const std::vector<ProximalMap>& maps, const MatrixSet& set, const Vec& xbar, double tol) {
  if (set.matrices.empty()) return true;
  return pnwe_residual(maps, set, xbar) <= tol;
}

Certificate certify_pnwe(const std::vector<ProximalMap>& maps, const MatrixSet& set, const Vec& xbar,
                         double tol) {
  Certificate cert;
  cert.kind = CertificateKind::pnwe;
  cert.tolerance = tol;
  cert.fixed_point_residual = set.matrices.empty() ? 0.0 : pnwe_residual(maps, set, xbar);
  cert.passed = cert.fixed_point_residual <= tol;
  return cert;
}

TrajectoryRecord run_tv(const std::vector<ProximalMap>& maps, const MatrixSet& set,
                        const std::vector<int>& signal, const Vec& x0, const RunOptions& opts) {
  if (set.matrices.empty()) throw PreconditionError("run_tv: matrix set must be nonempty");
  if (signal.empty()) throw ParameterError("run_tv: switching signal must be nonempty");
  for (int s : signal)
    if (s < 0 || s >= static_cast<int>(set.matrices.size()))
      throw ParameterError("run_tv: signal index out of range");

  TrajectoryRecord rec;
  rec.tolerance = opts.tol;
  rec.iterates.push_back(x0);
  rec.iterate_steps.push_back(0);

  Vec x = x0;
  for (std::int64_t k = 1; k <= opts.max_iter; ++k) {
    const auto& m = set.matrices[signal[static_cast<std::size_t>((k - 1) % signal.size())]];
    x = step_tv_modified(maps, m, m.pf_vector(), x);
    rec.iterations = k;

    const double gap = pnwe_residual(maps, set, x);
    rec.residuals.push_back(gap);
    rec.residual_steps.push_back(k);
    if (k % opts.store_every == 0 || k == opts.max_iter) {
      rec.iterates.push_back(x);
      rec.iterate_steps.push_back(k);
    }
    rec.final_residual = gap;
    if (gap <= opts.tol) {
      rec.converged = true;
      if (rec.iterate_steps.back() != k) {
        rec.iterates.push_back(x);
        rec.iterate_steps.push_back(k);
      }
      break;
    }
  }
  rec.certificate = certify_pnwe(maps, set, x, opts.tol);
  return rec;
}

}  // namespace netgame
