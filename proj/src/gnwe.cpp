#include "netgame/gnwe.hpp"

#include "netgame/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace netgame {

namespace {

// Infinity-induced norm of C_i^T: largest absolute column sum of C_i.
double block_transpose_inf_norm(const Mat& block) {
  double worst = 0.0;
  for (Eigen::Index t = 0; t < block.cols(); ++t)
    worst = std::max(worst, block.col(t).cwiseAbs().sum());
  return worst;
}

void require_alpha(const Vec& alpha, int n_agents) {
  if (alpha.size() != n_agents) throw DimensionError("gnwe: alpha length mismatch");
  if (alpha.minCoeff() <= 0.0) throw ParameterError("gnwe: alpha entries must be positive");
}

}  // namespace

CouplingConstraints::CouplingConstraints(std::vector<Mat> blocks_in, Vec rhs_in)
    : blocks(std::move(blocks_in)), rhs(std::move(rhs_in)) {
  if (blocks.empty()) throw DimensionError("CouplingConstraints: at least one agent block required");
  const Eigen::Index m = rhs.size();
  const Eigen::Index n = blocks.front().cols();
  for (const auto& b : blocks)
    if (b.rows() != m || b.cols() != n)
      throw DimensionError("CouplingConstraints: inconsistent block shapes");
}

CouplingConstraints CouplingConstraints::from_dense(const Mat& C, Vec rhs, int n_agents) {
  if (n_agents < 1 || C.cols() % n_agents != 0)
    throw DimensionError("CouplingConstraints: C columns not divisible by n_agents");
  if (C.rows() != rhs.size()) throw DimensionError("CouplingConstraints: rhs length mismatch");
  const Eigen::Index n = C.cols() / n_agents;
  std::vector<Mat> blocks;
  blocks.reserve(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) blocks.push_back(C.middleCols(static_cast<Eigen::Index>(i) * n, n));
  return CouplingConstraints(std::move(blocks), std::move(rhs));
}

CouplingConstraints CouplingConstraints::equalities_from_dense(const Mat& E, const Vec& e, int n_agents) {
  Mat stacked(2 * E.rows(), E.cols());
  stacked << E, -E;
  Vec rhs(2 * e.size());
  rhs << e, -e;
  return from_dense(stacked, std::move(rhs), n_agents);
}

Mat CouplingConstraints::dense() const {
  const Eigen::Index m = rhs.size();
  const Eigen::Index n = blocks.front().cols();
  Mat C(m, static_cast<Eigen::Index>(blocks.size()) * n);
  for (std::size_t i = 0; i < blocks.size(); ++i) C.middleCols(static_cast<Eigen::Index>(i) * n, n) = blocks[i];
  return C;
}

Vec CouplingConstraints::apply(const Vec& x) const {
  const Eigen::Index n = blocks.front().cols();
  if (x.size() != static_cast<Eigen::Index>(blocks.size()) * n)
    throw DimensionError("CouplingConstraints: stacked state length mismatch");
  Vec out = Vec::Zero(rhs.size());
  for (std::size_t i = 0; i < blocks.size(); ++i)
    out += blocks[i] * x.segment(static_cast<Eigen::Index>(i) * n, n);
  return out;
}

Vec CouplingConstraints::block_transpose_apply(int i, const Vec& sigma) const {
  if (sigma.size() != rhs.size()) throw DimensionError("CouplingConstraints: sigma length mismatch");
  return blocks[static_cast<std::size_t>(i)].transpose() * sigma;
}

GnweRadii radii(const RowStochasticMatrix& matrix, const CouplingConstraints& constraints,
                const Vec& alpha) {
  const int n_agents = matrix.n_agents();
  require_alpha(alpha, n_agents);
  if (constraints.n_agents() != n_agents) throw DimensionError("radii: constraint blocks != agents");

  const Mat& a = matrix.weights();
  GnweRadii out;
  out.r = Vec::Zero(n_agents);
  out.p = 0.0;
  for (int i = 0; i < n_agents; ++i) {
    double coupling = 0.0;
    for (int j = 0; j < n_agents; ++j)
      if (j != i) coupling += a(i, j) + a(j, i);
    const double cnorm = block_transpose_inf_norm(constraints.blocks[static_cast<std::size_t>(i)]);
    out.r[i] = 0.5 * coupling + (1.0 + alpha[i]) * cnorm;
    out.p = std::max(out.p, (1.0 + alpha[i]) * cnorm);
  }
  return out;
}

namespace {

// Gerschgorin radius of the multiplier rows of U: the paper's p is a max
// over agents, while row m of (1/2) C (I - Lambda) sums over agents, so p
// alone need not dominate it. feasible_params therefore uses
// max(p, sigma-row radius), which only shrinks the admissible interval.
double sigma_row_radius(const CouplingConstraints& constraints, const Vec& alpha) {
  double worst = 0.0;
  for (Eigen::Index m = 0; m < constraints.rhs.size(); ++m) {
    double row = 0.0;
    for (int i = 0; i < constraints.n_agents(); ++i)
      row += 0.5 * std::abs(1.0 - alpha[i]) *
             constraints.blocks[static_cast<std::size_t>(i)].row(m).cwiseAbs().sum();
    worst = std::max(worst, row);
  }
  return worst;
}

}  // namespace

GnweParams feasible_params(const RowStochasticMatrix& matrix, const CouplingConstraints& constraints,
                           const Vec& alpha, std::optional<double> gamma) {
  const int n_agents = matrix.n_agents();
  require_alpha(alpha, n_agents);
  const GnweRadii rd = radii(matrix, constraints, alpha);
  const Mat& a = matrix.weights();

  const double p_eff = std::max(rd.p, sigma_row_radius(constraints, alpha));

  double cap = 2.0 * p_eff;
  for (int i = 0; i < n_agents; ++i)
    cap = std::max(cap, std::max(2.0 * rd.r[i], rd.r[i] + a(i, i)));

  double g;
  if (gamma) {
    if (!(*gamma > 0.0)) throw ParameterError("feasible_params: gamma must be positive");
    g = *gamma;
  } else {
    g = 0.95 / cap;
  }
  const double inv_g = 1.0 / g;

  GnweParams params;
  params.alpha = alpha;
  params.gamma = g;
  params.delta = Vec::Zero(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    const double lo = std::max(0.0, rd.r[i] - a(i, i));
    const double hi = inv_g - rd.r[i] - a(i, i);
    if (!(hi > lo)) {
      std::ostringstream os;
      os << "feasible_params: empty interval for agent " << i << ": need r_i - a_ii < 1/delta_i <= "
         << "1/gamma - r_i - a_ii, but 1/gamma - r_i - a_ii = " << hi << " <= " << lo;
      throw ParameterError(os.str());
    }
    params.delta[i] = 1.0 / (0.5 * (lo + hi));
  }

  const double beta_hi = inv_g - p_eff;
  if (!(beta_hi > p_eff)) {
    std::ostringstream os;
    os << "feasible_params: empty multiplier interval: need p < beta <= 1/gamma - p with p = " << p_eff
       << ", but 1/gamma - p = " << beta_hi;
    throw ParameterError(os.str());
  }
  params.beta = 0.5 * (p_eff + beta_hi);
  return params;
}

Preconditioner preconditioner(const RowStochasticMatrix& matrix, const CouplingConstraints& constraints,
                              const GnweParams& params) {
  const int n_agents = matrix.n_agents();
  const int n = constraints.state_dim();
  const int m = constraints.n_constraints();
  const Eigen::Index dim = static_cast<Eigen::Index>(n_agents) * n + m;

  Preconditioner pc;
  pc.phi = Mat::Zero(dim, dim);

  const Mat& a = matrix.weights();
  for (int i = 0; i < n_agents; ++i) {
    const Eigen::Index row = static_cast<Eigen::Index>(i) * n;
    for (int j = 0; j < n_agents; ++j) {
      const double w = a(i, j) + (i == j ? 1.0 / params.delta[i] : 0.0);
      if (w != 0.0)
        pc.phi.block(row, static_cast<Eigen::Index>(j) * n, n, n) = w * Mat::Identity(n, n);
    }
    if (m > 0) {
      pc.phi.block(row, static_cast<Eigen::Index>(n_agents) * n, n, m) =
          -params.alpha[i] * constraints.blocks[static_cast<std::size_t>(i)].transpose();
      pc.phi.block(static_cast<Eigen::Index>(n_agents) * n, row, m, n) =
          constraints.blocks[static_cast<std::size_t>(i)];
    }
  }
  if (m > 0)
    pc.phi.block(static_cast<Eigen::Index>(n_agents) * n, static_cast<Eigen::Index>(n_agents) * n, m, m) =
        params.beta * Mat::Identity(m, m);

  pc.u = 0.5 * (pc.phi + pc.phi.transpose());
  pc.s = 0.5 * (pc.phi - pc.phi.transpose());

  Eigen::SelfAdjointEigenSolver<Mat> eig(pc.u);
  pc.u_min_eigenvalue = eig.eigenvalues().minCoeff();
  pc.u_norm = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (pc.u_min_eigenvalue <= 0.0)
    throw ParameterError("preconditioner: symmetric part is not positive definite (min eigenvalue " +
                         std::to_string(pc.u_min_eigenvalue) + "); radii/bounds inconsistent");
  return pc;
}

GnweState step_prox_gnwe(const GameSpec& game, const CouplingConstraints& constraints,
                         const GnweParams& params, const GnweState& state, Vec* x_tilde_cache) {
  const int n_agents = game.n_agents();
  const int n = game.state_dim();
  if (state.x.size() != game.stacked_dim()) throw DimensionError("step_prox_gnwe: x length mismatch");
  if (state.sigma.size() != constraints.n_constraints())
    throw DimensionError("step_prox_gnwe: sigma length mismatch");
  const bool warm = x_tilde_cache && x_tilde_cache->size() == state.x.size();

  const Vec mixed = mix(game.matrix, state.x, n);

  // (a) local scaled prox with scale delta_i/(delta_i + 1)
  Vec x_tilde(state.x.size());
  for (int i = 0; i < n_agents; ++i) {
    const auto seg = Eigen::seqN(static_cast<Eigen::Index>(i) * n, n);
    const double s = params.delta[i] / (params.delta[i] + 1.0);
    Vec v = state.x(seg) / params.delta[i] + mixed(seg);
    if (constraints.n_constraints() > 0)
      v -= params.alpha[i] * constraints.block_transpose_apply(i, state.sigma);
    const auto& map = game.maps[static_cast<std::size_t>(i)];
    x_tilde(seg) = warm ? prox_eval_warm(map, Vec(s * v), s, Vec((*x_tilde_cache)(seg)))
                        : prox_eval(map, Vec(s * v), s);
  }
  if (x_tilde_cache) *x_tilde_cache = x_tilde;

  // (b) coordinator projection
  Vec sigma_tilde = state.sigma;
  if (constraints.n_constraints() > 0)
    sigma_tilde =
        (state.sigma + (constraints.apply(state.x) - constraints.rhs) / params.beta).cwiseMax(0.0);

  // (c),(d) inertia updates: the preconditioner's x-block is diag(1/delta) + A,
  // so the local difference enters with weight 1/delta_i.
  const Vec dx = x_tilde - state.x;
  const Vec dsigma = sigma_tilde - state.sigma;
  const Vec mixed_dx = mix(game.matrix, dx, n);

  GnweState next;
  next.x = state.x;
  for (int i = 0; i < n_agents; ++i) {
    const auto seg = Eigen::seqN(static_cast<Eigen::Index>(i) * n, n);
    Vec update = dx(seg) / params.delta[i] + mixed_dx(seg);
    if (constraints.n_constraints() > 0)
      update -= params.alpha[i] * constraints.block_transpose_apply(i, dsigma);
    next.x(seg) += params.gamma * update;
  }
  next.sigma = state.sigma;
  if (constraints.n_constraints() > 0)
    next.sigma += params.gamma * (params.beta * dsigma + constraints.apply(dx));
  return next;
}

TrajectoryRecord run_prox_gnwe(const GameSpec& game, const CouplingConstraints& constraints,
                               const GnweParams& params, const Vec& x0, const Vec& sigma0,
                               const GnweRunOptions& opts) {
  TrajectoryRecord rec;
  rec.tolerance = opts.tol;

  GnweState state{x0, sigma0};
  rec.iterates.push_back(state.x);
  rec.sigma_iterates.push_back(state.sigma);
  rec.iterate_steps.push_back(0);

  auto violation = [&](const Vec& x) {
    if (constraints.n_constraints() == 0) return 0.0;
    return Vec((constraints.apply(x) - constraints.rhs).cwiseMax(0.0)).lpNorm<Eigen::Infinity>();
  };

  Vec x_tilde_cache;
  for (std::int64_t k = 1; k <= opts.max_iter; ++k) {
    GnweState next = step_prox_gnwe(game, constraints, params, state, &x_tilde_cache);
    const double update_norm = std::max((next.x - state.x).lpNorm<Eigen::Infinity>(),
                                        constraints.n_constraints() > 0
                                            ? (next.sigma - state.sigma).lpNorm<Eigen::Infinity>()
                                            : 0.0);
    state = std::move(next);
    rec.iterations = k;
    rec.residuals.push_back(update_norm);
    rec.residual_steps.push_back(k);
    rec.violations.push_back(violation(state.x));
    rec.violation_steps.push_back(k);
    if (k % opts.store_every == 0 || k == opts.max_iter) {
      rec.iterates.push_back(state.x);
      rec.sigma_iterates.push_back(state.sigma);
      rec.iterate_steps.push_back(k);
    }
    rec.final_residual = update_norm;
    if (update_norm <= opts.tol) {
      rec.converged = true;
      if (rec.iterate_steps.back() != k) {
        rec.iterates.push_back(state.x);
        rec.sigma_iterates.push_back(state.sigma);
        rec.iterate_steps.push_back(k);
      }
      break;
    }
  }

  const GnweReport report = verify_gnwe(game, constraints, params.alpha, state.x, state.sigma,
                                        opts.certificate_tol);
  Certificate cert;
  cert.kind = CertificateKind::gnwe;
  cert.tolerance = opts.certificate_tol;
  cert.passed = report.passed;
  cert.fixed_point_residual = report.fixed_point_residual;
  cert.feasibility_violation = report.feasibility_violation;
  cert.complementarity = report.complementarity;
  rec.certificate = cert;
  return rec;
}

GnweReport verify_gnwe(const GameSpec& game, const CouplingConstraints& constraints, const Vec& alpha,
                       const Vec& xbar, const Vec& sigma_bar, double tol) {
  const int n_agents = game.n_agents();
  const int n = game.state_dim();
  require_alpha(alpha, n_agents);

  const Vec mixed = mix(game.matrix, xbar, n);
  Vec prox_arg = mixed;
  if (constraints.n_constraints() > 0)
    for (int i = 0; i < n_agents; ++i)
      prox_arg.segment(static_cast<Eigen::Index>(i) * n, n) -=
          alpha[i] * constraints.block_transpose_apply(i, sigma_bar);
  const Vec x_image = block_prox(game.maps, prox_arg);

  GnweReport report;
  report.fixed_point_residual = (xbar - x_image).lpNorm<Eigen::Infinity>();
  if (constraints.n_constraints() > 0) {
    const Vec slack = constraints.apply(xbar) - constraints.rhs;
    const Vec sigma_image = (sigma_bar + slack).cwiseMax(0.0);
    report.fixed_point_residual =
        std::max(report.fixed_point_residual, (sigma_bar - sigma_image).lpNorm<Eigen::Infinity>());
    report.feasibility_violation = Vec(slack.cwiseMax(0.0)).lpNorm<Eigen::Infinity>();
    report.complementarity = std::abs(sigma_bar.dot(slack));
  }
  report.passed = report.fixed_point_residual <= tol && report.feasibility_violation <= tol &&
                  report.complementarity <= tol;
  return report;
}

MonotonicityResult monotonicity_check_G(const RowStochasticMatrix& matrix,
                                        const CouplingConstraints& constraints, const Vec& alpha,
                                        const Mat& qbar, int samples, std::uint64_t rng_seed) {
  const int n_agents = matrix.n_agents();
  const int n = constraints.state_dim();
  const int m = constraints.n_constraints();
  const Eigen::Index dim = static_cast<Eigen::Index>(n_agents) * n + m;
  require_alpha(alpha, n_agents);
  if (qbar.rows() != dim || qbar.cols() != dim)
    throw DimensionError("monotonicity_check_G: Qbar dimension mismatch");

  // Linear part of the extended-game map G.
  Mat g = Mat::Zero(dim, dim);
  const Mat& a = matrix.weights();
  for (int i = 0; i < n_agents; ++i) {
    const Eigen::Index row = static_cast<Eigen::Index>(i) * n;
    for (int j = 0; j < n_agents; ++j)
      if (a(i, j) != 0.0)
        g.block(row, static_cast<Eigen::Index>(j) * n, n, n) = a(i, j) * Mat::Identity(n, n);
    if (m > 0) {
      g.block(row, static_cast<Eigen::Index>(n_agents) * n, n, m) =
          -alpha[i] * constraints.blocks[static_cast<std::size_t>(i)].transpose();
      g.block(static_cast<Eigen::Index>(n_agents) * n, row, m, n) =
          constraints.blocks[static_cast<std::size_t>(i)];
    }
  }
  if (m > 0)
    g.block(static_cast<Eigen::Index>(n_agents) * n, static_cast<Eigen::Index>(n_agents) * n, m, m) =
        Mat::Identity(m, m);

  const Mat weighted = qbar * (Mat::Identity(dim, dim) - g);
  const Mat sym = 0.5 * (weighted + weighted.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);

  MonotonicityResult result;
  result.min_eigenvalue = eig.eigenvalues().minCoeff();

  Rng rng(rng_seed);
  result.min_sample_inner = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vec u = rng.uniform_vec(dim, -1.0, 1.0);
    const Vec v = rng.uniform_vec(dim, -1.0, 1.0);
    const Vec d = u - v;
    result.min_sample_inner = std::min(result.min_sample_inner, d.dot(weighted * d));
  }
  result.holds = result.min_eigenvalue >= -1e-10;
  return result;
}

}  // namespace netgame
