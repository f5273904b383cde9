#include "netgame/models.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace netgame {

GameSpec build_friedkin_johnsen(const FjProfile& profile, RowStochasticMatrix matrix) {
  const int n_agents = matrix.n_agents();
  const int n = profile.topics;
  if (profile.n_agents() != n_agents)
    throw DimensionError("build_friedkin_johnsen: stubbornness list length != N");
  if (profile.initial_opinions.size() != static_cast<Eigen::Index>(n_agents) * n)
    throw DimensionError("build_friedkin_johnsen: opinion vector length != N*n");
  if (profile.initial_opinions.minCoeff() < 0.0 || profile.initial_opinions.maxCoeff() > 1.0)
    throw ParameterError("build_friedkin_johnsen: opinions must lie in [0,1]");

  std::vector<ProximalMap> maps;
  maps.reserve(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) {
    const double mu = profile.stubbornness[static_cast<std::size_t>(i)];
    if (!(mu > 0.0))
      throw ParameterError("build_friedkin_johnsen: mu_i = 0 makes the anchor weight diverge");
    maps.push_back(make_fj_map(profile.initial_opinions.segment(static_cast<Eigen::Index>(i) * n, n),
                               mu, Vec::Zero(n), Vec::Ones(n)));
  }
  return GameSpec(std::move(maps), std::move(matrix));
}

DegrootGame build_degroot_bounded(const std::vector<std::pair<double, double>>& boxes,
                                  std::vector<RowStochasticMatrix> matrix_set) {
  if (matrix_set.empty()) throw PreconditionError("build_degroot_bounded: empty matrix set");
  const int n_agents = matrix_set.front().n_agents();
  if (static_cast<int>(boxes.size()) != n_agents)
    throw DimensionError("build_degroot_bounded: one box per agent required");

  std::vector<ProximalMap> maps;
  maps.reserve(boxes.size());
  for (const auto& [lo, hi] : boxes) {
    if (lo > hi) throw ParameterError("build_degroot_bounded: empty opinion box");
    maps.push_back(make_box_map(Vec::Constant(1, lo), Vec::Constant(1, hi)));
  }
  return DegrootGame{std::move(maps), MatrixSet(std::move(matrix_set))};
}

DegrootTvInstance make_degroot_tv_instance(std::uint64_t seed, int n_matrices) {
  constexpr int kAgents = 8;
  Rng rng(seed);

  DegrootTvInstance out;
  out.boxes = {{0.0, 0.25}, {0.0, 0.25}, {0.0, 1.0}, {0.0, 1.0},
               {0.0, 1.0},  {0.0, 1.0},  {0.75, 1.0}, {0.75, 1.0}};

  Vec xbar(kAgents);
  xbar << 0.25, 0.25, 0.0, 0.0, 0.0, 0.0, 0.75, 0.75;
  for (int i = 2; i <= 5; ++i) xbar[i] = rng.uniform(0.3, 0.7);
  out.designed_equilibrium = xbar;

  // Each matrix fixes xbar: extremist rows mix values in [0.25, 0.75] (the
  // projection clamps them back to the boundary), while neutral rows are
  // balanced on the two extremes so that the row average hits the target
  // exactly.
  for (int m = 0; m < n_matrices; ++m) {
    Mat a = Mat::Zero(kAgents, kAgents);
    for (int i = 0; i < kAgents; ++i) {
      const bool neutral = i >= 2 && i <= 5;
      const double self = 0.3;
      if (!neutral) {
        Vec row(kAgents);
        for (int j = 0; j < kAgents; ++j) row[j] = rng.uniform(0.05, 1.0);
        row[i] = 0.0;
        row *= (1.0 - self) / row.sum();
        row[i] = self;
        a.row(i) = row;
      } else {
        const double eps = 0.05;
        Vec noise(kAgents);
        for (int j = 0; j < kAgents; ++j) noise[j] = rng.uniform(0.05, 1.0);
        noise *= eps / noise.sum();
        const double mass = 1.0 - self - eps;
        const double target = xbar[i] - self * xbar[i] - noise.dot(xbar);
        const double v = (target - 0.25 * mass) / 0.5;  // weight on the 0.75 anchor
        const double u = mass - v;
        if (v < 0.0 || u < 0.0)
          throw PreconditionError("make_degroot_tv_instance: row construction out of range");
        a.row(i) = noise;
        a(i, i) += self;
        a(i, 0) += u;
        a(i, 7) += v;
      }
    }
    out.matrices.push_back(a);
  }
  return out;
}

Mat LassoInstance::stacked_data() const {
  Eigen::Index rows = 0;
  for (const auto& b : data_blocks) rows += b.rows();
  Mat out(rows, dim());
  Eigen::Index at = 0;
  for (const auto& b : data_blocks) {
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

Vec LassoInstance::stacked_observations() const {
  Eigen::Index rows = 0;
  for (const auto& y : observations) rows += y.size();
  Vec out(rows);
  Eigen::Index at = 0;
  for (const auto& y : observations) {
    out.segment(at, y.size()) = y;
    at += y.size();
  }
  return out;
}

LassoSynthesis make_lasso_synthesis(int n_agents, int dim, int total_rows, double sigma_max,
                                    double tau, std::uint64_t seed) {
  if (n_agents < 1 || dim < 1 || total_rows < n_agents)
    throw ParameterError("make_lasso_synthesis: degenerate sizes");
  Rng rng(seed);

  Vec x_true(dim);
  for (int c = 0; c < dim; ++c) x_true[c] = rng.normal();

  Mat data(total_rows, dim);
  for (int r = 0; r < total_rows; ++r)
    for (int c = 0; c < dim; ++c) data(r, c) = rng.normal();
  const Vec y_clean = data * x_true;

  Vec sigma(n_agents);
  for (int i = 0; i < n_agents; ++i) sigma[i] = rng.uniform(0.0, sigma_max);

  LassoInstance instance;
  instance.tau = tau;
  const int base_rows = total_rows / n_agents;
  int extra = total_rows % n_agents;
  Eigen::Index at = 0;
  for (int i = 0; i < n_agents; ++i) {
    const int rows = base_rows + (extra-- > 0 ? 1 : 0);
    instance.data_blocks.push_back(data.middleRows(at, rows));
    Vec y = y_clean.segment(at, rows);
    for (int r = 0; r < rows; ++r) y[r] += sigma[i] * rng.normal();
    instance.observations.push_back(std::move(y));
    at += rows;
  }

  // Weights inversely proportional to the neighbor's noise level, row
  // normalized, with the self-loop floored at 0.1.
  Mat weights(n_agents, n_agents);
  for (int i = 0; i < n_agents; ++i) {
    for (int j = 0; j < n_agents; ++j) weights(i, j) = 1.0 / (sigma[j] + 1e-3);
    weights.row(i) /= weights.row(i).sum();
    if (weights(i, i) < 0.1) {
      const double off = 1.0 - weights(i, i);
      for (int j = 0; j < n_agents; ++j)
        if (j != i) weights(i, j) *= 0.9 / off;
      weights(i, i) = 0.1;
    }
  }
  RowStochasticMatrix matrix(weights);
  instance.laplacian = Mat::Identity(n_agents, n_agents) - weights;

  return LassoSynthesis{std::move(instance), std::move(matrix), std::move(x_true), y_clean,
                        std::move(sigma)};
}

LassoGame build_distributed_lasso(const LassoInstance& instance, RowStochasticMatrix matrix) {
  const int n_agents = matrix.n_agents();
  if (instance.n_agents() != n_agents)
    throw DimensionError("build_distributed_lasso: data blocks != agents");
  if (instance.laplacian.rows() != n_agents || instance.laplacian.cols() != n_agents)
    throw DimensionError("build_distributed_lasso: Laplacian shape mismatch");
  for (int i = 0; i < n_agents; ++i) {
    if (std::abs(instance.laplacian.row(i).sum()) > 1e-10)
      throw ParameterError("build_distributed_lasso: Laplacian rows must sum to zero");
    for (int j = 0; j < n_agents; ++j)
      if (j != i && instance.laplacian(i, j) > 0.0)
        throw ParameterError("build_distributed_lasso: Laplacian off-diagonals must be <= 0");
  }

  const int n = instance.dim();
  // The standing assumptions want compact local sets; an arbitrarily big box
  // leaves the dynamics untouched at these scales.
  const double bound = 1e6;

  std::vector<ProximalMap> maps;
  maps.reserve(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) {
    ProximalMap m = make_least_squares_l1_map(instance.data_blocks[static_cast<std::size_t>(i)],
                                              instance.observations[static_cast<std::size_t>(i)],
                                              instance.tau);
    m.lo = Vec::Constant(n, -bound);
    m.hi = Vec::Constant(n, bound);
    m.has_box = true;
    maps.push_back(std::move(m));
  }

  Mat lkron = Mat::Zero(static_cast<Eigen::Index>(n_agents) * n, static_cast<Eigen::Index>(n_agents) * n);
  for (int i = 0; i < n_agents; ++i)
    for (int j = 0; j < n_agents; ++j)
      if (instance.laplacian(i, j) != 0.0)
        lkron.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(j) * n, n, n) =
            instance.laplacian(i, j) * Mat::Identity(n, n);

  CouplingConstraints constraints = CouplingConstraints::equalities_from_dense(
      lkron, Vec::Zero(lkron.rows()), n_agents);
  return LassoGame{GameSpec(std::move(maps), std::move(matrix)), std::move(constraints)};
}

Vec centralized_lasso_oracle(const Mat& data, const Vec& observations, double tau, double tol,
                             long max_iter) {
  if (data.rows() != observations.size())
    throw DimensionError("centralized_lasso_oracle: shape mismatch");
  if (tau < 0.0) throw ParameterError("centralized_lasso_oracle: tau must be nonnegative");
  if (!(tol > 0.0)) throw ParameterError("centralized_lasso_oracle: tol must be positive");

  const Mat gram = 2.0 * data.transpose() * data;
  const Vec rhs = 2.0 * data.transpose() * observations;
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
  const double lip = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lip;

  auto residual = [&](const Vec& x) {
    const Vec grad = gram * x - rhs;
    double sq = 0.0;
    for (Eigen::Index c = 0; c < x.size(); ++c) {
      double lo = grad[c], hi = grad[c];
      if (x[c] > 0.0) {
        lo += tau;
        hi += tau;
      } else if (x[c] < 0.0) {
        lo -= tau;
        hi -= tau;
      } else {
        lo -= tau;
        hi += tau;
      }
      double d = 0.0;
      if (lo > 0.0)
        d = lo;
      else if (hi < 0.0)
        d = -hi;
      sq += d * d;
    }
    return std::sqrt(sq);
  };

  Vec x = Vec::Zero(data.cols());
  for (long k = 0; k < max_iter; ++k) {
    if (residual(x) <= tol) return x;
    Vec next = x - step * (gram * x - rhs);
    for (Eigen::Index c = 0; c < next.size(); ++c) {
      const double t = step * tau;
      next[c] = next[c] > t ? next[c] - t : (next[c] < -t ? next[c] + t : 0.0);
    }
    x = next;
  }
  throw IterationLimitError("centralized_lasso_oracle: iteration cap reached", x, residual(x));
}

Mat random_row_stochastic(Rng& rng, int n_agents, double self_lo, double self_hi) {
  if (n_agents < 1) throw ParameterError("random_row_stochastic: need at least one agent");
  if (!(self_lo > 0.0 && self_lo <= self_hi && self_hi < 1.0) && n_agents > 1)
    throw ParameterError("random_row_stochastic: self-loop range must satisfy 0 < lo <= hi < 1");
  if (n_agents == 1) return Mat::Ones(1, 1);

  Mat a = Mat::Zero(n_agents, n_agents);
  for (int i = 0; i < n_agents; ++i) {
    const double self = rng.uniform(self_lo, self_hi);
    Vec off(n_agents);
    for (int j = 0; j < n_agents; ++j) off[j] = rng.uniform() < 0.5 ? rng.uniform() : 0.0;
    off[i] = 0.0;
    off[(i + 1) % n_agents] += 0.5;  // ring edge keeps the graph strongly connected
    off *= (1.0 - self) / off.sum();
    a.row(i) = off;
    a(i, i) = self;
  }
  return a;
}

std::vector<double> mse_curve(const std::vector<Vec>& iterates, const Mat& data, const Vec& y_true,
                              bool normalized) {
  if (data.rows() != y_true.size()) throw DimensionError("mse_curve: data/y_true shape mismatch");
  std::vector<double> out;
  out.reserve(iterates.size());
  const Eigen::Index n = data.cols();
  for (const Vec& x : iterates) {
    if (x.size() % n != 0) throw DimensionError("mse_curve: stacked state not divisible by dim");
    const Eigen::Index n_agents = x.size() / n;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n_agents; ++i)
      acc += (data * x.segment(i * n, n) - y_true).squaredNorm();
    out.push_back(acc / static_cast<double>(n_agents));
  }
  if (normalized && !out.empty()) {
    const double base = out.front();
    for (double& v : out) v /= base;
  }
  return out;
}

}  // namespace netgame
