#include "netgame/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stack>

namespace netgame {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kPfResidualTol = 1e-10;

void require_square(const Mat& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    std::ostringstream os;
    os << who << ": expected a square matrix with N >= 1, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

}  // namespace

const ValidationClause* ValidationReport::find(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.name == name) return &c;
  return nullptr;
}

bool strongly_connected(const Mat& weights) {
  require_square(weights, "strongly_connected");
  const int n = static_cast<int>(weights.rows());
  if (n == 1) return true;

  // Iterative Tarjan on the digraph with edge j -> i iff a_ij > 0. Edge
  // orientation does not matter for counting components.
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && weights(i, j) > 0.0) adj[i].push_back(j);

  std::vector<int> index(n, -1), lowlink(n, 0), child(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> tarjan_stack;
  std::vector<int> call_stack;
  int next_index = 0;
  int components = 0;

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call_stack.push_back(root);
    while (!call_stack.empty()) {
      const int v = call_stack.back();
      if (index[v] == -1) {
        index[v] = lowlink[v] = next_index++;
        tarjan_stack.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      while (child[v] < static_cast<int>(adj[v].size())) {
        const int w = adj[v][child[v]];
        if (index[w] == -1) {
          ++child[v];
          call_stack.push_back(w);
          descended = true;
          break;
        }
        if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
        ++child[v];
      }
      if (descended) continue;
      if (lowlink[v] == index[v]) {
        ++components;
        if (components > 1) return false;
        int w;
        do {
          w = tarjan_stack.back();
          tarjan_stack.pop_back();
          on_stack[w] = false;
        } while (w != v);
      }
      call_stack.pop_back();
      if (!call_stack.empty()) {
        const int parent = call_stack.back();
        lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
      }
    }
  }
  return components == 1;
}

ValidationReport validate_standing_assumption(const Mat& weights) {
  require_square(weights, "validate_standing_assumption");
  const int n = static_cast<int>(weights.rows());

  ValidationReport report;

  ValidationClause nonneg{"nonnegativity", true, {}};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (weights(i, j) < 0.0) {
        nonneg.passed = false;
        nonneg.offending.push_back(i);
        break;
      }
    }
  }

  ValidationClause row_sums{"row_sums", true, {}};
  for (int i = 0; i < n; ++i) {
    if (std::abs(weights.row(i).sum() - 1.0) > kRowSumTol) {
      row_sums.passed = false;
      row_sums.offending.push_back(i);
    }
  }

  ValidationClause connectivity{"strong_connectivity", strongly_connected(weights), {}};

  ValidationClause self_loops{"positive_self_loops", true, {}};
  for (int i = 0; i < n; ++i) {
    if (weights(i, i) <= 0.0) {
      self_loops.passed = false;
      self_loops.offending.push_back(i);
    }
  }

  nonneg.passed = nonneg.offending.empty();
  report.clauses = {nonneg, row_sums, connectivity, self_loops};
  report.passed = nonneg.passed && row_sums.passed && connectivity.passed && self_loops.passed;
  return report;
}

Mat renormalize_rows(const Mat& weights) {
  require_square(weights, "renormalize_rows");
  Mat out = weights;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double s = out.row(i).sum();
    if (s <= 0.0) throw ParameterError("renormalize_rows: row " + std::to_string(i) + " has nonpositive sum");
    out.row(i) /= s;
  }
  return out;
}

RowStochasticMatrix::RowStochasticMatrix(Mat weights) : weights_(std::move(weights)) {
  const ValidationReport report = validate_standing_assumption(weights_);
  std::ostringstream os;
  bool bad = false;
  for (const auto& c : report.clauses) {
    if (c.passed || c.name == "positive_self_loops") continue;  // a = 0 admitted
    bad = true;
    os << " [" << c.name;
    for (int idx : c.offending) os << " " << idx;
    os << "]";
  }
  if (bad) throw PreconditionError("RowStochasticMatrix: invalid weights:" + os.str());
  min_self_loop_ = weights_.diagonal().minCoeff();
}

const Vec& RowStochasticMatrix::pf_vector() const {
  if (!pf_) pf_ = left_pf_eigenvector(*this);
  return *pf_;
}

Mat RowStochasticMatrix::pf_diag() const {
  return Mat(pf_vector().asDiagonal());
}

Vec left_pf_eigenvector(const RowStochasticMatrix& matrix, const PfOptions& opts) {
  const int n = matrix.n_agents();
  const Mat& a = matrix.weights();
  // Power iteration on the shifted transpose (A^T + I)/2: same left
  // eigenvector, and the shift keeps the iteration convergent even for
  // periodic matrices (irreducible with zero diagonal).
  const Mat iter_matrix = 0.5 * (a.transpose() + Mat::Identity(n, n));

  Vec q = Vec::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  auto eig_residual = [&](const Vec& v) {
    return (v.transpose() * a - v.transpose()).lpNorm<Eigen::Infinity>();
  };

  double best_residual = eig_residual(q);
  long stalled = 0;
  for (long k = 0; k < opts.max_iter; ++k) {
    Vec next = iter_matrix * q;
    next /= next.norm();
    const double step = (next - q).lpNorm<Eigen::Infinity>();
    q = next;
    const double residual = eig_residual(q);
    stalled = residual < best_residual ? 0 : stalled + 1;
    best_residual = std::min(best_residual, residual);

    // Drive the eigen-residual to machine precision; the successive-step
    // test alone leaves errors that downstream column sums can feel.
    const bool settled = step <= opts.tol * q.norm() && (residual <= 2e-14 || stalled > 200);
    if (settled && residual <= kPfResidualTol) {
      if (q.minCoeff() <= 0.0)
        throw PreconditionError("left_pf_eigenvector: iterate lost positivity; matrix irreducible?");
      return q;
    }
  }
  throw IterationLimitError("left_pf_eigenvector: no convergence within max_iter", q, eig_residual(q));
}

Vec mix(const Mat& weights, const Vec& x, int block_size) {
  require_square(weights, "mix");
  const int n_agents = static_cast<int>(weights.rows());
  if (block_size < 1 || x.size() != static_cast<Eigen::Index>(n_agents) * block_size) {
    std::ostringstream os;
    os << "mix: state length " << x.size() << " != N*n = " << n_agents << "*" << block_size;
    throw DimensionError(os.str());
  }
  Vec out = Vec::Zero(x.size());
  for (int i = 0; i < n_agents; ++i) {
    auto dst = out.segment(static_cast<Eigen::Index>(i) * block_size, block_size);
    for (int j = 0; j < n_agents; ++j) {
      const double a = weights(i, j);
      if (a != 0.0) dst += a * x.segment(static_cast<Eigen::Index>(j) * block_size, block_size);
    }
  }
  return out;
}

Vec mix(const RowStochasticMatrix& matrix, const Vec& x, int block_size) {
  return mix(matrix.weights(), x, block_size);
}

Mat doubly_stochastic_transform(const RowStochasticMatrix& matrix, const Vec& w, double mu) {
  const int n = matrix.n_agents();
  if (w.size() != n) throw DimensionError("doubly_stochastic_transform: eigenvector length mismatch");
  if (w.minCoeff() <= 0.0)
    throw PreconditionError("doubly_stochastic_transform: w must be strictly positive");

  const Mat& a = matrix.weights();
  const double eig_residual = (w.transpose() * a - w.transpose()).lpNorm<Eigen::Infinity>();
  if (eig_residual > 1e-8 * std::max(1.0, w.lpNorm<Eigen::Infinity>()))
    throw PreconditionError("doubly_stochastic_transform: w is not a left eigenvector (residual " +
                            std::to_string(eig_residual) + ")");

  double mu_cap_denominator = 0.0;
  for (int i = 0; i < n; ++i) mu_cap_denominator = std::max(mu_cap_denominator, (1.0 - a(i, i)) * w[i]);
  const double mu_max = mu_cap_denominator > 0.0 ? 1.0 / mu_cap_denominator
                                                 : std::numeric_limits<double>::infinity();
  if (mu < 0.0 || mu > mu_max)
    throw ParameterError("doubly_stochastic_transform: mu = " + std::to_string(mu) +
                         " outside [0, " + std::to_string(mu_max) + "]");

  return Mat::Identity(n, n) + mu * w.asDiagonal() * (a - Mat::Identity(n, n));
}

AveragednessResult averagedness_check(const Mat& weights, const Vec& q_diag, double eta,
                                      int samples, std::uint64_t rng_seed) {
  require_square(weights, "averagedness_check");
  const int n = static_cast<int>(weights.rows());
  if (q_diag.size() != n) throw DimensionError("averagedness_check: weight vector length mismatch");
  if (eta <= 0.0 || eta >= 1.0) throw ParameterError("averagedness_check: eta must lie in (0,1)");

  Rng rng(rng_seed);
  const double ratio = (1.0 - eta) / eta;

  auto q_sq = [&](const Vec& v) { return v.cwiseProduct(q_diag.cwiseProduct(v)).sum(); };

  AveragednessResult result;
  result.min_slack = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vec x = rng.uniform_vec(n, -1.0, 1.0);
    const Vec y = rng.uniform_vec(n, -1.0, 1.0);
    const Vec d = x - y;
    const Vec ad = weights * d;
    const double lhs = q_sq(ad);
    const double rhs = q_sq(d) - ratio * q_sq(d - ad);
    result.min_slack = std::min(result.min_slack, rhs - lhs);
  }
  result.holds = result.min_slack >= -1e-10;
  return result;
}

}  // namespace netgame
