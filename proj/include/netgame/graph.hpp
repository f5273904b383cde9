#pragma once

#include "netgame/rng.hpp"
#include "netgame/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace netgame {

/// Outcome of checking one clause of the communication-matrix assumptions.
struct ValidationClause {
  std::string name;
  bool passed = false;
  std::vector<int> offending;  // row (or node) indices that violate the clause
};

struct ValidationReport {
  std::vector<ValidationClause> clauses;
  bool passed = false;

  const ValidationClause* find(const std::string& name) const;
};

/// Validated N x N communication weights. Rows sum to one, entries are
/// nonnegative, and the induced digraph (edge j -> i iff a_ij > 0) is
/// strongly connected. Zero diagonal entries are allowed here (the relaxed
/// dynamics cover that case); the full standing assumption, including
/// positive self-loops, is what validate_standing_assumption reports. The
/// left Perron-Frobenius eigenvector is computed lazily and cached.
class RowStochasticMatrix {
 public:
  /// Throws PreconditionError listing the violated clauses when the matrix
  /// is not nonnegative row stochastic and strongly connected.
  explicit RowStochasticMatrix(Mat weights);

  int n_agents() const { return static_cast<int>(weights_.rows()); }
  const Mat& weights() const { return weights_; }
  double entry(int i, int j) const { return weights_(i, j); }

  /// Smallest diagonal entry.
  double min_self_loop() const { return min_self_loop_; }

  /// Unit-norm positive left eigenvector q with q^T A = q^T; cached after
  /// the first call.
  const Vec& pf_vector() const;

  /// diag(pf_vector()).
  Mat pf_diag() const;

  bool has_pf_vector() const { return pf_.has_value(); }

 private:
  Mat weights_;
  double min_self_loop_ = 0.0;
  mutable std::optional<Vec> pf_;
};

/// Checks nonnegativity, unit row sums, strong connectivity and positive
/// diagonal on an arbitrary square matrix without constructing a
/// RowStochasticMatrix. Throws DimensionError for non-square input.
ValidationReport validate_standing_assumption(const Mat& weights);

/// True iff the digraph induced by the nonzero pattern of `weights` has a
/// single strongly connected component (Tarjan).
bool strongly_connected(const Mat& weights);

/// Rescales each row to sum to one. Helper for configs carrying float
/// rounding; throws ParameterError on a nonpositive row sum.
Mat renormalize_rows(const Mat& weights);

struct PfOptions {
  double tol = 1e-12;
  long max_iter = 100000;
};

/// Left Perron-Frobenius eigenvector of a validated matrix: unit 2-norm,
/// strictly positive, with ||q^T A - q^T||_inf <= tol. Power iteration on
/// A^T started from the uniform positive vector.
Vec left_pf_eigenvector(const RowStochasticMatrix& matrix, const PfOptions& opts = {});

/// (A (x) I_n) x computed blockwise: block i of the result is
/// sum_j a_ij x_j. Never materializes the Kronecker product.
Vec mix(const RowStochasticMatrix& matrix, const Vec& x, int block_size);

/// Same, for a raw square matrix (used by tests and the transform).
Vec mix(const Mat& weights, const Vec& x, int block_size);

/// Abar = I + mu * diag(w) (A - I) for a left eigenvector w of A. The
/// result is nonnegative and doubly stochastic for
/// 0 <= mu <= 1 / max_i((1 - a_ii) w_i), with positive diagonal when the
/// inequality is strict.
Mat doubly_stochastic_transform(const RowStochasticMatrix& matrix, const Vec& w, double mu);

struct AveragednessResult {
  bool holds = false;
  double min_slack = 0.0;  // smallest (rhs - lhs) seen over all sampled pairs
};

/// Samples `samples` random vector pairs and tests the eta-averagedness
/// inequality of A in the Q-weighted space:
///   ||A(x-y)||_Q^2 <= ||x-y||_Q^2 - (1-eta)/eta ||(I-A)(x-y)||_Q^2.
/// Holds iff the minimum slack is >= -1e-10.
AveragednessResult averagedness_check(const Mat& weights, const Vec& q_diag, double eta,
                                      int samples, std::uint64_t rng_seed);

}  // namespace netgame
