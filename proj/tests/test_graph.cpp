#include "netgame/graph.hpp"

#include "netgame/io.hpp"
#include "netgame/models.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cstdio>

using namespace netgame;

namespace {

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("validate_standing_assumption clause reporting") {
  SUBCASE("well-formed matrix passes") {
    const ValidationReport rep = validate_standing_assumption(mat2(0.5, 0.5, 0.25, 0.75));
    CHECK(rep.passed);
    RowStochasticMatrix m(mat2(0.5, 0.5, 0.25, 0.75));
    CHECK(m.min_self_loop() == doctest::Approx(0.5));
  }
  SUBCASE("swap matrix fails only the self-loop clause") {
    const ValidationReport rep = validate_standing_assumption(mat2(0, 1, 1, 0));
    CHECK_FALSE(rep.passed);
    CHECK(rep.find("nonnegativity")->passed);
    CHECK(rep.find("row_sums")->passed);
    CHECK(rep.find("strong_connectivity")->passed);
    CHECK_FALSE(rep.find("positive_self_loops")->passed);
    CHECK(rep.find("positive_self_loops")->offending == std::vector<int>{0, 1});
  }
  SUBCASE("identity fails strong connectivity") {
    const ValidationReport rep = validate_standing_assumption(Mat::Identity(2, 2));
    CHECK_FALSE(rep.passed);
    CHECK_FALSE(rep.find("strong_connectivity")->passed);
    CHECK(rep.find("positive_self_loops")->passed);
  }
  SUBCASE("non-square input is a dimension error") {
    CHECK_THROWS_AS(validate_standing_assumption(Mat::Ones(2, 3)), DimensionError);
  }
  SUBCASE("offending indices are listed") {
    Mat bad = mat2(0.5, 0.5, 0.3, 0.3);
    const ValidationReport rep = validate_standing_assumption(bad);
    CHECK(rep.find("row_sums")->offending == std::vector<int>{1});
  }
  SUBCASE("the matrix type admits zero self-loops but not disconnection") {
    RowStochasticMatrix swap(mat2(0, 1, 1, 0));
    CHECK(swap.min_self_loop() == 0.0);
    CHECK_THROWS_AS(RowStochasticMatrix(Mat::Identity(2, 2)), PreconditionError);
    CHECK_THROWS_AS(RowStochasticMatrix(mat2(0.5, 0.5, 0.6, 0.6)), PreconditionError);
  }
}

TEST_CASE("strongly_connected") {
  CHECK(strongly_connected(mat2(0, 1, 1, 0)));
  CHECK_FALSE(strongly_connected(Mat::Identity(2, 2)));
  Mat cycle = Mat::Zero(3, 3);
  cycle(0, 1) = cycle(1, 2) = cycle(2, 0) = 1.0;
  CHECK(strongly_connected(cycle));
  CHECK(strongly_connected(Mat::Ones(1, 1)));
  Mat chain = Mat::Zero(3, 3);  // 0 -> 1 -> 2 with no way back
  chain(0, 1) = chain(1, 2) = 1.0;
  chain.diagonal().setConstant(1.0);
  CHECK_FALSE(strongly_connected(chain));
}

TEST_CASE("left_pf_eigenvector closed forms") {
  SUBCASE("doubly stochastic gives the uniform vector") {
    RowStochasticMatrix m(mat2(0.5, 0.5, 0.5, 0.5));
    const Vec q = left_pf_eigenvector(m);
    CHECK(q[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("single agent") {
    RowStochasticMatrix m(Mat::Ones(1, 1));
    const Vec q = left_pf_eigenvector(m);
    CHECK(q[0] == doctest::Approx(1.0));
  }
  SUBCASE("worked 2x2: q proportional to (1, 2)") {
    RowStochasticMatrix m(mat2(0.5, 0.5, 0.25, 0.75));
    const Vec q = left_pf_eigenvector(m);
    CHECK(q[0] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-10));
    CHECK(q[1] == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-10));
  }
  SUBCASE("iteration-limit error carries the last iterate") {
    RowStochasticMatrix m(mat2(0.5, 0.5, 0.25, 0.75));
    PfOptions opts;
    opts.max_iter = 0;
    CHECK_THROWS_AS(left_pf_eigenvector(m, opts), IterationLimitError);
  }
}

TEST_CASE("left_pf_eigenvector agrees with the dense solve oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_int(0, 9));
    RowStochasticMatrix m(random_row_stochastic(rng, n, 0.1, 0.8));
    const Vec q = left_pf_eigenvector(m);
    const Vec q_oracle = oracles::pf_linear_solve(m.weights());
    CHECK((q - q_oracle).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK((q.transpose() * m.weights() - q.transpose()).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(q.minCoeff() > 0.0);
  }
}

TEST_CASE("mix computes the Kronecker action blockwise") {
  SUBCASE("swap matrix on scalars") {
    Vec x(2);
    x << 1, 2;
    const Vec y = mix(mat2(0, 1, 1, 0), x, 1);
    CHECK(y[0] == 2.0);
    CHECK(y[1] == 1.0);
  }
  SUBCASE("identity is a no-op") {
    Vec x(4);
    x << 1, -2, 3, 4;
    CHECK((mix(Mat::Identity(2, 2), x, 2) - x).norm() == 0.0);
  }
  SUBCASE("worked blockwise example") {
    Vec x(4);
    x << 1, 0, 3, 4;
    const Vec y = mix(mat2(0.5, 0.5, 0.25, 0.75), x, 2);
    CHECK(y[0] == doctest::Approx(2.0));
    CHECK(y[1] == doctest::Approx(2.0));
    CHECK(y[2] == doctest::Approx(2.5));
    CHECK(y[3] == doctest::Approx(3.0));
  }
  SUBCASE("agrees with the explicit Kronecker product") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
      const int n_agents = 2 + static_cast<int>(rng.uniform_int(0, 4));
      const int block = 1 + static_cast<int>(rng.uniform_int(0, 3));
      const Mat a = random_row_stochastic(rng, n_agents, 0.1, 0.8);
      const Vec x = rng.uniform_vec(static_cast<Eigen::Index>(n_agents) * block, -2.0, 2.0);
      CHECK((mix(a, x, block) - oracles::kron_mix(a, x, block)).lpNorm<Eigen::Infinity>() < 1e-13);
    }
  }
  SUBCASE("per-block convex hull is preserved (scalar blocks)") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const int n_agents = 3 + static_cast<int>(rng.uniform_int(0, 5));
      const Mat a = random_row_stochastic(rng, n_agents, 0.1, 0.8);
      const Vec x = rng.uniform_vec(n_agents, -5.0, 5.0);
      const Vec y = mix(a, x, 1);
      CHECK(y.minCoeff() >= x.minCoeff() - 1e-12);
      CHECK(y.maxCoeff() <= x.maxCoeff() + 1e-12);
    }
  }
  SUBCASE("length mismatch is a dimension error") {
    CHECK_THROWS_AS(mix(Mat::Identity(2, 2), Vec::Ones(3), 1), DimensionError);
  }
}

TEST_CASE("doubly_stochastic_transform") {
  RowStochasticMatrix m(mat2(0.5, 0.5, 0.25, 0.75));
  Vec w(2);
  w << 1, 2;

  SUBCASE("worked example at mu = 1") {
    const Mat t = doubly_stochastic_transform(m, w, 1.0);
    CHECK(t(0, 0) == doctest::Approx(0.5));
    CHECK(t(0, 1) == doctest::Approx(0.5));
    CHECK(t(1, 0) == doctest::Approx(0.5));
    CHECK(t(1, 1) == doctest::Approx(0.5));
  }
  SUBCASE("mu = 0 returns the identity") {
    CHECK((doubly_stochastic_transform(m, w, 0.0) - Mat::Identity(2, 2)).norm() == 0.0);
  }
  SUBCASE("doubly stochastic input with unit weights is unchanged at mu = 1") {
    RowStochasticMatrix ds(mat2(0.5, 0.5, 0.5, 0.5));
    const Mat t = doubly_stochastic_transform(ds, Vec::Ones(2), 1.0);
    CHECK((t - ds.weights()).lpNorm<Eigen::Infinity>() < 1e-15);
  }
  SUBCASE("mu out of range") {
    CHECK_THROWS_AS(doubly_stochastic_transform(m, w, 2.5), ParameterError);
    CHECK_THROWS_AS(doubly_stochastic_transform(m, w, -0.1), ParameterError);
  }
  SUBCASE("non-eigenvector weights are a precondition error") {
    Vec bad(2);
    bad << 2, 1;
    CHECK_THROWS_AS(doubly_stochastic_transform(m, bad, 0.5), PreconditionError);
  }
}

TEST_CASE("doubly_stochastic_transform properties on random instances") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 8));
    RowStochasticMatrix m(random_row_stochastic(rng, n, 0.05, 0.9));
    const Vec q = m.pf_vector();
    double cap = 0.0;
    for (int i = 0; i < n; ++i) cap = std::max(cap, (1.0 - m.entry(i, i)) * q[i]);
    const double mu = rng.uniform(0.0, 1.0) / cap;
    const Mat t = doubly_stochastic_transform(m, q, mu);

    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(t.row(i).sum() - 1.0) <= 1e-12);
      CHECK(std::abs(t.col(i).sum() - 1.0) <= 1e-12);
    }
    CHECK(t.minCoeff() >= -1e-15);
    if (mu < 1.0 / cap) CHECK(t.diagonal().minCoeff() > 0.0);

    // Consensus states stay fixed blockwise.
    const int block = 2;
    Vec v = rng.uniform_vec(block, -3.0, 3.0);
    Vec consensus(n * block);
    for (int i = 0; i < n; ++i) consensus.segment(i * block, block) = v;
    CHECK((mix(t, consensus, block) - consensus).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("averagedness_check") {
  SUBCASE("doubly stochastic matrix is 1/2-averaged") {
    const Mat a = mat2(0.5, 0.5, 0.5, 0.5);
    const Vec q = Vec::Constant(2, 1.0 / std::sqrt(2.0));
    const auto res = averagedness_check(a, q, 0.5, 1000, 42);
    CHECK(res.holds);
    CHECK(res.min_slack >= -1e-10);
  }
  SUBCASE("identity is averaged for any eta") {
    const auto res = averagedness_check(Mat::Identity(3, 3), Vec::Ones(3), 0.25, 200, 1);
    CHECK(res.holds);
  }
  SUBCASE("swap matrix is only nonexpansive, not averaged") {
    const Mat a = mat2(0, 1, 1, 0);
    const Vec q = Vec::Constant(2, 1.0 / std::sqrt(2.0));
    const auto res = averagedness_check(a, q, 0.5, 1000, 42);
    CHECK_FALSE(res.holds);
    // The antisymmetric pair x = (1,-1), y = 0 violates the inequality:
    // equality on the left, strictly negative correction on the right.
    CHECK(res.min_slack < -1e-3);
  }
  SUBCASE("eta outside (0,1) is a parameter error") {
    CHECK_THROWS_AS(averagedness_check(Mat::Identity(2, 2), Vec::Ones(2), 1.0, 10, 0), ParameterError);
  }
}

TEST_CASE("averagedness holds at eta = 1 - min self-loop with the PF weights") {
  Rng rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_int(0, 7));
    RowStochasticMatrix m(random_row_stochastic(rng, n, 0.05, 0.9));
    const double eta = std::max(1.0 - m.min_self_loop(), 1e-6);
    const auto res = averagedness_check(m.weights(), m.pf_vector(), eta, 500, rng.next_u64());
    CHECK(res.holds);
  }
}

TEST_CASE("nonexpansiveness in the PF-weighted norm") {
  Rng rng(555);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_int(0, 7));
    RowStochasticMatrix m(random_row_stochastic(rng, n, 0.05, 0.9));
    const Vec q = m.pf_vector();
    for (int s = 0; s < 100; ++s) {
      const Vec d = rng.uniform_vec(n, -1.0, 1.0);
      const Vec ad = m.weights() * d;
      const double lhs = std::sqrt(ad.cwiseProduct(q.cwiseProduct(ad)).sum());
      const double rhs = std::sqrt(d.cwiseProduct(q.cwiseProduct(d)).sum());
      CHECK(lhs <= rhs + 1e-12);
    }
  }
}

TEST_CASE("renormalize_rows") {
  Mat m = mat2(0.5, 0.5001, 0.25, 0.75);
  const Mat r = renormalize_rows(m);
  CHECK(std::abs(r.row(0).sum() - 1.0) < 1e-15);
  CHECK(std::abs(r.row(1).sum() - 1.0) < 1e-15);
  CHECK_THROWS_AS(renormalize_rows(Mat::Zero(2, 2)), ParameterError);
}

TEST_CASE("matrix CSV round trip") {
  const Mat m = mat2(0.5, 0.5, 0.25, 0.75);
  const std::string path = "test_matrix_roundtrip.csv";
  write_csv_matrix(path, m);
  const Mat back = read_csv_matrix(path);
  CHECK((m - back).lpNorm<Eigen::Infinity>() == 0.0);
  std::remove(path.c_str());
}
