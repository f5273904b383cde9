#include "netgame/models.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace netgame;

TEST_CASE("build_friedkin_johnsen") {
  Rng rng(1);
  RowStochasticMatrix matrix(random_row_stochastic(rng, 4, 0.3, 0.8));

  FjProfile profile;
  profile.topics = 2;
  profile.initial_opinions = rng.uniform_vec(8, 0.0, 1.0);
  profile.stubbornness = {1.0, 1.0, 1.0, 1.0};

  SUBCASE("mu = 1 for everyone is pure projected averaging") {
    GameSpec game = build_friedkin_johnsen(profile, matrix);
    const Vec x = rng.uniform_vec(8, 0.0, 1.0);
    const Vec mixed = mix(game.matrix, x, 2);
    CHECK((step_sync(game, x) - mixed.cwiseMax(0.0).cwiseMin(1.0)).lpNorm<Eigen::Infinity>() < 1e-15);
  }
  SUBCASE("single fully-self-reliant agent is pinned at its start") {
    FjProfile solo;
    solo.topics = 1;
    solo.initial_opinions = Vec::Constant(1, 0.37);
    solo.stubbornness = {0.6};
    GameSpec game = build_friedkin_johnsen(solo, RowStochasticMatrix(Mat::Ones(1, 1)));
    CHECK(step_sync(game, solo.initial_opinions)[0] == doctest::Approx(0.37));
  }
  SUBCASE("zero stubbornness is rejected") {
    profile.stubbornness = {0.5, 0.0, 0.5, 0.5};
    CHECK_THROWS_AS(build_friedkin_johnsen(profile, matrix), ParameterError);
  }
  SUBCASE("opinions outside [0,1] are rejected") {
    profile.initial_opinions[0] = 1.5;
    CHECK_THROWS_AS(build_friedkin_johnsen(profile, matrix), ParameterError);
  }
}

TEST_CASE("fj games have a unique equilibrium reached from anywhere") {
  Rng rng(2);
  FjProfile profile;
  profile.topics = 3;
  profile.initial_opinions = rng.uniform_vec(30, 0.0, 1.0);
  for (int i = 0; i < 10; ++i) profile.stubbornness.push_back(i < 5 ? 0.5 : 0.1);
  GameSpec game =
      build_friedkin_johnsen(profile, RowStochasticMatrix(random_row_stochastic(rng, 10, 0.3, 0.8)));

  RunOptions opts;
  opts.tol = 1e-11;
  Vec reference;
  for (int start = 0; start < 20; ++start) {
    const TrajectoryRecord rec = run_sync(game, rng.uniform_vec(30, 0.0, 1.0), opts);
    REQUIRE(rec.converged);
    if (start == 0)
      reference = rec.iterates.back();
    else
      CHECK((rec.iterates.back() - reference).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("build_degroot_bounded") {
  Rng rng(3);
  std::vector<RowStochasticMatrix> mats;
  mats.emplace_back(random_row_stochastic(rng, 3, 0.2, 0.7));

  SUBCASE("all-unit boxes give a consensus game") {
    DegrootGame game = build_degroot_bounded({{0, 1}, {0, 1}, {0, 1}}, mats);
    CHECK(game.maps.size() == 3);
    CHECK(verify_pnwe(game.maps, game.matrices, Vec::Constant(3, 0.42), 1e-12));
  }
  SUBCASE("a point box pins the agent") {
    DegrootGame game = build_degroot_bounded({{0.3, 0.3}, {0, 1}, {0, 1}}, mats);
    Vec x(3);
    x << 0.9, 0.5, 0.5;
    const Vec maps_out = block_prox(game.maps, x);
    CHECK(maps_out[0] == 0.3);
  }
  SUBCASE("empty box is rejected") {
    CHECK_THROWS_AS(build_degroot_bounded({{0.5, 0.4}, {0, 1}, {0, 1}}, mats), ParameterError);
  }
}

TEST_CASE("make_degroot_tv_instance designs a common equilibrium") {
  for (std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
    const DegrootTvInstance inst = make_degroot_tv_instance(seed);
    REQUIRE(inst.matrices.size() == 3);
    std::vector<RowStochasticMatrix> mats;
    for (const Mat& m : inst.matrices) {
      CHECK(validate_standing_assumption(m).passed);
      mats.emplace_back(m);
    }
    DegrootGame game = build_degroot_bounded(inst.boxes, std::move(mats));
    CHECK(verify_pnwe(game.maps, game.matrices, inst.designed_equilibrium, 1e-12));
    CHECK(inst.designed_equilibrium[0] == 0.25);
    CHECK(inst.designed_equilibrium[7] == 0.75);
  }
}

TEST_CASE("build_distributed_lasso") {
  SUBCASE("two-agent path graph Laplacian") {
    LassoInstance instance;
    instance.tau = 0.5;
    Rng rng(5);
    for (int i = 0; i < 2; ++i) {
      Mat b(4, 2);
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 2; ++c) b(r, c) = rng.normal();
      instance.data_blocks.push_back(b);
      instance.observations.push_back(rng.uniform_vec(4, -1.0, 1.0));
    }
    instance.laplacian = (Mat(2, 2) << 1, -1, -1, 1).finished();

    LassoGame game = build_distributed_lasso(instance, RowStochasticMatrix((Mat(2, 2) << 0.5, 0.5, 0.5, 0.5).finished()));
    CHECK(game.game.n_agents() == 2);
    CHECK(game.constraints.n_constraints() == 8);  // equality pair of L (x) I_2

    // L (x) I stacked against its negation.
    const Mat dense = game.constraints.dense();
    CHECK((dense.topRows(4) + dense.bottomRows(4)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(dense(0, 0) == 1.0);
    CHECK(dense(0, 2) == -1.0);
  }
  SUBCASE("a single agent has no effective coupling: the game is the centralized fit") {
    Rng rng(6);
    Mat b(12, 2);
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 2; ++c) b(r, c) = rng.normal();
    const Vec y = rng.uniform_vec(12, -2.0, 2.0);

    LassoInstance instance;
    instance.tau = 0.8;
    instance.data_blocks = {b};
    instance.observations = {y};
    instance.laplacian = Mat::Zero(1, 1);
    LassoGame game = build_distributed_lasso(instance, RowStochasticMatrix(Mat::Ones(1, 1)));
    CHECK(game.constraints.dense().lpNorm<Eigen::Infinity>() == 0.0);

    RunOptions opts;
    opts.tol = 1e-11;
    opts.max_iter = 200000;
    const TrajectoryRecord rec = run_sync(game.game, Vec::Zero(2), opts);
    REQUIRE(rec.converged);
    const Vec oracle = centralized_lasso_oracle(b, y, 0.8, 1e-12);
    CHECK((rec.iterates.back() - oracle).lpNorm<Eigen::Infinity>() < 1e-7);
  }
  SUBCASE("bad Laplacians are rejected") {
    LassoInstance instance;
    instance.data_blocks = {Mat::Ones(2, 1)};
    instance.observations = {Vec::Ones(2)};
    instance.laplacian = Mat::Ones(1, 1);  // row sum 1, not 0
    CHECK_THROWS_AS(build_distributed_lasso(instance, RowStochasticMatrix(Mat::Ones(1, 1))),
                    ParameterError);
  }
}

TEST_CASE("make_lasso_synthesis") {
  const LassoSynthesis synth = make_lasso_synthesis(5, 6, 100, 2.8, 1.0, 42);
  CHECK(synth.instance.n_agents() == 5);
  CHECK(synth.instance.dim() == 6);
  CHECK(synth.instance.stacked_data().rows() == 100);
  CHECK(synth.instance.stacked_observations().size() == 100);
  CHECK(validate_standing_assumption(synth.matrix.weights()).passed);
  CHECK(synth.matrix.weights().diagonal().minCoeff() >= 0.1);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(synth.instance.laplacian.row(i).sum()) < 1e-12);
  CHECK(synth.noise_std.minCoeff() >= 0.0);
  CHECK(synth.noise_std.maxCoeff() <= 2.8);

  SUBCASE("same seed reproduces the draw") {
    const LassoSynthesis again = make_lasso_synthesis(5, 6, 100, 2.8, 1.0, 42);
    CHECK((again.x_true - synth.x_true).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((again.instance.stacked_observations() - synth.instance.stacked_observations())
              .lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("centralized_lasso_oracle") {
  Rng rng(8);
  Mat b(12, 3);
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 3; ++c) b(r, c) = rng.normal();
  const Vec x_star = (Vec(3) << 1.0, 0.0, -2.0).finished();
  const Vec y = b * x_star;

  SUBCASE("tau = 0 solves the normal equations") {
    const Vec sol = centralized_lasso_oracle(b, y, 0.0, 1e-11);
    const Vec ls = (b.transpose() * b).ldlt().solve(b.transpose() * y);
    CHECK((sol - ls).lpNorm<Eigen::Infinity>() < 1e-8);
  }
  SUBCASE("zero observations give the zero solution") {
    const Vec sol = centralized_lasso_oracle(b, Vec::Zero(12), 1.0, 1e-12);
    CHECK(sol.lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("agrees with sign-pattern enumeration on small instances") {
    for (int trial = 0; trial < 10; ++trial) {
      Mat bt(8, 3);
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 3; ++c) bt(r, c) = rng.normal();
      Vec yt(8);
      for (int r = 0; r < 8; ++r) yt[r] = rng.normal();
      const double tau = rng.uniform(0.1, 2.0);
      const Vec mine = centralized_lasso_oracle(bt, yt, tau, 1e-12);
      const Vec ref = oracles::lasso_sign_enumeration(bt, yt, tau);
      CHECK((mine - ref).lpNorm<Eigen::Infinity>() < 1e-8);
    }
  }
}

TEST_CASE("lasso consensus objective vs the centralized optimum (reported, not asserted)") {
  // Uniform noise weights and a doubly stochastic communication matrix: the
  // operating point where the consensus equilibrium should track the
  // centralized fit most closely. The ratio is informational.
  Rng rng(77);
  const int n_agents = 4, dim = 3, rows = 48;
  Mat data(rows, dim);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < dim; ++c) data(r, c) = rng.normal();
  Vec x_true(dim);
  for (int c = 0; c < dim; ++c) x_true[c] = rng.normal();
  Vec obs = data * x_true;
  for (int r = 0; r < rows; ++r) obs[r] += 0.5 * rng.normal();  // same sigma for everyone

  LassoInstance instance;
  instance.tau = 1.0;
  const int per = rows / n_agents;
  for (int i = 0; i < n_agents; ++i) {
    instance.data_blocks.push_back(data.middleRows(per * i, per));
    instance.observations.push_back(obs.segment(per * i, per));
  }
  Mat weights = Mat::Constant(n_agents, n_agents, 1.0 / n_agents);
  instance.laplacian = Mat::Identity(n_agents, n_agents) - weights;
  LassoGame game = build_distributed_lasso(instance, RowStochasticMatrix(weights));

  const Vec alpha = Vec::Constant(n_agents, 1.0 / n_agents);
  const GnweParams params = feasible_params(game.game.matrix, game.constraints, alpha);
  GnweRunOptions opts;
  opts.tol = 1e-10;
  opts.max_iter = 400000;
  const TrajectoryRecord rec =
      run_prox_gnwe(game.game, game.constraints, params, Vec::Zero(n_agents * dim),
                    Vec::Zero(game.constraints.n_constraints()), opts);
  REQUIRE(rec.converged);

  auto objective = [&](const Vec& x) {
    double acc = 0.0;
    for (int i = 0; i < n_agents; ++i)
      acc += (instance.data_blocks[i] * x - instance.observations[i]).squaredNorm() +
             instance.tau * x.lpNorm<1>();
    return acc;
  };
  const Vec consensus = rec.iterates.back().segment(0, dim);
  // The consensus game optimality condition aggregates the per-agent l1
  // terms, so compare against the centralized problem with N tau.
  const Vec central = centralized_lasso_oracle(data, obs, n_agents * instance.tau, 1e-11);
  const double ratio = objective(consensus) / objective(central);
  std::printf("[report] lasso consensus objective / centralized optimum = %.6f\n", ratio);
  CHECK(ratio >= 1.0 - 1e-9);  // the centralized point is the minimizer
}

TEST_CASE("mse_curve") {
  Rng rng(9);
  Mat b(10, 2);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 2; ++c) b(r, c) = rng.normal();
  const Vec x_true = (Vec(2) << 0.5, -1.0).finished();
  const Vec y = b * x_true;

  SUBCASE("constant trajectory gives a constant series") {
    Vec state(4);
    state << 1, 2, 3, 4;
    const auto curve = mse_curve({state, state, state}, b, y);
    CHECK(curve.size() == 3);
    CHECK(curve[0] == doctest::Approx(curve[1]));
    CHECK(curve[1] == doctest::Approx(curve[2]));
  }
  SUBCASE("truth everywhere gives zero") {
    Vec state(4);
    state << x_true[0], x_true[1], x_true[0], x_true[1];
    CHECK(mse_curve({state}, b, y)[0] == doctest::Approx(0.0));
  }
  SUBCASE("normalization divides by the first value") {
    Vec far(4), near(4);
    far << 9, 9, 9, 9;
    near << 1, -1, 1, -1;
    const auto curve = mse_curve({far, near}, b, y, true);
    CHECK(curve[0] == doctest::Approx(1.0));
    CHECK(curve[1] < 1.0);
  }
}

TEST_CASE("random_row_stochastic output is always valid") {
  Rng rng(10);
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform_int(0, 14));
    const Mat a = random_row_stochastic(rng, n, 0.05, 0.9);
    CHECK(validate_standing_assumption(a).passed);
  }
}
