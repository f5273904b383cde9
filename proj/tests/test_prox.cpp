#include "netgame/prox.hpp"

#include "netgame/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace netgame;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("box projection") {
  const ProximalMap box = make_box_map(Vec::Zero(2), Vec::Ones(2));
  const Vec p = prox_eval(box, v2(1.5, -0.2), 1.0);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
  CHECK(subgradient_residual(box, p, v2(1.5, -0.2), 1.0) == 0.0);
}

TEST_CASE("box factory validates bounds") {
  CHECK_THROWS_AS(make_box_map(Vec::Ones(2), Vec::Zero(2)), ParameterError);
  CHECK_THROWS_AS(make_box_map(Vec::Zero(2), Vec::Ones(3)), DimensionError);
}

TEST_CASE("fj prox reproduces the stubborn update") {
  // mu = 0.5, anchor 0, penalty weight 2: prox at z = 1 is
  // (1 - mu) x0 + mu z = 0.5.
  const ProximalMap fj = make_fj_map(Vec::Zero(1), 0.5, Vec::Zero(1), Vec::Ones(1));
  const Vec p = prox_eval(fj, Vec::Ones(1), 1.0);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-14));

  SUBCASE("grid oracle agrees across lambda") {
    Rng rng(5);
    for (int t = 0; t < 25; ++t) {
      const Vec z = rng.uniform_vec(1, -2.0, 3.0);
      const double lambda = rng.uniform(0.1, 3.0);
      const Vec mine = prox_eval(fj, z, lambda);
      const Vec ref = oracles::grid_prox(fj, z, lambda);
      CHECK((mine - ref).lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }
  SUBCASE("mu = 1 ignores the anchor") {
    const ProximalMap degroot = make_fj_map(Vec::Zero(1), 1.0, Vec::Zero(1), Vec::Ones(1));
    CHECK(prox_eval(degroot, Vec::Constant(1, 0.7), 1.0)[0] == doctest::Approx(0.7));
  }
  SUBCASE("mu outside (0,1] rejected") {
    CHECK_THROWS_AS(make_fj_map(Vec::Zero(1), 0.0, Vec::Zero(1), Vec::Ones(1)), ParameterError);
    CHECK_THROWS_AS(make_fj_map(Vec::Zero(1), 1.5, Vec::Zero(1), Vec::Ones(1)), ParameterError);
  }
}

TEST_CASE("l1 soft thresholding") {
  const ProximalMap l1 = make_l1_map(3, 1.0);
  Vec z(3);
  z << 2, -0.5, 0;
  const Vec p = prox_eval(l1, z, 1.0);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == 0.0);
  CHECK(p[2] == 0.0);

  SUBCASE("optimality certificate at the prox") {
    CHECK(subgradient_residual(l1, p, z, 1.0) <= 1e-12);
  }
  SUBCASE("unthresholded candidate has positive residual") {
    Vec small(3);
    small << 0.3, -0.2, 0.1;
    CHECK(subgradient_residual(l1, small, small, 1.0) > 0.1);
  }
  SUBCASE("grid oracle agrees") {
    Rng rng(6);
    const ProximalMap scalar = make_l1_map(1, 0.7);
    for (int t = 0; t < 25; ++t) {
      const Vec zz = rng.uniform_vec(1, -3.0, 3.0);
      const double lambda = rng.uniform(0.2, 2.0);
      CHECK((prox_eval(scalar, zz, lambda) - oracles::grid_prox(scalar, zz, lambda))
                .lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }
  SUBCASE("attached box clamps after thresholding") {
    const ProximalMap boxed = make_l1_map(0.5, Vec::Constant(1, 0.0), Vec::Constant(1, 0.4));
    CHECK(prox_eval(boxed, Vec::Constant(1, 2.0), 1.0)[0] == doctest::Approx(0.4));
    CHECK(subgradient_residual(boxed, Vec::Constant(1, 0.4), Vec::Constant(1, 2.0), 1.0) == 0.0);
  }
}

TEST_CASE("least_squares_l1 inner solve") {
  Rng rng(11);
  Mat b(6, 2);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 2; ++c) b(r, c) = rng.normal();
  Vec y(6);
  for (int i = 0; i < 6; ++i) y[i] = rng.normal();
  const ProximalMap map = make_least_squares_l1_map(b, y, 0.5, 1e-10);

  SUBCASE("certificate at the inner solution") {
    const Vec z = v2(0.3, -0.8);
    for (double lambda : {0.25, 1.0, 3.0}) {
      const Vec p = prox_eval(map, z, lambda);
      CHECK(subgradient_residual(map, p, z, lambda) <= 1e-10);
    }
  }
  SUBCASE("iteration cap raises with last iterate attached") {
    ProximalMap strict = map;
    strict.inner_max_iter = 2;
    try {
      prox_eval(strict, v2(5.0, -4.0), 1.0);
      FAIL("expected IterationLimitError");
    } catch (const IterationLimitError& err) {
      CHECK(err.last_iterate.size() == 2);
      CHECK(err.residual > 0.0);
    }
  }
  SUBCASE("shape validation") {
    CHECK_THROWS_AS(make_least_squares_l1_map(Mat::Ones(3, 2), Vec::Ones(4), 1.0), DimensionError);
  }
}

TEST_CASE("block_prox") {
  std::vector<ProximalMap> maps;
  maps.push_back(make_box_map(Vec::Zero(1), Vec::Ones(1)));
  maps.push_back(make_box_map(Vec::Zero(1), Vec::Ones(1)));
  const Vec out = block_prox(maps, v2(2.0, -1.0));
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.0);

  SUBCASE("identity maps leave the input untouched") {
    std::vector<ProximalMap> ids{make_identity_map(2), make_identity_map(2)};
    Vec z(4);
    z << 9, -3, 0.5, 2;
    CHECK((block_prox(ids, z) - z).norm() == 0.0);
  }
  SUBCASE("mixed blocks concatenate the per-map answers") {
    std::vector<ProximalMap> mixed;
    mixed.push_back(make_fj_map(Vec::Zero(1), 0.5, Vec::Zero(1), Vec::Ones(1)));
    mixed.push_back(make_box_map(Vec::Zero(1), Vec::Ones(1)));
    const Vec out2 = block_prox(mixed, v2(1.0, 2.0));
    CHECK(out2[0] == doctest::Approx(0.5));
    CHECK(out2[1] == 1.0);
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(block_prox(maps, Vec::Ones(3)), DimensionError);
    CHECK_THROWS_AS(block_prox(maps, Vec::Ones(2), {1.0}), DimensionError);
  }
}

TEST_CASE("firm nonexpansiveness of every catalogued kind") {
  Rng rng(13);
  std::vector<ProximalMap> maps;
  maps.push_back(make_box_map(v2(-1, 0), v2(0.5, 2)));
  maps.push_back(make_fj_map(v2(0.2, 0.8), 0.3, Vec::Zero(2), Vec::Ones(2)));
  maps.push_back(make_l1_map(2, 0.8));
  {
    Mat b(5, 2);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 2; ++c) b(r, c) = rng.normal();
    Vec y(5);
    for (int r = 0; r < 5; ++r) y[r] = rng.normal();
    maps.push_back(make_least_squares_l1_map(b, y, 0.3, 1e-11));
  }

  for (const auto& map : maps) {
    const int pairs = map.kind == ProxKind::least_squares_l1 ? 100 : 1000;
    for (int t = 0; t < pairs; ++t) {
      const Vec z1 = rng.uniform_vec(2, -3.0, 3.0);
      const Vec z2 = rng.uniform_vec(2, -3.0, 3.0);
      const Vec p1 = prox_eval(map, z1, 1.0);
      const Vec p2 = prox_eval(map, z2, 1.0);
      CHECK((p1 - p2).squaredNorm() <= (p1 - p2).dot(z1 - z2) + 1e-10);
    }
  }
}

TEST_CASE("prox output stays in the domain") {
  Rng rng(14);
  const ProximalMap fj = make_fj_map(v2(0.5, 0.5), 0.4, Vec::Zero(2), Vec::Ones(2));
  for (int t = 0; t < 200; ++t) {
    const Vec p = prox_eval(fj, rng.uniform_vec(2, -4.0, 4.0), rng.uniform(0.1, 2.0));
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.maxCoeff() <= 1.0);
  }
}

TEST_CASE("custom maps evaluate but expose no subdifferential") {
  const ProximalMap custom =
      make_custom_map(1, [](const Vec& z, double) { return Vec(0.5 * z); });
  CHECK(prox_eval(custom, Vec::Ones(1), 1.0)[0] == 0.5);
  CHECK_THROWS_AS(subgradient_residual(custom, Vec::Ones(1), Vec::Ones(1), 1.0), UnsupportedKindError);
}

TEST_CASE("prox_eval rejects bad inputs") {
  const ProximalMap box = make_box_map(Vec::Zero(1), Vec::Ones(1));
  CHECK_THROWS_AS(prox_eval(box, Vec::Ones(2), 1.0), DimensionError);
  CHECK_THROWS_AS(prox_eval(box, Vec::Ones(1), 0.0), ParameterError);
  Vec nan1 = Vec::Constant(1, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(prox_eval(box, nan1, 1.0), ParameterError);
}
