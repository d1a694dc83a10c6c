#include "doctest.h"

#include "deepdisagg/deep_greedy.hpp"
#include "planted.hpp"

using namespace deepdisagg;

TEST_CASE("one-layer greedy is the shallow learner") {
  const Matrix X = planted::abs_unit(12, 6, 1) * planted::sparse_codes(6, 50, 0.3, 2);
  GreedyConfig g;
  g.layer_widths = {6};
  g.per_layer_iters = 12;
  g.seed = 5;
  ShallowConfig s;
  s.n_atoms = 6;
  s.outer_iters = 12;
  s.seed = 5;
  const auto a = train_greedy(X, g);
  const auto b = learn_shallow(X, s);
  REQUIRE(a.dictionary.n_layers() == 1);
  CHECK(a.dictionary.layers[0].matrix == b.dictionary.matrix);
  CHECK(a.code.matrix == b.code.matrix);
}

TEST_CASE("two-layer greedy fits a planted deep factorization") {
  const Matrix D1 = planted::abs_unit(32, 20, 3);
  const Matrix D2 = planted::abs_unit(20, 12, 4);
  const Matrix X = D1 * D2 * planted::sparse_codes(12, 200, 0.25, 5);
  GreedyConfig cfg;
  cfg.layer_widths = {20, 12};
  cfg.per_layer_iters = 60;
  cfg.seed = 1;
  const auto res = train_greedy(X, cfg);
  CHECK(planted::relative_residual(X, res.dictionary.chained_product() * res.code.matrix) <= 0.1);
  CHECK(validate(res.dictionary).empty());
  CHECK(validate(res.code).empty());
  REQUIRE(res.intermediate_codes.size() == 1);
  CHECK(res.intermediate_codes[0].rows() == 20);
}

TEST_CASE("greedy on zero data") {
  GreedyConfig cfg;
  cfg.layer_widths = {6, 3};
  cfg.per_layer_iters = 4;
  const auto res = train_greedy(Matrix::Zero(8, 10), cfg);
  CHECK(res.code.matrix.isZero(0.0));
  CHECK(validate(res.dictionary).empty());
}

TEST_CASE("deep_objective") {
  const Matrix X = oracle::random_matrix(5, 4, 1);
  const std::vector<Matrix> eye{Matrix::Identity(5, 5), Matrix::Identity(5, 5)};
  CHECK(deep_objective(X, eye, X, 0.0) == 0.0);
  CHECK(deep_objective(X, eye, Matrix::Zero(5, 4), 0.3) == doctest::Approx(oracle::frob_sq(X)).epsilon(1e-14));

  const std::vector<Matrix> layers{oracle::random_matrix(5, 4, 2), oracle::random_matrix(4, 3, 3)};
  const Matrix Z = oracle::random_matrix(3, 4, 4);
  const double expected =
      oracle::lasso_objective(oracle::naive_product(layers[0], layers[1]), X, Z, 0.25);
  CHECK(deep_objective(X, layers, Z, 0.25) == doctest::Approx(expected).epsilon(1e-12));
  std::vector<LayerDictionary> wrapped{{layers[0], false}, {layers[1], false}};
  CHECK(deep_objective(X, wrapped, Z, 0.25) == deep_objective(X, layers, Z, 0.25));
}

TEST_CASE("first layer does not depend on deeper widths") {
  const Matrix X = planted::abs_unit(16, 10, 7) * planted::sparse_codes(10, 60, 0.3, 8);
  GreedyConfig a;
  a.layer_widths = {10, 6};
  a.per_layer_iters = 8;
  a.seed = 2;
  GreedyConfig b = a;
  b.layer_widths = {10, 4};
  const auto ra = train_greedy(X, a);
  const auto rb = train_greedy(X, b);
  CHECK(ra.dictionary.layers[0].matrix == rb.dictionary.layers[0].matrix);
  CHECK(ra.intermediate_codes[0] == rb.intermediate_codes[0]);
}

TEST_CASE("greedy half-steps are non-increasing within each layer") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Matrix X = planted::abs_unit(16, 10, seed) * planted::sparse_codes(10, 40, 0.3, seed + 1) +
                     0.01 * oracle::random_matrix(16, 40, seed + 2).cwiseAbs();
    GreedyConfig cfg;
    cfg.layer_widths = {10, 6, 3};
    cfg.per_layer_iters = 10;
    cfg.seed = seed;
    const auto res = train_greedy(X, cfg);
    for (const auto& h : res.trace) {
      if (h.kind == StepKind::normalize) continue;
      CHECK(h.objective_after <= h.objective_before + 1e-9 * std::max(1.0, h.objective_before));
    }
  }
}

TEST_CASE("greedy config validation") {
  GreedyConfig cfg;
  CHECK_THROWS(train_greedy(Matrix::Ones(4, 4), cfg));
  cfg.layer_widths = {3, 0};
  CHECK_THROWS(train_greedy(Matrix::Ones(6, 8), cfg));
  cfg.layer_widths = {3};
  CHECK_THROWS(train_greedy(Matrix(0, 0), cfg));
}
