#include "doctest.h"

#include "deepdisagg/disaggregator.hpp"
#include "planted.hpp"

#include <algorithm>
#include <cstring>

using namespace deepdisagg;

namespace {

ApplianceModel make_model(const std::string& id, std::vector<Matrix> layers, bool unit = false) {
  std::vector<LayerDictionary> wrapped;
  for (auto& m : layers) wrapped.push_back(LayerDictionary{std::move(m), unit});
  ApplianceModel model;
  model.appliance_id = id;
  model.dictionary = DeepDictionary(std::move(wrapped));
  return model;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

Matrix basis(Index m, Index i) {
  Matrix e = Matrix::Zero(m, 1);
  e(i, 0) = 1.0;
  return e;
}

}  // namespace

TEST_CASE("effective dictionary is the chained product") {
  const Matrix A = oracle::random_matrix(6, 4, 1);
  const Matrix B = oracle::random_matrix(4, 3, 2);
  const auto model = make_model("a", {A, B});
  const auto raw = effective_dictionary(model, false);
  CHECK(raw.matrix.isApprox(oracle::naive_product(A, B), 1e-13));
  CHECK_FALSE(raw.unit_columns);

  const auto unit = effective_dictionary(model, true);
  for (Index c = 0; c < 3; ++c) {
    CHECK(std::abs(unit.matrix.col(c).norm() - 1.0) <= kUnitNormTolerance);
    CHECK(unit.matrix.col(c).isApprox(raw.matrix.col(c) / raw.matrix.col(c).norm(), 1e-13));
  }

  const auto single = make_model("b", {A});
  CHECK(effective_dictionary(single, false).matrix == A);
}

TEST_CASE("orthogonal appliances separate") {
  const Index m = 6;
  const auto a = make_model("a", {basis(m, 0)}, true);
  const auto b = make_model("b", {basis(m, 1)}, true);
  SignalMatrix agg{3.0 * basis(m, 0) + 5.0 * basis(m, 1), 60.0};
  DisaggConfig cfg;
  cfg.lambda = 1e-4;
  const auto res = disaggregate(agg, {a, b}, cfg);
  CHECK((res.per_appliance_estimate.at("a").data - 3.0 * basis(m, 0)).cwiseAbs().maxCoeff() <= 1e-2);
  CHECK((res.per_appliance_estimate.at("b").data - 5.0 * basis(m, 1)).cwiseAbs().maxCoeff() <= 1e-2);
}

TEST_CASE("zero aggregate gives zero estimates") {
  const auto a = make_model("a", {planted::abs_unit(8, 4, 1)}, true);
  const auto b = make_model("b", {planted::abs_unit(8, 5, 2), planted::abs_unit(5, 3, 3)}, true);
  const auto res = disaggregate(SignalMatrix{Matrix::Zero(8, 7), 1.0}, {a, b});
  for (const auto& [id, est] : res.per_appliance_estimate) CHECK(est.data.isZero(0.0));
  CHECK(res.residual == 0.0);
}

TEST_CASE("a single model reduces to one non-negative lasso") {
  const Matrix D = planted::abs_unit(10, 6, 4);
  const Matrix X = D * planted::sparse_codes(6, 12, 0.4, 5);
  const auto model = make_model("only", {D}, true);
  DisaggConfig cfg;
  const auto res = disaggregate(SignalMatrix{X, 1.0}, {model}, cfg);
  const auto alone = ista_solve(D, X, cfg.lambda, cfg.ista);
  CHECK(res.codes.at("only").matrix.isApprox(alone.matrix, 1e-12));
  CHECK(res.per_appliance_estimate.at("only").data.isApprox(D * alone.matrix, 1e-12));
}

TEST_CASE("estimates plus residual reproduce the aggregate exactly") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = make_model("a", {planted::abs_unit(12, 6, seed)}, true);
    const auto b = make_model("b", {planted::abs_unit(12, 8, seed + 1), planted::abs_unit(8, 4, seed + 2)}, true);
    const auto c = make_model("c", {planted::abs_unit(12, 5, seed + 3)}, true);
    const Matrix X = oracle::random_matrix(12, 9, seed + 4).cwiseAbs() * 123.456;
    const auto res = disaggregate(SignalMatrix{X, 1.0}, {c, a, b});
    const Matrix S = sum_of_estimates(res);
    const Matrix total = S + res.residual_matrix;
    for (Index i = 0; i < X.size(); ++i) {
      const double s = S.data()[i];
      const double t = X.data()[i];
      const double plain = t - s;
      if (s + plain == t) {
        CHECK(total.data()[i] == t);
      } else {
        // Some (s, t) pairs admit no double r with s + r == t; one rounding
        // of the addition is then the best possible.
        CHECK(std::abs(total.data()[i] - t) <= 2 * std::numeric_limits<double>::epsilon() * std::abs(s));
      }
    }
    CHECK(res.residual == doctest::Approx(res.residual_matrix.norm()).epsilon(1e-12));
  }
}

TEST_CASE("exact_residual") {
  Matrix t(1, 4), s(1, 4);
  t << 50.0, 0.1 + 0.2, 3.0, 1e300;
  s << 50.0 - 1e-13, 0.1, 1e-20, 1.0;
  const Matrix r = exact_residual(t, s);
  CHECK(bit_equal(s + r, t));
  // 86.499... + r lands on a grid far coarser than the bits of 0.00684...
  Matrix t2(1, 1), s2(1, 1);
  t2 << 0.0068457896866514897;
  s2 << 86.499156547726386;
  const Matrix r2 = exact_residual(t2, s2);
  CHECK(r2(0, 0) == t2(0, 0) - s2(0, 0));
}

TEST_CASE("joint objective beats the zero code") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = make_model("a", {planted::abs_unit(10, 4, seed)}, true);
    const auto b = make_model("b", {planted::abs_unit(10, 5, seed + 7)}, true);
    const Matrix X = oracle::random_matrix(10, 6, seed + 9).cwiseAbs();
    DisaggConfig cfg;
    const auto res = disaggregate(SignalMatrix{X, 1.0}, {a, b}, cfg);
    Matrix stacked(10, 9);
    stacked << effective_dictionary(a).matrix, effective_dictionary(b).matrix;
    Matrix code(9, 6);
    code << res.codes.at("a").matrix, res.codes.at("b").matrix;
    CHECK(joint_objective(X, stacked, code, cfg.lambda) <= joint_objective(X, stacked, Matrix::Zero(9, 6), cfg.lambda));
    CHECK(code.minCoeff() >= 0.0);
  }
}

TEST_CASE("model order does not change the result") {
  std::vector<ApplianceModel> models{
      make_model("kettle", {planted::abs_unit(8, 4, 1)}, true),
      make_model("dryer", {planted::abs_unit(8, 6, 2), planted::abs_unit(6, 3, 3)}, true),
      make_model("fridge", {planted::abs_unit(8, 5, 4)}, true)};
  const SignalMatrix agg{oracle::random_matrix(8, 5, 5).cwiseAbs(), 1.0};
  const auto ref = disaggregate(agg, models);
  std::sort(models.begin(), models.end(),
            [](const auto& x, const auto& y) { return x.appliance_id > y.appliance_id; });
  do {
    const auto res = disaggregate(agg, models);
    for (const auto& [id, est] : ref.per_appliance_estimate)
      CHECK(bit_equal(res.per_appliance_estimate.at(id).data, est.data));
    CHECK(bit_equal(res.residual_matrix, ref.residual_matrix));
  } while (std::prev_permutation(models.begin(), models.end(),
                                 [](const auto& x, const auto& y) { return x.appliance_id < y.appliance_id; }));
}

TEST_CASE("disaggregation rejects bad input") {
  const auto a = make_model("a", {planted::abs_unit(8, 4, 1)}, true);
  CHECK_THROWS_AS(disaggregate(SignalMatrix{Matrix::Zero(7, 3), 1.0}, {a}), std::invalid_argument);
  CHECK_THROWS_AS(disaggregate(SignalMatrix{Matrix::Zero(8, 3), 1.0}, {a, a}), std::invalid_argument);
  CHECK_THROWS(disaggregate(SignalMatrix{Matrix::Zero(8, 3), 1.0}, {}));
}
