#include <Eigen/LU>
#include "doctest.h"
#include "csel/evaluation.hpp"
#include "csel/regression.hpp"
#include "support.hpp"

using namespace csel;
using csel::test::rows_of;
using csel::test::vec;

namespace {

// Normal-equations oracle for leverage scores on full-column-rank A.
VectorXd leverage_by_normal_equations(const MatrixXd& A) {
  const MatrixXd inv = (A.transpose() * A).inverse();
  VectorXd tau(A.rows());
  for (Index i = 0; i < A.rows(); ++i) tau[i] = A.row(i) * inv * A.row(i).transpose();
  return tau;
}

}  // namespace

TEST_SUITE("regression") {

TEST_CASE("solve_least_squares examples") {
  const VectorXd x = solve_least_squares(MatrixXd(MatrixXd::Identity(2, 2)), vec({3, 5}));
  CHECK(x[0] == doctest::Approx(3.0));
  CHECK(x[1] == doctest::Approx(5.0));
  CHECK(solve_least_squares(rows_of({{1}, {1}}), vec({0, 2}))[0] == doctest::Approx(1.0));
  CHECK(solve_least_squares(rows_of({{1}, {2}}), vec({0, 2}))[0] == doctest::Approx(0.8).epsilon(1e-14));
  const VectorXd w = vec({3, 1});
  // weighted mean (3·0 + 1·2)/4
  CHECK(solve_least_squares(rows_of({{1}, {1}}), vec({0, 2}), &w)[0] == doctest::Approx(0.5));
}

TEST_CASE("solve_least_squares rejects bad input and handles rank deficiency") {
  CHECK_THROWS_AS(solve_least_squares(rows_of({{1}, {std::nan("")}}), vec({0, 2})), DataError);
  const VectorXd neg = vec({1, -1});
  CHECK_THROWS_AS(solve_least_squares(rows_of({{1}, {1}}), vec({0, 2}), &neg), DataError);
  CHECK_THROWS_AS(solve_least_squares(rows_of({{1}, {1}}), vec({0, 2, 3})), DataError);
  // two identical columns: minimum-norm solution splits the coefficient evenly
  const VectorXd x = solve_least_squares(rows_of({{1, 1}, {2, 2}}), vec({2, 4}));
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("weighted residual orthogonality") {
  RngStream rng(13, "ortho");
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 5 + static_cast<Index>(rng.below(60));
    const Index d = 1 + static_cast<Index>(rng.below(5));
    const MatrixXd A = test::gaussian(n, d, rng);
    VectorXd b(n), w(n);
    for (Index i = 0; i < n; ++i) {
      b[i] = 3.0 * rng.normal();
      w[i] = rng.uniform() * 4.0;
    }
    const VectorXd x = solve_least_squares(A, b, &w);
    const VectorXd g = A.transpose() * w.asDiagonal() * (A * x - b);
    CHECK(g.norm() <= 1e-6 * A.norm() * b.norm());
  }
}

TEST_CASE("leverage score examples") {
  const VectorXd ones = leverage_scores(MatrixXd(MatrixXd::Identity(3, 3)));
  for (Index i = 0; i < 3; ++i) CHECK(ones[i] == doctest::Approx(1.0));
  const VectorXd third = leverage_scores(rows_of({{1, 0}, {0, 1}, {1, 1}}));
  for (Index i = 0; i < 3; ++i) CHECK(third[i] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  const VectorXd half = leverage_scores(rows_of({{1}, {1}}));
  CHECK(half[0] == doctest::Approx(0.5));
  CHECK(half[1] == doctest::Approx(0.5));
  CHECK(leverage_scores(MatrixXd::Zero(3, 2)) == VectorXd::Zero(3));
}

TEST_CASE("leverage scores sum to the rank and match normal equations") {
  RngStream rng(17, "leverage");
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 1 + static_cast<Index>(rng.below(6));
    const Index n = d + static_cast<Index>(rng.below(40));
    MatrixXd A = test::gaussian(n, d, rng);
    Index rank = d;
    if (d > 1 && trial % 4 == 0) {
      A.col(d - 1) = A.col(0) * 2.0;  // force a rank drop
      rank = d - 1;
    }
    const VectorXd tau = leverage_scores(A);
    CHECK(std::abs(tau.sum() - static_cast<double>(rank)) <= 1e-6);
    for (Index i = 0; i < n; ++i) {
      CHECK(tau[i] >= -1e-9);
      CHECK(tau[i] <= 1.0 + 1e-9);
    }
    if (rank == d) CHECK((tau - leverage_by_normal_equations(A)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("leverage_select examples") {
  RngStream rng(1, "lev");
  const RegressionInstance ident(MatrixXd::Identity(4, 4), vec({1, 2, 3, 4}));
  const WeightedSample s = leverage_select(ident, 8, rng);
  for (const auto& e : s.entries) CHECK(e.weight == doctest::Approx(0.5));
  const RegressionInstance single(rows_of({{2, 1}}), vec({1}));
  for (const auto& e : leverage_select(single, 5, rng).entries) CHECK(e.index == 0);

  const RegressionInstance three(rows_of({{1, 0}, {0, 1}, {1, 1}}), vec({0, 0, 0}));
  RngStream big(2, "lev-freq");
  const WeightedSample many = leverage_select(three, 100000, big);
  std::vector<double> freq(3, 0.0);
  for (const auto& e : many.entries) freq[static_cast<std::size_t>(e.index)] += 1e-5;
  for (double f : freq) CHECK(std::abs(f - 1.0 / 3.0) <= 3.0 / std::sqrt(1e5));
}

TEST_CASE("regression_sample_size") {
  CHECK(regression_sample_size(1, 1.0, 0.1) == static_cast<Index>(std::ceil(8.0 * std::log(10.0))));
  CHECK(regression_sample_size(8, 0.5, 0.1) == 590);
  CHECK_THROWS_AS(regression_sample_size(0, 0.5, 0.1), DataError);
  CHECK_THROWS_AS(regression_sample_size(2, 0.5, 1.0), DataError);
  CHECK_THROWS_AS(regression_sample_size(2, 0.0, 0.1), DataError);
}

TEST_CASE("regression_select hand trace") {
  const RegressionInstance inst(rows_of({{1}, {2}}), vec({0, 2}));
  RegressionSelectConfig cfg;
  cfg.k = 1;
  cfg.lambda = LambdaVector::constant(1, 1.0);
  cfg.sample_count = 20;
  for (int seed = 0; seed < 10; ++seed) {
    RngStream rng(static_cast<std::uint64_t>(seed), "trace");
    const RegressionSelectResult res = regression_select(inst, cfg, rng);
    CHECK(res.plan.clustering.centers.rows[0] == 0);
    CHECK(res.plan.x0[0] == doctest::Approx(0.0));
    CHECK(res.plan.v == VectorXd::Zero(2));
    CHECK(res.plan.phi_lambda == doctest::Approx(1.0));
    CHECK(res.plan.plan.p[0] == 0.0);
    CHECK(res.plan.plan.p[1] == 1.0);
    CHECK(res.plan.labels_read == 1);
    for (const auto& e : res.sample.entries) CHECK(e.index == 1);
  }
}

TEST_CASE("regression_select degenerate and distance-only modes") {
  // duplicate rows per cluster, consistent targets
  const RegressionInstance dup(rows_of({{1, 0}, {1, 0}, {0, 1}, {0, 1}}), vec({2, 2, 3, 3}));
  RegressionSelectConfig cfg;
  cfg.k = 2;
  cfg.lambda = LambdaVector::constant(1, 1.0);
  cfg.sample_count = 4;
  RngStream rng(3, "dup");
  const RegressionSelectResult res = regression_select(dup, cfg, rng);
  CHECK(res.plan.plan.uniform_fallback);
  for (Index i = 0; i < 4; ++i) CHECK(res.plan.plan.p[i] == 0.25);

  const RegressionInstance spread(rows_of({{0}, {-1}, {3}}), vec({0, 5, 1}));
  RegressionSelectConfig inf;
  inf.k = 1;
  inf.lambda = LambdaVector::infinity(1);
  inf.sample_count = 10;
  RngStream rng2(4, "inf");
  const RegressionSelectResult ir = regression_select(spread, inf, rng2);
  CHECK(ir.plan.clustering.centers.rows[0] == 0);
  CHECK(ir.plan.plan.p[0] == 0.0);
  CHECK(ir.plan.plan.p[1] == doctest::Approx(0.25));
  CHECK(ir.plan.plan.p[2] == doctest::Approx(0.75));
  CHECK(std::isinf(ir.plan.phi_lambda));

  RngStream rng3(4, "inf-dup");
  CHECK(regression_select(dup, RegressionSelectConfig{2, 0.5, 0.1, LambdaVector::infinity(2), 4, {}}, rng3)
            .plan.plan.uniform_fallback);

  cfg.k = 5;
  CHECK_THROWS_AS(regression_select(dup, cfg, rng), DataError);
}

TEST_CASE("regression plan invariants on planted data") {
  RngStream rng(5, "reg-plan");
  PlantedRegressionOptions o;
  o.n = 400;
  o.d = 4;
  o.clusters = 5;
  const PlantedRegression pr = planted_regression(o, rng);
  RegressionSelectConfig cfg;
  cfg.k = 5;
  cfg.lambda = LambdaVector::constant(1, pr.lipschitz);
  RngStream sel(6, "reg-plan-sel");
  const RegressionSelectResult res = regression_select(pr.instance, cfg, sel);
  CHECK(std::abs(res.plan.plan.p.sum() - 1.0) <= 1e-9);
  CHECK(res.plan.labels_read == 5);
  CHECK(res.sample.size() == regression_sample_size(4, 0.5, 0.1));
  for (Index c = 0; c < 5; ++c) {
    const Index row = res.plan.clustering.centers.rows[static_cast<std::size_t>(c)];
    CHECK((res.plan.clustering.centers.positions.row(c) - pr.instance.A.row(row)).norm() == 0.0);
  }
  CHECK(admissibility_violations(pr.instance, res.plan, res.plan.x0, VectorXd::Constant(5, pr.lipschitz)) == 0);
}

TEST_CASE("coreset_objective_error examples") {
  const RegressionInstance inst(rows_of({{1, 0}, {0, 1}, {1, 1}}), vec({1, 2, 0}));
  WeightedSample all;
  for (Index i = 0; i < 3; ++i) all.entries.push_back({i, 1.0});
  CHECK(coreset_objective_error(inst, all, vec({0.3, -2})) == doctest::Approx(0.0).epsilon(1e-12));
  const RegressionInstance one(rows_of({{2}}), vec({5}));
  WeightedSample single;
  single.entries.push_back({0, 1.0});
  CHECK(coreset_objective_error(one, single, vec({7})) == 0.0);
  CHECK_THROWS_AS(coreset_objective_error(inst, all, vec({1})), DataError);
}

TEST_CASE("coreset objective is unbiased at a fixed x") {
  RngStream rng(23, "unbiased-reg");
  const Index n = 30;
  const MatrixXd A = test::gaussian(n, 2, rng);
  VectorXd b(n);
  for (Index i = 0; i < n; ++i) b[i] = rng.normal();
  const RegressionInstance inst(A, b);
  const VectorXd x = VectorXd::Zero(2);
  const double full = b.squaredNorm();
  VectorXd scores(n);
  for (Index i = 0; i < n; ++i) scores[i] = 0.1 + rng.uniform();
  const SamplingPlan plan = SamplingPlan::from_scores(scores, 5);
  const int m = 10000;
  double s1 = 0.0, s2 = 0.0;
  for (int seed = 0; seed < m; ++seed) {
    RngStream r(static_cast<std::uint64_t>(seed), "unbiased-draw");
    const WeightedSample s = draw(plan, r);
    double est = 0.0;
    for (const auto& e : s.entries) est += e.weight * b[e.index] * b[e.index];
    s1 += est - full;
    s2 += (est - full) * (est - full);
  }
  const double mean = s1 / m;
  const double se = std::sqrt((s2 / m - mean * mean) / m);
  CHECK(std::abs(mean) <= 3.0 * se);
}

TEST_CASE("fit_on_sample recovers an exact model") {
  RngStream rng(29, "fit");
  const MatrixXd A = test::gaussian(50, 3, rng);
  const VectorXd x = vec({1, -2, 0.5});
  const RegressionInstance inst(A, A * x);
  const WeightedSample s = leverage_select(inst, 20, rng);
  CHECK((fit_on_sample(inst, s) - x).norm() <= 1e-9);
  CHECK_THROWS_AS(fit_on_sample(inst, WeightedSample{}), DataError);
}

TEST_CASE("r2_score examples") {
  CHECK(r2_score(vec({1, 2, 3}), vec({1, 2, 3})) == 1.0);
  CHECK(r2_score(vec({2, 2, 2}), vec({1, 2, 3})) == doctest::Approx(0.0));
  CHECK(r2_score(vec({1, 1}), vec({0, 2})) == 0.0);
  CHECK_THROWS_AS(r2_score(vec({1, 1}), vec({4, 4})), UndefinedMetric);
  CHECK_THROWS_AS(r2_score(vec({1}), vec({4, 4})), DataError);
}

}  // TEST_SUITE regression
