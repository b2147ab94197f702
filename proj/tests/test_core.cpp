#include <set>

#include "doctest.h"
#include "csel/core.hpp"
#include "csel/oracle.hpp"
#include "csel/rng.hpp"
#include "support.hpp"

using namespace csel;
using csel::test::vec;

TEST_SUITE("core") {

TEST_CASE("distance_z examples") {
  CHECK(distance_z(vec({3, 4}), vec({3, 4}), 2.0) == 0.0);
  CHECK(distance_z(vec({0, 0}), vec({3, 4}), 2.0) == 25.0);
  CHECK(distance_z(vec({0, 0}), vec({3, 4}), 1.0) == 5.0);
  CHECK(distance_z(vec({0, 0}), vec({3, 4}), 3.0) == doctest::Approx(125.0).epsilon(1e-14));
}

TEST_CASE("distance_z rejects bad input") {
  CHECK_THROWS_AS(distance_z(vec({0, 0}), vec({1, 2, 3}), 2.0), DataError);
  CHECK_THROWS_AS(distance_z(vec({0}), vec({1}), 0.0), DataError);
  CHECK_THROWS_AS(distance_z(vec({0}), vec({std::nan("")}), 2.0), DataError);
  CHECK_THROWS_AS(distance_z(vec({0}), vec({INFINITY}), 1.0), DataError);
}

TEST_CASE("distance_z symmetry and naive z=2 oracle") {
  RngStream rng(7, "distance");
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 1 + static_cast<Index>(rng.below(12));
    VectorXd x(d), y(d);
    for (Index j = 0; j < d; ++j) {
      x[j] = 10.0 * rng.normal();
      y[j] = 10.0 * rng.normal();
    }
    const double z = 0.25 + 3.0 * rng.uniform();
    CHECK(distance_z(x, y, z) == distance_z(y, x, z));
    double naive = 0.0;
    for (Index j = 0; j < d; ++j) naive += (x[j] - y[j]) * (x[j] - y[j]);
    CHECK(test::rel_diff(distance_z(x, y, 2.0), naive) <= 1e-12);
    CHECK(distance_z(x, y, z) > 0.0);
  }
}

TEST_CASE("Dataset and LossTable validation") {
  CHECK_THROWS_AS(Dataset(MatrixXd(0, 3)), DataError);
  CHECK_THROWS_AS(Dataset(MatrixXd(3, 0)), DataError);
  MatrixXd bad = MatrixXd::Zero(2, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(Dataset{bad}, DataError);
  CHECK_THROWS_AS(LossTable(vec({1.0, -0.5})), DataError);
  CHECK_THROWS_AS(LossTable(vec({1.0, INFINITY})), DataError);
  const Dataset ok(test::rows_of({{1, 2}, {3, 4}}));
  CHECK(ok.n() == 2);
  CHECK(ok.d() == 2);
  CHECK(ok.row(1)[0] == 3.0);
}

TEST_CASE("compensated summation beats naive order dependence") {
  std::vector<double> values = {1e16, 1.0, -1e16, 1.0};
  CHECK(stable_sum(values) == 2.0);
  VectorXd many = VectorXd::Constant(100000, 0.1);
  CHECK(std::abs(stable_sum(many) - 10000.0) < 1e-9);
}

TEST_CASE("parallel_for covers the range once") {
  for (int threads : {1, 2, 5}) {
    std::vector<int> hits(103, 0);
    parallel_for(103, threads, [&](Index b, Index e) {
      for (Index i = b; i < e; ++i) ++hits[static_cast<std::size_t>(i)];
    });
    for (int h : hits) CHECK(h == 1);
  }
}

}  // TEST_SUITE core

TEST_SUITE("rng") {

TEST_CASE("same seed and label reproduce the stream") {
  RngStream a(42, "x");
  RngStream b(42, "x");
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("labels and seeds separate streams") {
  RngStream a(42, "x");
  RngStream b(42, "y");
  RngStream c(43, "x");
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    same_ab += va == b.next_u64();
    same_ac += va == c.next_u64();
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
  CHECK(RngStream(1, "p").split("q").next_u64() != RngStream(1, "p").split("r").next_u64());
}

TEST_CASE("split does not advance the parent") {
  RngStream a(5, "root");
  RngStream b(5, "root");
  (void)a.split("child").next_u64();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform and below ranges") {
  RngStream rng(3, "ranges");
  double total = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    total += u;
    CHECK(rng.below(7) < 7u);
  }
  CHECK(std::abs(total / 20000.0 - 0.5) < 0.01);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[rng.below(5)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
}

TEST_CASE("normal moments") {
  RngStream rng(11, "normal");
  double s1 = 0.0, s2 = 0.0;
  const int m = 50000;
  for (int i = 0; i < m; ++i) {
    const double x = rng.normal();
    s1 += x;
    s2 += x * x;
  }
  CHECK(std::abs(s1 / m) < 0.03);
  CHECK(std::abs(s2 / m - 1.0) < 0.03);
}

}  // TEST_SUITE rng

TEST_SUITE("oracle") {

TEST_CASE("table oracle caches repeated queries") {
  LossOracle oracle = LossOracle::from_table(LossTable(vec({0.5, 0.5})), 2);
  CHECK(oracle.query(0) == 0.5);
  CHECK(oracle.query(0) == 0.5);
  CHECK(oracle.queries_used() == 1);
  CHECK(oracle.cached(0).has_value());
  CHECK_FALSE(oracle.cached(1).has_value());
}

TEST_CASE("budget is enforced on distinct indices") {
  LossOracle oracle = LossOracle::from_table(LossTable(vec({1, 2, 3})), 1);
  CHECK(oracle.query(0) == 1.0);
  CHECK_THROWS_AS(oracle.query(1), BudgetExhausted);
  CHECK(oracle.query(0) == 1.0);
  CHECK(oracle.queries_used() == 1);
}

TEST_CASE("out-of-range index is a data error") {
  LossOracle oracle = LossOracle::from_table(LossTable(vec({1, 2})), 5);
  CHECK_THROWS_AS(oracle.query(2), DataError);
  CHECK_THROWS_AS(oracle.query(-1), DataError);
}

TEST_CASE("queries_used equals distinct indices for random sequences") {
  RngStream rng(9, "oracle-seq");
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 20;
    const Index budget = 1 + static_cast<Index>(rng.below(20));
    VectorXd losses(n);
    for (Index i = 0; i < n; ++i) losses[i] = rng.uniform();
    LossOracle oracle = LossOracle::from_table(LossTable(losses), budget);
    std::set<Index> seen;
    for (int q = 0; q < 60; ++q) {
      const auto i = static_cast<Index>(rng.below(n));
      try {
        const double got = oracle.query(i);
        CHECK(got == losses[i]);
        seen.insert(i);
      } catch (const BudgetExhausted&) {
        CHECK(static_cast<Index>(seen.size()) == budget);
      }
      CHECK(oracle.queries_used() == static_cast<Index>(seen.size()));
      CHECK(oracle.queries_used() <= budget);
    }
  }
}

TEST_CASE("external process protocol") {
  LossOracle oracle = LossOracle::from_command("while read i; do echo 0.25; done", 10, 10);
  CHECK(oracle.query(7) == 0.25);
  CHECK(oracle.query(7) == 0.25);
  CHECK(oracle.queries_used() == 1);
  oracle.finish();
}

TEST_CASE("external process echoes the index it was sent") {
  LossOracle oracle = LossOracle::from_command("while read i; do echo \"$i.5\"; done", 10, 10);
  CHECK(oracle.query(3) == 3.5);
  CHECK(oracle.query(9) == 9.5);
  oracle.finish();
}

TEST_CASE("external process failures surface as oracle errors") {
  SUBCASE("malformed reply") {
    LossOracle oracle = LossOracle::from_command("while read i; do echo nope; done", 4, 4);
    CHECK_THROWS_AS(oracle.query(0), OracleError);
  }
  SUBCASE("negative loss") {
    LossOracle oracle = LossOracle::from_command("while read i; do echo -1; done", 4, 4);
    CHECK_THROWS_AS(oracle.query(0), OracleError);
  }
  SUBCASE("child exits early") {
    LossOracle oracle = LossOracle::from_command("exit 0", 4, 4);
    CHECK_THROWS_AS(oracle.query(0), OracleError);
  }
  SUBCASE("nonzero exit status") {
    LossOracle oracle = LossOracle::from_command("read i; echo 1; exit 4", 4, 4);
    CHECK(oracle.query(0) == 1.0);
    CHECK_THROWS_AS(oracle.finish(), OracleError);
  }
}

}  // TEST_SUITE oracle
