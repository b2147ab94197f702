#include <cstring>
#include <fstream>

#include "doctest.h"
#include "csel/io.hpp"
#include "support.hpp"

using namespace csel;
using csel::test::vec;

namespace {

std::string put(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  const auto path = (dir / name).string();
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("binary matrix round trip and byte layout") {
  const auto dir = test::scratch_dir("io_binary");
  const MatrixXd m = test::rows_of({{1.5, -2.0}, {3.25, 1e-300}});
  const auto path = (dir / "m.bin").string();
  save_matrix_binary(m, path);
  CHECK(load_matrix(path).rows() == m);

  const std::string bytes = read_text(path);
  REQUIRE(bytes.size() == 5 + 16 + 32);
  CHECK(bytes.substr(0, 5) == "CSEL1");
  std::uint64_t dims[2];
  std::memcpy(dims, bytes.data() + 5, 16);
  CHECK(dims[0] == 2);
  CHECK(dims[1] == 2);
  double second;
  std::memcpy(&second, bytes.data() + 21 + 8, 8);
  CHECK(second == -2.0);  // row-major
}

TEST_CASE("binary matrix validation") {
  const auto dir = test::scratch_dir("io_binary_bad");
  const MatrixXd m = test::rows_of({{1, 2}, {3, 4}});
  const auto path = (dir / "m.bin").string();
  save_matrix_binary(m, path);
  std::string bytes = read_text(path);
  CHECK_THROWS_AS(load_matrix(put(dir, "short.bin", bytes.substr(0, bytes.size() - 8))), DataError);
  CHECK_THROWS_AS(load_matrix(put(dir, "long.bin", bytes + "12345678")), DataError);
  CHECK_THROWS_AS(load_matrix(put(dir, "header.bin", bytes.substr(0, 9))), DataError);
  std::string with_nan = bytes;
  const double nan = std::nan("");
  std::memcpy(with_nan.data() + 21, &nan, 8);
  CHECK_THROWS_AS(load_matrix(put(dir, "nan.bin", with_nan)), DataError);
}

TEST_CASE("csv matrix examples") {
  const auto dir = test::scratch_dir("io_csv");
  const Dataset plain = load_matrix(put(dir, "a.csv", "1,2\n3,4\n"));
  CHECK(plain.n() == 2);
  CHECK(plain.d() == 2);
  CHECK(plain.row(1)[0] == 3.0);
  const Dataset headed = load_matrix(put(dir, "b.csv", "x,y\r\n1, 2\r\n\r\n+3,-4e0\r\n"));
  CHECK(headed.n() == 2);
  CHECK(headed.row(1)[1] == -4.0);
  CHECK_THROWS_AS(load_matrix(put(dir, "ragged.csv", "1,2\n3\n")), DataError);
  CHECK_THROWS_AS(load_matrix(put(dir, "text.csv", "1,2\n3,abc\n")), DataError);
  CHECK_THROWS_AS(load_matrix(put(dir, "inf.csv", "1,2\n3,inf\n")), DataError);
  CHECK_THROWS_AS(load_matrix(put(dir, "empty.csv", "a,b\n")), DataError);
  CHECK_THROWS_AS(load_matrix((dir / "missing.csv").string()), DataError);

  const MatrixXd m = test::rows_of({{0.1, 1.0 / 3.0}, {-7e-20, 12345.678}});
  save_matrix_csv(m, (dir / "rt.csv").string());
  CHECK(load_matrix((dir / "rt.csv").string()).rows() == m);
}

TEST_CASE("loss files") {
  const auto dir = test::scratch_dir("io_losses");
  CHECK(load_losses(put(dir, "l.txt", "0.5\n1\n2.25\n")).values() == vec({0.5, 1, 2.25}));
  CHECK(load_losses(put(dir, "l2.txt", "0.5\n1\n"), 2).size() == 2);
  CHECK_THROWS_AS(load_losses(put(dir, "l3.txt", "0.5\n1\n"), 3), DataError);
  CHECK_THROWS_AS(load_losses(put(dir, "neg.txt", "0.5\n-1\n")), DataError);
  const auto table = put(dir, "t.csv", "id,loss,other\n0,3,9\n1,4,9\n");
  CHECK(load_losses(table, 2, "loss").values() == vec({3, 4}));
  CHECK_THROWS_AS(load_losses(table, 2, "nope"), DataError);
  CHECK_THROWS_AS(load_losses(table, 2), DataError);  // three columns, no column named
  CHECK(load_vector(put(dir, "v.txt", "-1\n2\n")) == vec({-1, 2}));
}

TEST_CASE("regression files") {
  const auto dir = test::scratch_dir("io_reg");
  const RegressionInstance one = load_regression(put(dir, "r.csv", "a,b,y\n1,2,3\n4,5,6\n"));
  CHECK(one.d() == 2);
  CHECK(one.b == vec({3, 6}));
  const RegressionInstance two = load_regression(put(dir, "f.csv", "1,2\n4,5\n"), put(dir, "y.txt", "3\n6\n"));
  CHECK(two.A == one.A);
  CHECK(two.b == one.b);
  CHECK_THROWS_AS(load_regression(put(dir, "f2.csv", "1,2\n4,5\n"), put(dir, "y2.txt", "3\n")), DataError);
  CHECK_THROWS_AS(load_regression(put(dir, "single.csv", "1\n2\n")), DataError);
}

TEST_CASE("sample round trip") {
  const auto dir = test::scratch_dir("io_sample");
  WeightedSample s;
  s.entries = {{3, 0.1}, {0, 2.0 / 3.0}, {3, 0.1}};
  const auto path = (dir / "s.csv").string();
  save_sample(s, path);
  CHECK(read_text(path).rfind("index,weight\n", 0) == 0);
  const WeightedSample back = load_sample(path);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.entries[i].index == s.entries[i].index);
    CHECK(back.entries[i].weight == s.entries[i].weight);
  }
  CHECK_THROWS_AS(load_sample(put(dir, "bad.csv", "index,weight\n1.5,2\n")), DataError);
  CHECK_THROWS_AS(load_sample(put(dir, "neg.csv", "index,weight\n1,-2\n")), DataError);
}

TEST_CASE("format_real round trips") {
  RngStream rng(3, "fmt");
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(rng.normal(), static_cast<int>(rng.below(200)) - 100);
    CHECK(std::stod(format_real(v)) == v);
  }
  CHECK(format_real(0.5) == "0.5");
  CHECK(format_real(3.0) == "3");
}

TEST_CASE("artifact writers") {
  const Dataset data = test::line({0, 1, 10, 11});
  const Clustering cl = assign(data, CenterList::from_rows(data, {0, 2}), 2.0);
  CHECK(assignment_csv(cl) == "point,cluster\n0,0\n1,0\n2,1\n3,1\n");
  CHECK(centers_csv(cl) == "cluster,row,size,cost,x0\n0,0,2,1,0\n1,2,2,1,10\n");
  CHECK(vector_csv("lambda", vec({0.5, 2})) == "lambda\n0.5\n2\n");

  const auto dir = test::scratch_dir("io_write");
  const auto path = (dir / "out.txt").string();
  write_text(path, "first");
  write_text(path, "second");
  CHECK(read_text(path) == "second");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) CHECK(entry.path().filename() == "out.txt");
  CHECK_THROWS_AS(write_text((dir / "no" / "such" / "dir.txt").string(), "x"), DataError);
}

TEST_CASE("trial report serialization") {
  TrialReport r;
  r.rows = {{0, 1, 0.5, 1.0, true, 4}, {1, 1, 2.0, 1.0, false, 4}};
  r.aggregate();
  const auto j = trial_report_json(r);
  CHECK(j.at("schema_version") == kReportSchemaVersion);
  CHECK(j.at("success_rate").get<double>() == 0.5);
  const std::string csv = trial_rows_csv(r);
  CHECK(csv.rfind("trial,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

}  // TEST_SUITE io
