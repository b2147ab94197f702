#ifndef CSEL_TESTS_SUPPORT_HPP
#define CSEL_TESTS_SUPPORT_HPP

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "csel/core.hpp"
#include "csel/rng.hpp"

namespace csel::test {

inline MatrixXd rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

/// 1-D dataset from a list of values.
inline Dataset line(std::initializer_list<double> values) {
  MatrixXd m(static_cast<Index>(values.size()), 1);
  Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return Dataset(std::move(m));
}

inline VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline MatrixXd gaussian(Index n, Index d, RngStream& rng) {
  MatrixXd m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("csel_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace csel::test

#endif  // CSEL_TESTS_SUPPORT_HPP
