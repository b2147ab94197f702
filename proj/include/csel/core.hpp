#ifndef CSEL_CORE_HPP
#define CSEL_CORE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace csel {

using Index = Eigen::Index;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = RowMatrix<double>;
using VectorXd = Vector<double>;

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, non-finite values, bad lengths.
class DataError : public Error {
 public:
  using Error::Error;
};

/// The loss oracle was asked for more distinct elements than its budget allows.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// An external loss process failed or replied with something unparsable.
class OracleError : public Error {
 public:
  using Error::Error;
};

/// A metric whose value is mathematically undefined for the given input.
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/**
 * Immutable n x d embedding matrix. Row i is element i for the lifetime of
 * the dataset.
 */
class Dataset {
 public:
  explicit Dataset(MatrixXd rows);

  Index n() const { return rows_.rows(); }
  Index d() const { return rows_.cols(); }
  const MatrixXd& rows() const { return rows_; }
  auto row(Index i) const { return rows_.row(i); }

 private:
  MatrixXd rows_;
};

/// Per-element loss values, finite and non-negative.
class LossTable {
 public:
  explicit LossTable(VectorXd losses);

  Index size() const { return losses_.size(); }
  double operator[](Index i) const { return losses_[i]; }
  const VectorXd& values() const { return losses_; }

 private:
  VectorXd losses_;
};

/// ‖x − y‖₂^z. z = 2 avoids the square root so squared costs stay exact.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar distance_z(const Eigen::MatrixBase<DerivedX>& x,
                                     const Eigen::MatrixBase<DerivedY>& y,
                                     typename DerivedX::Scalar z) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != y.size()) {
    throw DataError("distance_z: dimension mismatch");
  }
  if (!(z > Scalar(0))) {
    throw DataError("distance_z: z must be positive");
  }
  const Scalar sq = (x - y).squaredNorm();
  if (!std::isfinite(sq)) {
    throw DataError("distance_z: non-finite input");
  }
  if (z == Scalar(2)) return sq;
  if (z == Scalar(1)) return std::sqrt(sq);
  return std::pow(sq, z / Scalar(2));
}

/// Unchecked variant for hot loops over already-validated data.
template <typename DerivedX, typename DerivedY>
inline double pow_dist(const Eigen::MatrixBase<DerivedX>& x,
                       const Eigen::MatrixBase<DerivedY>& y, double z) {
  const double sq = (x - y).squaredNorm();
  if (z == 2.0) return sq;
  if (z == 1.0) return std::sqrt(sq);
  return std::pow(sq, z / 2.0);
}

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double stable_sum(std::span<const double> values);
double stable_sum(const VectorXd& values);

/// Runs fn(begin, end) over contiguous chunks of [0, n). threads <= 1 runs inline.
void parallel_for(Index n, int threads, const std::function<void(Index, Index)>& fn);

}  // namespace csel

#endif  // CSEL_CORE_HPP
