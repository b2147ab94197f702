#ifndef CSEL_REGRESSION_IMPL_HPP
#define CSEL_REGRESSION_IMPL_HPP

#include <Eigen/QR>

namespace csel {

template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> solve_least_squares(const Eigen::MatrixBase<DerivedA>& A,
                                                      const Eigen::MatrixBase<DerivedB>& b,
                                                      const VectorXd* weights) {
  using Scalar = typename DerivedA::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (A.rows() != b.size()) throw DataError("least squares: A and b disagree on row count");
  if (!A.allFinite() || !b.allFinite()) throw DataError("least squares: non-finite input");
  Mat scaled = A;
  Vector<Scalar> rhs = b;
  if (weights != nullptr) {
    if (weights->size() != A.rows()) throw DataError("least squares: weight length mismatch");
    for (Index i = 0; i < A.rows(); ++i) {
      const double w = (*weights)[i];
      if (!std::isfinite(w) || w < 0.0) throw DataError("least squares: weights must be finite and >= 0");
      const Scalar root = static_cast<Scalar>(std::sqrt(w));
      scaled.row(i) *= root;
      rhs[i] *= root;
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(scaled);
  return cod.solve(rhs);
}

}  // namespace csel

#endif  // CSEL_REGRESSION_IMPL_HPP
