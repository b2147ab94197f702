#ifndef CSEL_REGRESSION_HPP
#define CSEL_REGRESSION_HPP

#include <optional>

#include "csel/clustering.hpp"
#include "csel/lambda.hpp"
#include "csel/selection.hpp"

namespace csel {

struct RegressionInstance {
  MatrixXd A;
  VectorXd b;

  RegressionInstance(MatrixXd a, VectorXd targets);
  Index n() const { return A.rows(); }
  Index d() const { return A.cols(); }
};

/**
 * argmin_x Σ_i weights_i (⟨a_i, x⟩ − b_i)², via a complete orthogonal
 * decomposition of the row-scaled system (minimum-norm on rank deficiency).
 */
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> solve_least_squares(const Eigen::MatrixBase<DerivedA>& A,
                                                      const Eigen::MatrixBase<DerivedB>& b,
                                                      const VectorXd* weights = nullptr);

/// τ_i = a_iᵀ (AᵀA)⁺ a_i from a rank-revealing QR.
VectorXd leverage_scores(const MatrixXd& A);

WeightedSample leverage_select(const RegressionInstance& instance, Index s, RngStream& rng);

/// ⌈8 d ε⁻² ln(1/δ)⌉
Index regression_sample_size(Index d, double epsilon, double delta);

struct RegressionPlan {
  Clustering clustering;  // z = 1, medoid centers
  VectorXd x0;
  VectorXd dist;  // ‖a_i − â_i‖
  VectorXd v;     // (⟨â_i, x0⟩ − b̂_i)²
  SamplingPlan plan;
  Index labels_read = 0;
  double phi_lambda = 0.0;  // Σ_j Λ_j Φ_{1,1}(C_j); +inf in distance-only mode
};

struct RegressionSelectConfig {
  Index k = 1;
  double epsilon = 0.5;
  double delta = 0.1;
  LambdaVector lambda;  // length k or 1; `infinite` selects distance-only sampling
  std::optional<Index> sample_count;
  ClusteringOptions clustering;
};

struct RegressionSelectResult {
  WeightedSample sample;
  RegressionPlan plan;
};

/**
 * Clusters the rows of A with k-medoids, fits x0 on the medoids weighted by
 * cluster size, and samples rows with p_i ∝ Λ_j‖a_i − â_i‖ + v(a_i, x0).
 * Only the k medoid targets are read.
 */
RegressionSelectResult regression_select(const RegressionInstance& instance,
                                         const RegressionSelectConfig& config, RngStream& rng);

/// |Σ_S w (⟨a_s, x⟩ − b_s)² − ‖Ax − b‖²|
double coreset_objective_error(const RegressionInstance& instance, const WeightedSample& sample,
                               const VectorXd& x);

/// Weighted least squares on the sampled rows.
VectorXd fit_on_sample(const RegressionInstance& instance, const WeightedSample& sample);

/// 1 − Σ(b − ŷ)² / Σ(b − b̄)². Throws UndefinedMetric for constant b.
double r2_score(const VectorXd& predictions, const VectorXd& b);

}  // namespace csel

#include "csel/regression_impl.hpp"

#endif  // CSEL_REGRESSION_HPP
