#ifndef CSEL_EVALUATION_HPP
#define CSEL_EVALUATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csel/clustering.hpp"
#include "csel/regression.hpp"
#include "csel/selection.hpp"

namespace csel {

/// |Σ_𝒟 ℓ − Σ_S w ℓ|. Losses may be signed here.
double delta_error(const VectorXd& losses, const WeightedSample& sample);

/// ε(Σℓ + 2Φ^Λ_{𝒞,z})
double theorem1_bound(double epsilon, const VectorXd& losses, const Clustering& clustering,
                      const VectorXd& lambda);
/// ε(Σℓ + Φ^Λ) for the round-i partition
double rounds_bound(double epsilon, const VectorXd& losses, double phi_lambda);
/// ε·n·max ℓ
double uniform_bound(double epsilon, const VectorXd& losses);
/// ε(‖Ax − b‖² + Φ^Λ_{𝒞,1})
double regression_bound(double epsilon, const RegressionInstance& instance, const VectorXd& x,
                        double phi_lambda);

struct PlantedOptions {
  Index n = 2000;
  Index d = 10;
  Index k = 4;
  double z = 2.0;
  double separation = 20.0;  // center spacing in units of the within-cluster σ
  double lambda_true = 0.5;
  double base_max = 10.0;  // per-cluster base loss ~ U[0, base_max)
};

/**
 * Gaussian clusters whose centers are rows 0..k-1 of the dataset, with loss
 * ℓ(e) = base_i + λ_true ‖e − c_i‖^z. The loss is (z, Λ)-well-behaved with
 * respect to `clustering` by construction.
 */
struct PlantedInstance {
  Dataset data;
  LossTable losses;
  Clustering clustering;
  VectorXd lambda;
  VectorXd base;
  double loss_sum = 0.0;
  double phi_lambda = 0.0;
};

PlantedInstance planted_holder(const PlantedOptions& options, RngStream& rng);

struct RademacherInstance {
  Dataset data;
  VectorXd signed_losses;  // ℓ(x) = x
};

/// n/2 copies of −1 followed by n/2 copies of +1.
RademacherInstance rademacher_instance(Index n);

struct PlantedRegressionOptions {
  Index n = 2000;
  Index d = 8;
  Index clusters = 10;
  double cluster_spread = 0.25;
  double wiggle = 0.3;  // amplitude of the Lipschitz non-linearity in b
  double noise = 0.0;   // i.i.d. Gaussian target noise (breaks the Lipschitz property)
};

/**
 * Clustered rows with b = ⟨a, x*⟩ + wiggle·sin(⟨u, a⟩) (+ noise). Without
 * noise, b is L-Lipschitz in a, so the instance is well-behaved with Λ ≡ L
 * under any clustering.
 */
struct PlantedRegression {
  RegressionInstance instance;
  VectorXd x_star;
  double lipschitz = 0.0;
};

PlantedRegression planted_regression(const PlantedRegressionOptions& options, RngStream& rng);

/// Picks x = x0 + δ with δ orthogonal to every medoid, so x satisfies the admissibility condition.
VectorXd admissible_point(const RegressionInstance& instance, const RegressionPlan& plan, double scale,
                          RngStream& rng);
/// Number of rows violating |⟨â_j, x − x0⟩| ≤ Λ‖a_j − â_j‖.
Index admissibility_violations(const RegressionInstance& instance, const RegressionPlan& plan,
                               const VectorXd& x, const VectorXd& lambda);

struct ExperimentConfig {
  std::string pipeline = "data_select";  // data_select | uniform | rounds | regression | rademacher
  Index n = 2000;
  Index d = 10;
  Index k = 4;
  double z = 2.0;
  double epsilon = 0.2;
  std::string lambda = "true";  // "true" (planted value), "auto", or a number
  Index trials = 100;
  std::uint64_t seed = 1;
  double separation = 20.0;
  double lambda_true = 0.5;
  Index rounds = 1;
  double delta = 0.1;
  std::optional<Index> sample_count;
  double lower_constant = 0.2;

  static ExperimentConfig parse(const std::string& text);
  std::map<std::string, std::string> echo() const;
};

struct TrialRow {
  Index trial = 0;
  Index round = 0;
  double delta = 0.0;
  double bound = 0.0;
  bool success = false;
  Index queries_used = 0;
};

struct TrialReport {
  ExperimentConfig config;
  std::vector<TrialRow> rows;
  double success_rate = 0.0;
  double mean_delta = 0.0;
  double median_delta = 0.0;
  double std_error = 0.0;
  double max_unbiasedness_residual = 0.0;  // relative, over full-support plans
  Index support_deficient = 0;

  void aggregate();
  /// Aggregates restricted to one round (round 0 means all rows).
  TrialReport for_round(Index round) const;
};

TrialReport run_trials(const ExperimentConfig& config);

struct LowerBoundRow {
  double epsilon = 0.0;
  Index s = 0;
  double median_abs_estimate = 0.0;
  double empirical_constant = 0.0;  // median |estimate| · √s / n
  double fraction_above = 0.0;      // Pr[|estimate| ≥ c·n/√s]
};

/// Uniform sampling on the ±1 instance for each ε with s = ⌈1/ε²⌉.
std::vector<LowerBoundRow> lowerbound_sweep(Index n, const std::vector<double>& epsilons, Index trials,
                                            double constant, std::uint64_t seed);

}  // namespace csel

#endif  // CSEL_EVALUATION_HPP
