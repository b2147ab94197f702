#ifndef CSEL_SELECTION_HPP
#define CSEL_SELECTION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csel/clustering.hpp"
#include "csel/lambda.hpp"
#include "csel/oracle.hpp"

namespace csel {

/// Center-loss proxy ℓ̂ and distance term v for every point.
struct ProxyLoss {
  VectorXd lhat;
  VectorXd v;
};

/**
 * Importance-sampling distribution over the dataset. Weights are 1/(s·p_e)
 * where p_e > 0 and 0 where p_e = 0 (such points are never drawn).
 */
struct SamplingPlan {
  VectorXd p;
  VectorXd w;
  Index s = 0;
  double denom = 0.0;
  bool uniform_fallback = false;

  Index n() const { return p.size(); }
  std::uint64_t hash() const;
  static SamplingPlan uniform(Index n, Index s);
  /// Normalizes non-negative scores; all-zero scores fall back to uniform.
  static SamplingPlan from_scores(const VectorXd& scores, Index s);
};

struct SampleEntry {
  Index index;
  double weight;
};

struct WeightedSample {
  std::vector<SampleEntry> entries;
  std::uint64_t seed = 0;
  std::uint64_t plan_hash = 0;
  Index queries_used = 0;

  Index size() const { return static_cast<Index>(entries.size()); }
};

/// ⌈ε⁻²(2 + 2ε/3)⌉
Index sample_size(double epsilon);

/// ⌈1/ε²⌉, the uniform-sampling size.
Index uniform_sample_size(double epsilon);

/// Queries the oracle once per center; centers must be dataset rows.
ProxyLoss proxy_losses(const Dataset& data, const Clustering& clustering, LossOracle& oracle);

/// p_e ∝ ℓ̂(e) + Λ_i v(e)
SamplingPlan sensitivity_plan(const ProxyLoss& proxy, const Clustering& clustering,
                              const LambdaVector& lambda, double epsilon);
/// Same distribution with an explicit sample count.
SamplingPlan sensitivity_plan_with_size(const ProxyLoss& proxy, const Clustering& clustering,
                                        const LambdaVector& lambda, Index s);

/// s independent draws with replacement from plan.p.
WeightedSample draw(const SamplingPlan& plan, RngStream& rng);

enum class LambdaMode { Supplied, Auto };

struct DataSelectConfig {
  Index k = 1;
  double epsilon = 0.5;
  double z = 2.0;
  LambdaMode lambda_mode = LambdaMode::Supplied;
  LambdaVector lambda;  // Supplied mode: length k (or length 1, broadcast)
  LambdaEstimateOptions lambda_options;
  std::optional<Index> sample_count;  // overrides sample_size(epsilon)
  ClusteringOptions clustering;
};

struct SelectionReport {
  Index s = 0;
  Index k = 0;
  double epsilon = 0.0;
  double z = 2.0;
  std::string lambda_mode;
  Index queries_used = 0;
  Index center_queries = 0;
  Index lambda_queries = 0;
  double phi_lambda = 0.0;
  double phi_z = 0.0;
  double denom = 0.0;
  bool uniform_fallback = false;
  std::uint64_t seed = 0;
};

struct DataSelectResult {
  WeightedSample sample;
  SamplingPlan plan;
  Clustering clustering;
  ProxyLoss proxy;
  LambdaVector lambda;
  SelectionReport report;
};

/// dz_seed → refine → snap → proxy losses → (Λ estimate) → plan → draw.
DataSelectResult data_select(const Dataset& data, const DataSelectConfig& config, LossOracle& oracle,
                             RngStream& rng);

struct RoundResult {
  Index round = 0;  // 1-based
  WeightedSample sample;
  SamplingPlan plan;
  Clustering clustering;  // partition induced by the first round·k prefix centers
  ProxyLoss proxy;
  double phi_lambda = 0.0;
  Index cumulative_queries = 0;
};

struct RoundsConfig {
  Index k = 1;
  Index rounds = 1;
  double epsilon = 0.5;
  double z = 2.0;
  LambdaVector lambda;  // length 1 (shared) or length k·rounds (per prefix center)
  std::optional<Index> sample_count;
};

/// r-round adaptive selection over a single D^z prefix ordering.
std::vector<RoundResult> data_select_rounds(const Dataset& data, const RoundsConfig& config,
                                            LossOracle& oracle, RngStream& rng);

/// s uniform draws with replacement, weight n/s each.
WeightedSample uniform_select(Index n, Index s, RngStream& rng);

/// Greedy farthest-point traversal; ties → lowest index.
std::vector<Index> kcenter_select(const Dataset& data, Index k, RngStream& rng);

/// Rows nearest to the centers of a D^z + refine clustering, one distinct row per cluster.
std::vector<Index> diversity_select(const Dataset& data, Index k, double z, RngStream& rng,
                                    const ClusteringOptions& options = {});

/// ℓ̃(e) = ℓ(c_e) + λ‖e − c_e‖^z
VectorXd extrapolate_losses(const Dataset& data, const Clustering& clustering,
                            const VectorXd& center_losses, double lambda, double z);

/// Σ_e s·p_e·w(e)·ℓ(e): the exact expectation of the weighted sample sum.
double expected_estimate(const SamplingPlan& plan, const VectorXd& losses);

}  // namespace csel

#endif  // CSEL_SELECTION_HPP
