#ifndef CSEL_LAMBDA_HPP
#define CSEL_LAMBDA_HPP

#include <vector>

#include "csel/clustering.hpp"
#include "csel/oracle.hpp"

namespace csel {

/**
 * Per-cluster Hölder constants. `infinite` marks the distance-only mode used
 * by the regression sampler, in which case `values` is ignored.
 */
struct LambdaVector {
  VectorXd values;
  bool infinite = false;

  Index size() const { return values.size(); }

  static LambdaVector constant(Index k, double value);
  static LambdaVector infinity(Index k);
  void validate(Index k) const;
};

/// One entry per point that does not coincide with its center.
struct RatioTable {
  std::vector<double> ratios;
  std::vector<Index> points;
};

/// |ℓ(e) − ℓ(c_i)| / ‖e − c_i‖^z over a full loss table. Diagnostic use only.
RatioTable holder_ratios(const Dataset& data, const Clustering& clustering, const LossTable& losses,
                         double z);

struct PercentileRow {
  double percentile;
  double value;
};

inline const std::vector<double> kDefaultPercentiles = {20.0, 40.0, 60.0, 80.0, 99.0};

/// Nearest-rank percentiles: the smallest ratio with at least p% of entries ≤ it.
std::vector<PercentileRow> holder_percentiles(const RatioTable& ratios,
                                              const std::vector<double>& percentiles = kDefaultPercentiles);

struct LambdaEstimateOptions {
  Index per_cluster = 0;  // t; 0 selects default_queries_per_cluster(k, p)
  double p = 0.2;
  bool robust = false;  // drop the top 1/k of sampled ratios before the max
};

/// ⌈ln(100k) / −ln(1 − p)⌉
Index default_queries_per_cluster(Index k, double p);

/**
 * Upper bound on each Λ_i from t uniform members per cluster: the largest
 * sampled ratio times ln(n). Queries the oracle on each center and the
 * sampled members only.
 */
LambdaVector estimate_lambda(const Dataset& data, const Clustering& clustering, LossOracle& oracle,
                             RngStream& rng, const LambdaEstimateOptions& options = {});

}  // namespace csel

#endif  // CSEL_LAMBDA_HPP
