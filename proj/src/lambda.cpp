#include "csel/lambda.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace csel {

LambdaVector LambdaVector::constant(Index k, double value) {
  LambdaVector out;
  out.values = VectorXd::Constant(k, value);
  return out;
}

LambdaVector LambdaVector::infinity(Index k) {
  LambdaVector out;
  out.values = VectorXd::Constant(k, std::numeric_limits<double>::infinity());
  out.infinite = true;
  return out;
}

void LambdaVector::validate(Index k) const {
  if (infinite) return;
  if (values.size() != k) {
    throw DataError("Λ has " + std::to_string(values.size()) + " entries, expected " + std::to_string(k));
  }
  for (Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) throw DataError("Λ entries must be finite and >= 0");
  }
}

RatioTable holder_ratios(const Dataset& data, const Clustering& clustering, const LossTable& losses,
                         double z) {
  if (losses.size() != data.n()) throw DataError("loss table length does not match dataset");
  RatioTable out;
  for (Index e = 0; e < data.n(); ++e) {
    const Index c = clustering.assignment[static_cast<std::size_t>(e)];
    const double dist = pow_dist(data.row(e), clustering.centers.positions.row(c), z);
    if (!(dist > 0.0)) continue;
    const Index center_row = clustering.centers.rows[static_cast<std::size_t>(c)];
    if (center_row == kNoRow) throw DataError("Hölder ratios need centers that are dataset rows");
    out.ratios.push_back(std::abs(losses[e] - losses[center_row]) / dist);
    out.points.push_back(e);
  }
  return out;
}

std::vector<PercentileRow> holder_percentiles(const RatioTable& ratios,
                                              const std::vector<double>& percentiles) {
  if (ratios.ratios.empty()) throw DataError("empty ratio table");
  std::vector<double> sorted = ratios.ratios;
  std::sort(sorted.begin(), sorted.end());
  const auto count = static_cast<double>(sorted.size());
  std::vector<PercentileRow> out;
  out.reserve(percentiles.size());
  for (double p : percentiles) {
    if (!(p >= 0.0 && p <= 100.0)) throw DataError("percentile outside [0, 100]");
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * count - 1e-12));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    out.push_back({p, sorted[rank - 1]});
  }
  return out;
}

Index default_queries_per_cluster(Index k, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DataError("p must lie in (0, 1)");
  if (k < 1) throw DataError("k must be positive");
  return static_cast<Index>(std::ceil(std::log(100.0 * static_cast<double>(k)) / -std::log1p(-p)));
}

LambdaVector estimate_lambda(const Dataset& data, const Clustering& clustering, LossOracle& oracle,
                             RngStream& rng, const LambdaEstimateOptions& options) {
  const Index k = clustering.k();
  if (!clustering.centers.snapped()) throw DataError("Λ estimation needs centers that are dataset rows");
  const Index t = options.per_cluster > 0 ? options.per_cluster : default_queries_per_cluster(k, options.p);
  const double log_n = std::log(static_cast<double>(data.n()));
  const double z = clustering.z;
  const auto groups = clustering.members();

  LambdaVector out;
  out.values = VectorXd::Zero(k);
  for (Index c = 0; c < k; ++c) {
    const auto& group = groups[static_cast<std::size_t>(c)];
    if (group.empty()) throw DataError("cluster " + std::to_string(c) + " is empty");
    const Index center_row = clustering.centers.rows[static_cast<std::size_t>(c)];
    const double center_loss = oracle.query(center_row);

    // Without replacement when the cluster is large enough (partial Fisher-Yates).
    std::vector<Index> picks;
    const auto size = static_cast<Index>(group.size());
    if (t <= size) {
      std::vector<Index> pool = group;
      for (Index j = 0; j < t; ++j) {
        const auto r = j + static_cast<Index>(rng.below(static_cast<std::uint64_t>(size - j)));
        std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(r)]);
        picks.push_back(pool[static_cast<std::size_t>(j)]);
      }
    } else {
      for (Index j = 0; j < t; ++j) {
        picks.push_back(group[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(size)))]);
      }
    }

    std::vector<double> ratios;
    for (Index e : picks) {
      const double dist = pow_dist(data.row(e), clustering.centers.positions.row(c), z);
      const double loss = oracle.query(e);
      if (!(dist > 0.0)) continue;
      ratios.push_back(std::abs(loss - center_loss) / dist);
    }
    if (ratios.empty()) continue;
    std::sort(ratios.begin(), ratios.end());
    std::size_t keep = ratios.size();
    if (options.robust) {
      const auto drop = static_cast<std::size_t>(static_cast<double>(ratios.size()) / static_cast<double>(k));
      keep = std::max<std::size_t>(1, ratios.size() - std::min(drop, ratios.size()));
    }
    out.values[c] = ratios[keep - 1] * log_n;
  }
  return out;
}

}  // namespace csel
