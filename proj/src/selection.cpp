#include "csel/selection.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <string>

namespace csel {
namespace {

VectorXd broadcast_lambda(const LambdaVector& lambda, Index k) {
  if (lambda.values.size() == 1) return VectorXd::Constant(k, lambda.values[0]);
  return lambda.values;
}

std::uint64_t hash_doubles(const VectorXd& values, std::uint64_t h) {
  std::string_view bytes(reinterpret_cast<const char*>(values.data()),
                         static_cast<std::size_t>(values.size()) * sizeof(double));
  return fnv1a64(bytes, h);
}

}  // namespace

std::uint64_t SamplingPlan::hash() const {
  std::uint64_t h = fnv1a64(std::to_string(s));
  return hash_doubles(p, h);
}

SamplingPlan SamplingPlan::uniform(Index n, Index s) {
  if (n < 1 || s < 1) throw DataError("uniform plan needs n >= 1 and s >= 1");
  SamplingPlan plan;
  plan.p = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  plan.w = VectorXd::Constant(n, static_cast<double>(n) / static_cast<double>(s));
  plan.s = s;
  plan.denom = 0.0;
  return plan;
}

SamplingPlan SamplingPlan::from_scores(const VectorXd& scores, Index s) {
  if (s < 1) throw DataError("sample count must be positive");
  for (Index e = 0; e < scores.size(); ++e) {
    if (!std::isfinite(scores[e]) || scores[e] < 0.0) {
      throw DataError("sampling scores must be finite and non-negative");
    }
  }
  const double denom = stable_sum(scores);
  if (!(denom > 0.0)) {
    SamplingPlan plan = uniform(scores.size(), s);
    plan.uniform_fallback = true;
    return plan;
  }
  SamplingPlan plan;
  plan.s = s;
  plan.denom = denom;
  plan.p = scores / denom;
  plan.w.resize(scores.size());
  for (Index e = 0; e < scores.size(); ++e) {
    plan.w[e] = plan.p[e] > 0.0 ? 1.0 / (static_cast<double>(s) * plan.p[e]) : 0.0;
  }
  return plan;
}

Index sample_size(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DataError("epsilon must lie in (0, 1]");
  return static_cast<Index>(std::ceil((2.0 + 2.0 * epsilon / 3.0) / (epsilon * epsilon)));
}

Index uniform_sample_size(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DataError("epsilon must lie in (0, 1]");
  // 1/0.1² is 100.00000000000001 in binary floating point
  return static_cast<Index>(std::ceil(1.0 / (epsilon * epsilon) - 1e-9));
}

ProxyLoss proxy_losses(const Dataset& data, const Clustering& clustering, LossOracle& oracle) {
  if (!clustering.centers.snapped()) throw DataError("proxy losses need centers that are dataset rows");
  const Index k = clustering.k();
  VectorXd center_loss(k);
  for (Index c = 0; c < k; ++c) center_loss[c] = oracle.query(clustering.centers.rows[static_cast<std::size_t>(c)]);

  ProxyLoss proxy;
  proxy.lhat.resize(data.n());
  proxy.v.resize(data.n());
  for (Index e = 0; e < data.n(); ++e) {
    const Index c = clustering.assignment[static_cast<std::size_t>(e)];
    proxy.lhat[e] = center_loss[c];
    proxy.v[e] = pow_dist(data.row(e), clustering.centers.positions.row(c), clustering.z);
  }
  return proxy;
}

SamplingPlan sensitivity_plan_with_size(const ProxyLoss& proxy, const Clustering& clustering,
                                        const LambdaVector& lambda, Index s) {
  if (lambda.infinite) throw DataError("sensitivity sampling needs a finite Λ");
  const Index n = proxy.lhat.size();
  if (proxy.v.size() != n || static_cast<Index>(clustering.assignment.size()) != n) {
    throw DataError("proxy and clustering disagree on dataset size");
  }
  const VectorXd lam = broadcast_lambda(lambda, clustering.k());
  LambdaVector{lam, false}.validate(clustering.k());
  VectorXd scores(n);
  for (Index e = 0; e < n; ++e) {
    const double value = proxy.lhat[e] + lam[clustering.assignment[static_cast<std::size_t>(e)]] * proxy.v[e];
    if (std::isnan(value)) throw DataError("NaN in proxy losses");
    scores[e] = value;
  }
  return SamplingPlan::from_scores(scores, s);
}

SamplingPlan sensitivity_plan(const ProxyLoss& proxy, const Clustering& clustering,
                              const LambdaVector& lambda, double epsilon) {
  return sensitivity_plan_with_size(proxy, clustering, lambda, sample_size(epsilon));
}

WeightedSample draw(const SamplingPlan& plan, RngStream& rng) {
  const Index n = plan.n();
  std::vector<double> cumulative(static_cast<std::size_t>(n));
  double running = 0.0;
  Index last_positive = 0;
  for (Index e = 0; e < n; ++e) {
    running += plan.p[e];
    cumulative[static_cast<std::size_t>(e)] = running;
    if (plan.p[e] > 0.0) last_positive = e;
  }

  WeightedSample sample;
  sample.seed = rng.seed();
  sample.plan_hash = plan.hash();
  sample.entries.reserve(static_cast<std::size_t>(plan.s));
  for (Index j = 0; j < plan.s; ++j) {
    const double u = rng.uniform() * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    Index idx = it == cumulative.end() ? last_positive : static_cast<Index>(it - cumulative.begin());
    if (plan.p[idx] <= 0.0) idx = last_positive;
    sample.entries.push_back({idx, plan.w[idx]});
  }
  return sample;
}

DataSelectResult data_select(const Dataset& data, const DataSelectConfig& config, LossOracle& oracle,
                             RngStream& rng) {
  if (config.k < 1 || config.k > data.n()) throw DataError("k outside [1, n]");
  const Index s = config.sample_count ? *config.sample_count : sample_size(config.epsilon);

  RngStream seed_rng = rng.split("seed");
  RngStream lambda_rng = rng.split("lambda");
  RngStream draw_rng = rng.split("draw");

  DataSelectResult result;
  CenterList seeds = dz_seed(data, config.k, config.z, seed_rng);
  Clustering refined = refine(data, std::move(seeds), config.z, config.clustering);
  result.clustering = snap_centers(data, refined, config.clustering.threads);

  const Index before = oracle.queries_used();
  result.proxy = proxy_losses(data, result.clustering, oracle);
  const Index center_queries = oracle.queries_used() - before;

  if (config.lambda_mode == LambdaMode::Auto) {
    result.lambda = estimate_lambda(data, result.clustering, oracle, lambda_rng, config.lambda_options);
  } else {
    result.lambda.values = broadcast_lambda(config.lambda, config.k);
    result.lambda.validate(config.k);
  }

  result.plan = sensitivity_plan_with_size(result.proxy, result.clustering, result.lambda, s);
  result.sample = draw(result.plan, draw_rng);
  result.sample.seed = rng.seed();
  result.sample.queries_used = oracle.queries_used();

  SelectionReport& r = result.report;
  r.s = s;
  r.k = config.k;
  r.epsilon = config.epsilon;
  r.z = config.z;
  r.lambda_mode = config.lambda_mode == LambdaMode::Auto ? "auto" : "supplied";
  r.queries_used = oracle.queries_used() - before;
  r.center_queries = center_queries;
  r.lambda_queries = r.queries_used - center_queries;
  r.phi_lambda = weighted_cost(result.clustering, result.lambda.values);
  r.phi_z = result.clustering.total_cost();
  r.denom = result.plan.denom;
  r.uniform_fallback = result.plan.uniform_fallback;
  r.seed = rng.seed();
  return result;
}

std::vector<RoundResult> data_select_rounds(const Dataset& data, const RoundsConfig& config,
                                            LossOracle& oracle, RngStream& rng) {
  if (config.k < 1 || config.rounds < 1) throw DataError("k and rounds must be positive");
  const Index total = config.k * config.rounds;
  if (total > data.n()) throw DataError("k·rounds exceeds the dataset size");
  VectorXd lam_all;
  if (config.lambda.values.size() == 1) {
    lam_all = VectorXd::Constant(total, config.lambda.values[0]);
  } else if (config.lambda.values.size() == total) {
    lam_all = config.lambda.values;
  } else {
    throw DataError("Λ must have length 1 or k·rounds");
  }
  LambdaVector{lam_all, false}.validate(total);
  const Index s = config.sample_count ? *config.sample_count : sample_size(config.epsilon);

  RngStream prefix_rng = rng.split("prefix");
  const CenterList ordering = dz_seed(data, total, config.z, prefix_rng);
  const Index before = oracle.queries_used();

  std::vector<RoundResult> out;
  for (Index i = 1; i <= config.rounds; ++i) {
    for (Index pos = (i - 1) * config.k; pos < i * config.k; ++pos) {
      oracle.query(ordering.rows[static_cast<std::size_t>(pos)]);
    }
    RoundResult round;
    round.round = i;
    round.clustering = assign(data, ordering.prefix(i * config.k), config.z);
    // Center losses come from the cache: every prefix center was queried above.
    round.proxy = proxy_losses(data, round.clustering, oracle);
    LambdaVector lam{lam_all.head(i * config.k), false};
    round.plan = sensitivity_plan_with_size(round.proxy, round.clustering, lam, s);
    RngStream draw_rng = rng.split("round-" + std::to_string(i));
    round.sample = draw(round.plan, draw_rng);
    round.sample.seed = rng.seed();
    round.cumulative_queries = oracle.queries_used() - before;
    round.sample.queries_used = round.cumulative_queries;
    round.phi_lambda = weighted_cost(round.clustering, lam.values);
    out.push_back(std::move(round));
  }
  return out;
}

WeightedSample uniform_select(Index n, Index s, RngStream& rng) {
  SamplingPlan plan = SamplingPlan::uniform(n, s);
  WeightedSample sample;
  sample.seed = rng.seed();
  sample.plan_hash = plan.hash();
  const double weight = static_cast<double>(n) / static_cast<double>(s);
  for (Index j = 0; j < s; ++j) {
    sample.entries.push_back({static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))), weight});
  }
  return sample;
}

std::vector<Index> kcenter_select(const Dataset& data, Index k, RngStream& rng) {
  if (k < 1 || k > data.n()) throw DataError("k outside [1, n]");
  const Index n = data.n();
  std::vector<double> mindist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  std::vector<Index> out;
  Index next = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  while (true) {
    out.push_back(next);
    taken[static_cast<std::size_t>(next)] = 1;
    if (static_cast<Index>(out.size()) == k) break;
    for (Index e = 0; e < n; ++e) {
      mindist[static_cast<std::size_t>(e)] =
          std::min(mindist[static_cast<std::size_t>(e)], (data.row(e) - data.row(next)).squaredNorm());
    }
    double best = -1.0;
    for (Index e = 0; e < n; ++e) {
      if (taken[static_cast<std::size_t>(e)]) continue;
      if (mindist[static_cast<std::size_t>(e)] > best) {
        best = mindist[static_cast<std::size_t>(e)];
        next = e;
      }
    }
  }
  return out;
}

std::vector<Index> diversity_select(const Dataset& data, Index k, double z, RngStream& rng,
                                    const ClusteringOptions& options) {
  CenterList seeds = dz_seed(data, k, z, rng);
  Clustering refined = refine(data, std::move(seeds), z, options);
  Clustering snapped = snap_centers(data, refined, options.threads);
  return snapped.centers.rows;
}

VectorXd extrapolate_losses(const Dataset& data, const Clustering& clustering,
                            const VectorXd& center_losses, double lambda, double z) {
  if (center_losses.size() != clustering.k()) throw DataError("one center loss per cluster required");
  if (!std::isfinite(lambda) || lambda < 0.0) throw DataError("λ must be finite and >= 0");
  VectorXd out(data.n());
  for (Index e = 0; e < data.n(); ++e) {
    const Index c = clustering.assignment[static_cast<std::size_t>(e)];
    out[e] = center_losses[c] + lambda * pow_dist(data.row(e), clustering.centers.positions.row(c), z);
  }
  return out;
}

double expected_estimate(const SamplingPlan& plan, const VectorXd& losses) {
  if (losses.size() != plan.n()) throw DataError("loss vector length does not match plan");
  CompensatedSum acc;
  const auto s = static_cast<double>(plan.s);
  for (Index e = 0; e < plan.n(); ++e) {
    if (plan.p[e] > 0.0) acc.add(s * plan.p[e] * plan.w[e] * losses[e]);
  }
  return acc.value();
}

}  // namespace csel
