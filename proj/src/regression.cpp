#include "csel/regression.hpp"

#include <Eigen/QR>
#include <limits>
#include <set>

namespace csel {

RegressionInstance::RegressionInstance(MatrixXd a, VectorXd targets) : A(std::move(a)), b(std::move(targets)) {
  if (A.rows() < 1 || A.cols() < 1) throw DataError("regression instance needs a non-empty matrix");
  if (A.rows() != b.size()) throw DataError("regression targets do not match row count");
  if (!A.allFinite() || !b.allFinite()) throw DataError("regression instance has non-finite entries");
}

VectorXd leverage_scores(const MatrixXd& A) {
  const Eigen::MatrixXd dense = A;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dense);
  const Index rank = qr.rank();
  if (rank == 0) return VectorXd::Zero(A.rows());
  Eigen::MatrixXd thin_q = Eigen::MatrixXd::Identity(A.rows(), rank);
  thin_q.applyOnTheLeft(qr.householderQ());
  return thin_q.rowwise().squaredNorm();
}

WeightedSample leverage_select(const RegressionInstance& instance, Index s, RngStream& rng) {
  const SamplingPlan plan = SamplingPlan::from_scores(leverage_scores(instance.A), s);
  return draw(plan, rng);
}

Index regression_sample_size(Index d, double epsilon, double delta) {
  if (d < 1) throw DataError("dimension must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DataError("epsilon must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw DataError("delta must lie in (0, 1)");
  return static_cast<Index>(
      std::ceil(8.0 * static_cast<double>(d) * std::log(1.0 / delta) / (epsilon * epsilon)));
}

RegressionSelectResult regression_select(const RegressionInstance& instance,
                                         const RegressionSelectConfig& config, RngStream& rng) {
  const Index n = instance.n();
  const Index k = config.k;
  if (k < 1 || k > n) throw DataError("k outside [1, n]");
  const Index s = config.sample_count ? *config.sample_count
                                      : regression_sample_size(instance.d(), config.epsilon, config.delta);

  const Dataset rows(instance.A);
  RngStream medoid_rng = rng.split("medoids");
  RegressionSelectResult result;
  RegressionPlan& plan = result.plan;
  plan.clustering = kmedoids(rows, k, medoid_rng, config.clustering);
  const Clustering& cl = plan.clustering;

  // The k medoid targets are the only labels read.
  VectorXd center_b(k);
  VectorXd sizes(k);
  std::set<Index> read;
  for (Index c = 0; c < k; ++c) {
    const Index row = cl.centers.rows[static_cast<std::size_t>(c)];
    center_b[c] = instance.b[row];
    read.insert(row);
    sizes[c] = static_cast<double>(cl.cluster_size[static_cast<std::size_t>(c)]);
  }
  plan.labels_read = static_cast<Index>(read.size());
  plan.x0 = solve_least_squares(cl.centers.positions, center_b, &sizes);

  VectorXd center_v(k);
  for (Index c = 0; c < k; ++c) {
    const double r = cl.centers.positions.row(c).dot(plan.x0) - center_b[c];
    center_v[c] = r * r;
  }

  VectorXd lam;
  if (!config.lambda.infinite) {
    lam = config.lambda.values.size() == 1 ? VectorXd::Constant(k, config.lambda.values[0]) : config.lambda.values;
    LambdaVector{lam, false}.validate(k);
  }

  plan.dist.resize(n);
  plan.v.resize(n);
  VectorXd scores(n);
  for (Index i = 0; i < n; ++i) {
    const Index c = cl.assignment[static_cast<std::size_t>(i)];
    plan.dist[i] = (instance.A.row(i) - cl.centers.positions.row(c)).norm();
    plan.v[i] = center_v[c];
    scores[i] = config.lambda.infinite ? plan.dist[i] : lam[c] * plan.dist[i] + plan.v[i];
  }
  plan.phi_lambda = config.lambda.infinite ? std::numeric_limits<double>::infinity() : weighted_cost(cl, lam);
  plan.plan = SamplingPlan::from_scores(scores, s);

  RngStream draw_rng = rng.split("draw");
  result.sample = draw(plan.plan, draw_rng);
  result.sample.seed = rng.seed();
  result.sample.queries_used = plan.labels_read;
  return result;
}

double coreset_objective_error(const RegressionInstance& instance, const WeightedSample& sample,
                               const VectorXd& x) {
  if (x.size() != instance.d()) throw DataError("x has the wrong dimension");
  const VectorXd residual = instance.A * x - instance.b;
  CompensatedSum full;
  for (Index i = 0; i < residual.size(); ++i) full.add(residual[i] * residual[i]);
  CompensatedSum approx;
  for (const auto& entry : sample.entries) {
    const double r = residual[entry.index];
    approx.add(entry.weight * r * r);
  }
  return std::abs(approx.value() - full.value());
}

VectorXd fit_on_sample(const RegressionInstance& instance, const WeightedSample& sample) {
  const auto m = static_cast<Index>(sample.entries.size());
  if (m == 0) throw DataError("cannot fit on an empty sample");
  MatrixXd rows(m, instance.d());
  VectorXd targets(m);
  VectorXd weights(m);
  for (Index j = 0; j < m; ++j) {
    const auto& entry = sample.entries[static_cast<std::size_t>(j)];
    rows.row(j) = instance.A.row(entry.index);
    targets[j] = instance.b[entry.index];
    weights[j] = entry.weight;
  }
  return solve_least_squares(rows, targets, &weights);
}

double r2_score(const VectorXd& predictions, const VectorXd& b) {
  if (predictions.size() != b.size() || b.size() == 0) throw DataError("R²: length mismatch");
  const double mean = stable_sum(b) / static_cast<double>(b.size());
  CompensatedSum residual;
  CompensatedSum total;
  for (Index i = 0; i < b.size(); ++i) {
    residual.add((b[i] - predictions[i]) * (b[i] - predictions[i]));
    total.add((b[i] - mean) * (b[i] - mean));
  }
  if (!(total.value() > 0.0)) throw UndefinedMetric("R² is undefined for a constant target");
  return 1.0 - residual.value() / total.value();
}

}  // namespace csel
