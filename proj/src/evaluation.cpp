#include "csel/evaluation.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <charconv>
#include <sstream>

namespace csel {
namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw DataError("config key '" + key + "': expected a number, got '" + value + "'");
  }
  return out;
}

Index parse_count(const std::string& key, const std::string& value) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || out < 0) {
    throw DataError("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return static_cast<Index>(out);
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Relative gap between the exact expectation of the estimator and Σℓ, or
// nullopt when some zero-probability point carries positive loss.
std::optional<double> unbiasedness_residual(const SamplingPlan& plan, const VectorXd& losses) {
  for (Index e = 0; e < plan.n(); ++e) {
    if (plan.p[e] <= 0.0 && losses[e] != 0.0) return std::nullopt;
  }
  const double total = stable_sum(losses);
  const double expected = expected_estimate(plan, losses);
  const double scale = std::max(std::abs(total), 1e-300);
  return std::abs(expected - total) / scale;
}

void track_residual(TrialReport& report, const SamplingPlan& plan, const VectorXd& losses) {
  if (auto r = unbiasedness_residual(plan, losses)) {
    report.max_unbiasedness_residual = std::max(report.max_unbiasedness_residual, *r);
  } else {
    ++report.support_deficient;
  }
}

}  // namespace

double delta_error(const VectorXd& losses, const WeightedSample& sample) {
  CompensatedSum total;
  for (Index e = 0; e < losses.size(); ++e) total.add(losses[e]);
  CompensatedSum estimate;
  for (const auto& entry : sample.entries) {
    if (entry.index < 0 || entry.index >= losses.size()) throw DataError("sample index out of range");
    estimate.add(entry.weight * losses[entry.index]);
  }
  return std::abs(total.value() - estimate.value());
}

double theorem1_bound(double epsilon, const VectorXd& losses, const Clustering& clustering,
                      const VectorXd& lambda) {
  return epsilon * (stable_sum(losses) + 2.0 * weighted_cost(clustering, lambda));
}

double rounds_bound(double epsilon, const VectorXd& losses, double phi_lambda) {
  return epsilon * (stable_sum(losses) + phi_lambda);
}

double uniform_bound(double epsilon, const VectorXd& losses) {
  return epsilon * static_cast<double>(losses.size()) * losses.maxCoeff();
}

double regression_bound(double epsilon, const RegressionInstance& instance, const VectorXd& x,
                        double phi_lambda) {
  return epsilon * ((instance.A * x - instance.b).squaredNorm() + phi_lambda);
}

PlantedInstance planted_holder(const PlantedOptions& o, RngStream& rng) {
  if (o.k < 1 || o.n < o.k || o.d < 1) throw DataError("planted instance needs 1 <= k <= n and d >= 1");
  if (!(o.separation > 0.0) || o.lambda_true < 0.0 || o.base_max < 0.0) {
    throw DataError("planted instance needs separation > 0 and non-negative λ, base");
  }
  MatrixXd centers(o.k, o.d);
  if (o.k <= o.d) {
    centers.setZero();
    for (Index i = 0; i < o.k; ++i) centers(i, i) = o.separation / std::sqrt(2.0);
  } else {
    const double side = 2.0 * o.separation * std::ceil(std::pow(static_cast<double>(o.k), 1.0 / static_cast<double>(o.d)));
    Index placed = 0;
    while (placed < o.k) {
      VectorXd cand(o.d);
      for (Index j = 0; j < o.d; ++j) cand[j] = side * rng.uniform();
      bool ok = true;
      for (Index i = 0; i < placed && ok; ++i) ok = (centers.row(i).transpose() - cand).norm() >= o.separation;
      if (ok) centers.row(placed++) = cand.transpose();
    }
  }

  MatrixXd rows(o.n, o.d);
  std::vector<Index> labels(static_cast<std::size_t>(o.n));
  for (Index e = 0; e < o.n; ++e) {
    const Index c = e < o.k ? e : (e - o.k) % o.k;
    labels[static_cast<std::size_t>(e)] = c;
    rows.row(e) = centers.row(c);
    if (e >= o.k) {
      for (Index j = 0; j < o.d; ++j) rows(e, j) += rng.normal();
    }
  }
  VectorXd base(o.k);
  for (Index c = 0; c < o.k; ++c) base[c] = o.base_max * rng.uniform();

  Dataset data(std::move(rows));
  VectorXd losses(o.n);
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(o.k));
  std::vector<Index> sizes(static_cast<std::size_t>(o.k), 0);
  for (Index e = 0; e < o.n; ++e) {
    const Index c = labels[static_cast<std::size_t>(e)];
    const double v = pow_dist(data.row(e), data.row(c), o.z);
    losses[e] = base[c] + o.lambda_true * v;
    acc[static_cast<std::size_t>(c)].add(v);
    ++sizes[static_cast<std::size_t>(c)];
  }

  std::vector<Index> center_rows(static_cast<std::size_t>(o.k));
  for (Index c = 0; c < o.k; ++c) center_rows[static_cast<std::size_t>(c)] = c;
  Clustering truth;
  truth.centers = CenterList::from_rows(data, center_rows);
  truth.assignment = labels;
  truth.cluster_cost.resize(o.k);
  for (Index c = 0; c < o.k; ++c) truth.cluster_cost[c] = acc[static_cast<std::size_t>(c)].value();
  truth.cluster_size = sizes;
  truth.z = o.z;

  PlantedInstance out{std::move(data), LossTable(losses), std::move(truth), VectorXd::Constant(o.k, o.lambda_true),
                      std::move(base)};
  out.loss_sum = stable_sum(losses);
  out.phi_lambda = weighted_cost(out.clustering, out.lambda);
  return out;
}

RademacherInstance rademacher_instance(Index n) {
  if (n < 2 || n % 2 != 0) throw DataError("Rademacher instance needs an even n >= 2");
  MatrixXd rows(n, 1);
  for (Index e = 0; e < n; ++e) rows(e, 0) = e < n / 2 ? -1.0 : 1.0;
  VectorXd losses = rows.col(0);
  return {Dataset(std::move(rows)), std::move(losses)};
}

PlantedRegression planted_regression(const PlantedRegressionOptions& o, RngStream& rng) {
  if (o.clusters < 1 || o.n < o.clusters || o.d < 1) throw DataError("planted regression needs 1 <= clusters <= n");
  MatrixXd means(o.clusters, o.d);
  for (Index c = 0; c < o.clusters; ++c) {
    for (Index j = 0; j < o.d; ++j) means(c, j) = rng.normal();
  }
  VectorXd x_star(o.d);
  VectorXd u(o.d);
  for (Index j = 0; j < o.d; ++j) {
    x_star[j] = rng.normal() / std::sqrt(static_cast<double>(o.d));
    u[j] = rng.normal();
  }
  MatrixXd A(o.n, o.d);
  VectorXd b(o.n);
  for (Index i = 0; i < o.n; ++i) {
    const Index c = i % o.clusters;
    for (Index j = 0; j < o.d; ++j) A(i, j) = means(c, j) + o.cluster_spread * rng.normal();
    const double clean = A.row(i).dot(x_star) + o.wiggle * std::sin(A.row(i).dot(u));
    b[i] = clean + (o.noise > 0.0 ? o.noise * rng.normal() : 0.0);
  }
  PlantedRegression out{RegressionInstance(std::move(A), std::move(b)), x_star, 0.0};
  out.lipschitz = x_star.norm() + o.wiggle * u.norm();
  return out;
}

VectorXd admissible_point(const RegressionInstance& instance, const RegressionPlan& plan, double scale,
                          RngStream& rng) {
  const Eigen::MatrixXd medoids = plan.clustering.centers.positions;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(medoids);
  VectorXd x = plan.x0;
  if (lu.rank() < instance.d()) {
    const Eigen::MatrixXd kernel = lu.kernel();
    VectorXd coeffs(kernel.cols());
    for (Index j = 0; j < coeffs.size(); ++j) coeffs[j] = rng.normal();
    VectorXd delta = kernel * coeffs;
    if (delta.norm() > 0.0) x += scale * delta / delta.norm();
  }
  return x;
}

Index admissibility_violations(const RegressionInstance& instance, const RegressionPlan& plan,
                               const VectorXd& x, const VectorXd& lambda) {
  const VectorXd shift = x - plan.x0;
  Index violations = 0;
  for (Index j = 0; j < instance.n(); ++j) {
    const Index c = plan.clustering.assignment[static_cast<std::size_t>(j)];
    const double lhs = std::abs(plan.clustering.centers.positions.row(c).dot(shift));
    const double rhs = lambda[c] * plan.dist[j];
    if (lhs > rhs + 1e-9 * (1.0 + shift.norm())) ++violations;
  }
  return violations;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key == "pipeline") cfg.pipeline = value;
    else if (key == "n") cfg.n = parse_count(key, value);
    else if (key == "d") cfg.d = parse_count(key, value);
    else if (key == "k") cfg.k = parse_count(key, value);
    else if (key == "z") cfg.z = parse_real(key, value);
    else if (key == "epsilon") cfg.epsilon = parse_real(key, value);
    else if (key == "lambda") cfg.lambda = value;
    else if (key == "trials") cfg.trials = parse_count(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_count(key, value));
    else if (key == "separation") cfg.separation = parse_real(key, value);
    else if (key == "lambda_true") cfg.lambda_true = parse_real(key, value);
    else if (key == "rounds") cfg.rounds = parse_count(key, value);
    else if (key == "delta") cfg.delta = parse_real(key, value);
    else if (key == "s") cfg.sample_count = parse_count(key, value);
    else if (key == "lower_constant") cfg.lower_constant = parse_real(key, value);
    else throw DataError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  static const std::vector<std::string> known = {"data_select", "uniform", "rounds", "regression", "rademacher"};
  if (std::find(known.begin(), known.end(), cfg.pipeline) == known.end()) {
    throw DataError("unknown pipeline '" + cfg.pipeline + "'");
  }
  if (cfg.trials < 1) throw DataError("trials must be at least 1");
  if (cfg.k < 1 || cfg.k > cfg.n) throw DataError("config needs 1 <= k <= n");
  if (cfg.pipeline == "rounds" && cfg.k * cfg.rounds > cfg.n) throw DataError("k·rounds exceeds n");
  return cfg;
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
  std::map<std::string, std::string> out = {
      {"pipeline", pipeline},          {"n", std::to_string(n)},
      {"d", std::to_string(d)},        {"k", std::to_string(k)},
      {"z", format_real(z)},           {"epsilon", format_real(epsilon)},
      {"lambda", lambda},              {"trials", std::to_string(trials)},
      {"seed", std::to_string(seed)},  {"separation", format_real(separation)},
      {"lambda_true", format_real(lambda_true)}, {"rounds", std::to_string(rounds)},
      {"delta", format_real(delta)},   {"lower_constant", format_real(lower_constant)},
  };
  if (sample_count) out["s"] = std::to_string(*sample_count);
  return out;
}

void TrialReport::aggregate() {
  std::vector<double> deltas;
  Index successes = 0;
  CompensatedSum total;
  for (const auto& row : rows) {
    deltas.push_back(row.delta);
    total.add(row.delta);
    if (row.success) ++successes;
  }
  const auto m = static_cast<double>(rows.size());
  success_rate = rows.empty() ? 0.0 : static_cast<double>(successes) / m;
  mean_delta = rows.empty() ? 0.0 : total.value() / m;
  median_delta = median_of(deltas);
  std_error = 0.0;
  if (rows.size() > 1) {
    CompensatedSum sq;
    for (double v : deltas) sq.add((v - mean_delta) * (v - mean_delta));
    std_error = std::sqrt(sq.value() / (m - 1.0)) / std::sqrt(m);
  }
}

TrialReport TrialReport::for_round(Index round) const {
  TrialReport out;
  out.config = config;
  out.max_unbiasedness_residual = max_unbiasedness_residual;
  out.support_deficient = support_deficient;
  for (const auto& row : rows) {
    if (round == 0 || row.round == round) out.rows.push_back(row);
  }
  out.aggregate();
  return out;
}

TrialReport run_trials(const ExperimentConfig& cfg) {
  TrialReport report;
  report.config = cfg;
  RngStream master(cfg.seed, "bench");
  RngStream instance_rng = master.split("instance");
  auto trial_rng = [&](Index t) { return master.split("trial-" + std::to_string(t)); };

  auto supplied_lambda = [&](double planted) -> double {
    if (cfg.lambda == "true") return planted;
    return parse_real("lambda", cfg.lambda);
  };

  if (cfg.pipeline == "data_select" || cfg.pipeline == "uniform" || cfg.pipeline == "rounds") {
    PlantedOptions po;
    po.n = cfg.n;
    po.d = cfg.d;
    po.k = cfg.k;
    po.z = cfg.z;
    po.separation = cfg.separation;
    po.lambda_true = cfg.lambda_true;
    const PlantedInstance planted = planted_holder(po, instance_rng);
    const VectorXd& losses = planted.losses.values();

    for (Index t = 0; t < cfg.trials; ++t) {
      RngStream rng = trial_rng(t);
      if (cfg.pipeline == "data_select") {
        DataSelectConfig dc;
        dc.k = cfg.k;
        dc.epsilon = cfg.epsilon;
        dc.z = cfg.z;
        dc.sample_count = cfg.sample_count;
        Index budget = cfg.k;
        if (cfg.lambda == "auto") {
          dc.lambda_mode = LambdaMode::Auto;
          budget = cfg.n;
        } else {
          dc.lambda = LambdaVector::constant(1, supplied_lambda(cfg.lambda_true));
        }
        LossOracle oracle = LossOracle::from_table(planted.losses, budget);
        const DataSelectResult res = data_select(planted.data, dc, oracle, rng);
        TrialRow row;
        row.trial = t;
        row.delta = delta_error(losses, res.sample);
        row.bound = theorem1_bound(cfg.epsilon, losses, res.clustering, res.lambda.values);
        row.success = row.delta <= row.bound;
        row.queries_used = res.report.queries_used;
        report.rows.push_back(row);
        track_residual(report, res.plan, losses);
      } else if (cfg.pipeline == "uniform") {
        const Index s = cfg.sample_count ? *cfg.sample_count : uniform_sample_size(cfg.epsilon);
        const WeightedSample sample = uniform_select(cfg.n, s, rng);
        TrialRow row;
        row.trial = t;
        row.delta = delta_error(losses, sample);
        row.bound = uniform_bound(cfg.epsilon, losses);
        row.success = row.delta <= row.bound;
        report.rows.push_back(row);
        track_residual(report, SamplingPlan::uniform(cfg.n, s), losses);
      } else {
        if (cfg.lambda == "auto") throw DataError("rounds pipeline needs a supplied Λ");
        RoundsConfig rc;
        rc.k = cfg.k;
        rc.rounds = cfg.rounds;
        rc.epsilon = cfg.epsilon;
        rc.z = cfg.z;
        rc.sample_count = cfg.sample_count;
        rc.lambda = LambdaVector::constant(1, supplied_lambda(cfg.lambda_true));
        LossOracle oracle = LossOracle::from_table(planted.losses, cfg.k * cfg.rounds);
        const auto rounds = data_select_rounds(planted.data, rc, oracle, rng);
        for (const auto& r : rounds) {
          TrialRow row;
          row.trial = t;
          row.round = r.round;
          row.delta = delta_error(losses, r.sample);
          row.bound = rounds_bound(cfg.epsilon, losses, r.phi_lambda);
          row.success = row.delta <= row.bound;
          row.queries_used = r.cumulative_queries;
          report.rows.push_back(row);
          track_residual(report, r.plan, losses);
        }
      }
    }
  } else if (cfg.pipeline == "regression") {
    PlantedRegressionOptions ro;
    ro.n = cfg.n;
    ro.d = cfg.d;
    ro.clusters = cfg.k;
    const PlantedRegression planted = planted_regression(ro, instance_rng);
    for (Index t = 0; t < cfg.trials; ++t) {
      RngStream rng = trial_rng(t);
      RegressionSelectConfig rc;
      rc.k = cfg.k;
      rc.epsilon = cfg.epsilon;
      rc.delta = cfg.delta;
      rc.sample_count = cfg.sample_count;
      rc.lambda = cfg.lambda == "inf" ? LambdaVector::infinity(cfg.k)
                                      : LambdaVector::constant(cfg.k, supplied_lambda(planted.lipschitz));
      const RegressionSelectResult res = regression_select(planted.instance, rc, rng);
      RngStream x_rng = rng.split("x");
      const VectorXd x = admissible_point(planted.instance, res.plan, 0.1, x_rng);
      TrialRow row;
      row.trial = t;
      row.delta = coreset_objective_error(planted.instance, res.sample, x);
      row.bound = regression_bound(cfg.epsilon, planted.instance, x, res.plan.phi_lambda);
      row.success = row.delta <= row.bound;
      row.queries_used = res.plan.labels_read;
      report.rows.push_back(row);
      const VectorXd residual_sq = (planted.instance.A * x - planted.instance.b).array().square().matrix();
      track_residual(report, res.plan.plan, residual_sq);
    }
  } else if (cfg.pipeline == "rademacher") {
    if (cfg.n % 2 != 0) throw DataError("rademacher pipeline needs an even n");
    const RademacherInstance inst = rademacher_instance(cfg.n);
    const Index s = cfg.sample_count ? *cfg.sample_count : uniform_sample_size(cfg.epsilon);
    for (Index t = 0; t < cfg.trials; ++t) {
      RngStream rng = trial_rng(t);
      const WeightedSample sample = uniform_select(cfg.n, s, rng);
      TrialRow row;
      row.trial = t;
      row.delta = delta_error(inst.signed_losses, sample);
      row.bound = cfg.lower_constant * static_cast<double>(cfg.n) / std::sqrt(static_cast<double>(s));
      row.success = row.delta >= row.bound;
      report.rows.push_back(row);
    }
  } else {
    throw DataError("unknown pipeline '" + cfg.pipeline + "'");
  }
  report.aggregate();
  return report;
}

std::vector<LowerBoundRow> lowerbound_sweep(Index n, const std::vector<double>& epsilons, Index trials,
                                            double constant, std::uint64_t seed) {
  const RademacherInstance inst = rademacher_instance(n);
  RngStream master(seed, "lowerbound");
  std::vector<LowerBoundRow> out;
  for (double eps : epsilons) {
    LowerBoundRow row;
    row.epsilon = eps;
    row.s = uniform_sample_size(eps);
    const double scale = static_cast<double>(n) / std::sqrt(static_cast<double>(row.s));
    std::vector<double> estimates;
    Index above = 0;
    RngStream eps_rng = master.split(format_real(eps));
    for (Index t = 0; t < trials; ++t) {
      RngStream rng = eps_rng.split(std::to_string(t));
      const double est = delta_error(inst.signed_losses, uniform_select(n, row.s, rng));
      estimates.push_back(est);
      if (est >= constant * scale) ++above;
    }
    row.median_abs_estimate = median_of(estimates);
    row.empirical_constant = row.median_abs_estimate / scale;
    row.fraction_above = static_cast<double>(above) / static_cast<double>(trials);
    out.push_back(row);
  }
  return out;
}

}  // namespace csel
