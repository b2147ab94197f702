#include "csel/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <sys/stat.h>

#include "CLI11.hpp"
#include "csel/clustering.hpp"
#include "csel/evaluation.hpp"
#include "csel/io.hpp"
#include "csel/lambda.hpp"
#include "csel/oracle.hpp"
#include "csel/regression.hpp"
#include "csel/selection.hpp"

namespace csel {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Files are staged here and written only after the whole command succeeded.
struct Outputs {
  std::string dir;
  std::vector<std::pair<std::string, std::string>> files;

  void add(const std::string& name, std::string content) { files.emplace_back(name, std::move(content)); }
  json names() const {
    json out = json::array();
    for (const auto& f : files) out.push_back(f.first);
    return out;
  }
  void flush() const {
    if (!dir.empty()) std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files) {
      write_text((std::filesystem::path(dir) / name).string(), content);
    }
  }
};

struct Timer {
  Clock::time_point start = Clock::now();
  double ms() const { return std::chrono::duration<double, std::milli>(Clock::now() - start).count(); }
};

bool parse_number(const std::string& text, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(text, &used);
    return used == text.size();
  } catch (const std::exception&) {
    return false;
  }
}

// "cmd:..." and "file:..." force the interpretation; otherwise an existing
// non-executable file is a loss table and anything else a shell command.
LossOracle open_oracle(const std::string& spec, Index n, Index limit) {
  if (spec.rfind("cmd:", 0) == 0) return LossOracle::from_command(spec.substr(4), n, limit);
  std::string path = spec;
  bool is_file = false;
  if (spec.rfind("file:", 0) == 0) {
    path = spec.substr(5);
    is_file = true;
  } else {
    struct stat st {};
    is_file = ::stat(spec.c_str(), &st) == 0 && S_ISREG(st.st_mode) && (st.st_mode & 0111) == 0;
  }
  if (is_file) return LossOracle::from_table(load_losses(path, n), limit);
  return LossOracle::from_command(spec, n, limit);
}

// Λ given as a number or as a file with one value (shared) or one per cluster.
VectorXd parse_lambda_values(const std::string& spec) {
  double value = 0.0;
  if (parse_number(spec, value)) return VectorXd::Constant(1, value);
  return load_vector(spec);
}

Clustering build_clustering(const Dataset& data, Index k, double z, RngStream& rng, const ClusteringOptions& opt) {
  CenterList seeds = dz_seed(data, k, z, rng);
  Clustering refined = refine(data, std::move(seeds), z, opt);
  return snap_centers(data, refined, opt.threads);
}

json clustering_summary(const Clustering& cl) {
  json rows = json::array();
  for (Index r : cl.centers.rows) rows.push_back(r);
  std::vector<Index> sizes = cl.cluster_size;
  return {{"k", cl.k()}, {"z", cl.z}, {"iterations", cl.iterations}, {"phi_z", cl.total_cost()},
          {"center_rows", rows}, {"cluster_sizes", sizes}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct Common {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out-dir", c.out_dir, "Directory for output files")->capture_default_str();
  app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app->add_option("--threads", c.threads, "Threads for clustering")->check(CLI::Range(1, 256))->capture_default_str();
}

json base_report(const std::string& command, const Common& c) {
  return {{"schema_version", kReportSchemaVersion}, {"command", command}, {"seed", c.seed}};
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Query-efficient data selection via clustering and sensitivity sampling", "csel"};
  app.require_subcommand(1);

  // Each subcommand fills `run`, executed after parsing succeeded.
  std::function<Outputs()> run;

  // cluster
  Common cc;
  std::string cl_data;
  Index cl_k = 0;
  double cl_z = 2.0;
  int cl_iters = 100;
  auto* cluster = app.add_subcommand("cluster", "D^z seeding, refinement and snapping; writes centers and assignment");
  cluster->add_option("--data", cl_data, "Matrix file (CSV or binary)")->required();
  cluster->add_option("--k", cl_k, "Number of centers")->required()->check(CLI::PositiveNumber);
  cluster->add_option("--z", cl_z, "Distance exponent")->capture_default_str()->check(CLI::PositiveNumber);
  cluster->add_option("--max-iters", cl_iters, "Refinement iterations")->capture_default_str();
  add_common(cluster, cc);
  cluster->callback([&] {
    run = [&]() {
      Timer timer;
      const Dataset data = load_matrix(cl_data);
      RngStream rng(cc.seed, "cluster");
      ClusteringOptions opt;
      opt.threads = cc.threads;
      opt.max_iters = cl_iters;
      const Clustering cl = build_clustering(data, cl_k, cl_z, rng, opt);
      Outputs o{cc.out_dir, {}};
      o.add("centers.csv", centers_csv(cl));
      o.add("assignment.csv", assignment_csv(cl));
      json r = base_report("cluster", cc);
      r["config"] = {{"data", cl_data}, {"k", cl_k}, {"z", cl_z}, {"max_iters", cl_iters}};
      r["clustering"] = clustering_summary(cl);
      r["cost_trace"] = cl.cost_trace;
      r["outputs"] = o.names();
      r["timings"] = {{"total_ms", timer.ms()}};
      o.add("report.json", dump(r));
      return o;
    };
  });

  // select
  Common sc;
  std::string s_data, s_oracle, s_lambda;
  Index s_k = 0, s_budget = 0, s_limit = 0, s_count = 0, s_t = 0;
  double s_eps = 0.5, s_z = 2.0, s_p = 0.2;
  bool s_robust = false;
  auto* select = app.add_subcommand("select", "One-round sensitivity selection");
  select->add_option("--data", s_data, "Matrix file (CSV or binary)")->required();
  select->add_option("--oracle", s_oracle, "Loss file, or command speaking the index/loss line protocol")->required();
  auto* k_opt = select->add_option("--k", s_k, "Number of clusters")->check(CLI::PositiveNumber);
  select->add_option("--budget", s_budget, "Selection budget B: k = ceil(0.2 B), s = B - k")
      ->check(CLI::PositiveNumber)
      ->excludes(k_opt);
  select->add_option("--epsilon", s_eps, "Accuracy parameter in (0, 1]")->capture_default_str();
  select->add_option("--z", s_z, "Distance exponent")->capture_default_str()->check(CLI::PositiveNumber);
  select->add_option("--lambda", s_lambda, "Hölder constants: number, file, or 'auto'")->required();
  select->add_option("--s", s_count, "Sample size override")->check(CLI::PositiveNumber);
  select->add_option("--query-limit", s_limit, "Cap on distinct oracle queries")->check(CLI::NonNegativeNumber);
  select->add_option("--t", s_t, "Auto Λ: queries per cluster");
  select->add_option("--p", s_p, "Auto Λ: tail mass p")->capture_default_str();
  select->add_flag("--robust", s_robust, "Auto Λ: drop the top 1/k sampled ratios");
  add_common(select, sc);
  select->callback([&] {
    run = [&]() {
      if (s_k == 0 && s_budget == 0) throw CLI::ValidationError("select", "one of --k or --budget is required");
      Timer timer;
      const Dataset data = load_matrix(s_data);
      DataSelectConfig dc;
      dc.epsilon = s_eps;
      dc.z = s_z;
      dc.clustering.threads = sc.threads;
      if (s_budget > 0) {
        dc.k = static_cast<Index>(std::ceil(0.2 * static_cast<double>(s_budget) - 1e-9));
        if (s_budget - dc.k < 1) throw DataError("budget leaves no room for sampled points");
        dc.sample_count = s_budget - dc.k;
      } else {
        dc.k = s_k;
      }
      if (s_count > 0) dc.sample_count = s_count;
      if (s_lambda == "auto") {
        dc.lambda_mode = LambdaMode::Auto;
        dc.lambda_options.per_cluster = s_t;
        dc.lambda_options.p = s_p;
        dc.lambda_options.robust = s_robust;
      } else {
        dc.lambda.values = parse_lambda_values(s_lambda);
      }
      const Index limit = !select->get_option("--query-limit")->empty() ? s_limit : data.n();
      LossOracle oracle = open_oracle(s_oracle, data.n(), limit);
      RngStream rng(sc.seed, "select");
      const DataSelectResult res = data_select(data, dc, oracle, rng);
      oracle.finish();

      Outputs o{sc.out_dir, {}};
      o.add("sample.csv", sample_csv(res.sample));
      o.add("centers.csv", centers_csv(res.clustering));
      o.add("assignment.csv", assignment_csv(res.clustering));
      o.add("lambda.csv", vector_csv("lambda", res.lambda.values));
      const SelectionReport& sr = res.report;
      json r = base_report("select", sc);
      r["config"] = {{"data", s_data}, {"oracle", s_oracle}, {"k", dc.k}, {"budget", s_budget},
                     {"epsilon", s_eps}, {"z", s_z}, {"lambda", s_lambda}, {"query_limit", limit}};
      r["s"] = sr.s;
      r["k"] = sr.k;
      r["epsilon"] = sr.epsilon;
      r["z"] = sr.z;
      r["lambda_mode"] = sr.lambda_mode;
      r["queries_used"] = sr.queries_used;
      r["center_queries"] = sr.center_queries;
      r["lambda_queries"] = sr.lambda_queries;
      r["phi_lambda"] = sr.phi_lambda;
      r["phi_z"] = sr.phi_z;
      r["denominator"] = sr.denom;
      r["uniform_fallback"] = sr.uniform_fallback;
      r["plan_hash"] = res.plan.hash();
      r["clustering"] = clustering_summary(res.clustering);
      r["outputs"] = o.names();
      r["timings"] = {{"total_ms", timer.ms()}};
      o.add("report.json", dump(r));
      return o;
    };
  });

  // select-rounds
  Common rc;
  std::string r_data, r_oracle, r_lambda;
  Index r_k = 0, r_rounds = 1, r_limit = 0, r_count = 0;
  double r_eps = 0.5, r_z = 2.0;
  auto* rounds = app.add_subcommand("select-rounds", "r-round adaptive selection over one prefix ordering");
  rounds->add_option("--data", r_data, "Matrix file (CSV or binary)")->required();
  rounds->add_option("--oracle", r_oracle, "Loss file or command")->required();
  rounds->add_option("--k", r_k, "Centers added per round")->required()->check(CLI::PositiveNumber);
  rounds->add_option("--rounds", r_rounds, "Number of rounds r")->capture_default_str()->check(CLI::PositiveNumber);
  rounds->add_option("--epsilon", r_eps, "Accuracy parameter in (0, 1]")->capture_default_str();
  rounds->add_option("--z", r_z, "Distance exponent")->capture_default_str()->check(CLI::PositiveNumber);
  rounds->add_option("--lambda", r_lambda, "Number, or file with 1 or k·r values")->required();
  rounds->add_option("--s", r_count, "Per-round sample size override")->check(CLI::PositiveNumber);
  rounds->add_option("--query-limit", r_limit, "Cap on distinct oracle queries")->check(CLI::NonNegativeNumber);
  add_common(rounds, rc);
  rounds->callback([&] {
    run = [&]() {
      Timer timer;
      const Dataset data = load_matrix(r_data);
      RoundsConfig cfg;
      cfg.k = r_k;
      cfg.rounds = r_rounds;
      cfg.epsilon = r_eps;
      cfg.z = r_z;
      cfg.lambda.values = parse_lambda_values(r_lambda);
      if (r_count > 0) cfg.sample_count = r_count;
      const Index limit = !rounds->get_option("--query-limit")->empty() ? r_limit : data.n();
      LossOracle oracle = open_oracle(r_oracle, data.n(), limit);
      RngStream rng(rc.seed, "select-rounds");
      const auto results = data_select_rounds(data, cfg, oracle, rng);
      oracle.finish();

      Outputs o{rc.out_dir, {}};
      json per_round = json::array();
      for (const auto& rr : results) {
        const std::string name = "sample_round" + std::to_string(rr.round) + ".csv";
        o.add(name, sample_csv(rr.sample));
        per_round.push_back({{"round", rr.round}, {"s", rr.plan.s}, {"centers", rr.clustering.k()},
                             {"cumulative_queries", rr.cumulative_queries}, {"phi_lambda", rr.phi_lambda},
                             {"phi_z", rr.clustering.total_cost()}, {"sample", name}});
      }
      o.add("prefix.csv", centers_csv(results.back().clustering));
      json r = base_report("select-rounds", rc);
      r["config"] = {{"data", r_data}, {"oracle", r_oracle}, {"k", r_k}, {"rounds", r_rounds},
                     {"epsilon", r_eps}, {"z", r_z}, {"lambda", r_lambda}, {"query_limit", limit}};
      r["k"] = r_k;
      r["epsilon"] = r_eps;
      r["queries_used"] = results.back().cumulative_queries;
      r["rounds"] = per_round;
      r["outputs"] = o.names();
      r["timings"] = {{"total_ms", timer.ms()}};
      o.add("report.json", dump(r));
      return o;
    };
  });

  // select-regression
  Common gc;
  std::string g_data, g_features, g_targets, g_lambda;
  Index g_k = 0, g_count = 0;
  double g_eps = 0.5, g_delta = 0.1;
  bool g_inf = false;
  auto* regression = app.add_subcommand("select-regression", "Row selection for least squares");
  auto* g_data_opt = regression->add_option("--data", g_data, "CSV whose last column is the target");
  auto* g_feat_opt = regression->add_option("--features", g_features, "Feature matrix file")->excludes(g_data_opt);
  regression->add_option("--targets", g_targets, "Target vector file")->needs(g_feat_opt);
  regression->add_option("--k", g_k, "Number of medoids")->required()->check(CLI::PositiveNumber);
  regression->add_option("--epsilon", g_eps, "Accuracy parameter in (0, 1]")->capture_default_str();
  regression->add_option("--delta", g_delta, "Failure probability")->capture_default_str();
  auto* g_lambda_opt = regression->add_option("--lambda", g_lambda, "Number or per-cluster file");
  regression->add_flag("--lambda-inf", g_inf, "Sample by distance to the medoid only")->excludes(g_lambda_opt);
  regression->add_option("--s", g_count, "Sample size override")->check(CLI::PositiveNumber);
  add_common(regression, gc);
  regression->callback([&] {
    run = [&]() {
      if (g_data.empty() == g_features.empty()) throw CLI::ValidationError("select-regression", "give --data or --features/--targets");
      if (!g_features.empty() && g_targets.empty()) throw CLI::ValidationError("select-regression", "--targets is required with --features");
      if (g_lambda.empty() && !g_inf) throw CLI::ValidationError("select-regression", "give --lambda or --lambda-inf");
      Timer timer;
      const RegressionInstance inst = g_data.empty() ? load_regression(g_features, g_targets) : load_regression(g_data);
      RegressionSelectConfig cfg;
      cfg.k = g_k;
      cfg.epsilon = g_eps;
      cfg.delta = g_delta;
      cfg.clustering.threads = gc.threads;
      if (g_count > 0) cfg.sample_count = g_count;
      cfg.lambda = g_inf ? LambdaVector::infinity(g_k) : LambdaVector{parse_lambda_values(g_lambda), false};
      RngStream rng(gc.seed, "select-regression");
      const RegressionSelectResult res = regression_select(inst, cfg, rng);

      Outputs o{gc.out_dir, {}};
      o.add("sample.csv", sample_csv(res.sample));
      o.add("medoids.csv", centers_csv(res.plan.clustering));
      o.add("x0.csv", vector_csv("x0", res.plan.x0));
      json r = base_report("select-regression", gc);
      r["config"] = {{"k", g_k}, {"epsilon", g_eps}, {"delta", g_delta},
                     {"lambda", g_inf ? std::string("inf") : g_lambda}};
      r["config"]["data"] = g_data.empty() ? g_features : g_data;
      r["s"] = res.plan.plan.s;
      r["k"] = g_k;
      r["epsilon"] = g_eps;
      r["labels_read"] = res.plan.labels_read;
      r["queries_used"] = res.plan.labels_read;
      r["phi_lambda"] = g_inf ? json(nullptr) : json(res.plan.phi_lambda);
      r["phi_z"] = res.plan.clustering.total_cost();
      r["plan_hash"] = res.plan.plan.hash();
      r["outputs"] = o.names();
      r["timings"] = {{"total_ms", timer.ms()}};
      o.add("report.json", dump(r));
      return o;
    };
  });

  // lambda-estimate
  Common lc;
  std::string l_data, l_oracle;
  Index l_k = 0, l_t = 0, l_limit = 0;
  double l_z = 2.0, l_p = 0.2;
  bool l_robust = false;
  auto* lest = app.add_subcommand("lambda-estimate", "Query-efficient upper estimate of the per-cluster Hölder constants");
  lest->add_option("--data", l_data, "Matrix file (CSV or binary)")->required();
  lest->add_option("--oracle", l_oracle, "Loss file or command")->required();
  lest->add_option("--k", l_k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  lest->add_option("--z", l_z, "Distance exponent")->capture_default_str()->check(CLI::PositiveNumber);
  lest->add_option("--t", l_t, "Queries per cluster (default from k and p)");
  lest->add_option("--p", l_p, "Tail mass p in (0, 1)")->capture_default_str();
  lest->add_flag("--robust", l_robust, "Drop the top 1/k sampled ratios");
  lest->add_option("--query-limit", l_limit, "Cap on distinct oracle queries")->check(CLI::NonNegativeNumber);
  add_common(lest, lc);
  lest->callback([&] {
    run = [&]() {
      Timer timer;
      const Dataset data = load_matrix(l_data);
      const Index limit = !lest->get_option("--query-limit")->empty() ? l_limit : data.n();
      LossOracle oracle = open_oracle(l_oracle, data.n(), limit);
      RngStream rng(lc.seed, "lambda-estimate");
      ClusteringOptions opt;
      opt.threads = lc.threads;
      RngStream seed_rng = rng.split("seed");
      const Clustering cl = build_clustering(data, l_k, l_z, seed_rng, opt);
      LambdaEstimateOptions lo;
      lo.per_cluster = l_t;
      lo.p = l_p;
      lo.robust = l_robust;
      RngStream lambda_rng = rng.split("lambda");
      const LambdaVector lam = estimate_lambda(data, cl, oracle, lambda_rng, lo);
      oracle.finish();

      Outputs o{lc.out_dir, {}};
      o.add("lambda.csv", vector_csv("lambda", lam.values));
      o.add("centers.csv", centers_csv(cl));
      json r = base_report("lambda-estimate", lc);
      r["config"] = {{"data", l_data}, {"oracle", l_oracle}, {"k", l_k}, {"z", l_z}, {"p", l_p},
                     {"robust", l_robust}, {"query_limit", limit}};
      r["t"] = l_t > 0 ? l_t : default_queries_per_cluster(l_k, l_p);
      r["k"] = l_k;
      r["queries_used"] = oracle.queries_used();
      r["lambda"] = std::vector<double>(lam.values.data(), lam.values.data() + lam.values.size());
      r["phi_lambda"] = weighted_cost(cl, lam.values);
      r["outputs"] = o.names();
      r["timings"] = {{"total_ms", timer.ms()}};
      o.add("report.json", dump(r));
      return o;
    };
  });

  // holder-diagnose
  Common hc;
  std::string h_data, h_losses, h_column;
  Index h_k = 0;
  double h_z = 2.0;
  std::vector<double> h_pct = kDefaultPercentiles;
  auto* holder = app.add_subcommand("holder-diagnose", "Percentiles of per-point Hölder ratios (needs all losses)");
  holder->add_option("--data", h_data, "Matrix file (CSV or binary)")->required();
  holder->add_option("--losses", h_losses, "Full loss file")->required();
  holder->add_option("--column", h_column, "Loss column name in a headed CSV");
  holder->add_option("--k", h_k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  holder->add_option("--z", h_z, "Distance exponent")->capture_default_str()->check(CLI::PositiveNumber);
  holder->add_option("--percentiles", h_pct, "Percentiles to report")->delimiter(',');
  add_common(holder, hc);
  holder->callback([&] {
    run = [&]() {
      Timer timer;
      const Dataset data = load_matrix(h_data);
      const LossTable losses = load_losses(h_losses, data.n(), h_column);
      RngStream rng(hc.seed, "holder-diagnose");
      ClusteringOptions opt;
      opt.threads = hc.threads;
      const Clustering cl = build_clustering(data, h_k, h_z, rng, opt);
      const RatioTable ratios = holder_ratios(data, cl, losses, h_z);
      const auto rows = holder_percentiles(ratios, h_pct);

      Outputs o{hc.out_dir, {}};
      std::string csv = "percentile,ratio\n";
      json pct = json::array();
      for (const auto& row : rows) {
        csv += format_real(row.percentile) + ',' + format_real(row.value) + '\n';
        pct.push_back({{"percentile", row.percentile}, {"ratio", row.value}});
      }
      o.add("percentiles.csv", csv);
      json r = base_report("holder-diagnose", hc);
      r["config"] = {{"data", h_data}, {"losses", h_losses}, {"k", h_k}, {"z", h_z}};
      r["ratios"] = ratios.ratios.size();
      r["percentiles"] = pct;
      r["outputs"] = o.names();
      r["timings"] = {{"total_ms", timer.ms()}};
      o.add("report.json", dump(r));
      return o;
    };
  });

  // evaluate
  Common ec;
  std::string e_sample, e_losses, e_regression;
  auto* evaluate = app.add_subcommand("evaluate", "Δ(S) against full losses, or R² of a fit on the sample");
  evaluate->add_option("--sample", e_sample, "Sample CSV (index,weight)")->required();
  auto* e_losses_opt = evaluate->add_option("--losses", e_losses, "Full loss file");
  evaluate->add_option("--regression", e_regression, "Regression CSV (last column = target)")->excludes(e_losses_opt);
  add_common(evaluate, ec);
  evaluate->callback([&] {
    run = [&]() {
      if (e_losses.empty() == e_regression.empty()) throw CLI::ValidationError("evaluate", "give exactly one of --losses or --regression");
      const WeightedSample sample = load_sample(e_sample);
      json r = base_report("evaluate", ec);
      r["config"] = {{"sample", e_sample}};
      r["s"] = sample.size();
      if (!e_losses.empty()) {
        const VectorXd losses = load_vector(e_losses);
        for (const auto& entry : sample.entries) {
          if (entry.index >= losses.size()) throw DataError("sample index " + std::to_string(entry.index) + " out of range");
        }
        const double delta = delta_error(losses, sample);
        r["config"]["losses"] = e_losses;
        r["loss_sum"] = stable_sum(losses);
        r["delta"] = delta;
        out << "delta " << format_real(delta) << "\n";
      } else {
        const RegressionInstance inst = load_regression(e_regression);
        for (const auto& entry : sample.entries) {
          if (entry.index >= inst.n()) throw DataError("sample index " + std::to_string(entry.index) + " out of range");
        }
        const VectorXd x = fit_on_sample(inst, sample);
        const double r2 = r2_score(inst.A * x, inst.b);
        r["config"]["regression"] = e_regression;
        r["r2"] = r2;
        r["x"] = std::vector<double>(x.data(), x.data() + x.size());
        out << "r2 " << format_real(r2) << "\n";
      }
      Outputs o{ec.out_dir, {}};
      r["outputs"] = json::array({"report.json"});
      o.add("report.json", dump(r));
      return o;
    };
  });

  // bench, bench-regression
  Common bc;
  std::string b_config;
  bool b_regression = false;
  auto bench_run = [&]() {
    Timer timer;
    ExperimentConfig cfg = ExperimentConfig::parse(read_text(b_config));
    if (b_regression) {
      if (cfg.pipeline != "data_select" && cfg.pipeline != "regression") {
        throw DataError("bench-regression runs the regression pipeline, config asks for '" + cfg.pipeline + "'");
      }
      cfg.pipeline = "regression";
    }
    const TrialReport report = run_trials(cfg);
    Outputs o{bc.out_dir, {}};
    o.add("trials.csv", trial_rows_csv(report));
    json r = trial_report_json(report);
    r["seed"] = cfg.seed;
    if (cfg.pipeline == "rounds") {
      json per_round = json::array();
      for (Index i = 1; i <= cfg.rounds; ++i) {
        const TrialReport sub = report.for_round(i);
        per_round.push_back({{"round", i}, {"success_rate", sub.success_rate}, {"median_delta", sub.median_delta}});
      }
      r["per_round"] = per_round;
    }
    r["outputs"] = json::array({"trials.csv", "report.json"});
    r["timings"] = {{"total_ms", timer.ms()}};
    o.add("report.json", dump(r));
    out << "success_rate " << format_real(report.success_rate) << "\n";
    return o;
  };
  auto* bench = app.add_subcommand("bench", "Seeded Monte-Carlo trials from a key = value config file");
  bench->add_option("--config", b_config, "Experiment config file")->required();
  add_common(bench, bc);
  bench->callback([&] { run = bench_run; });
  auto* bench_reg = app.add_subcommand("bench-regression", "bench with the regression pipeline");
  bench_reg->add_option("--config", b_config, "Experiment config file")->required();
  add_common(bench_reg, bc);
  bench_reg->callback([&] {
    b_regression = true;
    run = bench_run;
  });

  // lowerbound-demo
  Common lbc;
  Index d_n = 10000, d_trials = 1000;
  double d_constant = 0.2;
  std::vector<double> d_eps = {0.5, 0.2, 0.1, 0.05};
  auto* demo = app.add_subcommand("lowerbound-demo", "Uniform sampling on the ±1 instance across ε");
  demo->add_option("--n", d_n, "Instance size (even)")->capture_default_str();
  demo->add_option("--epsilons", d_eps, "Comma-separated ε values")->delimiter(',');
  demo->add_option("--trials", d_trials, "Trials per ε")->capture_default_str()->check(CLI::PositiveNumber);
  demo->add_option("--constant", d_constant, "Threshold constant c")->capture_default_str();
  add_common(demo, lbc);
  demo->callback([&] {
    run = [&]() {
      Timer timer;
      const auto rows = lowerbound_sweep(d_n, d_eps, d_trials, d_constant, lbc.seed);
      Outputs o{lbc.out_dir, {}};
      std::string csv = "epsilon,s,median_abs_estimate,empirical_constant,fraction_above\n";
      json jr = json::array();
      for (const auto& row : rows) {
        csv += format_real(row.epsilon) + ',' + std::to_string(row.s) + ',' + format_real(row.median_abs_estimate) +
               ',' + format_real(row.empirical_constant) + ',' + format_real(row.fraction_above) + '\n';
        jr.push_back({{"epsilon", row.epsilon}, {"s", row.s}, {"median_abs_estimate", row.median_abs_estimate},
                      {"empirical_constant", row.empirical_constant}, {"fraction_above", row.fraction_above}});
      }
      o.add("lowerbound.csv", csv);
      json r = base_report("lowerbound-demo", lbc);
      r["config"] = {{"n", d_n}, {"trials", d_trials}, {"constant", d_constant}, {"epsilons", d_eps}};
      r["rows"] = jr;
      r["outputs"] = o.names();
      r["timings"] = {{"total_ms", timer.ms()}};
      o.add("report.json", dump(r));
      out << csv;
      return o;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  try {
    const Outputs outputs = run();
    outputs.flush();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BudgetExhausted& e) {
    err << "budget error: " << e.what() << "\n";
    return kExitOracle;
  } catch (const OracleError& e) {
    err << "oracle error: " << e.what() << "\n";
    return kExitOracle;
  } catch (const UndefinedMetric& e) {
    err << "undefined metric: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace csel
