#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pqsched/config_io.hpp"
#include "pqsched/cost.hpp"
#include "pqsched/csv.hpp"
#include "pqsched/engine.hpp"
#include "pqsched/httheory.hpp"
#include "pqsched/ingest.hpp"
#include "pqsched/policies.hpp"
#include "pqsched/triage.hpp"

#ifndef PQSCHED_VERSION
#define PQSCHED_VERSION "unknown"
#endif

namespace pqsched::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

/// Collects output files and writes the manifest once everything else is on disk.
class Run {
 public:
  explicit Run(std::string command, fs::path out) : command_(std::move(command)), out_(std::move(out)) {
    fs::create_directories(out_);
    manifest_["command"] = command_;
    manifest_["tool_version"] = PQSCHED_VERSION;
  }

  json& manifest() { return manifest_; }

  std::ofstream open(const std::string& name) {
    const fs::path p = out_ / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    files_.push_back(p);
    return f;
  }

  std::vector<fs::path> finish() {
    json outputs = json::array();
    for (const auto& f : files_) outputs.push_back(f.filename().string());
    manifest_["outputs"] = outputs;
    manifest_["wall_clock_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
    const fs::path p = out_ / "manifest.json";
    write_json_file(p, manifest_);
    files_.push_back(p);
    return files_;
  }

 private:
  std::string command_;
  fs::path out_;
  json manifest_;
  std::vector<fs::path> files_;
  Clock::time_point start_ = Clock::now();
};

void close_checked(std::ofstream& f, const std::string& name) {
  f.close();
  if (!f) throw Error(ErrorCode::IoError, "failed writing " + name);
}

ChargingRule parse_charging(const std::string& s) {
  if (s == "truncate") return ChargingRule::TruncateAtHorizon;
  if (s == "completed") return ChargingRule::CompletedOnly;
  throw Error(ErrorCode::InvalidArgument, "unknown charging rule '" + s + "' (truncate, completed)");
}

ModelCandidate load_candidate(const fs::path& path) {
  const json j = read_json_file(path);
  ModelCandidate c;
  c.name = path.stem().string();
  if (j.is_object()) {
    if (j.contains("name")) c.name = j.at("name").get<std::string>();
    if (!j.contains("confusion")) throw Error(ErrorCode::ParseError, path.string() + ": missing 'confusion'");
    c.confusion = confusion_from_json(j.at("confusion"));
  } else {
    c.confusion = confusion_from_json(j);
  }
  return c;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
  if (b == std::string::npos) throw Error(ErrorCode::InvalidArgument, "grid must look like a:b:n, got '" + text + "'");
  try {
    std::size_t used = 0;
    const std::string sa = text.substr(0, a), sb = text.substr(a + 1, b - a - 1), sn = text.substr(b + 1);
    const double lo = std::stod(sa, &used);
    if (used != sa.size()) throw std::invalid_argument(sa);
    const double hi = std::stod(sb, &used);
    if (used != sb.size()) throw std::invalid_argument(sb);
    const long long n = std::stoll(sn, &used);
    if (used != sn.size()) throw std::invalid_argument(sn);
    if (n < 1) throw Error(ErrorCode::EmptyGrid, "grid '" + text + "' has no points");
    if (hi < lo) throw Error(ErrorCode::InvalidArgument, "grid '" + text + "' runs backwards");
    return linspace(lo, hi, static_cast<std::size_t>(n));
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, "grid must look like a:b:n, got '" + text + "'");
  }
}

std::vector<fs::path> cmd_simulate(const SimulateArgs& args) {
  const SystemConfig config = load_config(args.config);
  require_valid(config);
  if (args.paths == 0) throw Error(ErrorCode::InvalidArgument, "--paths must be >= 1");

  std::vector<PolicyKind> kinds;
  if (args.policies.empty()) {
    kinds = {PolicyKind::OracleGcmu, PolicyKind::NaiveGcmu, PolicyKind::Pcmu, PolicyKind::GlobalFcfs};
  } else {
    for (const auto& p : args.policies) kinds.push_back(parse_policy(p));
  }

  std::optional<RateSchedule> schedule;
  if (args.arrival_shift) {
    schedule = RateSchedule::sinusoidal_arrivals(config.lambda, args.arrival_shift->first, args.arrival_shift->second);
  }
  ReplicateOptions opts;
  opts.grid_points = args.grid_points;
  opts.rule = parse_charging(args.charging);
  opts.schedule = schedule ? &*schedule : nullptr;

  Run run("simulate", args.out);
  std::vector<ReplicationSummary> summaries;
  const ReplicationSummary* oracle = nullptr;
  std::vector<PathResult> single;
  for (auto kind : kinds) {
    const auto policy = PolicyRef::make(kind, config);
    if (args.paths > 1) {
      summaries.push_back(replicate(config, policy, args.paths, args.seed, opts));
      continue;
    }
    // one path has no standard error; it is reported as 0
    RunOptions ro;
    ro.schedule = opts.schedule;
    ro.sampling_grid = args.grid_points;
    single.push_back(run_path(config, policy, args.seed, ro));
    const auto curve = path_cost(single.back(), config, opts.rule);
    ReplicationSummary s;
    s.policy = std::string(to_string(kind));
    s.n_paths = 1;
    s.base_seed = args.seed;
    s.grid = curve.grid;
    s.mean = curve.values;
    s.stderr_.assign(curve.values.size(), 0.0);
    s.final_costs = {curve.final_value()};
    summaries.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (kinds[i] == PolicyKind::OracleGcmu) oracle = &summaries[i];
  }
  if (oracle) {
    const ReplicationSummary copy = *oracle;
    normalize_by_oracle(summaries, copy);
  }
  {
    auto f = run.open("summary.csv");
    write_summary_csv(f, summaries);
    close_checked(f, "summary.csv");
  }
  {
    auto f = run.open("final_costs.csv");
    csv::Writer w(f);
    std::vector<std::string> head{"seed"};
    for (const auto& s : summaries) head.push_back(s.policy);
    w.header(head);
    for (std::size_t i = 0; i < args.paths; ++i) {
      w.field(static_cast<unsigned long long>(args.seed + i));
      for (const auto& s : summaries) w.field(s.final_costs[i]);
      w.end_row();
    }
    close_checked(f, "final_costs.csv");
  }
  if (args.paths == 1) {
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      const auto& path = single[i];
      const std::string name(to_string(kinds[i]));
      auto jf = run.open("jobs_" + name + ".csv");
      write_jobs_csv(jf, path);
      close_checked(jf, "jobs_" + name + ".csv");
      auto cf = run.open("curves_" + name + ".csv");
      write_curves_csv(cf, path);
      close_checked(cf, "curves_" + name + ".csv");
    }
  }

  auto& m = run.manifest();
  m["config"] = args.config.string();
  m["seed_schedule"] = {{"base_seed", args.seed}, {"rule", "path i uses seed base_seed + i"}, {"paths", args.paths}};
  m["grids"] = {{"time_points", args.grid_points}};
  m["charging"] = args.charging;
  if (args.arrival_shift) m["arrival_shift"] = {{"amplitude", args.arrival_shift->first}, {"omega", args.arrival_shift->second}};
  return run.finish();
}

std::vector<fs::path> cmd_lower_bound(const LowerBoundArgs& args) {
  const SystemConfig config = load_config(args.config);
  require_valid(config);
  JStarMethod method = JStarMethod::Auto;
  if (args.method == "fast") method = JStarMethod::CoefficientFastPath;
  else if (args.method == "general") method = JStarMethod::GeneralKkt;
  else if (args.method != "auto") throw Error(ErrorCode::InvalidArgument, "--method must be auto, fast or general");

  const double v = workload_variance_rate(config);
  const auto paths = bm_workload_paths(v, args.steps, config.horizon, args.paths, args.seed);
  const auto js = jstar(config, paths, method);

  Run run("lower-bound", args.out);
  auto f = run.open("lower_bound.csv");
  csv::Writer w(f);
  w.header({"quantity", "value"});
  auto row = [&](std::string_view k, double x) {
    w.field(k).field(x);
    w.end_row();
  };
  row("variance_rate", v);
  row("horizon", config.horizon);
  row("jstar_mean", js.mean);
  row("jstar_stderr", js.stderr_);
  if (config.all_quadratic()) {
    const auto coeffs = quadratic_coefficients(config);
    const auto jn = jnaive(config, paths);
    row("jstar_coeff", coeffs.jstar_coeff);
    row("jnaive_coeff", coeffs.jnaive_coeff);
    row("jnaive_mean", jn.mean);
    row("jnaive_stderr", jn.stderr_);
    row("relative_regret", relative_regret(config));
    close_checked(f, "lower_bound.csv");

    auto cf = run.open("coefficients.csv");
    csv::Writer cw(cf);
    cw.header({"predicted_class", "beta", "beta_naive"});
    for (std::size_t l = 0; l < coeffs.beta.size(); ++l) {
      cw.field(l + 1).field(coeffs.beta[l]).field(coeffs.beta_naive[l]);
      cw.end_row();
    }
    close_checked(cf, "coefficients.csv");
  } else {
    close_checked(f, "lower_bound.csv");
  }

  auto& m = run.manifest();
  m["config"] = args.config.string();
  m["seed_schedule"] = {{"seed", args.seed}, {"rule", "path i uses Brownian substream i"}, {"paths", args.paths}};
  m["grids"] = {{"steps", args.steps}};
  m["method"] = args.method;
  return run.finish();
}

std::vector<fs::path> cmd_select_model(const SelectModelArgs& args) {
  const SystemConfig config = load_config(args.config);
  if (args.models.empty()) throw Error(ErrorCode::InvalidArgument, "--models needs at least one file");
  std::vector<ModelCandidate> candidates;
  for (const auto& p : args.models) {
    auto c = load_candidate(p);
    SystemConfig probe = config;
    probe.confusion = c.confusion;
    require_valid(probe);
    candidates.push_back(std::move(c));
  }
  const auto ranked = rank_models(candidates, config);

  Run run("select-model", args.out);
  auto f = run.open("criteria.csv");
  write_criteria_csv(f, ranked);
  close_checked(f, "criteria.csv");

  auto& m = run.manifest();
  m["config"] = args.config.string();
  json models = json::array();
  for (const auto& p : args.models) models.push_back(p.string());
  m["models"] = models;
  m["seed_schedule"] = nullptr;
  return run.finish();
}

std::vector<fs::path> cmd_triage(const TriageArgs& args) {
  const TriageConfig config = load_triage_config(args.config);
  const auto zfl = parse_grid(args.zfl_grid);
  std::vector<double> ztx;
  if (args.ztx_grid) ztx = parse_grid(*args.ztx_grid);
  else ztx = {args.ztx.value_or(0.5)};

  McParams mc;
  mc.n_paths = args.paths;
  mc.n_steps = args.steps;
  mc.seed = args.seed;
  const auto result = optimize(config, zfl, ztx, mc);

  Run run("triage", args.out);
  auto f = run.open("triage.csv");
  write_triage_csv(f, result.evaluated);
  close_checked(f, "triage.csv");
  auto a = run.open("argmin.csv");
  write_triage_csv(a, std::span(&result.best_decision(), 1));
  close_checked(a, "argmin.csv");

  auto& m = run.manifest();
  m["config"] = args.config.string();
  m["seed_schedule"] = {{"seed", args.seed}, {"rule", "Brownian substream i for path i, shared by every grid point"},
                        {"paths", args.paths}};
  m["grids"] = {{"z_fl", args.zfl_grid}, {"z_tx", args.ztx_grid ? *args.ztx_grid : csv::format_double(ztx.front())},
                {"steps", args.steps}};
  return run.finish();
}

std::vector<fs::path> cmd_estimate(const EstimateArgs& args) {
  const auto records = read_validation_csv(args.data);
  LabelRule rule;
  rule.threshold = args.threshold;
  rule.laplace_alpha = args.alpha;
  rule.num_classes = args.num_classes;
  const auto est = estimate_confusion(records, rule);
  const std::size_t K = est.prevalences.size();

  Run run("estimate", args.out);
  {
    auto f = run.open("confusion.csv");
    csv::Writer w(f);
    std::vector<std::string> head{"true_class", "prevalence"};
    for (std::size_t l = 0; l < K; ++l) head.push_back("q_" + std::to_string(l + 1));
    w.header(head);
    for (std::size_t k = 0; k < K; ++k) {
      w.field(k + 1).field(est.prevalences[k]);
      for (std::size_t l = 0; l < K; ++l) w.field(est.confusion(k, l));
      w.end_row();
    }
    close_checked(f, "confusion.csv");
  }
  const bool has_service = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.service_time.has_value(); });
  if (has_service) {
    const auto rates = estimate_rates(records, K);
    auto f = run.open("rates.csv");
    csv::Writer w(f);
    w.header({"true_class", "count", "service_rate", "second_moment"});
    for (std::size_t k = 0; k < K; ++k) {
      w.field(k + 1).field(rates.counts[k]).field(rates.service_rates[k]).field(rates.second_moments[k]);
      w.end_row();
    }
    close_checked(f, "rates.csv");
  }
  const bool has_scores = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.score.has_value(); });
  if (has_scores && K == 2) {
    const auto scores = scores_by_class(records, K);
    const auto curves = estimate_curves(scores[0], scores[1], args.grid_points);
    auto f = run.open("passing_curves.csv");
    csv::Writer w(f);
    w.header({"z", "g_1", "g_2"});
    for (std::size_t i = 0; i < curves[0].knots().size(); ++i) {
      w.field(curves[0].knots()[i]).field(curves[0].values()[i]).field(curves[1].values()[i]);
      w.end_row();
    }
    close_checked(f, "passing_curves.csv");
  }

  auto& m = run.manifest();
  m["data"] = args.data.string();
  m["seed_schedule"] = nullptr;
  m["grids"] = {{"score_points", args.grid_points}};
  if (args.threshold) m["threshold"] = *args.threshold;
  m["laplace_alpha"] = args.alpha;
  return run.finish();
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Predicted-class scheduling toolkit"};
  app.set_version_flag("--version", std::string(PQSCHED_VERSION));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Replicate sample paths and summarize cumulative delay cost");
  s->add_option("--config", sim.config, "System config JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--policy", sim.policies, "oracle, naive, pcmu or fcfs; repeatable (default: all)");
  s->add_option("--paths", sim.paths, "Number of paired sample paths")->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "Base seed; path i uses seed + i");
  s->add_option("--grid-points", sim.grid_points, "Time grid points on [0, T]")->check(CLI::Range(2, 100000));
  s->add_option("--charging", sim.charging, "truncate or completed");
  std::vector<double> shift;
  s->add_option("--arrival-shift", shift, "Sinusoidal arrival shift: amplitude omega")->expected(2);
  s->add_option("--out", sim.out, "Output directory")->required();

  LowerBoundArgs lb;
  auto* l = app.add_subcommand("lower-bound", "Heavy-traffic lower bound on reflected Brownian workload paths");
  l->add_option("--config", lb.config)->required()->check(CLI::ExistingFile);
  l->add_option("--paths", lb.paths)->check(CLI::PositiveNumber);
  l->add_option("--steps", lb.steps)->check(CLI::Range(100, 100000000));
  l->add_option("--seed", lb.seed);
  l->add_option("--method", lb.method, "auto, fast or general");
  l->add_option("--out", lb.out)->required();

  SelectModelArgs sm;
  auto* m = app.add_subcommand("select-model", "Rank confusion matrices by relative regret");
  m->add_option("--config", sm.config)->required()->check(CLI::ExistingFile);
  m->add_option("--models", sm.models, "Confusion matrix JSON files")->required()->check(CLI::ExistingFile);
  m->add_option("--out", sm.out)->required();

  TriageArgs tr;
  auto* t = app.add_subcommand("triage", "Grid search of the filtering threshold");
  t->add_option("--config", tr.config)->required()->check(CLI::ExistingFile);
  t->add_option("--zfl-grid", tr.zfl_grid, "a:b:n");
  double ztx = 0.5;
  auto* ztx_opt = t->add_option("--ztx", ztx, "Fixed toxicity threshold");
  std::string ztx_grid;
  auto* ztx_grid_opt = t->add_option("--ztx-grid", ztx_grid, "a:b:n")->excludes(ztx_opt);
  t->add_option("--paths", tr.paths)->check(CLI::PositiveNumber);
  t->add_option("--steps", tr.steps)->check(CLI::Range(100, 100000000));
  t->add_option("--seed", tr.seed);
  t->add_option("--out", tr.out)->required();

  EstimateArgs es;
  auto* e = app.add_subcommand("estimate", "Estimate prevalences, confusion matrix and rates from validation data");
  e->add_option("--data", es.data, "Validation CSV")->required()->check(CLI::ExistingFile);
  double threshold = 0.5;
  auto* thr = e->add_option("--threshold", threshold, "Score threshold (two classes)");
  e->add_option("--alpha", es.alpha, "Laplace smoothing")->check(CLI::NonNegativeNumber);
  e->add_option("--classes", es.num_classes, "Number of classes (default: inferred)");
  e->add_option("--grid-points", es.grid_points)->check(CLI::Range(2, 100000));
  e->add_option("--out", es.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 3 : code;  // help and version write no manifest
  }

  try {
    if (*s) {
      if (!shift.empty()) sim.arrival_shift = std::make_pair(shift[0], shift[1]);
      cmd_simulate(sim);
    } else if (*l) {
      cmd_lower_bound(lb);
    } else if (*m) {
      cmd_select_model(sm);
    } else if (*t) {
      if (*ztx_opt) tr.ztx = ztx;
      if (*ztx_grid_opt) tr.ztx_grid = ztx_grid;
      cmd_triage(tr);
    } else if (*e) {
      if (*thr) es.threshold = threshold;
      cmd_estimate(es);
    }
  } catch (const Error& err) {
    std::cerr << "error [" << to_string(err.code()) << "]: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pqsched::cli
