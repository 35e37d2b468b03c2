#include "pqsched/cost.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pqsched/csv.hpp"
#include "pqsched/parallel.hpp"

namespace pqsched {

std::string_view to_string(ChargingRule rule) noexcept {
  return rule == ChargingRule::CompletedOnly ? "completed-only" : "truncate-at-horizon";
}

double job_cost(const Job& job, const SystemConfig& config, ChargingRule rule, double horizon) {
  const CostFn& c = config.costs[job.true_class];
  if (job.completed()) return c.value(job.sojourn());
  if (rule == ChargingRule::CompletedOnly) return 0.0;
  return c.value(horizon - job.arrival_time);
}

CostCurve path_cost(const PathResult& path, const SystemConfig& config, ChargingRule rule,
                    std::span<const double> grid) {
  CostCurve curve;
  curve.rule = rule;
  curve.grid.assign(grid.begin(), grid.end());
  curve.values.assign(grid.size(), 0.0);
  // jobs are stored in arrival order
  double acc = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    while (j < path.jobs.size() && path.jobs[j].arrival_time <= grid[i]) {
      acc += job_cost(path.jobs[j], config, rule, path.horizon);
      ++j;
    }
    curve.values[i] = acc;
  }
  return curve;
}

CostCurve path_cost(const PathResult& path, const SystemConfig& config, ChargingRule rule) {
  return path_cost(path, config, rule, path.curves.t);
}

MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  out.mean = mean;
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

ReplicationSummary replicate(const SystemConfig& config, const PolicyRef& policy, std::size_t n_paths,
                             std::uint64_t base_seed, const ReplicateOptions& options) {
  if (n_paths < 2) throw Error(ErrorCode::InvalidArgument, "replicate needs n_paths >= 2");
  if (options.grid_points < 2) throw Error(ErrorCode::InvalidArgument, "grid_points must be >= 2");
  const std::size_t G = options.grid_points;
  ReplicationSummary s;
  s.policy = std::string(to_string(policy.kind()));
  s.n_paths = n_paths;
  s.base_seed = base_seed;
  s.grid.resize(G);
  for (std::size_t i = 0; i < G; ++i) {
    s.grid[i] = config.horizon * static_cast<double>(i) / static_cast<double>(G - 1);
  }

  std::vector<double> values(n_paths * G);
  RunOptions run;
  run.sampling_grid = 2;
  run.schedule = options.schedule;
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        const auto path = run_path(config, policy, base_seed + i, run);
        const auto curve = path_cost(path, config, options.rule, s.grid);
        std::copy(curve.values.begin(), curve.values.end(), values.begin() + static_cast<std::ptrdiff_t>(i * G));
      },
      options.workers == 0 ? worker_count() : options.workers);

  s.mean.assign(G, 0.0);
  s.stderr_.assign(G, 0.0);
  std::vector<double> column(n_paths);
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t i = 0; i < n_paths; ++i) column[i] = values[i * G + g];
    const auto ms = mean_stderr(column);
    s.mean[g] = ms.mean;
    s.stderr_[g] = ms.stderr_;
  }
  s.final_costs.resize(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) s.final_costs[i] = values[i * G + G - 1];
  return s;
}

void normalize_by_oracle(std::span<ReplicationSummary> summaries, const ReplicationSummary& oracle) {
  for (auto& s : summaries) {
    s.ratio_to_oracle.assign(s.mean.size(), 0.0);
    for (std::size_t g = 0; g < s.mean.size() && g < oracle.mean.size(); ++g) {
      s.ratio_to_oracle[g] = oracle.mean[g] > 0.0 ? s.mean[g] / oracle.mean[g] : std::nan("");
    }
  }
}

PairedDifference paired_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "paired samples differ in size");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const auto ms = mean_stderr(d);
  return {ms.mean, ms.stderr_};
}

void write_summary_csv(std::ostream& out, std::span<const ReplicationSummary> summaries) {
  csv::Writer w(out);
  w.header({"policy", "t", "mean_cost", "stderr", "ratio_to_oracle"});
  for (const auto& s : summaries) {
    for (std::size_t g = 0; g < s.grid.size(); ++g) {
      w.field(std::string_view(s.policy)).field(s.grid[g]).field(s.mean[g]).field(s.stderr_[g]);
      if (g < s.ratio_to_oracle.size() && std::isfinite(s.ratio_to_oracle[g])) {
        w.field(s.ratio_to_oracle[g]);
      } else {
        w.empty();
      }
      w.end_row();
    }
  }
}

}  // namespace pqsched
