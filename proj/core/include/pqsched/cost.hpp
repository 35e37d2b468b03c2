#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pqsched/engine.hpp"
#include "pqsched/model.hpp"
#include "pqsched/policies.hpp"

namespace pqsched {

/// How jobs still in the system at the horizon are charged.
enum class ChargingRule { CompletedOnly, TruncateAtHorizon };

std::string_view to_string(ChargingRule rule) noexcept;

/// Cumulative true-class delay cost J(t) = sum over jobs arrived by t of
/// C_k(sojourn). Charged at the arrival epoch with the realized sojourn.
struct CostCurve {
  std::vector<double> grid;
  std::vector<double> values;
  ChargingRule rule = ChargingRule::TruncateAtHorizon;

  double final_value() const noexcept { return values.empty() ? 0.0 : values.back(); }
};

/// Cost charged for one job: C_k(sojourn), C_k(T - arrival) for an open job
/// under TruncateAtHorizon, 0 for an open job under CompletedOnly.
double job_cost(const Job& job, const SystemConfig& config, ChargingRule rule, double horizon);

/// Evaluates J on the path's sampling grid.
CostCurve path_cost(const PathResult& path, const SystemConfig& config,
                    ChargingRule rule = ChargingRule::TruncateAtHorizon);
CostCurve path_cost(const PathResult& path, const SystemConfig& config, ChargingRule rule,
                    std::span<const double> grid);

struct ReplicationSummary {
  std::string policy;
  std::size_t n_paths = 0;
  std::uint64_t base_seed = 0;
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::vector<double> final_costs;     // J(T) per path, seed order
  std::vector<double> ratio_to_oracle;  // mean / oracle mean on the same grid; empty until normalized

  double final_mean() const noexcept { return mean.empty() ? 0.0 : mean.back(); }
  double final_stderr() const noexcept { return stderr_.empty() ? 0.0 : stderr_.back(); }
};

struct ReplicateOptions {
  std::size_t grid_points = 11;
  ChargingRule rule = ChargingRule::TruncateAtHorizon;
  const RateSchedule* schedule = nullptr;
  std::size_t workers = 0;  // 0: worker_count()
};

/// Runs paths with seeds base_seed + i, i < n_paths, and summarizes the cost
/// curves. Reusing base_seed across policies gives paired samples.
ReplicationSummary replicate(const SystemConfig& config, const PolicyRef& policy, std::size_t n_paths,
                             std::uint64_t base_seed, const ReplicateOptions& options = {});

/// Fills ratio_to_oracle of every summary from the oracle summary.
void normalize_by_oracle(std::span<ReplicationSummary> summaries, const ReplicationSummary& oracle);

struct PairedDifference {
  double mean = 0.0;    // mean of a_i - b_i
  double stderr_ = 0.0; // stdev(a_i - b_i) / sqrt(n)
};

PairedDifference paired_difference(std::span<const double> a, std::span<const double> b);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};
MeanStderr mean_stderr(std::span<const double> xs);

/// policy,t,mean_cost,stderr,ratio_to_oracle
void write_summary_csv(std::ostream& out, std::span<const ReplicationSummary> summaries);

}  // namespace pqsched
