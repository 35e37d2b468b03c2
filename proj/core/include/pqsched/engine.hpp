#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pqsched/model.hpp"
#include "pqsched/policies.hpp"
#include "pqsched/queue_state.hpp"
#include "pqsched/rng.hpp"

namespace pqsched {

struct Job {
  std::uint64_t id = 0;
  double arrival_time = 0.0;
  std::size_t true_class = 0;
  std::size_t predicted_class = 0;
  double service_req = 0.0;
  double remaining = 0.0;
  std::optional<double> completion_time;

  bool completed() const noexcept { return completion_time.has_value(); }
  double sojourn() const noexcept { return *completion_time - arrival_time; }
};

/// Time-varying rate multipliers. Arrivals are generated by thinning a
/// stream of rate lambda * arrival_max; service requirements of a class-k
/// job arriving at t are drawn with rate mu_k * service(t, k).
struct RateSchedule {
  std::function<double(double)> arrival;
  double arrival_max = 1.0;
  std::function<double(double, std::size_t)> service;

  bool homogeneous() const noexcept { return !arrival && !service; }

  static RateSchedule constant(double multiplier);
  /// lambda(t) = max(lambda0 / 2, lambda0 + amplitude * sin(omega t)), as a multiplier of lambda0.
  static RateSchedule sinusoidal_arrivals(double lambda0, double amplitude, double omega);
  /// Multiplier values[i] on [breakpoints[i], breakpoints[i+1]); breakpoints[0] must be 0.
  static RateSchedule piecewise_arrivals(std::vector<double> breakpoints, std::vector<double> values);
  /// mu_k(t) = max(floor_k, mu0_k - slope_k t) for every class, as multipliers of mu0_k.
  static RateSchedule linear_service_decay(std::vector<double> mu0, std::vector<double> slope,
                                           std::vector<double> floor);
};

struct RunOptions {
  std::size_t sampling_grid = 101;
  std::uint64_t max_events = 100'000'000;
  bool record_arrival_workload = false;
  const RateSchedule* schedule = nullptr;
  /// When set, these arrivals (sorted by arrival_time) are replayed instead of
  /// sampled: arrival_time, true_class, predicted_class and service_req are used.
  const std::vector<Job>* trace = nullptr;
};

/// Queue-length and workload curves sampled on a uniform grid over [0, T].
struct Curves {
  std::vector<double> t;
  std::vector<double> w_plus;
  std::vector<std::uint32_t> n_pred;  // [i * K + l]
  std::vector<std::uint32_t> n_kl;    // [i * K * K + k * K + l]
};

/// Exact time integrals over [0, T] accumulated between events.
struct PathStats {
  std::vector<double> int_n_pred;      // int N~_l dt
  std::vector<double> int_n_true;      // int N_k dt
  std::vector<double> int_n_kl;        // int N~_kl dt, [k * K + l]
  std::vector<double> int_workload_gap;  // int |mu~_l W~_l - N~_l| dt
  double int_w = 0.0;                  // int W_+ dt
  double int_w2 = 0.0;                 // int W_+^2 dt
  std::uint64_t arrivals = 0;
  std::uint64_t completions = 0;
};

struct PathResult {
  std::size_t num_classes = 0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t event_count = 0;
  std::vector<Job> jobs;
  Curves curves;
  PathStats stats;
  std::vector<double> arrival_workload;  // W_+ right after each arrival, when recorded
};

/// Simulates one sample path of the preemptive-resume single server on
/// [0, config.horizon]. Deterministic in (config, policy, seed).
PathResult run_path(const SystemConfig& config, const PolicyRef& policy, std::uint64_t seed,
                    const RunOptions& options);
PathResult run_path(const SystemConfig& config, const PolicyRef& policy, std::uint64_t seed,
                    std::size_t sampling_grid = 101);

/// Inverse-CDF draw of the predicted class from row `true_class` of q.
std::size_t sample_classification(std::size_t true_class, const ConfusionMatrix& q, CounterRng& rng);
/// Inverse-CDF draw over a probability vector.
std::size_t sample_index(std::span<const double> probabilities, CounterRng& rng);

/// Present-job counts by (true, predicted) pair, [k * K + l].
std::vector<std::size_t> composition_snapshot(const QueueState& state);

/// id,arrival,k,l,service,completion,sojourn with 1-based classes; open jobs
/// have empty completion and sojourn cells.
void write_jobs_csv(std::ostream& out, const PathResult& path);
/// t,N_1..N_K,W_plus
void write_curves_csv(std::ostream& out, const PathResult& path);

}  // namespace pqsched
