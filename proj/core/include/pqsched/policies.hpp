#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pqsched/model.hpp"
#include "pqsched/queue_state.hpp"

namespace pqsched {

enum class PolicyKind { OracleGcmu, NaiveGcmu, Pcmu, GlobalFcfs };

std::string_view to_string(PolicyKind kind) noexcept;
/// Accepts the CLI names oracle, naive, pcmu, fcfs.
PolicyKind parse_policy(std::string_view name);

// Index functions evaluated directly on a queue state. The common n^{1/2}
// scaling factor is dropped; it never changes the argmax.

/// mu~_l * C~_l'(N~_l / lambda~_l) with the posterior-mixture cost.
double pcmu_index(std::size_t l, const QueueState& state, const PredictedClassParams& params,
                  std::span<const CostFn> costs);
/// mu~_l * C_l'(N~_l / lambda~_l): predicted classes treated as if they were true.
double naive_gcmu_index(std::size_t l, const QueueState& state, const PredictedClassParams& params,
                        std::span<const CostFn> costs);
/// mu_k * C_k'(N_k / (lambda p_k)); requires a state partitioned by true class.
double oracle_gcmu_index(std::size_t k, const QueueState& state, const SystemConfig& config);

/// A scheduling rule with its parameters resolved from a SystemConfig.
class PolicyRef {
 public:
  static PolicyRef make(PolicyKind kind, const SystemConfig& config);

  PolicyKind kind() const noexcept { return kind_; }
  Partition partition() const noexcept;
  bool needs_true_class() const noexcept { return kind_ == PolicyKind::OracleGcmu; }

  /// Index of queue q when it holds `length` jobs.
  double index(std::size_t queue, double length) const noexcept;

  /// nullopt (idle) iff every queue is empty; otherwise the nonempty queue
  /// with the largest index, lowest queue number on exact ties. The engine
  /// serves the oldest job of the returned queue.
  std::optional<std::size_t> decide(const QueueState& state) const;

 private:
  struct QueueIndex {
    double service_rate = 0.0;
    double arrival_rate = 0.0;
    MixtureCost cost;
  };

  PolicyKind kind_ = PolicyKind::Pcmu;
  std::vector<QueueIndex> queues_;
};

inline std::optional<std::size_t> decide(const QueueState& state, const PolicyRef& policy) {
  return policy.decide(state);
}

}  // namespace pqsched
