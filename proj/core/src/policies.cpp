#include "pqsched/policies.hpp"

namespace pqsched {

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::OracleGcmu: return "oracle";
    case PolicyKind::NaiveGcmu: return "naive";
    case PolicyKind::Pcmu: return "pcmu";
    case PolicyKind::GlobalFcfs: return "fcfs";
  }
  return "pcmu";
}

PolicyKind parse_policy(std::string_view name) {
  if (name == "oracle") return PolicyKind::OracleGcmu;
  if (name == "naive") return PolicyKind::NaiveGcmu;
  if (name == "pcmu") return PolicyKind::Pcmu;
  if (name == "fcfs") return PolicyKind::GlobalFcfs;
  throw Error(ErrorCode::InvalidArgument, "unknown policy '" + std::string(name) + "'");
}

double pcmu_index(std::size_t l, const QueueState& state, const PredictedClassParams& params,
                  std::span<const CostFn> costs) {
  const double n = static_cast<double>(state.predicted_length(l));
  if (n == 0.0) return 0.0;
  return params.mu_tilde[l] * mixture_cost(l, params, costs).derivative(n / params.lambda_tilde[l]);
}

double naive_gcmu_index(std::size_t l, const QueueState& state, const PredictedClassParams& params,
                        std::span<const CostFn> costs) {
  const double n = static_cast<double>(state.predicted_length(l));
  if (n == 0.0) return 0.0;
  return params.mu_tilde[l] * costs[l].derivative(n / params.lambda_tilde[l]);
}

double oracle_gcmu_index(std::size_t k, const QueueState& state, const SystemConfig& config) {
  if (state.partition() != Partition::TrueClass) {
    throw Error(ErrorCode::OracleUnavailable, "true-class queue lengths are not visible to this engine");
  }
  const double n = static_cast<double>(state.true_length(k));
  if (n == 0.0) return 0.0;
  const double lambda_k = config.lambda * config.prevalences[k];
  return config.service_rates[k] * config.costs[k].derivative(n / lambda_k);
}

PolicyRef PolicyRef::make(PolicyKind kind, const SystemConfig& config) {
  PolicyRef p;
  p.kind_ = kind;
  const std::size_t K = config.num_classes();
  switch (kind) {
    case PolicyKind::GlobalFcfs:
      p.queues_.resize(1);
      break;
    case PolicyKind::OracleGcmu:
      for (std::size_t k = 0; k < K; ++k) {
        p.queues_.push_back({config.service_rates[k], config.lambda * config.prevalences[k],
                             MixtureCost({{1.0, config.costs[k]}})});
      }
      break;
    case PolicyKind::NaiveGcmu:
    case PolicyKind::Pcmu: {
      const auto params = derive_predicted_params_allow_empty(config);
      for (std::size_t l = 0; l < K; ++l) {
        QueueIndex q;
        q.service_rate = params.mu_tilde[l];
        q.arrival_rate = params.lambda_tilde[l];
        if (params.active[l]) {
          q.cost = kind == PolicyKind::Pcmu ? mixture_cost(l, params, config.costs)
                                            : MixtureCost({{1.0, config.costs[l]}});
        }
        p.queues_.push_back(std::move(q));
      }
      break;
    }
  }
  return p;
}

Partition PolicyRef::partition() const noexcept {
  switch (kind_) {
    case PolicyKind::OracleGcmu: return Partition::TrueClass;
    case PolicyKind::GlobalFcfs: return Partition::Global;
    default: return Partition::PredictedClass;
  }
}

double PolicyRef::index(std::size_t queue, double length) const noexcept {
  if (length <= 0.0 || kind_ == PolicyKind::GlobalFcfs) return 0.0;
  const auto& q = queues_[queue];
  return q.service_rate * q.cost.derivative(length / q.arrival_rate);
}

std::optional<std::size_t> PolicyRef::decide(const QueueState& state) const {
  std::optional<std::size_t> best;
  double best_index = 0.0;
  for (std::size_t q = 0; q < state.num_queues(); ++q) {
    const std::size_t n = state.queue_length(q);
    if (n == 0) continue;
    const double idx = index(q, static_cast<double>(n));
    if (!best || idx > best_index) {
      best = q;
      best_index = idx;
    }
  }
  return best;
}

}  // namespace pqsched
