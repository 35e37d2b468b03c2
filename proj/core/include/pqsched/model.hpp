#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pqsched/error.hpp"
#include "pqsched/rng.hpp"

namespace pqsched {

/// Monomial delay cost C(t) = (coeff / power) * t^power, so C'(t) = coeff * t^(power - 1).
/// power = 2 gives the quadratic family C(t) = c t^2 / 2.
struct CostFn {
  double coeff = 1.0;
  double power = 2.0;

  double value(double t) const noexcept;
  double derivative(double t) const noexcept;
  double second_derivative(double t) const noexcept;
  bool is_quadratic() const noexcept { return power == 2.0; }

  friend bool operator==(const CostFn&, const CostFn&) = default;
};

/// Row k is the distribution of the predicted class given true class k.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t num_classes);
  ConfusionMatrix(std::size_t num_classes, std::vector<double> row_major);

  static ConfusionMatrix identity(std::size_t num_classes);
  static ConfusionMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return k_; }
  double operator()(std::size_t true_class, std::size_t predicted) const noexcept {
    return q_[true_class * k_ + predicted];
  }
  double& operator()(std::size_t true_class, std::size_t predicted) noexcept {
    return q_[true_class * k_ + predicted];
  }
  std::span<const double> row(std::size_t true_class) const noexcept {
    return {q_.data() + true_class * k_, k_};
  }
  const std::vector<double>& data() const noexcept { return q_; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<double> q_;
};

/// Distribution family of interarrival or service times; the mean is fixed
/// by the corresponding rate, the family only shapes the higher moments.
struct Distribution {
  enum class Family { Exponential, Deterministic, Lognormal };
  Family family = Family::Exponential;
  double cv = 1.0;  // coefficient of variation, only read for Lognormal

  static Distribution exponential() { return {}; }
  static Distribution deterministic() { return {Family::Deterministic, 0.0}; }
  static Distribution lognormal(double cv) { return {Family::Lognormal, cv}; }

  double sample(CounterRng& rng, double rate) const;
  double squared_cv() const noexcept;
  double second_moment(double rate) const noexcept;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

std::string to_string(Distribution::Family family);

struct SystemConfig {
  double lambda = 1.0;
  std::vector<double> prevalences;
  std::vector<double> service_rates;
  std::vector<CostFn> costs;
  ConfusionMatrix confusion;
  double horizon = 1.0;
  Distribution arrival_dist;
  Distribution service_dist;

  std::size_t num_classes() const noexcept { return prevalences.size(); }
  /// rho = lambda * sum_k p_k / mu_k
  double traffic_intensity() const noexcept;
  bool all_quadratic() const noexcept;
};

/// Primitives of the predicted classes. Indexing of mix_weights is
/// [true_class * K + predicted_class].
struct PredictedClassParams {
  std::size_t num_classes = 0;
  std::vector<double> p_tilde;
  std::vector<double> lambda_tilde;
  std::vector<double> mu_tilde;
  std::vector<double> rho_tilde;
  std::vector<double> mix_weights;
  std::vector<bool> active;  // false for an empty column (only with allow_empty)

  double weight(std::size_t true_class, std::size_t predicted) const noexcept {
    return mix_weights[true_class * num_classes + predicted];
  }
};

/// Throws ZeroColumn when some predicted class receives no mass.
PredictedClassParams derive_predicted_params(const SystemConfig& config);
/// Same derivation, but empty predicted columns are kept and flagged inactive
/// (their mu/rho entries are zero).
PredictedClassParams derive_predicted_params_allow_empty(const SystemConfig& config);

/// Weighted sum of monomial costs, the posterior-averaged cost of a predicted class.
class MixtureCost {
 public:
  struct Term {
    double weight;
    CostFn cost;
  };

  MixtureCost() = default;
  explicit MixtureCost(std::vector<Term> terms);

  double value(double t) const noexcept;
  double derivative(double t) const noexcept;
  double second_derivative(double t) const noexcept;
  /// Solves derivative(t) = y for t >= 0. Closed form when all terms share
  /// a power, bisection otherwise.
  double inverse_derivative(double y) const;

  bool is_quadratic() const noexcept;
  /// sum_k w_k c_k; only meaningful for quadratic mixtures.
  double quadratic_coeff() const noexcept;
  const std::vector<Term>& terms() const noexcept { return terms_; }

 private:
  std::vector<Term> terms_;
};

MixtureCost mixture_cost(std::size_t predicted_class, const PredictedClassParams& params,
                         std::span<const CostFn> costs);

struct ValidationIssue {
  ErrorCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;
  double rho = 0.0;

  bool ok() const noexcept { return errors.empty(); }
  std::string summary() const;
};

inline constexpr double kStochasticTolerance = 1e-12;
inline constexpr double kHeavyTrafficBand = 0.05;

ValidationReport validate_config(const SystemConfig& config);
/// Throws the first error of validate_config, with all messages attached.
void require_valid(const SystemConfig& config);

}  // namespace pqsched
