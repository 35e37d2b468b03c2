#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pqsched/model.hpp"

namespace pqsched {

// Heavy-traffic analytics: the one-sided reflection map, Brownian workload
// paths, the optimal workload split over predicted classes, and the closed
// forms available for quadratic costs.

/// A discretized path together with its one-sided reflection.
struct ReflectedPath {
  std::vector<double> t;
  std::vector<double> input;
  std::vector<double> reflected;

  /// Left-endpoint Riemann sum of reflected(t)^2 over the grid.
  double square_integral() const noexcept;
};

/// phi(x)(t_i) = x(t_i) - min(0, min_{j <= i} x(t_j)).
std::vector<double> reflect_values(std::span<const double> values);
ReflectedPath reflect(std::span<const double> times, std::span<const double> values);

/// Second moments of the primitives: E[u^2] for interarrival times and
/// E[v^2 | class k] for service times.
struct WorkloadMoments {
  double interarrival_second_moment = 0.0;
  std::vector<double> service_second_moments;
};

/// Moments implied by the distribution families and rates of a config.
WorkloadMoments moments_from_config(const SystemConfig& config);

/// Per-unit-time variance of the net-input Brownian motion driving the total
/// workload: v = lambda * c_v + lambda^3 * c_u * m^2, where m = sum_k p_k/mu_k,
/// c_v = sum_k p_k E[v^2|k] - m^2 and c_u = E[u^2] - lambda^{-2}.
double workload_variance_rate(const SystemConfig& config, const WorkloadMoments& moments);
double workload_variance_rate(const SystemConfig& config);

/// Euler-discretized Brownian motions with variance rate v on [0, T],
/// n_steps + 1 grid points, reflected at zero. Path i only depends on (seed, i).
std::vector<ReflectedPath> bm_workload_paths(double variance_rate, std::size_t n_steps, double horizon,
                                             std::size_t n_paths, std::uint64_t seed);

/// Optimal split of total workload r over predicted classes.
struct Allocation {
  double r = 0.0;
  std::vector<double> x;
  double objective = 0.0;  // opt(r) = sum_l lambda~_l C~_l(x_l / rho~_l)
};

double allocation_objective(std::span<const double> x, const PredictedClassParams& params,
                            std::span<const CostFn> costs);

/// Solves min sum_l lambda~_l C~_l(x_l / rho~_l) s.t. sum x_l = r, x >= 0, by
/// bisection on the first class's share with the others pinned by the
/// balance mu~_l C~_l'(x_l/rho~_l) = mu~_1 C~_1'(x_1/rho~_1). Inactive
/// (empty) predicted classes get x_l = 0.
Allocation kkt_solve(double r, const PredictedClassParams& params, std::span<const CostFn> costs);

/// Largest relative deviation of mu~_l C~_l'(x_l / rho~_l) across active classes.
double kkt_balance_residual(const Allocation& allocation, const PredictedClassParams& params,
                            std::span<const CostFn> costs);

/// Closed-form two-class split for quadratic costs:
/// x_1 = r a_2 / (a_1 + a_2), x_2 = r a_1 / (a_1 + a_2) with
/// a_l = sum_k lambda p_k q_kl c_k / (sum_k lambda p_k q_kl / mu_k)^2.
std::pair<double, double> two_class_xstar(double r, const SystemConfig& config);
double two_class_curvature(std::size_t l, const SystemConfig& config);

struct QuadraticCostCoefficients {
  std::vector<double> beta;        // mu~_l c~_l / rho~_l
  std::vector<double> beta_naive;  // mu~_l c_l / rho~_l
  double jstar_coeff = 0.0;        // 1 / sum_m beta_m^{-1}
  double jnaive_coeff = 0.0;       // sum_l beta_l / (sum_m beta_naive_l / beta_naive_m)^2
};

/// Throws NonQuadratic unless every cost has power 2. Empty predicted classes
/// are skipped (their beta is reported as +inf).
QuadraticCostCoefficients quadratic_coefficients(const SystemConfig& config);

enum class JStarMethod { Auto, CoefficientFastPath, GeneralKkt };

struct CostEstimate {
  std::vector<double> per_path;
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// J*(T; Q) along each workload path. The fast path needs quadratic costs;
/// the general path integrates opt(W(t)) with a KKT solve per grid point.
CostEstimate jstar(const SystemConfig& config, std::span<const ReflectedPath> w_paths,
                   JStarMethod method = JStarMethod::Auto);
/// Limit cost of the naive rule, quadratic costs only.
CostEstimate jnaive(const SystemConfig& config, std::span<const ReflectedPath> w_paths);

/// J*(t; Q) / J*(t; I), a ratio of coefficients because the limiting total
/// workload does not depend on the classifier.
double relative_regret(const SystemConfig& config);

struct ModelCandidate {
  std::string name;
  ConfusionMatrix confusion;
};

struct RankedModel {
  std::string name;
  double relative_regret = 0.0;
  double jstar_coeff = 0.0;
  double jnaive_coeff = 0.0;
};

/// Candidates sorted by ascending relative regret; equal values keep input order.
std::vector<RankedModel> rank_models(std::span<const ModelCandidate> candidates, const SystemConfig& base);

/// model_name,relative_regret,jstar_coeff,jnaive_coeff
void write_criteria_csv(std::ostream& out, std::span<const RankedModel> ranked);

}  // namespace pqsched
