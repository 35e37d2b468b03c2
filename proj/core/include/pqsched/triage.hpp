#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pqsched/cost.hpp"
#include "pqsched/httheory.hpp"
#include "pqsched/model.hpp"

namespace pqsched {

// Two-stage content triage: a filter drops jobs scoring below z_fl, the rest
// are spread over Gamma identical reviewers whose queues schedule by the
// predicted label "toxic" (score >= z_tx) or "non-toxic". Class 0 is toxic,
// class 1 is non-toxic throughout.

/// Probability g(z) that a job's score is at least z.
class PassingCurve {
 public:
  enum class Kind { Interpolated, LogitNormal };

  /// Piecewise-linear through (z_i, g_i); z strictly increasing, z_0 = 0,
  /// z_last = 1, g nonincreasing in [0, 1] with g_0 = 1.
  static PassingCurve interpolated(std::vector<double> z, std::vector<double> g);
  /// Score of a logistic model on Gaussian features: logit(score) ~ N(location, scale^2),
  /// so g(z) = 1 - Phi((logit z - location) / scale).
  static PassingCurve logit_normal(double location, double scale);

  double operator()(double z) const;

  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& knots() const noexcept { return z_; }
  const std::vector<double>& values() const noexcept { return g_; }
  double location() const noexcept { return location_; }
  double scale() const noexcept { return scale_; }

 private:
  Kind kind_ = Kind::LogitNormal;
  std::vector<double> z_;
  std::vector<double> g_;
  double location_ = 0.0;
  double scale_ = 1.0;
};

using PassingCurves = std::array<PassingCurve, 2>;

struct TriageConfig {
  double Lambda = 1.0;
  std::array<double, 2> p{0.5, 0.5};
  std::array<double, 2> mu{1.0, 1.0};
  PassingCurves curves;
  double c_trp = 1.0;  // per toxic job filtered out, > 0
  double c_trn = -1.0; // per non-toxic job filtered out, < 0
  double c_fp = 0.0;
  double c_fn = 0.0;
  double c_tp = 0.0;
  double c_tn = 0.0;
  double c_r = 1.0;  // per reviewer per unit time
  std::array<double, 2> delay{1.0, 1.0};  // quadratic delay coefficients
  Distribution arrival_dist;
  Distribution service_dist;
};

/// Throws InvalidArgument / InvalidCost on a malformed config.
void validate_triage_config(const TriageConfig& config);

nlohmann::json to_json(const PassingCurve& curve);
PassingCurve passing_curve_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TriageConfig& config);
TriageConfig triage_config_from_json(const nlohmann::json& j);
TriageConfig load_triage_config(const std::filesystem::path& path);

struct TriageDecision {
  double z_fl = 0.0;
  double z_tx = 0.0;
  double gamma = 0.0;
  double filtering = 0.0;
  double hiring = 0.0;
  double misclassification = 0.0;
  double queueing = 0.0;
  double queueing_stderr = 0.0;
  double total = 0.0;
};

/// Gamma(z_fl) = Lambda * sum_k p_k g_k(z_fl) / mu_k.
double staffing(double z_fl, const TriageConfig& config);

/// One reviewer's queue as a two-class system: arrival rate lambda_r, class
/// mix p_k g_k / sum_j p_j g_j, confusion q_k0 = g_k(z_tx) / g_k(z_fl).
/// Its traffic intensity is 1 by construction. Throws EmptyPass when the
/// filter removes everything.
SystemConfig reviewer_params(double z_fl, double z_tx, const TriageConfig& config);

double filtering_cost_rate(double z_fl, const TriageConfig& config);
double misclass_cost_rate(double z_fl, double z_tx, const TriageConfig& config);

/// Monte Carlo settings for the reviewer queue cost at t = horizon.
struct McParams {
  std::size_t n_paths = 1000;
  std::size_t n_steps = 1000;
  double horizon = 1.0;
  std::uint64_t seed = 1;
};

/// Unit-variance reflected Brownian paths reduced to their square integrals.
/// A reflected path scales linearly with the input, so one set serves every
/// variance rate and gives common random numbers across thresholds.
class QueueCostSampler {
 public:
  explicit QueueCostSampler(const McParams& mc);
  const std::vector<double>& unit_square_integrals() const noexcept { return unit_; }
  const McParams& params() const noexcept { return mc_; }

 private:
  McParams mc_;
  std::vector<double> unit_;
};

/// One reviewer's limiting delay cost jstar_coeff * 1/2 * int W^2 over paths
/// with the reviewer's variance rate. Throws NonQuadratic via the closed form.
CostEstimate reviewer_queue_cost(double z_fl, double z_tx, const TriageConfig& config,
                                 const QueueCostSampler& sampler);
CostEstimate reviewer_queue_cost(double z_fl, double z_tx, const TriageConfig& config, const McParams& mc);

/// Filtering + hiring + misclassification + Gamma * reviewer cost, per unit
/// time scaled to mc horizon.
TriageDecision total_cost(double z_fl, double z_tx, const TriageConfig& config, const QueueCostSampler& sampler);
TriageDecision total_cost(double z_fl, double z_tx, const TriageConfig& config, const McParams& mc);

struct TriageSearch {
  std::vector<TriageDecision> evaluated;  // z_fl-major, then z_tx, pairs with z_tx < z_fl skipped
  std::size_t best = 0;
  const TriageDecision& best_decision() const { return evaluated.at(best); }
};

/// Exhaustive grid search with shared Brownian paths. Ties go to the smaller
/// z_fl, then the smaller z_tx. Throws EmptyGrid when no admissible pair exists.
TriageSearch optimize(const TriageConfig& config, std::span<const double> z_fl_grid,
                      std::span<const double> z_tx_grid, const McParams& mc);

/// z_fl,z_tx,gamma,filtering,hiring,misclass,queueing,queueing_stderr,total
void write_triage_csv(std::ostream& out, std::span<const TriageDecision> rows);

/// Empirical passing curves from validation scores in [0, 1], tabulated on
/// grid_points equally spaced knots and interpolated between them.
PassingCurves estimate_curves(std::span<const double> toxic_scores, std::span<const double> nontoxic_scores,
                              std::size_t grid_points = 101);

/// Uniform grid a, a + h, ..., b with n points (n = 1 gives {a}).
std::vector<double> linspace(double a, double b, std::size_t n);

}  // namespace pqsched
