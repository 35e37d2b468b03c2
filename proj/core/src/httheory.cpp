#include "pqsched/httheory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "pqsched/cost.hpp"
#include "pqsched/csv.hpp"
#include "pqsched/rng.hpp"

namespace pqsched {

// ---------------------------------------------------------------------------
// Reflection and Brownian workload

double ReflectedPath::square_integral() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) s += reflected[i] * reflected[i] * (t[i + 1] - t[i]);
  return s;
}

std::vector<double> reflect_values(std::span<const double> values) {
  std::vector<double> out(values.size());
  double running_min = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    running_min = std::min(running_min, values[i]);
    out[i] = values[i] - running_min;
  }
  return out;
}

ReflectedPath reflect(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw Error(ErrorCode::DimensionMismatch, "reflect: times and values differ in length");
  ReflectedPath p;
  p.t.assign(times.begin(), times.end());
  p.input.assign(values.begin(), values.end());
  p.reflected = reflect_values(values);
  return p;
}

WorkloadMoments moments_from_config(const SystemConfig& config) {
  WorkloadMoments m;
  m.interarrival_second_moment = config.arrival_dist.second_moment(config.lambda);
  for (double mu : config.service_rates) m.service_second_moments.push_back(config.service_dist.second_moment(mu));
  return m;
}

double workload_variance_rate(const SystemConfig& config, const WorkloadMoments& moments) {
  const std::size_t K = config.num_classes();
  if (moments.service_second_moments.size() != K) {
    throw Error(ErrorCode::DimensionMismatch, "one service second moment per class is required");
  }
  if (!std::isfinite(moments.interarrival_second_moment)) {
    throw Error(ErrorCode::NonFiniteMoment, "interarrival second moment is not finite");
  }
  double mean_service = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!std::isfinite(moments.service_second_moments[k])) {
      throw Error(ErrorCode::NonFiniteMoment, "service second moment of class " + std::to_string(k + 1) + " is not finite");
    }
    mean_service += config.prevalences[k] / config.service_rates[k];
    second += config.prevalences[k] * moments.service_second_moments[k];
  }
  const double lambda = config.lambda;
  const double c_v = second - mean_service * mean_service;
  const double c_u = moments.interarrival_second_moment - 1.0 / (lambda * lambda);
  const double v = lambda * c_v + lambda * lambda * lambda * c_u * mean_service * mean_service;
  // moments of a degenerate law can leave a tiny negative round-off
  return std::max(0.0, v);
}

double workload_variance_rate(const SystemConfig& config) {
  return workload_variance_rate(config, moments_from_config(config));
}

std::vector<ReflectedPath> bm_workload_paths(double variance_rate, std::size_t n_steps, double horizon,
                                             std::size_t n_paths, std::uint64_t seed) {
  if (n_steps < 100) throw Error(ErrorCode::InvalidArgument, "bm_workload_paths needs n_steps >= 100");
  if (!(variance_rate >= 0.0) || !std::isfinite(variance_rate)) {
    throw Error(ErrorCode::NonFiniteMoment, "variance rate must be finite and >= 0");
  }
  const double dt = horizon / static_cast<double>(n_steps);
  const double scale = std::sqrt(variance_rate * dt);
  std::vector<double> times(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) times[i] = horizon * static_cast<double>(i) / static_cast<double>(n_steps);

  std::vector<ReflectedPath> paths(n_paths);
  std::vector<double> x(n_steps + 1);
  for (std::size_t p = 0; p < n_paths; ++p) {
    CounterRng rng(seed, Substream::Brownian, p);
    x[0] = 0.0;
    for (std::size_t i = 1; i <= n_steps; ++i) x[i] = x[i - 1] + scale * rng.normal();
    paths[p] = reflect(times, x);
  }
  return paths;
}

// ---------------------------------------------------------------------------
// KKT allocation

double allocation_objective(std::span<const double> x, const PredictedClassParams& params,
                            std::span<const CostFn> costs) {
  double total = 0.0;
  for (std::size_t l = 0; l < params.num_classes; ++l) {
    if (!params.active[l]) continue;
    total += params.lambda_tilde[l] * mixture_cost(l, params, costs).value(x[l] / params.rho_tilde[l]);
  }
  return total;
}

Allocation kkt_solve(double r, const PredictedClassParams& params, std::span<const CostFn> costs) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "kkt_solve needs finite r >= 0");
  const std::size_t K = params.num_classes;
  Allocation a;
  a.r = r;
  a.x.assign(K, 0.0);

  std::vector<std::size_t> active;
  std::vector<MixtureCost> mix(K);
  for (std::size_t l = 0; l < K; ++l) {
    if (!params.active[l]) continue;
    active.push_back(l);
    mix[l] = mixture_cost(l, params, costs);
  }
  if (active.empty()) throw Error(ErrorCode::ZeroColumn, "no active predicted class");
  if (r == 0.0) return a;  // h(0) = 0
  const std::size_t ref = active.front();
  if (active.size() == 1) {
    a.x[ref] = r;
    a.objective = allocation_objective(a.x, params, costs);
    return a;
  }

  const double rho_ref = params.rho_tilde[ref];
  const double mu_ref = params.mu_tilde[ref];
  std::vector<double> trial(K, 0.0);
  // g(x) = x + sum_{l != ref} rho~_l (C~_l')^{-1}((mu~_ref / mu~_l) C~_ref'(x / rho~_ref))
  auto fill = [&](double x_ref) {
    const double level = mu_ref * mix[ref].derivative(x_ref / rho_ref);
    double total = x_ref;
    trial[ref] = x_ref;
    for (std::size_t l : active) {
      if (l == ref) continue;
      trial[l] = params.rho_tilde[l] * mix[l].inverse_derivative(level / params.mu_tilde[l]);
      total += trial[l];
    }
    return total;
  };

  const double tol = 1e-10 * std::max(1.0, r);
  if (fill(r) < r - tol) throw Error(ErrorCode::BracketFailure, "g(r) < r; cost family is not admissible");
  double lo = 0.0;
  double hi = r;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = fill(mid);
    if (std::abs(g - r) <= tol * 1e-3) {
      lo = hi = mid;
      break;
    }
    (g < r ? lo : hi) = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * r) break;
  }
  const double x_ref = 0.5 * (lo + hi);
  const double g = fill(x_ref);
  if (std::abs(g - r) > tol && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * r) {
    throw Error(ErrorCode::BracketFailure, "bisection did not converge");
  }
  a.x = trial;
  // absorb the last round-off into the reference share so sum x = r
  double others = 0.0;
  for (std::size_t l : active) {
    if (l != ref) others += a.x[l];
  }
  a.x[ref] = std::max(0.0, r - others);
  a.objective = allocation_objective(a.x, params, costs);
  return a;
}

double kkt_balance_residual(const Allocation& allocation, const PredictedClassParams& params,
                            std::span<const CostFn> costs) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t l = 0; l < params.num_classes; ++l) {
    if (!params.active[l]) continue;
    const double v = params.mu_tilde[l] *
                     mixture_cost(l, params, costs).derivative(allocation.x[l] / params.rho_tilde[l]);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > 0.0)) return 0.0;
  return (hi - lo) / hi;
}

// ---------------------------------------------------------------------------
// Quadratic closed forms

double two_class_curvature(std::size_t l, const SystemConfig& config) {
  double num = 0.0;
  double load = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const double flow = config.lambda * config.prevalences[k] * config.confusion(k, l);
    num += flow * config.costs[k].coeff;
    load += flow / config.service_rates[k];
  }
  return num / (load * load);
}

std::pair<double, double> two_class_xstar(double r, const SystemConfig& config) {
  if (config.num_classes() != 2) throw Error(ErrorCode::InvalidArgument, "two_class_xstar needs K = 2");
  if (!config.all_quadratic()) throw Error(ErrorCode::NonQuadratic, "two_class_xstar needs quadratic costs");
  const double a1 = two_class_curvature(0, config);
  const double a2 = two_class_curvature(1, config);
  return {r * a2 / (a1 + a2), r * a1 / (a1 + a2)};
}

QuadraticCostCoefficients quadratic_coefficients(const SystemConfig& config) {
  if (!config.all_quadratic()) throw Error(ErrorCode::NonQuadratic, "closed forms need quadratic costs");
  const auto params = derive_predicted_params_allow_empty(config);
  const std::size_t K = params.num_classes;
  QuadraticCostCoefficients c;
  c.beta.assign(K, std::numeric_limits<double>::infinity());
  c.beta_naive.assign(K, std::numeric_limits<double>::infinity());
  double inv_sum = 0.0;
  double inv_sum_naive = 0.0;
  for (std::size_t l = 0; l < K; ++l) {
    if (!params.active[l]) continue;
    const double c_mix = mixture_cost(l, params, config.costs).quadratic_coeff();
    c.beta[l] = params.mu_tilde[l] * c_mix / params.rho_tilde[l];
    c.beta_naive[l] = params.mu_tilde[l] * config.costs[l].coeff / params.rho_tilde[l];
    inv_sum += 1.0 / c.beta[l];
    inv_sum_naive += 1.0 / c.beta_naive[l];
  }
  c.jstar_coeff = 1.0 / inv_sum;
  // naive split x_l proportional to 1 / beta_naive_l, charged at the true stiffness beta_l
  double naive = 0.0;
  for (std::size_t l = 0; l < K; ++l) {
    if (!params.active[l]) continue;
    const double share = c.beta_naive[l] * inv_sum_naive;
    naive += c.beta[l] / (share * share);
  }
  c.jnaive_coeff = naive;
  return c;
}

namespace {

CostEstimate summarize(std::vector<double> per_path) {
  CostEstimate e;
  const auto ms = mean_stderr(per_path);
  e.mean = ms.mean;
  e.stderr_ = ms.stderr_;
  e.per_path = std::move(per_path);
  return e;
}

}  // namespace

CostEstimate jstar(const SystemConfig& config, std::span<const ReflectedPath> w_paths, JStarMethod method) {
  if (method == JStarMethod::Auto) {
    method = config.all_quadratic() ? JStarMethod::CoefficientFastPath : JStarMethod::GeneralKkt;
  }
  std::vector<double> per_path(w_paths.size(), 0.0);
  if (method == JStarMethod::CoefficientFastPath) {
    const double coeff = quadratic_coefficients(config).jstar_coeff;
    for (std::size_t p = 0; p < w_paths.size(); ++p) per_path[p] = coeff * 0.5 * w_paths[p].square_integral();
    return summarize(std::move(per_path));
  }
  const auto params = derive_predicted_params_allow_empty(config);
  for (std::size_t p = 0; p < w_paths.size(); ++p) {
    const auto& path = w_paths[p];
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < path.t.size(); ++i) {
      const double w = path.reflected[i];
      if (w <= 0.0) continue;
      acc += kkt_solve(w, params, config.costs).objective * (path.t[i + 1] - path.t[i]);
    }
    per_path[p] = acc;
  }
  return summarize(std::move(per_path));
}

CostEstimate jnaive(const SystemConfig& config, std::span<const ReflectedPath> w_paths) {
  const double coeff = quadratic_coefficients(config).jnaive_coeff;
  std::vector<double> per_path(w_paths.size());
  for (std::size_t p = 0; p < w_paths.size(); ++p) per_path[p] = coeff * 0.5 * w_paths[p].square_integral();
  return summarize(std::move(per_path));
}

double relative_regret(const SystemConfig& config) {
  SystemConfig perfect = config;
  perfect.confusion = ConfusionMatrix::identity(config.num_classes());
  return quadratic_coefficients(config).jstar_coeff / quadratic_coefficients(perfect).jstar_coeff;
}

std::vector<RankedModel> rank_models(std::span<const ModelCandidate> candidates, const SystemConfig& base) {
  std::vector<RankedModel> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    SystemConfig cfg = base;
    cfg.confusion = c.confusion;
    const auto coeffs = quadratic_coefficients(cfg);
    out.push_back({c.name, relative_regret(cfg), coeffs.jstar_coeff, coeffs.jnaive_coeff});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedModel& a, const RankedModel& b) { return a.relative_regret < b.relative_regret; });
  return out;
}

void write_criteria_csv(std::ostream& out, std::span<const RankedModel> ranked) {
  csv::Writer w(out);
  w.header({"model_name", "relative_regret", "jstar_coeff", "jnaive_coeff"});
  for (const auto& m : ranked) {
    w.field(std::string_view(m.name)).field(m.relative_regret).field(m.jstar_coeff).field(m.jnaive_coeff);
    w.end_row();
  }
}

}  // namespace pqsched
