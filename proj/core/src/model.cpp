#include "pqsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pqsched {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EntryOutOfRange: return "EntryOutOfRange";
    case ErrorCode::RowNotStochastic: return "RowNotStochastic";
    case ErrorCode::PrevalenceNotNormalized: return "PrevalenceNotNormalized";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::InvalidCost: return "InvalidCost";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::EventOverflow: return "EventOverflow";
    case ErrorCode::OracleUnavailable: return "OracleUnavailable";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::NonQuadratic: return "NonQuadratic";
    case ErrorCode::NonFiniteMoment: return "NonFiniteMoment";
    case ErrorCode::ScheduleNonPositive: return "ScheduleNonPositive";
    case ErrorCode::EmptyPass: return "EmptyPass";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// CostFn

double CostFn::value(double t) const noexcept {
  if (t <= 0.0) return 0.0;
  if (power == 2.0) return 0.5 * coeff * t * t;
  return coeff / power * std::pow(t, power);
}

double CostFn::derivative(double t) const noexcept {
  if (t <= 0.0) return 0.0;
  if (power == 2.0) return coeff * t;
  return coeff * std::pow(t, power - 1.0);
}

double CostFn::second_derivative(double t) const noexcept {
  if (power == 2.0) return coeff;
  if (t <= 0.0) return 0.0;
  return coeff * (power - 1.0) * std::pow(t, power - 2.0);
}

// ---------------------------------------------------------------------------
// ConfusionMatrix

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : k_(num_classes), q_(num_classes * num_classes, 0.0) {}

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes, std::vector<double> row_major)
    : k_(num_classes), q_(std::move(row_major)) {
  if (q_.size() != k_ * k_) {
    throw Error(ErrorCode::DimensionMismatch,
                "confusion matrix needs " + std::to_string(k_ * k_) + " entries, got " +
                    std::to_string(q_.size()));
  }
}

ConfusionMatrix ConfusionMatrix::identity(std::size_t num_classes) {
  ConfusionMatrix q(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) q(k, k) = 1.0;
  return q;
}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  ConfusionMatrix q(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != rows.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "confusion row " + std::to_string(k + 1) + " has " +
                      std::to_string(rows[k].size()) + " entries, expected " +
                      std::to_string(rows.size()));
    }
    std::copy(rows[k].begin(), rows[k].end(), q.q_.begin() + static_cast<std::ptrdiff_t>(k * q.k_));
  }
  return q;
}

// ---------------------------------------------------------------------------
// Distribution

double Distribution::sample(CounterRng& rng, double rate) const {
  switch (family) {
    case Family::Exponential:
      return rng.exponential(rate);
    case Family::Deterministic:
      return 1.0 / rate;
    case Family::Lognormal: {
      const double s2 = std::log1p(cv * cv);
      const double mu = -std::log(rate) - 0.5 * s2;
      return std::exp(mu + std::sqrt(s2) * rng.normal());
    }
  }
  return 1.0 / rate;
}

double Distribution::squared_cv() const noexcept {
  switch (family) {
    case Family::Exponential: return 1.0;
    case Family::Deterministic: return 0.0;
    case Family::Lognormal: return cv * cv;
  }
  return 1.0;
}

double Distribution::second_moment(double rate) const noexcept {
  const double mean = 1.0 / rate;
  return mean * mean * (1.0 + squared_cv());
}

std::string to_string(Distribution::Family family) {
  switch (family) {
    case Distribution::Family::Exponential: return "exponential";
    case Distribution::Family::Deterministic: return "deterministic";
    case Distribution::Family::Lognormal: return "lognormal";
  }
  return "exponential";
}

// ---------------------------------------------------------------------------
// SystemConfig

double SystemConfig::traffic_intensity() const noexcept {
  double load = 0.0;
  const std::size_t n = std::min(prevalences.size(), service_rates.size());
  for (std::size_t k = 0; k < n; ++k) load += prevalences[k] / service_rates[k];
  return lambda * load;
}

bool SystemConfig::all_quadratic() const noexcept {
  return std::all_of(costs.begin(), costs.end(), [](const CostFn& c) { return c.is_quadratic(); });
}

// ---------------------------------------------------------------------------
// Predicted-class primitives

namespace {

PredictedClassParams derive_impl(const SystemConfig& config, bool allow_empty) {
  const std::size_t K = config.num_classes();
  if (config.confusion.size() != K || config.service_rates.size() != K) {
    throw Error(ErrorCode::DimensionMismatch, "prevalences, service_rates and confusion disagree on K");
  }
  PredictedClassParams out;
  out.num_classes = K;
  out.p_tilde.assign(K, 0.0);
  out.lambda_tilde.assign(K, 0.0);
  out.mu_tilde.assign(K, 0.0);
  out.rho_tilde.assign(K, 0.0);
  out.mix_weights.assign(K * K, 0.0);
  out.active.assign(K, true);

  const ConfusionMatrix& q = config.confusion;
  for (std::size_t l = 0; l < K; ++l) {
    double p = 0.0;
    double load = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      p += config.prevalences[k] * q(k, l);
      load += config.prevalences[k] * q(k, l) / config.service_rates[k];
    }
    if (!(p > 0.0)) {
      if (!allow_empty) {
        throw Error(ErrorCode::ZeroColumn,
                    "predicted class " + std::to_string(l + 1) + " has zero mass sum_k p_k q_kl");
      }
      out.active[l] = false;
      continue;
    }
    out.p_tilde[l] = p;
    out.lambda_tilde[l] = config.lambda * p;
    // mean service time of a job predicted as l is sum_k w_kl / mu_k
    out.mu_tilde[l] = p / load;
    out.rho_tilde[l] = config.lambda * load;
    for (std::size_t k = 0; k < K; ++k) {
      out.mix_weights[k * K + l] = config.prevalences[k] * q(k, l) / p;
    }
  }
  return out;
}

}  // namespace

PredictedClassParams derive_predicted_params(const SystemConfig& config) {
  return derive_impl(config, false);
}

PredictedClassParams derive_predicted_params_allow_empty(const SystemConfig& config) {
  return derive_impl(config, true);
}

// ---------------------------------------------------------------------------
// MixtureCost

MixtureCost::MixtureCost(std::vector<Term> terms) {
  for (auto& t : terms) {
    if (t.weight > 0.0) terms_.push_back(t);
  }
}

double MixtureCost::value(double t) const noexcept {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * term.cost.value(t);
  return s;
}

double MixtureCost::derivative(double t) const noexcept {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * term.cost.derivative(t);
  return s;
}

double MixtureCost::second_derivative(double t) const noexcept {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * term.cost.second_derivative(t);
  return s;
}

bool MixtureCost::is_quadratic() const noexcept {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.cost.is_quadratic(); });
}

double MixtureCost::quadratic_coeff() const noexcept {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * term.cost.coeff;
  return s;
}

double MixtureCost::inverse_derivative(double y) const {
  if (y <= 0.0) return 0.0;
  if (terms_.empty()) {
    throw Error(ErrorCode::BracketFailure, "cannot invert the derivative of an empty mixture");
  }
  const double power = terms_.front().cost.power;
  const bool single_power = std::all_of(terms_.begin(), terms_.end(),
                                        [power](const Term& t) { return t.cost.power == power; });
  if (single_power) {
    double c = 0.0;
    for (const auto& term : terms_) c += term.weight * term.cost.coeff;
    if (power == 2.0) return y / c;
    return std::pow(y / c, 1.0 / (power - 1.0));
  }
  double hi = 1.0;
  int expansions = 0;
  while (derivative(hi) < y) {
    hi *= 2.0;
    if (++expansions > 2000) {
      throw Error(ErrorCode::BracketFailure, "derivative does not reach the requested level");
    }
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (derivative(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

MixtureCost mixture_cost(std::size_t predicted_class, const PredictedClassParams& params,
                         std::span<const CostFn> costs) {
  if (predicted_class >= params.num_classes || costs.size() != params.num_classes) {
    throw Error(ErrorCode::InvalidArgument, "mixture_cost: class index or cost vector out of range");
  }
  std::vector<MixtureCost::Term> terms;
  terms.reserve(costs.size());
  for (std::size_t k = 0; k < costs.size(); ++k) {
    terms.push_back({params.weight(k, predicted_class), costs[k]});
  }
  return MixtureCost(std::move(terms));
}

// ---------------------------------------------------------------------------
// Validation

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << "rho=" << rho;
  for (const auto& e : errors) os << "\n  error " << to_string(e.code) << ": " << e.message;
  for (const auto& w : warnings) os << "\n  warning: " << w.message;
  return os.str();
}

ValidationReport validate_config(const SystemConfig& config) {
  ValidationReport report;
  auto error = [&](ErrorCode code, std::string msg) { report.errors.push_back({code, std::move(msg)}); };
  const std::size_t K = config.num_classes();

  if (K == 0) error(ErrorCode::DimensionMismatch, "no classes configured");
  if (config.service_rates.size() != K) {
    error(ErrorCode::DimensionMismatch, "service_rates has " + std::to_string(config.service_rates.size()) +
                                            " entries, expected " + std::to_string(K));
  }
  if (config.costs.size() != K) {
    error(ErrorCode::DimensionMismatch,
          "costs has " + std::to_string(config.costs.size()) + " entries, expected " + std::to_string(K));
  }
  if (config.confusion.size() != K) {
    error(ErrorCode::DimensionMismatch, "confusion is " + std::to_string(config.confusion.size()) +
                                            "x" + std::to_string(config.confusion.size()) +
                                            ", expected " + std::to_string(K));
  }
  if (!(config.lambda > 0.0) || !std::isfinite(config.lambda)) {
    error(ErrorCode::NonPositiveRate, "lambda must be positive and finite");
  }
  if (!(config.horizon > 0.0) || !std::isfinite(config.horizon)) {
    error(ErrorCode::InvalidArgument, "horizon must be positive and finite");
  }
  for (std::size_t k = 0; k < config.service_rates.size(); ++k) {
    if (!(config.service_rates[k] > 0.0) || !std::isfinite(config.service_rates[k])) {
      error(ErrorCode::NonPositiveRate, "service rate of class " + std::to_string(k + 1) + " is not positive");
    }
  }
  for (std::size_t k = 0; k < config.costs.size(); ++k) {
    const auto& c = config.costs[k];
    if (!(c.coeff > 0.0)) error(ErrorCode::InvalidCost, "cost coeff of class " + std::to_string(k + 1) + " must be > 0");
    if (!(c.power >= 2.0)) error(ErrorCode::InvalidCost, "cost power of class " + std::to_string(k + 1) + " must be >= 2");
  }
  double psum = 0.0;
  bool prevalence_ok = true;
  for (std::size_t k = 0; k < K; ++k) {
    const double p = config.prevalences[k];
    if (!(p >= 0.0 && p <= 1.0)) {
      error(ErrorCode::EntryOutOfRange, "prevalence of class " + std::to_string(k + 1) + " outside [0,1]");
      prevalence_ok = false;
    }
    psum += p;
  }
  if (K > 0 && std::abs(psum - 1.0) > kStochasticTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "prevalences sum to " << psum;
    error(ErrorCode::PrevalenceNotNormalized, os.str());
    prevalence_ok = false;
  }

  bool confusion_ok = config.confusion.size() == K;
  if (confusion_ok) {
    for (std::size_t k = 0; k < K; ++k) {
      double rs = 0.0;
      for (std::size_t l = 0; l < K; ++l) {
        const double v = config.confusion(k, l);
        if (!(v >= 0.0 && v <= 1.0)) {
          error(ErrorCode::EntryOutOfRange, "q[" + std::to_string(k + 1) + "][" + std::to_string(l + 1) + "] outside [0,1]");
          confusion_ok = false;
        }
        rs += v;
      }
      if (std::abs(rs - 1.0) > kStochasticTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "row " << (k + 1) << " of the confusion matrix sums to " << rs;
        error(ErrorCode::RowNotStochastic, os.str());
        confusion_ok = false;
      }
    }
  }
  if (confusion_ok && prevalence_ok) {
    for (std::size_t l = 0; l < K; ++l) {
      double col = 0.0;
      for (std::size_t k = 0; k < K; ++k) col += config.prevalences[k] * config.confusion(k, l);
      if (!(col > 0.0)) {
        error(ErrorCode::ZeroColumn, "predicted class " + std::to_string(l + 1) + " has zero mass sum_k p_k q_kl");
      }
    }
  }

  if (report.errors.empty()) {
    report.rho = config.traffic_intensity();
    if (std::abs(report.rho - 1.0) > kHeavyTrafficBand) {
      std::ostringstream os;
      os << "traffic intensity " << report.rho << " is outside the heavy-traffic band 1 +/- " << kHeavyTrafficBand;
      report.warnings.push_back({ErrorCode::InvalidArgument, os.str()});
    }
  }
  return report;
}

void require_valid(const SystemConfig& config) {
  const auto report = validate_config(config);
  if (!report.ok()) throw Error(report.errors.front().code, report.summary());
}

}  // namespace pqsched
