#include "pqsched/triage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pqsched/config_io.hpp"
#include "pqsched/csv.hpp"
#include "pqsched/parallel.hpp"

namespace pqsched {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Passing curves

PassingCurve PassingCurve::interpolated(std::vector<double> z, std::vector<double> g) {
  if (z.size() != g.size() || z.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "passing curve needs at least two (z, g) knots of equal count");
  }
  if (z.front() != 0.0 || z.back() != 1.0) throw Error(ErrorCode::InvalidArgument, "passing curve knots must span [0, 1]");
  if (g.front() != 1.0) throw Error(ErrorCode::InvalidArgument, "passing curve must satisfy g(0) = 1");
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(g[i] >= 0.0 && g[i] <= 1.0)) throw Error(ErrorCode::EntryOutOfRange, "passing probability outside [0, 1]");
    if (i > 0 && !(z[i] > z[i - 1])) throw Error(ErrorCode::InvalidArgument, "passing curve knots must increase");
    if (i > 0 && g[i] > g[i - 1]) throw Error(ErrorCode::InvalidArgument, "passing curve must be nonincreasing");
  }
  PassingCurve c;
  c.kind_ = Kind::Interpolated;
  c.z_ = std::move(z);
  c.g_ = std::move(g);
  return c;
}

PassingCurve PassingCurve::logit_normal(double location, double scale) {
  if (!std::isfinite(location) || !(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::InvalidArgument, "logit-normal curve needs finite location and scale > 0");
  }
  PassingCurve c;
  c.kind_ = Kind::LogitNormal;
  c.location_ = location;
  c.scale_ = scale;
  return c;
}

double PassingCurve::operator()(double z) const {
  if (!(z >= 0.0 && z <= 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold outside [0, 1]");
  if (kind_ == Kind::LogitNormal) {
    if (z == 0.0) return 1.0;
    if (z == 1.0) return 0.0;
    const double y = (std::log(z / (1.0 - z)) - location_) / scale_;
    return 0.5 * std::erfc(y / std::sqrt(2.0));
  }
  const auto it = std::upper_bound(z_.begin(), z_.end(), z);
  if (it == z_.end()) return g_.back();
  const std::size_t hi = static_cast<std::size_t>(it - z_.begin());
  const std::size_t lo = hi - 1;
  const double w = (z - z_[lo]) / (z_[hi] - z_[lo]);
  return g_[lo] + w * (g_[hi] - g_[lo]);
}

// ---------------------------------------------------------------------------
// Config

void validate_triage_config(const TriageConfig& c) {
  if (!(c.Lambda > 0.0) || !std::isfinite(c.Lambda)) throw Error(ErrorCode::NonPositiveRate, "Lambda must be > 0");
  if (std::abs(c.p[0] + c.p[1] - 1.0) > 1e-9 || c.p[0] < 0.0 || c.p[1] < 0.0) {
    throw Error(ErrorCode::PrevalenceNotNormalized, "triage prevalences must be >= 0 and sum to 1");
  }
  for (double m : c.mu) {
    if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorCode::NonPositiveRate, "service rates must be > 0");
  }
  if (!(c.c_trp > 0.0)) throw Error(ErrorCode::InvalidCost, "c_trp must be > 0");
  if (!(c.c_trn < 0.0)) throw Error(ErrorCode::InvalidCost, "c_trn must be < 0");
  if (!(c.c_r > 0.0)) throw Error(ErrorCode::InvalidCost, "c_r must be > 0");
  for (double d : c.delay) {
    if (!(d > 0.0)) throw Error(ErrorCode::InvalidCost, "delay coefficients must be > 0");
  }
}

namespace {

double num(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  if (!j.at(key).is_number()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::array<double, 2> pair_of(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 2) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be an array of two numbers");
  }
  try {
    return {j.at(key)[0].get<double>(), j.at(key)[1].get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const PassingCurve& curve) {
  if (curve.kind() == PassingCurve::Kind::LogitNormal) {
    return json{{"type", "logit_normal"}, {"location", curve.location()}, {"scale", curve.scale()}};
  }
  return json{{"type", "interpolated"}, {"z", curve.knots()}, {"g", curve.values()}};
}

PassingCurve passing_curve_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type")) throw Error(ErrorCode::ParseError, "passing curve needs a 'type'");
  const auto type = j.at("type").get<std::string>();
  if (type == "logit_normal") return PassingCurve::logit_normal(num(j, "location"), num(j, "scale"));
  if (type == "interpolated") {
    try {
      return PassingCurve::interpolated(j.at("z").get<std::vector<double>>(), j.at("g").get<std::vector<double>>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("interpolated curve: ") + e.what());
    }
  }
  throw Error(ErrorCode::ParseError, "unknown passing curve type '" + type + "'");
}

json to_json(const TriageConfig& c) {
  return json{{"Lambda", c.Lambda},
              {"p", c.p},
              {"mu", c.mu},
              {"curves", {to_json(c.curves[0]), to_json(c.curves[1])}},
              {"c_trp", c.c_trp},
              {"c_trn", c.c_trn},
              {"c_fp", c.c_fp},
              {"c_fn", c.c_fn},
              {"c_tp", c.c_tp},
              {"c_tn", c.c_tn},
              {"c_r", c.c_r},
              {"delay", c.delay},
              {"arrival_dist", to_json(c.arrival_dist)},
              {"service_dist", to_json(c.service_dist)}};
}

TriageConfig triage_config_from_json(const json& j) {
  TriageConfig c;
  c.Lambda = num(j, "Lambda");
  c.p = pair_of(j, "p");
  c.mu = pair_of(j, "mu");
  if (!j.contains("curves") || !j.at("curves").is_array() || j.at("curves").size() != 2) {
    throw Error(ErrorCode::ParseError, "field 'curves' must hold two passing curves (toxic, non-toxic)");
  }
  c.curves = {passing_curve_from_json(j.at("curves")[0]), passing_curve_from_json(j.at("curves")[1])};
  c.c_trp = num(j, "c_trp");
  c.c_trn = num(j, "c_trn");
  c.c_fp = num(j, "c_fp");
  c.c_fn = num(j, "c_fn");
  c.c_tp = num(j, "c_tp");
  c.c_tn = num(j, "c_tn");
  c.c_r = num(j, "c_r");
  c.delay = pair_of(j, "delay");
  if (j.contains("arrival_dist")) c.arrival_dist = distribution_from_json(j.at("arrival_dist"));
  if (j.contains("service_dist")) c.service_dist = distribution_from_json(j.at("service_dist"));
  validate_triage_config(c);
  return c;
}

TriageConfig load_triage_config(const std::filesystem::path& path) { return triage_config_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Cost components

double staffing(double z_fl, const TriageConfig& c) {
  return c.Lambda * (c.p[0] * c.curves[0](z_fl) / c.mu[0] + c.p[1] * c.curves[1](z_fl) / c.mu[1]);
}

SystemConfig reviewer_params(double z_fl, double z_tx, const TriageConfig& c) {
  if (z_tx < z_fl) throw Error(ErrorCode::InvalidArgument, "z_tx must be >= z_fl");
  const std::array<double, 2> pass{c.curves[0](z_fl), c.curves[1](z_fl)};
  const double passed = c.p[0] * pass[0] + c.p[1] * pass[1];
  if (!(passed > 0.0)) throw Error(ErrorCode::EmptyPass, "the filter removes every job at z_fl");
  const double gamma = staffing(z_fl, c);

  SystemConfig r;
  r.lambda = c.Lambda * passed / gamma;
  r.confusion = ConfusionMatrix(2);
  for (std::size_t k = 0; k < 2; ++k) {
    r.prevalences.push_back(c.p[k] * pass[k] / passed);
    r.service_rates.push_back(c.mu[k]);
    r.costs.push_back(CostFn{c.delay[k], 2.0});
    // a class that never passes carries no mass; any stochastic row will do
    const double q_tox = pass[k] > 0.0 ? std::min(1.0, c.curves[k](z_tx) / pass[k]) : 1.0;
    r.confusion(k, 0) = q_tox;
    r.confusion(k, 1) = 1.0 - q_tox;
  }
  r.arrival_dist = c.arrival_dist;
  r.service_dist = c.service_dist;
  return r;
}

double filtering_cost_rate(double z_fl, const TriageConfig& c) {
  return c.Lambda * (c.c_trp * c.p[0] * (1.0 - c.curves[0](z_fl)) + c.c_trn * c.p[1] * (1.0 - c.curves[1](z_fl)));
}

double misclass_cost_rate(double z_fl, double z_tx, const TriageConfig& c) {
  // p_k g_k(z_fl) q_k0 = p_k g_k(z_tx), written without the division
  const double g1f = c.curves[0](z_fl), g1t = c.curves[0](z_tx);
  const double g2f = c.curves[1](z_fl), g2t = c.curves[1](z_tx);
  return c.Lambda * (c.p[0] * (c.c_tp * g1t + c.c_fn * (g1f - g1t)) + c.p[1] * (c.c_fp * g2t + c.c_tn * (g2f - g2t)));
}

QueueCostSampler::QueueCostSampler(const McParams& mc) : mc_(mc) {
  const auto paths = bm_workload_paths(1.0, mc.n_steps, mc.horizon, mc.n_paths, mc.seed);
  unit_.reserve(paths.size());
  for (const auto& p : paths) unit_.push_back(p.square_integral());
}

CostEstimate reviewer_queue_cost(double z_fl, double z_tx, const TriageConfig& config,
                                 const QueueCostSampler& sampler) {
  const SystemConfig r = reviewer_params(z_fl, z_tx, config);
  const double coeff = quadratic_coefficients(r).jstar_coeff;
  const double v = workload_variance_rate(r);
  std::vector<double> per_path;
  per_path.reserve(sampler.unit_square_integrals().size());
  for (double i2 : sampler.unit_square_integrals()) per_path.push_back(coeff * 0.5 * v * i2);
  CostEstimate e;
  const auto ms = mean_stderr(per_path);
  e.mean = ms.mean;
  e.stderr_ = ms.stderr_;
  e.per_path = std::move(per_path);
  return e;
}

CostEstimate reviewer_queue_cost(double z_fl, double z_tx, const TriageConfig& config, const McParams& mc) {
  return reviewer_queue_cost(z_fl, z_tx, config, QueueCostSampler(mc));
}

TriageDecision total_cost(double z_fl, double z_tx, const TriageConfig& config, const QueueCostSampler& sampler) {
  if (z_tx < z_fl) throw Error(ErrorCode::InvalidArgument, "z_tx must be >= z_fl");
  const double t = sampler.params().horizon;
  TriageDecision d;
  d.z_fl = z_fl;
  d.z_tx = z_tx;
  d.gamma = staffing(z_fl, config);
  d.filtering = filtering_cost_rate(z_fl, config) * t;
  d.hiring = config.c_r * d.gamma * t;
  d.misclassification = misclass_cost_rate(z_fl, z_tx, config) * t;
  if (d.gamma > 0.0) {
    const auto q = reviewer_queue_cost(z_fl, z_tx, config, sampler);
    d.queueing = d.gamma * q.mean;
    d.queueing_stderr = d.gamma * q.stderr_;
  }
  d.total = d.filtering + d.hiring + d.misclassification + d.queueing;
  return d;
}

TriageDecision total_cost(double z_fl, double z_tx, const TriageConfig& config, const McParams& mc) {
  return total_cost(z_fl, z_tx, config, QueueCostSampler(mc));
}

TriageSearch optimize(const TriageConfig& config, std::span<const double> z_fl_grid,
                      std::span<const double> z_tx_grid, const McParams& mc) {
  std::vector<std::pair<double, double>> pairs;
  for (double zf : z_fl_grid) {
    for (double zt : z_tx_grid) {
      if (!(zf >= 0.0 && zf <= 1.0 && zt >= 0.0 && zt <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "thresholds must lie in [0, 1]");
      }
      if (zt >= zf) pairs.emplace_back(zf, zt);
    }
  }
  if (pairs.empty()) throw Error(ErrorCode::EmptyGrid, "no threshold pair with z_tx >= z_fl");

  const QueueCostSampler sampler(mc);
  TriageSearch s;
  s.evaluated.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    s.evaluated[i] = total_cost(pairs[i].first, pairs[i].second, config, sampler);
  });
  for (std::size_t i = 1; i < s.evaluated.size(); ++i) {
    const auto& a = s.evaluated[i];
    const auto& b = s.evaluated[s.best];
    const bool better = a.total < b.total ||
                        (a.total == b.total && (a.z_fl < b.z_fl || (a.z_fl == b.z_fl && a.z_tx < b.z_tx)));
    if (better) s.best = i;
  }
  return s;
}

void write_triage_csv(std::ostream& out, std::span<const TriageDecision> rows) {
  csv::Writer w(out);
  w.header({"z_fl", "z_tx", "gamma", "filtering", "hiring", "misclass", "queueing", "queueing_stderr", "total"});
  for (const auto& d : rows) {
    w.field(d.z_fl).field(d.z_tx).field(d.gamma).field(d.filtering).field(d.hiring);
    w.field(d.misclassification).field(d.queueing).field(d.queueing_stderr).field(d.total);
    w.end_row();
  }
}

// ---------------------------------------------------------------------------
// Estimation from validation scores

PassingCurves estimate_curves(std::span<const double> toxic_scores, std::span<const double> nontoxic_scores,
                              std::size_t grid_points) {
  if (grid_points < 2) throw Error(ErrorCode::InvalidArgument, "estimate_curves needs at least two grid points");
  const auto z = linspace(0.0, 1.0, grid_points);
  auto one = [&](std::span<const double> scores, const char* name) {
    if (scores.empty()) throw Error(ErrorCode::EmptyClass, std::string("no validation scores for the ") + name + " class");
    std::vector<double> sorted(scores.begin(), scores.end());
    for (double s : sorted) {
      if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorCode::EntryOutOfRange, "scores must lie in [0, 1]");
    }
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> g(z.size());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const auto below = std::lower_bound(sorted.begin(), sorted.end(), z[i]) - sorted.begin();
      g[i] = (n - static_cast<double>(below)) / n;
    }
    return PassingCurve::interpolated(z, std::move(g));
  };
  return {one(toxic_scores, "toxic"), one(nontoxic_scores, "non-toxic")};
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {a};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = b;
  return out;
}

}  // namespace pqsched
