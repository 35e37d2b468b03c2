#include "pqsched/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pqsched/csv.hpp"

namespace pqsched {

// ---------------------------------------------------------------------------
// Rate schedules

RateSchedule RateSchedule::constant(double multiplier) {
  RateSchedule s;
  s.arrival = [multiplier](double) { return multiplier; };
  s.arrival_max = multiplier;
  return s;
}

RateSchedule RateSchedule::sinusoidal_arrivals(double lambda0, double amplitude, double omega) {
  if (!(lambda0 > 0.0)) throw Error(ErrorCode::ScheduleNonPositive, "lambda0 must be positive");
  RateSchedule s;
  s.arrival = [lambda0, amplitude, omega](double t) {
    return std::max(lambda0 / 2.0, lambda0 + amplitude * std::sin(omega * t)) / lambda0;
  };
  s.arrival_max = std::max(0.5, 1.0 + std::abs(amplitude) / lambda0);
  return s;
}

RateSchedule RateSchedule::piecewise_arrivals(std::vector<double> breakpoints, std::vector<double> values) {
  if (breakpoints.empty() || breakpoints.size() != values.size() || breakpoints.front() != 0.0 ||
      !std::is_sorted(breakpoints.begin(), breakpoints.end())) {
    throw Error(ErrorCode::InvalidArgument, "piecewise schedule needs sorted breakpoints starting at 0");
  }
  for (double v : values) {
    if (!(v > 0.0)) throw Error(ErrorCode::ScheduleNonPositive, "piecewise multiplier must be positive");
  }
  RateSchedule s;
  s.arrival_max = *std::max_element(values.begin(), values.end());
  s.arrival = [bp = std::move(breakpoints), vals = std::move(values)](double t) {
    const auto it = std::upper_bound(bp.begin(), bp.end(), t);
    return vals[static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - bp.begin() - 1))];
  };
  return s;
}

RateSchedule RateSchedule::linear_service_decay(std::vector<double> mu0, std::vector<double> slope,
                                                std::vector<double> floor) {
  if (mu0.size() != slope.size() || mu0.size() != floor.size()) {
    throw Error(ErrorCode::DimensionMismatch, "service decay vectors differ in length");
  }
  for (std::size_t k = 0; k < mu0.size(); ++k) {
    if (!(mu0[k] > 0.0) || !(floor[k] > 0.0)) {
      throw Error(ErrorCode::ScheduleNonPositive, "service decay needs positive base rate and floor");
    }
  }
  RateSchedule s;
  s.service = [mu0 = std::move(mu0), slope = std::move(slope), floor = std::move(floor)](double t, std::size_t k) {
    return std::max(floor[k], mu0[k] - slope[k] * t) / mu0[k];
  };
  return s;
}

// ---------------------------------------------------------------------------
// Sampling helpers

std::size_t sample_index(std::span<const double> probabilities, CounterRng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    cum += probabilities[i];
    last_positive = i;
    if (u <= cum) return i;
  }
  // rounding left the cumulative sum a hair below 1
  return last_positive;
}

std::size_t sample_classification(std::size_t true_class, const ConfusionMatrix& q, CounterRng& rng) {
  return sample_index(q.row(true_class), rng);
}

std::vector<std::size_t> composition_snapshot(const QueueState& state) {
  const std::size_t K = state.num_classes();
  std::vector<std::size_t> out(K * K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = 0; l < K; ++l) out[k * K + l] = state.composition(k, l);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

// int_0^d |a - slope * s| ds for slope > 0
double abs_linear_integral(double a, double slope, double d) {
  const double b = a - slope * d;
  if ((a >= 0.0) == (b >= 0.0)) return 0.5 * std::abs(a + b) * d;
  return (a * a + b * b) / (2.0 * slope);
}

class Simulator {
 public:
  Simulator(const SystemConfig& config, const PolicyRef& policy, std::uint64_t seed, const RunOptions& options)
      : config_(config),
        policy_(policy),
        options_(options),
        K_(config.num_classes()),
        T_(config.horizon),
        state_(K_, policy.partition()),
        params_(derive_predicted_params_allow_empty(config)),
        arrivals_rng_(seed, Substream::Interarrival),
        class_rng_(seed, Substream::TrueClass),
        service_rng_(seed, Substream::Service),
        classify_rng_(seed, Substream::Classification),
        thinning_rng_(seed, Substream::Thinning),
        w_pred_(K_, 0.0) {
    if (options_.sampling_grid < 2) throw Error(ErrorCode::InvalidArgument, "sampling_grid must be >= 2");
    result_.num_classes = K_;
    result_.horizon = T_;
    result_.seed = seed;
    auto& st = result_.stats;
    st.int_n_pred.assign(K_, 0.0);
    st.int_n_true.assign(K_, 0.0);
    st.int_n_kl.assign(K_ * K_, 0.0);
    st.int_workload_gap.assign(K_, 0.0);
    const std::size_t G = options_.sampling_grid;
    result_.curves.t.reserve(G);
    result_.curves.w_plus.reserve(G);
    result_.curves.n_pred.reserve(G * K_);
    result_.curves.n_kl.reserve(G * K_ * K_);
    const double expected_jobs = config.lambda * T_ * (schedule() ? schedule()->arrival_max : 1.0);
    if (expected_jobs < 1e8) result_.jobs.reserve(static_cast<std::size_t>(expected_jobs * 1.1) + 16);
  }

  PathResult run() {
    if (options_.trace) {
      const auto& tr = *options_.trace;
      for (std::size_t i = 0; i < tr.size(); ++i) {
        const Job& j = tr[i];
        if (j.true_class >= K_ || j.predicted_class >= K_ || !(j.service_req > 0.0) ||
            (i > 0 && j.arrival_time < tr[i - 1].arrival_time) || j.arrival_time < 0.0) {
          throw Error(ErrorCode::InvalidArgument, "trace job " + std::to_string(i) + " is malformed or out of order");
        }
      }
    }
    next_arrival_ = next_arrival_time(0.0);
    for (;;) {
      const double completion = current_ ? now_ + jobs()[*current_].remaining
                                         : std::numeric_limits<double>::infinity();
      const double next = std::min(next_arrival_, completion);
      if (next > T_) {
        advance_to(T_);
        break;
      }
      advance_to(next);
      if (completion <= next_arrival_) {
        complete_current();
      } else {
        admit_arrival();
      }
      if (++result_.event_count > options_.max_events) {
        throw Error(ErrorCode::EventOverflow,
                    "more than " + std::to_string(options_.max_events) + " events; is the system overloaded?");
      }
      reschedule();
    }
    flush_grid(T_);
    return std::move(result_);
  }

 private:
  std::vector<Job>& jobs() { return result_.jobs; }
  const RateSchedule* schedule() const { return options_.schedule; }

  double draw_arrival(double from) {
    const RateSchedule* s = schedule();
    if (!s || !s->arrival) return from + config_.arrival_dist.sample(arrivals_rng_, config_.lambda);
    double t = from;
    for (;;) {
      t += config_.arrival_dist.sample(arrivals_rng_, config_.lambda * s->arrival_max);
      if (t > T_) return t;
      const double m = s->arrival(t);
      if (!(m > 0.0) || m > s->arrival_max * (1.0 + 1e-12)) {
        throw Error(ErrorCode::ScheduleNonPositive, "arrival multiplier outside (0, max] at t=" + std::to_string(t));
      }
      if (thinning_rng_.uniform() * s->arrival_max <= m) return t;
    }
  }

  double next_arrival_time(double from) {
    if (!options_.trace) return draw_arrival(from);
    return trace_pos_ < options_.trace->size() ? (*options_.trace)[trace_pos_].arrival_time
                                               : std::numeric_limits<double>::infinity();
  }

  void record_sample(double t) {
    auto& c = result_.curves;
    c.t.push_back(t);
    c.w_plus.push_back(workload_);
    for (std::size_t l = 0; l < K_; ++l) c.n_pred.push_back(static_cast<std::uint32_t>(state_.predicted_length(l)));
    for (std::size_t k = 0; k < K_; ++k) {
      for (std::size_t l = 0; l < K_; ++l) c.n_kl.push_back(static_cast<std::uint32_t>(state_.composition(k, l)));
    }
  }

  double grid_time(std::size_t i) const {
    return T_ * static_cast<double>(i) / static_cast<double>(options_.sampling_grid - 1);
  }

  // Records grid points with time <= t, using the state on [now_, t).
  void flush_grid(double t) {
    while (next_grid_ < options_.sampling_grid && grid_time(next_grid_) <= t) {
      integrate(grid_time(next_grid_));
      record_sample(grid_time(next_grid_));
      ++next_grid_;
    }
  }

  void advance_to(double t) {
    while (next_grid_ < options_.sampling_grid && grid_time(next_grid_) < t) {
      integrate(grid_time(next_grid_));
      record_sample(grid_time(next_grid_));
      ++next_grid_;
    }
    integrate(t);
  }

  void integrate(double t) {
    const double d = t - now_;
    if (d <= 0.0) return;
    auto& st = result_.stats;
    for (std::size_t l = 0; l < K_; ++l) st.int_n_pred[l] += static_cast<double>(state_.predicted_length(l)) * d;
    for (std::size_t k = 0; k < K_; ++k) {
      st.int_n_true[k] += static_cast<double>(state_.true_length(k)) * d;
      for (std::size_t l = 0; l < K_; ++l) {
        const auto n = state_.composition(k, l);
        if (n) st.int_n_kl[k * K_ + l] += static_cast<double>(n) * d;
      }
    }
    std::size_t served_class = K_;
    if (current_) served_class = jobs()[*current_].predicted_class;
    for (std::size_t l = 0; l < K_; ++l) {
      if (!params_.active[l]) continue;
      const double mu = params_.mu_tilde[l];
      const double a = mu * w_pred_[l] - static_cast<double>(state_.predicted_length(l));
      st.int_workload_gap[l] += l == served_class ? abs_linear_integral(a, mu, d) : std::abs(a) * d;
    }
    if (current_) {
      const double w0 = workload_;
      const double w1 = w0 - d;
      st.int_w += 0.5 * (w0 + w1) * d;
      st.int_w2 += (w0 * w0 * w0 - w1 * w1 * w1) / 3.0;
      workload_ = w1;
      w_pred_[served_class] -= d;
      jobs()[*current_].remaining -= d;
    }
    now_ = t;
  }

  void admit_arrival() {
    const double t = next_arrival_;
    Job job;
    job.id = jobs().size();
    job.arrival_time = t;
    if (options_.trace) {
      const Job& src = (*options_.trace)[trace_pos_++];
      job.true_class = src.true_class;
      job.predicted_class = src.predicted_class;
      job.service_req = src.service_req;
    } else {
      job.true_class = sample_index(config_.prevalences, class_rng_);
      job.predicted_class = sample_classification(job.true_class, config_.confusion, classify_rng_);
      double rate = config_.service_rates[job.true_class];
      if (const RateSchedule* s = schedule(); s && s->service) {
        const double m = s->service(t, job.true_class);
        if (!(m > 0.0)) throw Error(ErrorCode::ScheduleNonPositive, "service multiplier must be positive");
        rate *= m;
      }
      job.service_req = config_.service_dist.sample(service_rng_, rate);
    }
    job.remaining = job.service_req;
    workload_ += job.service_req;
    w_pred_[job.predicted_class] += job.service_req;
    const std::size_t index = jobs().size();
    jobs().push_back(job);
    state_.push(index, job.true_class, job.predicted_class);
    ++result_.stats.arrivals;
    if (options_.record_arrival_workload) result_.arrival_workload.push_back(workload_);
    next_arrival_ = next_arrival_time(t);
  }

  void complete_current() {
    Job& job = jobs()[*current_];
    job.remaining = 0.0;
    job.completion_time = now_;
    state_.pop_front(state_.queue_key(job.true_class, job.predicted_class), job.true_class, job.predicted_class);
    if (state_.predicted_length(job.predicted_class) == 0) w_pred_[job.predicted_class] = 0.0;
    if (state_.empty()) workload_ = 0.0;
    current_.reset();
    ++result_.stats.completions;
  }

  void reschedule() {
    state_.clock = now_;
    const auto queue = policy_.decide(state_);
    if (!queue) {
      current_.reset();
    } else {
      current_ = state_.queue(*queue).front();
    }
    state_.in_service = current_;
  }

  const SystemConfig& config_;
  const PolicyRef& policy_;
  RunOptions options_;
  std::size_t K_;
  double T_;
  QueueState state_;
  PredictedClassParams params_;
  CounterRng arrivals_rng_;
  CounterRng class_rng_;
  CounterRng service_rng_;
  CounterRng classify_rng_;
  CounterRng thinning_rng_;
  PathResult result_;
  std::optional<std::size_t> current_;
  double now_ = 0.0;
  double next_arrival_ = 0.0;
  double workload_ = 0.0;
  std::vector<double> w_pred_;
  std::size_t next_grid_ = 0;
  std::size_t trace_pos_ = 0;
};

}  // namespace

PathResult run_path(const SystemConfig& config, const PolicyRef& policy, std::uint64_t seed,
                    const RunOptions& options) {
  return Simulator(config, policy, seed, options).run();
}

PathResult run_path(const SystemConfig& config, const PolicyRef& policy, std::uint64_t seed,
                    std::size_t sampling_grid) {
  RunOptions options;
  options.sampling_grid = sampling_grid;
  return run_path(config, policy, seed, options);
}

// ---------------------------------------------------------------------------
// CSV export

void write_jobs_csv(std::ostream& out, const PathResult& path) {
  csv::Writer w(out);
  w.header({"id", "arrival", "k", "l", "service", "completion", "sojourn"});
  for (const auto& job : path.jobs) {
    w.field(static_cast<unsigned long long>(job.id))
        .field(job.arrival_time)
        .field(job.true_class + 1)
        .field(job.predicted_class + 1)
        .field(job.service_req);
    if (job.completed()) {
      w.field(*job.completion_time).field(job.sojourn());
    } else {
      w.empty().empty();
    }
    w.end_row();
  }
}

void write_curves_csv(std::ostream& out, const PathResult& path) {
  csv::Writer w(out);
  std::vector<std::string> header{"t"};
  for (std::size_t l = 0; l < path.num_classes; ++l) header.push_back("N_" + std::to_string(l + 1));
  header.push_back("W_plus");
  w.header(header);
  const auto& c = path.curves;
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    w.field(c.t[i]);
    for (std::size_t l = 0; l < path.num_classes; ++l) w.field(static_cast<unsigned long long>(c.n_pred[i * path.num_classes + l]));
    w.field(c.w_plus[i]);
    w.end_row();
  }
}

}  // namespace pqsched
