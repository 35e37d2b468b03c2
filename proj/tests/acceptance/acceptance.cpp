// Acceptance checks. Prints one PASS/FAIL line per criterion and exits with the
// number of failures. Pass criterion numbers on the command line to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pqsched/config_io.hpp"
#include "pqsched/cost.hpp"
#include "pqsched/engine.hpp"
#include "pqsched/httheory.hpp"
#include "pqsched/parallel.hpp"
#include "pqsched/triage.hpp"
#include "test_support.hpp"

#ifdef PQSCHED_HAVE_CLI
#include "cli.hpp"
#endif

namespace fs = std::filesystem;
using namespace pqsched;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SystemConfig moderation() { return load_config(pqsched::testing::config_dir() / "moderation_10class.json"); }

ConfusionMatrix blend_with_uniform(std::size_t K, double eps) {
  ConfusionMatrix q(K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = 0; l < K; ++l) q(k, l) = (k == l ? 1.0 - eps : 0.0) + eps / static_cast<double>(K);
  }
  return q;
}

// ---------------------------------------------------------------------------
// 1. policy ordering on the moderation config

Outcome policy_ordering() {
  const auto c = moderation();
  constexpr std::size_t n = 10000;
  const auto oracle = replicate(c, PolicyRef::make(PolicyKind::OracleGcmu, c), n, 1);
  const auto pcmu = replicate(c, PolicyRef::make(PolicyKind::Pcmu, c), n, 1);
  const auto naive = replicate(c, PolicyRef::make(PolicyKind::NaiveGcmu, c), n, 1);
  const auto d1 = paired_difference(pcmu.final_costs, oracle.final_costs);
  const auto d2 = paired_difference(naive.final_costs, pcmu.final_costs);
  const double closure = (naive.final_mean() - pcmu.final_mean()) / (naive.final_mean() - oracle.final_mean());
  const bool pass = d1.mean > 2.0 * d1.stderr_ && d2.mean > 2.0 * d2.stderr_ && closure >= 0.10 && closure <= 0.60;
  return {pass, fmt("J(1) oracle %.4f pcmu %.4f naive %.4f; pcmu-oracle %.4f (se %.4f), naive-pcmu %.4f (se %.4f); "
                    "gap closed %.1f%%",
                    oracle.final_mean(), pcmu.final_mean(), naive.final_mean(), d1.mean, d1.stderr_, d2.mean,
                    d2.stderr_, 100.0 * closure)};
}

// ---------------------------------------------------------------------------
// 2. KKT solver against a simplex grid search

void compositions(std::size_t K, std::size_t N, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> parts(K, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == K) {
      parts[i] = left;
      visit(parts);
      return;
    }
    for (std::size_t a = 0; a <= left; ++a) {
      parts[i] = a;
      rec(i + 1, left - a);
    }
  };
  rec(0, N);
}

// Coarse simplex enumeration, then pairwise transfers of a shrinking step
// until the step reaches `resolution`.
std::vector<double> grid_search(double r, const PredictedClassParams& p, std::span<const CostFn> costs,
                                double resolution) {
  const std::size_t K = p.num_classes;
  const std::size_t N = K == 1 ? 1 : K == 2 ? 2000 : K == 3 ? 200 : 50;
  std::vector<double> best(K, 0.0);
  double best_f = std::numeric_limits<double>::infinity();
  compositions(K, N, [&](const std::vector<std::size_t>& parts) {
    std::vector<double> x(K);
    for (std::size_t i = 0; i < K; ++i) x[i] = r * static_cast<double>(parts[i]) / static_cast<double>(N);
    const double f = allocation_objective(x, p, costs);
    if (f < best_f) {
      best_f = f;
      best = x;
    }
  });
  double step = r / static_cast<double>(N);
  while (true) {
    bool moved = false;
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        if (i == j || best[j] <= 0.0) continue;
        auto x = best;
        const double d = std::min(step, x[j]);
        x[i] += d;
        x[j] -= d;
        const double f = allocation_objective(x, p, costs);
        if (f < best_f) {
          best_f = f;
          best = x;
          moved = true;
        }
      }
    }
    if (!moved) {
      if (step <= resolution) break;
      step = std::max(resolution, step / 2.0);
    }
  }
  return best;
}

Outcome kkt_vs_grid() {
  CounterRng rng(2024, Substream::Bootstrap);
  double worst_dx = 0.0, worst_residual = 0.0, worst_excess = 0.0;
  std::size_t failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = 1 + static_cast<std::size_t>(rng.uniform() * 4.0 - 1e-12);
    SystemConfig c;
    c.lambda = 0.5 + 2.0 * rng.uniform();
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      c.prevalences.push_back(0.05 + rng.uniform());
      sum += c.prevalences.back();
      c.service_rates.push_back(0.5 + 4.0 * rng.uniform());
      const double powers[] = {2.0, 2.5, 3.0, 4.0};
      c.costs.push_back(CostFn{0.2 + 10.0 * rng.uniform(), powers[static_cast<int>(rng.uniform() * 4.0 - 1e-12)]});
    }
    for (double& p : c.prevalences) p /= sum;
    c.confusion = pqsched::testing::random_confusion(K, rng, 0.5);
    for (std::size_t k = 0; k < K; ++k) {  // sparsify off-diagonal entries
      double row = 0.0;
      for (std::size_t l = 0; l < K; ++l) {
        if (l != k && rng.uniform() < 0.3) c.confusion(k, l) = 0.0;
        row += c.confusion(k, l);
      }
      for (std::size_t l = 0; l < K; ++l) c.confusion(k, l) /= row;
    }
    const auto p = derive_predicted_params(c);
    const double r = 0.05 + 5.0 * rng.uniform();
    const auto a = kkt_solve(r, p, c.costs);
    const double resolution = 1e-4 * r;
    const auto g = grid_search(r, p, c.costs, resolution);
    double dx = 0.0;
    for (std::size_t i = 0; i < K; ++i) dx = std::max(dx, std::abs(a.x[i] - g[i]));
    const double fg = allocation_objective(g, p, c.costs);
    const double excess = (a.objective - fg) / std::max(1e-300, std::abs(fg));
    const double residual = kkt_balance_residual(a, p, c.costs);
    worst_dx = std::max(worst_dx, dx / resolution);
    worst_residual = std::max(worst_residual, residual);
    worst_excess = std::max(worst_excess, excess);
    if (dx > resolution || residual >= 1e-6 || excess > 1e-9) ++failures;
  }
  return {failures == 0, fmt("100 instances, %zu outside tolerance; max |x_kkt - x_grid| = %.2f grid steps, max balance "
                             "residual %.2e, max objective excess %.2e",
                             failures, worst_dx, worst_residual, worst_excess)};
}

// ---------------------------------------------------------------------------
// 3. two-class closed form

Outcome two_class_closed_form() {
  const auto c = pqsched::testing::two_class();
  const auto [x1, x2] = two_class_xstar(1.0, c);
  const auto a = kkt_solve(1.0, derive_predicted_params(c), c.costs);
  const auto noisy = pqsched::testing::two_class(ConfusionMatrix::from_rows({{1.0, 0.0}, {0.1, 0.9}}));
  const double x1_noisy = two_class_xstar(1.0, noisy).first;
  const double x1_noisy_kkt = kkt_solve(1.0, derive_predicted_params(noisy), noisy.costs).x[0];
  const bool pass = std::abs(x1 - 0.51724) <= 1e-5 && std::abs(x2 - 0.48276) <= 1e-5 &&
                    std::abs(a.x[0] - 0.51724) <= 1e-5 && std::abs(a.x[1] - 0.48276) <= 1e-5 && x1_noisy < x1 &&
                    std::abs(x1_noisy - x1_noisy_kkt) < 1e-8;
  return {pass, fmt("closed form (%.6f, %.6f), kkt (%.6f, %.6f); with q21 = 0.1 x1* = %.6f", x1, x2, a.x[0], a.x[1],
                    x1_noisy)};
}

// ---------------------------------------------------------------------------
// 4. quadratic identities

Outcome quadratic_identities() {
  CounterRng rng(404, Substream::Bootstrap);
  const auto base = moderation();
  double worst_path = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto c = base;
    c.confusion = pqsched::testing::random_confusion(10, rng, trial % 2 == 0 ? 0.0 : 3.0);
    const auto paths = bm_workload_paths(0.02 + rng.uniform(), 500, 1.0, 20, 500 + trial);
    const auto fast = jstar(c, paths, JStarMethod::CoefficientFastPath);
    const auto general = jstar(c, paths, JStarMethod::GeneralKkt);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      worst_path = std::max(worst_path, std::abs(general.per_path[i] - fast.per_path[i]) / std::max(1.0, fast.per_path[i]));
    }
  }
  std::size_t dominance_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = base;
    c.confusion = pqsched::testing::random_confusion(10, rng, 5.0 * rng.uniform());
    const auto q = quadratic_coefficients(c);
    if (q.jnaive_coeff < q.jstar_coeff * (1.0 - 1e-12)) ++dominance_violations;
  }
  double worst_beta = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = pqsched::testing::two_class(pqsched::testing::random_confusion(2, rng));
    const auto q = quadratic_coefficients(c);
    const double b1 = q.beta[0], b2 = q.beta[1];
    const double lhs = 1.0 / (1.0 / b1 + 1.0 / b2);
    worst_beta = std::max(worst_beta, std::abs(lhs - b1 * b2 / (b1 + b2)) / lhs);
    worst_beta = std::max(worst_beta, std::abs(q.jstar_coeff - lhs) / lhs);
  }
  const bool pass = worst_path <= 1e-8 && dominance_violations == 0 && worst_beta <= 1e-12;
  return {pass, fmt("fast vs general max rel. diff %.2e over 400 paths; jnaive < jstar in %zu of 1000; beta identity "
                    "max rel. diff %.2e",
                    worst_path, dominance_violations, worst_beta)};
}

// ---------------------------------------------------------------------------
// 5. workload invariance

Outcome workload_invariance() {
  const auto c = moderation();
  auto c2 = c;
  c2.confusion = blend_with_uniform(10, 0.4);
  RunOptions o;
  o.record_arrival_workload = true;
  o.sampling_grid = 201;
  std::vector<double> worst(100, 0.0);
  std::vector<int> mismatched(100, 0);
  parallel_for(100, [&](std::size_t i) {
    const std::uint64_t seed = 7000 + i;
    const auto ref = run_path(c, PolicyRef::make(PolicyKind::Pcmu, c), seed, o);
    std::vector<PathResult> others;
    for (auto kind : {PolicyKind::OracleGcmu, PolicyKind::NaiveGcmu, PolicyKind::GlobalFcfs}) {
      others.push_back(run_path(c, PolicyRef::make(kind, c), seed, o));
    }
    for (auto kind : {PolicyKind::OracleGcmu, PolicyKind::NaiveGcmu, PolicyKind::Pcmu, PolicyKind::GlobalFcfs}) {
      others.push_back(run_path(c2, PolicyRef::make(kind, c2), seed, o));
    }
    for (const auto& p : others) {
      if (p.arrival_workload.size() != ref.arrival_workload.size() || p.curves.w_plus.size() != ref.curves.w_plus.size()) {
        mismatched[i] = 1;
        continue;
      }
      for (std::size_t j = 0; j < p.arrival_workload.size(); ++j) {
        worst[i] = std::max(worst[i], std::abs(p.arrival_workload[j] - ref.arrival_workload[j]));
      }
      for (std::size_t j = 0; j < p.curves.w_plus.size(); ++j) {
        worst[i] = std::max(worst[i], std::abs(p.curves.w_plus[j] - ref.curves.w_plus[j]));
      }
    }
  });
  const double w = *std::max_element(worst.begin(), worst.end());
  const int bad = std::accumulate(mismatched.begin(), mismatched.end(), 0);
  return {w <= 1e-9 && bad == 0, fmt("100 seeds x 4 policies x 2 confusion matrices: max |dW+| %.2e at arrivals and on "
                                     "the grid, %d length mismatches",
                                     w, bad)};
}

// ---------------------------------------------------------------------------
// 6. DES workload against the reflected Brownian approximation

SystemConfig critical_two_class(double mean_arrivals) {
  SystemConfig c = pqsched::testing::two_class(ConfusionMatrix::from_rows({{0.8, 0.2}, {0.1, 0.9}}));
  const double s = 0.85 * mean_arrivals;
  c.service_rates = {2.0 * s, 1.0 * s};
  c.lambda = mean_arrivals;  // rho = lambda (0.3 / 2s + 0.7 / s) = 1
  c.horizon = 1.0;
  return c;
}

std::pair<double, double> des_square_integral(const SystemConfig& c, std::size_t paths, std::uint64_t seed) {
  std::vector<double> v(paths);
  const auto policy = PolicyRef::make(PolicyKind::Pcmu, c);
  parallel_for(paths, [&](std::size_t i) {
    RunOptions o;
    o.sampling_grid = 2;
    v[i] = run_path(c, policy, seed + i, o).stats.int_w2;
  });
  const auto ms = mean_stderr(v);
  return {ms.mean, ms.stderr_};
}

Outcome diffusion_consistency() {
  std::string detail;
  std::vector<double> errors;
  bool pass = true;
  for (double n : {1e3, 1e4}) {
    const auto c = critical_two_class(n);
    const double v = workload_variance_rate(c);
    const std::size_t paths = n < 5e3 ? 20000 : 5000;
    const auto [des, des_se] = des_square_integral(c, paths, 60000);
    const auto bm = bm_workload_paths(v, 10000, c.horizon, 20000, 61);
    std::vector<double> sq;
    for (const auto& p : bm) sq.push_back(p.square_integral());
    const auto rbm = mean_stderr(sq);
    const double err = std::abs(des - rbm.mean) / rbm.mean;
    errors.push_back(err);
    pass = pass && err < 0.15;
    detail += fmt("n=%.0e: DES %.4e (se %.1e) RBM %.4e (se %.1e) rel. err %.2f%%; ", n, des, des_se, rbm.mean,
                  rbm.stderr_, 100.0 * err);
  }
  pass = pass && errors[1] < errors[0];
  detail += errors[1] < errors[0] ? "error decreases with scale" : "error does not decrease with scale";
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// 7. composition of predicted-class queues and Little's law

Outcome composition_and_little() {
  SystemConfig c;
  c.lambda = 100.0;
  c.prevalences = {0.2, 0.3, 0.5};
  c.service_rates = {80.0, 120.0, 104.0};
  c.costs = pqsched::testing::quadratic({4.0, 2.0, 1.0});
  c.confusion = ConfusionMatrix::from_rows({{0.7, 0.2, 0.1}, {0.15, 0.75, 0.1}, {0.1, 0.2, 0.7}});
  c.horizon = 400.0;
  const std::size_t K = 3, paths = 8;
  const auto p = derive_predicted_params(c);
  const auto policy = PolicyRef::make(PolicyKind::Pcmu, c);
  std::vector<PathResult> runs(paths);
  parallel_for(paths, [&](std::size_t i) {
    RunOptions o;
    o.sampling_grid = 2;
    runs[i] = run_path(c, policy, 900 + i, o);
  });
  std::vector<double> int_kl(K * K, 0.0), int_l(K, 0.0), arrivals(K, 0.0), sojourn(K, 0.0), done(K, 0.0);
  for (const auto& r : runs) {
    for (std::size_t i = 0; i < K * K; ++i) int_kl[i] += r.stats.int_n_kl[i];
    for (std::size_t l = 0; l < K; ++l) int_l[l] += r.stats.int_n_pred[l];
    for (const auto& j : r.jobs) {
      arrivals[j.predicted_class] += 1.0;
      if (j.completed()) {
        sojourn[j.predicted_class] += j.sojourn();
        done[j.predicted_class] += 1.0;
      }
    }
  }
  double worst_comp = 0.0, worst_little = 0.0;
  for (std::size_t l = 0; l < K; ++l) {
    for (std::size_t k = 0; k < K; ++k) {
      const double expected = c.prevalences[k] * c.confusion(k, l) / p.p_tilde[l];
      worst_comp = std::max(worst_comp, std::abs(int_kl[k * K + l] / int_l[l] - expected));
    }
    const double total_time = c.horizon * static_cast<double>(paths);
    const double L = int_l[l] / total_time;
    const double lw = arrivals[l] / total_time * (sojourn[l] / done[l]);
    worst_little = std::max(worst_little, std::abs(L - lw) / L);
  }
  return {worst_comp <= 0.05 && worst_little < 0.05,
          fmt("rho = %.3f, %zu paths of T = %.0f: max |N_kl/N_l - p_k q_kl/p~_l| = %.4f; max Little's-law rel. err "
              "%.2f%%",
              c.traffic_intensity(), paths, c.horizon, worst_comp, 100.0 * worst_little)};
}

// ---------------------------------------------------------------------------
// 8. model-selection fidelity

Outcome model_selection() {
  const auto base = moderation();
  const std::vector<double> eps{0.1, 0.3, 0.6};
  std::vector<double> regret;
  for (double e : eps) {
    auto c = base;
    c.confusion = blend_with_uniform(10, e);
    regret.push_back(relative_regret(c));
  }
  std::vector<std::size_t> theory(eps.size());
  std::iota(theory.begin(), theory.end(), 0);
  std::stable_sort(theory.begin(), theory.end(), [&](auto a, auto b) { return regret[a] < regret[b]; });
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < theory.size(); ++i) {
    min_sep = std::min(min_sep, regret[theory[i]] / regret[theory[i - 1]] - 1.0);
  }

  constexpr std::size_t n = 4000, B = 2000;
  const auto oracle = replicate(base, PolicyRef::make(PolicyKind::OracleGcmu, base), n, 11);
  std::vector<std::vector<double>> cost;
  for (double e : eps) {
    auto c = base;
    c.confusion = blend_with_uniform(10, e);
    cost.push_back(replicate(c, PolicyRef::make(PolicyKind::Pcmu, c), n, 11).final_costs);
  }
  CounterRng rng(8, Substream::Bootstrap);
  std::size_t agree = 0;
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<double> sums(eps.size(), 0.0);
    double osum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n) - 1e-9);
      osum += oracle.final_costs[idx];
      for (std::size_t m = 0; m < eps.size(); ++m) sums[m] += cost[m][idx];
    }
    std::vector<double> ratio(eps.size());
    for (std::size_t m = 0; m < eps.size(); ++m) ratio[m] = sums[m] / osum;
    std::vector<std::size_t> order(eps.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b2) { return ratio[a] < ratio[b2]; });
    if (order == theory) ++agree;
  }
  const double frac = static_cast<double>(agree) / static_cast<double>(B);
  std::vector<double> full(eps.size());
  const double omean = mean_stderr(oracle.final_costs).mean;
  for (std::size_t m = 0; m < eps.size(); ++m) full[m] = mean_stderr(cost[m]).mean / omean;
  return {min_sep >= 0.05 && frac >= 0.95,
          fmt("relative regret %.3f / %.3f / %.3f (min separation %.1f%%); DES pcmu/oracle %.3f / %.3f / %.3f; "
              "bootstrap agreement %.1f%% of %zu",
              regret[0], regret[1], regret[2], 100.0 * min_sep, full[0], full[1], full[2], 100.0 * frac, B)};
}

// ---------------------------------------------------------------------------
// 9. triage cost shapes and a DES check of the reviewer queue cost

int direction(const std::vector<double>& y) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < y.size(); ++i) {
    up = up && y[i] > y[i - 1];
    down = down && y[i] < y[i - 1];
  }
  return up ? 1 : down ? -1 : 0;
}

const char* direction_name(int d) { return d > 0 ? "increasing" : d < 0 ? "decreasing" : "not monotone"; }

Outcome triage_shapes() {
  const auto grid = linspace(0.05, 0.48, 44);
  const std::vector<double> ztx{0.5};
  McParams mc;
  std::map<std::string, std::vector<double>> totals;
  std::map<std::string, double> argmin;
  for (const char* s : {"i", "ii", "iii"}) {
    const auto cfg = load_triage_config(pqsched::testing::config_dir() / (std::string("triage_setting_") + s + ".json"));
    const auto search = optimize(cfg, grid, ztx, mc);
    for (const auto& d : search.evaluated) totals[s].push_back(d.total);
    argmin[s] = search.best_decision().z_fl;
  }
  const int d1 = direction(totals["i"]), d2 = direction(totals["ii"]);
  const bool shapes = d1 != 0 && d2 == -d1 && argmin["iii"] > grid.front() && argmin["iii"] < grid.back();

  // one reviewer at the setting (iii) optimum, simulated for T = 40
  const auto cfg = load_triage_config(pqsched::testing::config_dir() / "triage_setting_iii.json");
  auto reviewer = reviewer_params(argmin["iii"], 0.5, cfg);
  reviewer.horizon = 40.0;
  McParams long_mc;
  long_mc.horizon = reviewer.horizon;
  long_mc.n_paths = 4000;
  long_mc.n_steps = 4000;
  const double rbm = reviewer_queue_cost(argmin["iii"], 0.5, cfg, long_mc).mean;
  const auto des = replicate(reviewer, PolicyRef::make(PolicyKind::Pcmu, reviewer), 2000, 31);
  const double err = std::abs(des.final_mean() - rbm) / rbm;
  return {shapes && err < 0.10,
          fmt("setting (i) %s, (ii) %s, (iii) argmin z_fl = %.2f; reviewer (lambda_r = %.1f, T = 40) cost DES %.4g (se "
              "%.2g) vs RBM %.4g, rel. err %.2f%%",
              direction_name(d1), direction_name(d2), argmin["iii"], reviewer.lambda, des.final_mean(),
              des.final_stderr(), rbm, 100.0 * err)};
}

// ---------------------------------------------------------------------------
// 10. CLI determinism

#ifdef PQSCHED_HAVE_CLI
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pqsched");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

Outcome cli_determinism() {
  pqsched::testing::TempDir dir("acceptance_cli");
  const auto cfgs = pqsched::testing::config_dir();
  const auto data = dir.path() / "validation.csv";
  {
    std::ofstream out(data);
    out << "true_class,score,service_time\n";
    CounterRng rng(5, Substream::Bootstrap);
    for (int i = 0; i < 500; ++i) {
      const int k = rng.uniform() < 0.3 ? 1 : 2;
      const double score = std::clamp((k == 1 ? 0.65 : 0.35) + 0.2 * rng.normal(), 0.0, 1.0);
      out << k << ',' << score << ',' << rng.exponential(k == 1 ? 2.0 : 5.0) << '\n';
    }
  }
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"simulate", {"simulate", "--config", (cfgs / "moderation_10class.json").string(), "--paths", "200", "--seed", "3"}},
      {"simulate-single", {"simulate", "--config", (cfgs / "two_class.json").string(), "--paths", "1", "--seed", "9"}},
      {"lower-bound", {"lower-bound", "--config", (cfgs / "moderation_10class.json").string(), "--paths", "200", "--steps",
                       "500", "--seed", "4", "--method", "general"}},
      {"select-model", {"select-model", "--config", (cfgs / "moderation_10class.json").string(), "--models",
                        (cfgs / "models" / "erm_005.json").string(), (cfgs / "models" / "erm_05.json").string(),
                        (cfgs / "models" / "erm_095.json").string()}},
      {"triage", {"triage", "--config", (cfgs / "triage_setting_iii.json").string(), "--zfl-grid", "0.05:0.48:44",
                  "--ztx", "0.5", "--paths", "300", "--steps", "500", "--seed", "2"}},
      {"estimate", {"estimate", "--data", data.string(), "--threshold", "0.5", "--alpha", "0.5"}},
  };
  std::size_t files = 0;
  std::vector<std::string> problems;
  for (const auto& [name, args] : commands) {
    std::vector<fs::path> outs;
    for (const char* rep : {"a", "b"}) {
      auto full = args;
      const auto out = dir.path() / (name + "_" + rep);
      full.push_back("--out");
      full.push_back(out.string());
      if (run_cli(full) != 0) problems.push_back(name + " failed");
      outs.push_back(out);
    }
    std::size_t csvs = 0;
    for (const auto& entry : fs::directory_iterator(outs[0])) {
      if (entry.path().extension() != ".csv") continue;
      ++csvs;
      const auto other = outs[1] / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        problems.push_back(name + "/" + entry.path().filename().string() + " differs");
      }
    }
    if (csvs == 0) problems.push_back(name + " wrote no CSV");
    files += csvs;
  }
  std::string detail = fmt("%zu CSV files across %zu commands compared byte for byte", files, commands.size());
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}
#else
Outcome cli_determinism() { return {false, "built without the command-line tool"}; }
#endif

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"policy ordering Oracle < Pcmu < Naive", policy_ordering},
      {"KKT allocation vs simplex grid search", kkt_vs_grid},
      {"two-class closed form", two_class_closed_form},
      {"quadratic-cost identities", quadratic_identities},
      {"workload invariance", workload_invariance},
      {"diffusion consistency", diffusion_consistency},
      {"composition and Little's law", composition_and_little},
      {"model-selection fidelity", model_selection},
      {"triage shapes and reviewer DES check", triage_shapes},
      {"CLI determinism", cli_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail << " ("
              << fmt("%.1f", secs) << " s)" << std::endl;
    if (!o.pass) ++failures;
  }
  return failures;
}
