#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "pqsched/httheory.hpp"
#include "test_support.hpp"

using namespace pqsched;
using pqsched::testing::quadratic;
using pqsched::testing::two_class;

namespace {

SystemConfig random_quadratic(std::size_t K, CounterRng& rng) {
  SystemConfig c;
  c.lambda = 1.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    c.prevalences.push_back(0.05 + rng.uniform());
    sum += c.prevalences.back();
    c.service_rates.push_back(0.5 + 4.0 * rng.uniform());
    c.costs.push_back(CostFn{0.2 + 10.0 * rng.uniform(), 2.0});
  }
  for (double& p : c.prevalences) p /= sum;
  c.confusion = pqsched::testing::random_confusion(K, rng);
  return c;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

// --- reflection -------------------------------------------------------------

TEST(Reflect, HandExamples) {
  EXPECT_EQ(reflect_values(std::vector<double>{0.0, 0.5, 0.5, 2.0}), (std::vector<double>{0.0, 0.5, 0.5, 2.0}));
  EXPECT_EQ(reflect_values(std::vector<double>{0.0, -0.1, -0.2, -0.3}), (std::vector<double>{0.0, 0.0, 0.0, 0.0}));
  const auto r = reflect_values(std::vector<double>{0.0, -1.0, -0.5, -2.5});
  EXPECT_EQ(r, (std::vector<double>{0.0, 0.0, 0.5, 0.0}));
}

TEST(Reflect, LipschitzInSupNorm) {
  // phi(x) = x - min(0, running min of x) moves by at most |dx| through each
  // term, so the sup-norm constant is 2, and this pair attains it
  const std::vector<double> x{0.0, -1.0, 1.0}, y{0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(max_abs_diff(reflect_values(x), reflect_values(y)), 2.0 * max_abs_diff(x, y));

  CounterRng rng(21, Substream::Bootstrap);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x(60), y(60);
    x[0] = y[0] = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
      x[i] = x[i - 1] + rng.normal();
      y[i] = y[i - 1] + rng.normal();
    }
    const auto fx = reflect_values(x);
    const auto fy = reflect_values(y);
    for (double v : fx) EXPECT_GE(v, 0.0);
    EXPECT_LE(max_abs_diff(fx, fy), 2.0 * max_abs_diff(x, y) + 1e-12);
  }
}

TEST(Reflect, SquareIntegralLeftEndpoint) {
  const std::vector<double> t{0.0, 0.5, 1.0};
  const std::vector<double> x{1.0, 2.0, 100.0};
  EXPECT_DOUBLE_EQ(reflect(t, x).square_integral(), 0.5 * 1.0 + 0.5 * 4.0);
  EXPECT_THROW(reflect(t, std::vector<double>{1.0}), Error);
}

// --- variance rate ------------------------------------------------------------

TEST(VarianceRate, DeterministicPrimitivesGiveZero) {
  SystemConfig c;
  c.lambda = 2.0;
  c.prevalences = {0.5, 0.5};
  c.service_rates = {2.0, 2.0};
  c.costs = quadratic({1.0, 1.0});
  c.confusion = ConfusionMatrix::identity(2);
  c.arrival_dist = Distribution::deterministic();
  c.service_dist = Distribution::deterministic();
  EXPECT_NEAR(workload_variance_rate(c), 0.0, 1e-15);
  const auto paths = bm_workload_paths(workload_variance_rate(c), 100, 1.0, 3, 1);
  for (const auto& p : paths) {
    for (double w : p.reflected) EXPECT_EQ(w, 0.0);
  }
}

TEST(VarianceRate, ExponentialInterarrivalMoment) {
  auto c = two_class();
  c.lambda = 4.0;
  const auto m = moments_from_config(c);
  EXPECT_DOUBLE_EQ(m.interarrival_second_moment - 1.0 / 16.0, 1.0 / 16.0);
}

TEST(VarianceRate, MM1AtCriticalLoad) {
  for (double lambda : {0.5, 1.0, 7.0}) {
    SystemConfig c;
    c.lambda = lambda;
    c.prevalences = {1.0};
    c.service_rates = {lambda};
    c.costs = quadratic({1.0});
    c.confusion = ConfusionMatrix::identity(1);
    EXPECT_NEAR(workload_variance_rate(c), 2.0 / lambda, 1e-12);
  }
}

TEST(VarianceRate, InfiniteMomentRejected) {
  const auto c = two_class();
  WorkloadMoments m = moments_from_config(c);
  m.service_second_moments[1] = std::numeric_limits<double>::infinity();
  try {
    workload_variance_rate(c, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteMoment);
  }
}

// --- Brownian workload ----------------------------------------------------------

TEST(BmPaths, DeterministicAndValidated) {
  const auto a = bm_workload_paths(1.5, 200, 2.0, 4, 9);
  const auto b = bm_workload_paths(1.5, 200, 2.0, 4, 9);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].reflected, b[i].reflected);
    EXPECT_EQ(a[i].t.size(), 201u);
    EXPECT_DOUBLE_EQ(a[i].t.back(), 2.0);
  }
  EXPECT_NE(a[0].reflected, a[1].reflected);
  EXPECT_THROW(bm_workload_paths(1.0, 99, 1.0, 1, 1), Error);
}

TEST(BmPaths, ScalesWithRootVariance) {
  const auto unit = bm_workload_paths(1.0, 300, 1.0, 3, 5);
  const auto four = bm_workload_paths(4.0, 300, 1.0, 3, 5);
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t i = 0; i < unit[p].reflected.size(); ++i) {
      EXPECT_NEAR(four[p].reflected[i], 2.0 * unit[p].reflected[i], 1e-12);
    }
  }
}

TEST(BmPaths, SquareIntegralStabilizesNearHalf) {
  // reflected standard BM at time t has the law of |B_t|, so E int_0^1 W^2 = 1/2
  auto mean_of = [](std::size_t steps) {
    const auto paths = bm_workload_paths(1.0, steps, 1.0, 2000, 17);
    double s = 0.0, s2 = 0.0;
    for (const auto& p : paths) {
      const double v = p.square_integral();
      s += v;
      s2 += v * v;
    }
    const double n = static_cast<double>(paths.size());
    const double m = s / n;
    return std::make_pair(m, std::sqrt((s2 / n - m * m) / n));
  };
  const auto [m3, e3] = mean_of(1000);
  const auto [m4, e4] = mean_of(10000);
  EXPECT_NEAR(m4, 0.5, 4.0 * e4 + 0.015);
  EXPECT_NEAR(m3, m4, 4.0 * std::hypot(e3, e4) + 0.03);
}

// --- KKT allocation -------------------------------------------------------------

TEST(Kkt, ZeroWorkload) {
  const auto c = two_class();
  const auto a = kkt_solve(0.0, derive_predicted_params(c), c.costs);
  EXPECT_EQ(a.x, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(a.objective, 0.0);
}

TEST(Kkt, SingleClassTakesEverything) {
  SystemConfig c;
  c.lambda = 1.0;
  c.prevalences = {1.0};
  c.service_rates = {1.0};
  c.costs = {CostFn{2.0, 3.0}};
  c.confusion = ConfusionMatrix::identity(1);
  const auto a = kkt_solve(2.5, derive_predicted_params(c), c.costs);
  EXPECT_EQ(a.x, std::vector<double>{2.5});
}

TEST(Kkt, SymmetricClassesSplitEvenly) {
  SystemConfig c;
  c.lambda = 1.0;
  c.prevalences = {0.5, 0.5};
  c.service_rates = {1.0, 1.0};
  c.costs = quadratic({3.0, 3.0});
  c.confusion = ConfusionMatrix::identity(2);
  const auto a = kkt_solve(1.0, derive_predicted_params(c), c.costs);
  EXPECT_NEAR(a.x[0], 0.5, 1e-12);
  EXPECT_NEAR(a.x[1], 0.5, 1e-12);
}

TEST(Kkt, TwoClassInstanceMatchesClosedFormAndGridSearch) {
  const auto c = two_class();
  const auto p = derive_predicted_params(c);
  const auto a = kkt_solve(1.0, p, c.costs);
  EXPECT_NEAR(a.x[0], 0.51724, 1e-5);
  EXPECT_NEAR(a.x[1], 0.48276, 1e-5);
  // curvatures c_l mu_l^2 / p_l
  const double a1 = 1.0 * 4.0 / 0.3, a2 = 10.0 * 1.0 / 0.7;
  EXPECT_NEAR(two_class_curvature(0, c), a1, 1e-12);
  EXPECT_NEAR(two_class_curvature(1, c), a2, 1e-12);
  const auto [x1, x2] = two_class_xstar(1.0, c);
  EXPECT_NEAR(x1, a.x[0], 1e-8);
  EXPECT_NEAR(x2, a.x[1], 1e-8);
  // brute force over x_1 in [0, 1] at step 1e-6
  double best_x = 0.0, best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1000000; ++i) {
    const double x = i * 1e-6;
    const std::vector<double> xv{x, 1.0 - x};
    const double f = allocation_objective(xv, p, c.costs);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  EXPECT_NEAR(a.x[0], best_x, 2e-6);
  EXPECT_LE(a.objective, best_f + 1e-12);
}

TEST(Kkt, ConfusionLowersFirstClassTarget) {
  const auto base = two_class_xstar(1.0, two_class()).first;
  const auto noisy = two_class_xstar(1.0, two_class(ConfusionMatrix::from_rows({{1.0, 0.0}, {0.1, 0.9}}))).first;
  EXPECT_LT(noisy, base);
}

TEST(Kkt, TwoClassClosedFormErrors) {
  auto cubic = two_class();
  cubic.costs[0].power = 3.0;
  try {
    two_class_xstar(1.0, cubic);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonQuadratic);
  }
  SystemConfig three;
  three.prevalences = {0.2, 0.3, 0.5};
  three.service_rates = {1, 1, 1};
  three.costs = quadratic({1, 1, 1});
  three.confusion = ConfusionMatrix::identity(3);
  EXPECT_THROW(two_class_xstar(1.0, three), Error);
}

TEST(Kkt, BalanceAndFeasibilityOnRandomMonomials) {
  CounterRng rng(31, Substream::Bootstrap);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t K = 2 + trial % 3;
    auto c = random_quadratic(K, rng);
    for (auto& f : c.costs) f.power = 2.0 + std::floor(3.0 * rng.uniform()) * 0.75;
    const auto p = derive_predicted_params(c);
    const double r = 0.01 + 5.0 * rng.uniform();
    const auto a = kkt_solve(r, p, c.costs);
    double sum = 0.0;
    for (double x : a.x) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, r, 1e-9 * std::max(1.0, r));
    EXPECT_LT(kkt_balance_residual(a, p, c.costs), 1e-6);
  }
}

TEST(Kkt, AllocationContinuousInWorkload) {
  const auto c = two_class(ConfusionMatrix::from_rows({{0.9, 0.1}, {0.2, 0.8}}));
  const auto p = derive_predicted_params(c);
  std::vector<double> prev = kkt_solve(0.0, p, c.costs).x;
  for (int i = 1; i <= 1000; ++i) {
    const auto cur = kkt_solve(i * 1e-3, p, c.costs).x;
    EXPECT_LT(max_abs_diff(prev, cur), 2e-3);
    prev = cur;
  }
}

TEST(Kkt, InactiveColumnGetsNothing) {
  auto c = two_class(ConfusionMatrix::from_rows({{1.0, 0.0}, {1.0, 0.0}}));
  const auto p = derive_predicted_params_allow_empty(c);
  const auto a = kkt_solve(0.7, p, c.costs);
  EXPECT_DOUBLE_EQ(a.x[0], 0.7);
  EXPECT_EQ(a.x[1], 0.0);
}

// --- quadratic closed forms -------------------------------------------------------

TEST(Quadratic, HandCoefficients) {
  const auto q = quadratic_coefficients(two_class());
  const double b1 = 2.0 * 1.0 / 0.15, b2 = 1.0 * 10.0 / 0.7;
  EXPECT_NEAR(q.beta[0], b1, 1e-12);
  EXPECT_NEAR(q.beta[1], b2, 1e-12);
  EXPECT_NEAR(q.jstar_coeff, 1.0 / (1.0 / b1 + 1.0 / b2), 1e-12);
  EXPECT_NEAR(q.jstar_coeff, b1 * b2 / (b1 + b2), 1e-12);
  EXPECT_NEAR(q.jnaive_coeff, q.jstar_coeff, 1e-12);
}

TEST(Quadratic, SimplificationIdentityAndNaiveDominance) {
  CounterRng rng(41, Substream::Bootstrap);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto c = random_quadratic(2 + trial % 4, rng);
    const auto q = quadratic_coefficients(c);
    double inv = 0.0;
    for (double b : q.beta) inv += 1.0 / b;
    double identity = 0.0;
    for (double bl : q.beta) {
      double s = 0.0;
      for (double bm : q.beta) s += bl / bm;
      identity += bl / (s * s);
    }
    EXPECT_NEAR(identity, 1.0 / inv, 1e-12 * identity);
    EXPECT_GE(q.jnaive_coeff, q.jstar_coeff * (1.0 - 1e-12));
  }
}

TEST(Quadratic, NonQuadraticRejected) {
  auto c = two_class();
  c.costs[1].power = 3.0;
  EXPECT_THROW(quadratic_coefficients(c), Error);
  EXPECT_THROW(relative_regret(c), Error);
}

TEST(JStar, ZeroWorkloadZeroCost) {
  const auto c = two_class();
  const std::vector<double> t{0.0, 0.5, 1.0}, z{0.0, 0.0, 0.0};
  const std::vector<ReflectedPath> paths{reflect(t, z)};
  EXPECT_EQ(jstar(c, paths).mean, 0.0);
  EXPECT_EQ(jstar(c, paths, JStarMethod::GeneralKkt).mean, 0.0);
  EXPECT_EQ(jnaive(c, paths).mean, 0.0);
}

TEST(JStar, SingleClassCoefficient) {
  SystemConfig c;
  c.lambda = 2.0;
  c.prevalences = {1.0};
  c.service_rates = {2.0};
  c.costs = quadratic({3.0});
  c.confusion = ConfusionMatrix::identity(1);
  const auto paths = bm_workload_paths(1.0, 200, 1.0, 20, 3);
  const auto js = jstar(c, paths);
  const auto jn = jnaive(c, paths);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    EXPECT_NEAR(js.per_path[i], 6.0 * 0.5 * paths[i].square_integral(), 1e-12);
    EXPECT_NEAR(jn.per_path[i], js.per_path[i], 1e-12);
  }
}

TEST(JStar, FastAndGeneralPathsAgree) {
  CounterRng rng(51, Substream::Bootstrap);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = random_quadratic(2 + trial % 3, rng);
    const auto paths = bm_workload_paths(1.3, 500, 1.0, 10, 100 + trial);
    const auto fast = jstar(c, paths, JStarMethod::CoefficientFastPath);
    const auto general = jstar(c, paths, JStarMethod::GeneralKkt);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      EXPECT_NEAR(general.per_path[i], fast.per_path[i], 1e-8 * std::max(1.0, fast.per_path[i]));
    }
  }
}

TEST(JStar, GeneralPathHandlesCubicCosts) {
  auto c = two_class();
  c.costs[1] = CostFn{10.0, 3.0};
  const auto paths = bm_workload_paths(1.0, 200, 1.0, 5, 2);
  const auto js = jstar(c, paths);
  EXPECT_GT(js.mean, 0.0);
  EXPECT_THROW(jnaive(c, paths), Error);
}

TEST(RelativeRegret, PerfectClassifierIsOne) {
  EXPECT_EQ(relative_regret(two_class()), 1.0);
  CounterRng rng(61, Substream::Bootstrap);
  for (int trial = 0; trial < 200; ++trial) {
    EXPECT_GE(relative_regret(random_quadratic(3, rng)), 1.0 - 1e-12);
  }
}

TEST(RankModels, OrderingTiesAndExport) {
  const auto base = two_class();
  const std::vector<ModelCandidate> one{{"only", ConfusionMatrix::identity(2)}};
  const auto r1 = rank_models(one, base);
  ASSERT_EQ(r1.size(), 1u);
  EXPECT_EQ(r1[0].name, "only");

  const auto noisy = ConfusionMatrix::from_rows({{0.7, 0.3}, {0.3, 0.7}});
  const auto mild = ConfusionMatrix::from_rows({{0.9, 0.1}, {0.1, 0.9}});
  const std::vector<ModelCandidate> many{{"noisy", noisy}, {"dup_a", mild}, {"dup_b", mild}, {"perfect", ConfusionMatrix::identity(2)}};
  const auto r = rank_models(many, base);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0].name, "perfect");
  EXPECT_EQ(r[1].name, "dup_a");
  EXPECT_EQ(r[2].name, "dup_b");
  EXPECT_EQ(r[1].relative_regret, r[2].relative_regret);
  EXPECT_EQ(r[3].name, "noisy");

  std::ostringstream out;
  write_criteria_csv(out, r);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "model_name,relative_regret,jstar_coeff,jnaive_coeff");
}
