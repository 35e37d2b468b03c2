#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pqsched/rng.hpp"

using namespace pqsched;

TEST(CounterRng, ReproducibleAndKeyedBySubstream) {
  CounterRng a(42, Substream::Service), b(42, Substream::Service), c(42, Substream::Interarrival);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.draws(), 100u);
}

TEST(CounterRng, SubIndexSeparatesStreams) {
  CounterRng a(1, Substream::Brownian, 0), b(1, Substream::Brownian, 1);
  EXPECT_NE(a.next_u64(), b.next_u64());
}

TEST(CounterRng, UniformInHalfOpenUnitInterval) {
  CounterRng r(9, Substream::Bootstrap);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi, 1.0);
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(CounterRng, NormalMoments) {
  CounterRng r(10, Substream::Brownian);
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(s4 / n, 3.0, 0.06);
}

TEST(CounterRng, ExponentialMean) {
  CounterRng r(12, Substream::Interarrival);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) s += r.exponential(5.0);
  EXPECT_NEAR(s / n, 0.2, 0.002);
}
