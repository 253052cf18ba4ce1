#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stiefel/errors.hpp"
#include "stiefel/ess.hpp"
#include "stiefel/models.hpp"
#include "stiefel/rng.hpp"

using namespace stiefel;

namespace {

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = z(rng);
  return x;
}

std::vector<double> ar1(std::size_t n, double rho, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n);
  x[0] = z(rng) / std::sqrt(1.0 - rho * rho);
  for (std::size_t t = 1; t < n; ++t) x[t] = rho * x[t - 1] + z(rng);
  return x;
}

}  // namespace

TEST(Autocovariance, AlternatingSeries) {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 == 0 ? 1.0 : -1.0;
  const auto g = autocovariance(x, 2);
  EXPECT_NEAR(g[1] / g[0], -1.0, 2e-3);
  EXPECT_NEAR(g[2] / g[0], 1.0, 3e-3);
}

TEST(Autocovariance, WhiteNoiseLagOne) {
  const auto x = white_noise(100000, 3);
  const auto g = autocovariance(x, 1);
  EXPECT_LT(std::abs(g[1] / g[0]), 0.01);
}

TEST(Autocovariance, LinearTrendReturnsLargeCorrelations) {
  std::vector<double> x(200);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  const auto g = autocovariance(x, 5);
  EXPECT_GT(g[1] / g[0], 0.95);
}

TEST(Autocovariance, HandValues) {
  // x = (1, 2, 3, 4): centered (-1.5, -0.5, 0.5, 1.5)
  const std::vector<double> x{1, 2, 3, 4};
  const auto g = autocovariance(x, 3);
  EXPECT_DOUBLE_EQ(g[0], 5.0 / 4.0);
  EXPECT_DOUBLE_EQ(g[1], (0.75 - 0.25 + 0.75) / 4.0);
  EXPECT_DOUBLE_EQ(g[3], -2.25 / 4.0);
}

TEST(Autocovariance, Preconditions) {
  const std::vector<double> c(10, 2.0);
  EXPECT_THROW(autocovariance(c, 1), DegenerateSeriesError);
  const std::vector<double> short_x{1, 2, 3};
  EXPECT_THROW(autocovariance(short_x, 1), PreconditionError);
  const std::vector<double> x{1, 2, 3, 5};
  EXPECT_THROW(autocovariance(x, 4), PreconditionError);
}

TEST(Ess, WhiteNoiseNearN) {
  const auto x = white_noise(100000, 11);
  const double r = ess_univariate(x) / 100000.0;
  EXPECT_GE(r, 0.9);
  EXPECT_LE(r, 1.0);
}

TEST(Ess, Ar1Oracle) {
  const double rho = 0.9;
  const auto x = ar1(100000, rho, 17);
  const double expected = (1 - rho) / (1 + rho);
  EXPECT_NEAR(ess_univariate(x) / 100000.0, expected, 0.2 * expected);
}

TEST(Ess, AlternatingClampedToN) {
  std::vector<double> x(500);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 == 0 ? 1.0 : -1.0;
  const EssEstimate e = ess_estimate(x);
  EXPECT_DOUBLE_EQ(e.ess, 500.0);
  EXPECT_FALSE(e.stuck);
}

TEST(Ess, MinimalSeries) {
  const std::vector<double> x{0.3, -1.2, 0.8, 0.1};
  const double e = ess_univariate(x);
  EXPECT_TRUE(std::isfinite(e));
  EXPECT_GT(e, 0.0);
  EXPECT_LE(e, 4.0);
}

TEST(Ess, ConstantSeriesIsStuck) {
  const std::vector<double> x(50, 1.5);
  const EssEstimate e = ess_estimate(x);
  EXPECT_TRUE(e.stuck);
  EXPECT_DOUBLE_EQ(e.ess, 50.0);
}

TEST(Ess, AffineInvariant) {
  const auto x = ar1(2000, 0.7, 5);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = -2.0 * x[i] + 3.0;
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = 4.0 * x[i];
  EXPECT_NEAR(ess_univariate(y), ess_univariate(x), 1e-9 * ess_univariate(x));
  EXPECT_DOUBLE_EQ(ess_univariate(z), ess_univariate(x));
}

TEST(Ess, MatchesExplicitGeyerSum) {
  const auto x = ar1(3000, 0.5, 8);
  const auto g = autocovariance(x, 200);
  std::vector<double> rho(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) rho[k] = g[k] / g[0];
  const std::size_t m = initial_positive_pairs(rho);
  ASSERT_LT(2 * m + 1, rho.size());
  double tau = -1.0;
  for (std::size_t i = 0; i < m; ++i) tau += 2.0 * (rho[2 * i] + rho[2 * i + 1]);
  const EssEstimate e = ess_estimate(x);
  EXPECT_EQ(e.pairs_used, m);
  EXPECT_NEAR(e.ess, 3000.0 / tau, 1e-8);
}

TEST(Truncation, StopsAtFirstNonPositivePair) {
  // strongly correlated head, first non-positive pair at m = 3
  std::vector<double> rho{1.0, 0.9, 0.8, 0.7, 0.3, 0.1, -0.2, 0.1};
  EXPECT_EQ(initial_positive_pairs(rho), 3u);
  // whatever noise follows, the truncation point does not move
  Rng rng(2);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    auto longer = rho;
    for (int k = 0; k < 20; ++k) longer.push_back(u(rng));
    EXPECT_EQ(initial_positive_pairs(longer), 3u);
  }
  const std::vector<double> odd{1.0, 0.5, 0.4};
  EXPECT_EQ(initial_positive_pairs(odd), 1u);
}

TEST(Truncation, NoiseTailKeepsCorrelatedHead) {
  // An AR(1) head followed by white noise: the truncation lag is at least the
  // one found on the head alone with the same estimator.
  auto head = ar1(4000, 0.95, 21);
  const auto noise = white_noise(4000, 22);
  auto both = head;
  both.insert(both.end(), noise.begin(), noise.end());
  EXPECT_GE(ess_estimate(both).pairs_used, 5u);
  EXPECT_GE(ess_estimate(head).pairs_used, 5u);
}

TEST(MinEss, IidExample) {
  const auto x = white_noise(500, 4);
  Matrix draws(500, 1);
  for (std::size_t i = 0; i < 500; ++i) draws(i, 0) = x[i];
  const EssReport r = min_ess_report(draws, 2.0, 500);
  EXPECT_NEAR(r.min_ess, 500.0, 100.0);  // estimator noise at n = 500 is ~10%
  EXPECT_NEAR(r.min_ess_per_iter, r.min_ess / 500.0, 1e-15);
  EXPECT_NEAR(r.min_ess_per_sec, r.min_ess / 2.0, 1e-12);
  EXPECT_EQ(r.n, 500u);
}

TEST(MinEss, DuplicateColumnKeepsMinimum) {
  const auto a = ar1(800, 0.6, 1);
  const auto b = white_noise(800, 2);
  Matrix two(800, 2);
  Matrix three(800, 3);
  for (std::size_t i = 0; i < 800; ++i) {
    two(i, 0) = three(i, 0) = a[i];
    two(i, 1) = three(i, 1) = b[i];
    three(i, 2) = a[i];
  }
  EXPECT_DOUBLE_EQ(min_ess_report(two, 1.0, 800).min_ess, min_ess_report(three, 1.0, 800).min_ess);
}

TEST(MinEss, Preconditions) {
  Matrix draws(10, 2, 0.0);
  draws(0, 0) = 1.0;
  draws(1, 1) = 1.0;
  EXPECT_THROW(min_ess_report(draws, 0.0, 10), PreconditionError);
  EXPECT_THROW(min_ess_report(Matrix(3, 2), 1.0, 3), PreconditionError);
}

TEST(MinEss, StuckColumnFlagged) {
  const auto a = white_noise(100, 9);
  Matrix draws(100, 2, 0.25);
  for (std::size_t i = 0; i < 100; ++i) draws(i, 0) = a[i];
  const EssReport r = min_ess_report(draws, 1.0, 100);
  EXPECT_TRUE(r.stuck);
  EXPECT_DOUBLE_EQ(r.per_dim_ess[1], 100.0);
}

TEST(MinEss, ParallelMatchesSerial) {
  Matrix draws(600, 40);
  for (std::size_t j = 0; j < 40; ++j) {
    const auto x = ar1(600, 0.02 * static_cast<double>(j), 100 + j);
    for (std::size_t i = 0; i < 600; ++i) draws(i, j) = x[i];
  }
  const EssReport s = min_ess_report(draws, 1.5, 600, false);
  const EssReport p = min_ess_report(draws, 1.5, 600, true);
  EXPECT_EQ(s.per_dim_ess, p.per_dim_ess);
  EXPECT_EQ(s.min_ess, p.min_ess);
}

TEST(MinEss, MonitoredDrawsFollowFoi) {
  auto model = std::make_shared<PpcaModel>(PpcaData{Matrix(6, 3, 0.5), 2, false, true});
  auto target = build_unconstrained(model, Kind::Polar);
  Matrix draws(5, target->dim());
  Rng rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  for (double& v : draws.data()) v = z(rng);
  EXPECT_EQ(monitored_draws(*target, draws, Foi::All).cols(), 3u * 2u + 3u);
  EXPECT_EQ(monitored_draws(*target, draws, Foi::StiefelOnly).cols(), 6u);
}
