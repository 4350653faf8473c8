#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fptrade/indicators.hpp"
#include "fptrade/rolling.hpp"

using namespace fptrade;

namespace {

std::vector<double> noisy_level(std::mt19937_64& rng, std::size_t n, double level, double sd) {
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> v(n);
  double drift = level;
  for (auto& x : v) {
    drift += 0.001 * z(rng);
    x = drift + z(rng);
  }
  return v;
}

}  // namespace

TEST(RollingVolatility, MatchesNaiveAcrossManySlides) {
  std::mt19937_64 rng(1);
  const std::size_t window = 250;
  for (double level : {0.0, 0.3, 50.0}) {
    const auto v = noisy_level(rng, 3 * kRecomputeEvery + 400, level, 0.05);
    for (auto mode : {VolatilityMode::standard, VolatilityMode::paper_literal}) {
      std::vector<double> out(v.size());
      rolling_volatility(v, window, mode, out);
      for (std::size_t k = 0; k + 1 < window; ++k) EXPECT_TRUE(std::isnan(out[k]));
      for (std::size_t k = window - 1; k < v.size(); ++k) {
        const double naive = volatility(std::span<const double>(v).subspan(k + 1 - window, window), mode);
        ASSERT_NEAR(out[k], naive, 1e-10) << "level " << level << " index " << k;
      }
    }
  }
}

TEST(RollingVolatility, ConstantStretchIsExactlyZero) {
  std::mt19937_64 rng(2);
  auto v = noisy_level(rng, 900, 0.1, 0.02);
  for (std::size_t k = 300; k < 600; ++k) v[k] = 0.0421;
  std::vector<double> out(v.size());
  rolling_volatility(v, 100, VolatilityMode::standard, out);
  for (std::size_t k = 399; k < 600; ++k) EXPECT_EQ(out[k], 0.0) << k;
}

TEST(RollingPearson, MatchesNaiveAcrossManySlides) {
  std::mt19937_64 rng(3);
  const std::size_t window = 249;
  const std::size_t n = 2 * kRecomputeEvery + 700;
  auto x = noisy_level(rng, n, 0.001, 0.01);
  auto y = noisy_level(rng, n, -0.002, 0.01);
  for (std::size_t k = 0; k < n; ++k) y[k] += 0.7 * x[k];
  std::vector<double> out(n);
  rolling_pearson(x, y, window, out);
  for (std::size_t k = 0; k + 1 < window; ++k) EXPECT_TRUE(std::isnan(out[k]));
  for (std::size_t k = window - 1; k < n; ++k) {
    const auto wx = std::span<const double>(x).subspan(k + 1 - window, window);
    const auto wy = std::span<const double>(y).subspan(k + 1 - window, window);
    ASSERT_NEAR(out[k], pearson(wx, wy), 1e-10) << k;
  }
}

TEST(RollingPearson, DegenerateWindowsAreNaN) {
  std::mt19937_64 rng(4);
  auto x = noisy_level(rng, 600, 0.0, 0.01);
  const auto y = noisy_level(rng, 600, 0.0, 0.01);
  for (std::size_t k = 200; k < 400; ++k) x[k] = 0.0;
  std::vector<double> out(600);
  rolling_pearson(x, y, 50, out);
  for (std::size_t k = 249; k < 400; ++k) EXPECT_TRUE(std::isnan(out[k])) << k;
  EXPECT_FALSE(std::isnan(out[460]));
}

TEST(RollingMean, MatchesMovingAverage) {
  std::mt19937_64 rng(5);
  const auto v = noisy_level(rng, 2 * kRecomputeEvery + 123, 7.0, 0.3);
  const std::size_t window = 250;
  std::vector<double> out(v.size());
  rolling_mean(v, window, out);
  for (std::size_t k = window - 1; k < v.size(); ++k) ASSERT_NEAR(out[k], moving_average(v, k, window), 1e-10);
}

TEST(Rolling, RejectsBadArguments) {
  std::vector<double> v(10, 1.0), out(9);
  EXPECT_THROW(rolling_volatility(v, 3, VolatilityMode::standard, out), Error);
  EXPECT_THROW(rolling_mean(v, 0, std::span<double>(v)), Error);
  std::vector<double> o2(10);
  EXPECT_THROW(rolling_pearson(v, v, 1, o2), Error);
}
