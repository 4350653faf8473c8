#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fptrade/fptrade.hpp"

namespace fixtures {

inline fptrade::TradingCalendar weekday_calendar(std::size_t n) {
  fptrade::TradingCalendar cal;
  const auto origin = fptrade::Date::from_ymd(2009, 1, 5);
  for (int d = 0; cal.days.size() < n; ++d) {
    const fptrade::Date day(origin.days_since_epoch() + d);
    const int weekday = (day.days_since_epoch() + 4) % 7;
    if (weekday != 0 && weekday != 6) cal.days.push_back(day);
  }
  return cal;
}

inline fptrade::PriceUniverse universe_from(const std::vector<std::vector<double>>& prices, std::size_t tau) {
  fptrade::PriceUniverse u;
  u.calendar = weekday_calendar(prices.at(0).size());
  u.warm_up = tau;
  for (std::size_t k = 0; k < prices.size(); ++k) {
    std::string name = std::to_string(k);
    name.insert(0, name.size() < 3 ? 3 - name.size() : 0, '0');
    u.series.push_back({"T" + name, prices[k]});
  }
  return u;
}

/// A 2-ticker correlated random-walk universe.
inline fptrade::PriceUniverse pair_universe(std::uint64_t seed, double rho, double step_vol, std::size_t days,
                                            std::size_t tau) {
  fptrade::SyntheticSpec spec;
  spec.n_tickers = 2;
  spec.n_days = days;
  spec.blocks = {{2, rho}};
  spec.drift = 0.0;
  spec.step_vol = step_vol;
  spec.seed = seed;
  return fptrade::generate_synthetic(spec, tau);
}

inline std::vector<double> random_walk(std::mt19937_64& rng, std::size_t n, double vol, double start = 100.0) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> p(n);
  double lp = std::log(start);
  for (auto& v : p) {
    v = std::exp(lp);
    lp += vol * z(rng);
  }
  return p;
}

/// Pairs whose legs share a common random walk and each carry a mean-reverting (AR(1))
/// deviation. Reversion speed varies across pairs so that both quick convergences and slow
/// drifts to the loss-cut occur.
inline fptrade::PriceUniverse mean_reverting_universe(std::size_t n_pairs, std::size_t days, std::size_t tau,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> persistence(0.80, 0.995);
  std::vector<std::vector<double>> prices;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const double phi = persistence(rng);
    const double dev_vol = 0.012;
    std::vector<double> a(days), b(days);
    double common = std::log(50.0 + 10.0 * static_cast<double>(k)), ua = 0.0, ub = 0.0;
    for (std::size_t t = 0; t < days; ++t) {
      a[t] = std::exp(common + ua);
      b[t] = std::exp(common + ub + 0.3);
      common += 0.012 * z(rng);
      ua = phi * ua + dev_vol * z(rng);
      ub = phi * ub + dev_vol * z(rng);
    }
    prices.push_back(std::move(a));
    prices.push_back(std::move(b));
  }
  return universe_from(prices, tau);
}

}  // namespace fixtures
