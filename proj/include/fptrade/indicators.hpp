#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fptrade/error.hpp"
#include "fptrade/universe.hpp"

namespace fptrade {

// All day indices in this header are raw calendar indices (0 = first day in the universe).

enum class VolatilityMode { standard, paper_literal };

inline std::string_view to_string(VolatilityMode mode) {
  return mode == VolatilityMode::standard ? "std" : "paper-literal";
}

inline VolatilityMode parse_volatility_mode(std::string_view s) {
  if (s == "std") return VolatilityMode::standard;
  if (s == "paper-literal") return VolatilityMode::paper_literal;
  throw Error(ErrorCode::invalid_argument, "unknown volatility mode '" + std::string(s) + "'");
}

// First raw day at which both the rate volatility (tau rates) and the Pearson window
// (tau-1 log-returns of the rate) are defined.
constexpr std::size_t stats_origin(std::size_t tau) { return 2 * tau - 2; }

// A per-day series starting at raw index `first`.
template <class Tag>
struct DaySeries {
  std::string ticker;
  std::size_t first = 0;
  std::vector<double> values;

  std::size_t end() const { return first + values.size(); }
  bool defined(std::size_t t) const { return t >= first && t < end(); }
  double operator[](std::size_t t) const { return values[t - first]; }

  // `len` values ending at raw index `last` (inclusive).
  std::span<const double> window(std::size_t last, std::size_t len) const {
    if (len == 0 || last + 1 < len || !defined(last + 1 - len) || !defined(last)) {
      throw Error(ErrorCode::insufficient_history,
                  "window of " + std::to_string(len) + " days ending at day " +
                      std::to_string(last) + " not available for " + ticker);
    }
    return std::span<const double>(values).subspan(last + 1 - len - first, len);
  }
};

struct RateTag {};
struct LogReturnTag {};
struct MarketReturnTag {};
using RateSeries = DaySeries<RateTag>;
using LogReturnSeries = DaySeries<LogReturnTag>;
using MarketReturnSeries = DaySeries<MarketReturnTag>;

/// Normalized rate: p(t)/p(t-tau+1) - 1.
inline double rate(std::span<const double> prices, std::size_t t, std::size_t tau) {
  if (tau == 0 || t + 1 < tau || t >= prices.size()) {
    throw Error(ErrorCode::insufficient_history,
                "rate at day " + std::to_string(t) + " needs " + std::to_string(tau) + " days");
  }
  return prices[t] / prices[t + 1 - tau] - 1.0;
}

/// Daily log-return of the rescaled price: log(rate(t+1)+1) - log(rate(t)+1).
inline double log_return(std::span<const double> prices, std::size_t t, std::size_t tau) {
  if (t + 1 >= prices.size()) {
    throw Error(ErrorCode::insufficient_history,
                "log-return at day " + std::to_string(t) + " needs day " + std::to_string(t + 1));
  }
  return std::log(rate(prices, t + 1, tau) + 1.0) - std::log(rate(prices, t, tau) + 1.0);
}

inline RateSeries rate_series(const PriceSeries& s, std::size_t tau) {
  RateSeries out{s.ticker, tau - 1, {}};
  if (tau == 0 || s.prices.size() < tau) return out;
  out.values.reserve(s.prices.size() + 1 - tau);
  for (std::size_t t = tau - 1; t < s.prices.size(); ++t) out.values.push_back(rate(s.prices, t, tau));
  return out;
}

inline LogReturnSeries log_return_series(const RateSeries& rates) {
  LogReturnSeries out{rates.ticker, rates.first, {}};
  if (rates.values.size() < 2) return out;
  out.values.reserve(rates.values.size() - 1);
  for (std::size_t k = 0; k + 1 < rates.values.size(); ++k) {
    out.values.push_back(std::log(rates.values[k + 1] + 1.0) - std::log(rates.values[k] + 1.0));
  }
  return out;
}

inline LogReturnSeries log_return_series(const PriceSeries& s, std::size_t tau) {
  return log_return_series(rate_series(s, tau));
}

/// Arithmetic mean of values[t-tau+1 .. t].
inline double moving_average(std::span<const double> values, std::size_t t, std::size_t tau) {
  if (tau == 0 || t + 1 < tau || t >= values.size()) {
    throw Error(ErrorCode::insufficient_history,
                "moving average at day " + std::to_string(t) + " needs " + std::to_string(tau) +
                    " observations");
  }
  double sum = 0.0;
  for (std::size_t l = t + 1 - tau; l <= t; ++l) sum += values[l];
  return sum / static_cast<double>(tau);
}

namespace detail {

inline bool is_constant(std::span<const double> w) {
  return std::adjacent_find(w.begin(), w.end(), std::not_equal_to<>{}) == w.end();
}

inline double mean(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s / static_cast<double>(w.size());
}

inline double clamp_correlation(double r) {
  // Only absorbs rounding; anything further out is a bug upstream.
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace detail

/// Two-pass Pearson estimator over equal-length windows.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::insufficient_history, "pearson needs two equal windows of length >= 2");
  }
  if (detail::is_constant(x) || detail::is_constant(y)) {
    throw Error(ErrorCode::degenerate_window, "zero variance window, correlation undefined");
  }
  const double mx = detail::mean(x), my = detail::mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx, dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw Error(ErrorCode::degenerate_window, "zero variance window, correlation undefined");
  }
  return detail::clamp_correlation(sxy / std::sqrt(sxx * syy));
}

/// Correlation at day t: the tau-1 daily log-returns l = t-tau+1 .. t-1 of both tickers.
inline double pearson(const LogReturnSeries& a, const LogReturnSeries& b, std::size_t t,
                      std::size_t tau) {
  if (tau < 3 || t < 1) {
    throw Error(ErrorCode::insufficient_history, "pearson needs tau >= 3");
  }
  return pearson(a.window(t - 1, tau - 1), b.window(t - 1, tau - 1));
}

/// Volatility of a rate window. `standard` divides the squared deviations by the window length,
/// `paper_literal` keeps the bare sum, so paper_literal = standard * sqrt(n).
inline double volatility(std::span<const double> window, VolatilityMode mode) {
  if (window.empty()) throw Error(ErrorCode::insufficient_history, "empty volatility window");
  if (detail::is_constant(window)) return 0.0;
  const double m = detail::mean(window);
  double ss = 0.0;
  for (double v : window) ss += (v - m) * (v - m);
  return mode == VolatilityMode::standard ? std::sqrt(ss / static_cast<double>(window.size()))
                                          : std::sqrt(ss);
}

/// Volatility at day t over the rates l = t-tau+1 .. t.
inline double volatility(const RateSeries& rates, std::size_t t, std::size_t tau,
                         VolatilityMode mode = VolatilityMode::standard) {
  return volatility(rates.window(t, tau), mode);
}

inline double spread(double gamma_i, double gamma_j) { return std::abs(gamma_i - gamma_j); }

/// Least-squares slope of stock on market: sample covariance over sample market variance.
inline double market_beta(std::span<const double> stock, std::span<const double> market) {
  if (stock.size() != market.size() || stock.size() < 2) {
    throw Error(ErrorCode::insufficient_history, "market beta needs two equal windows of length >= 2");
  }
  if (detail::is_constant(market)) {
    throw Error(ErrorCode::degenerate_window, "zero market variance");
  }
  const double ms = detail::mean(stock), mm = detail::mean(market);
  double cov = 0.0, var = 0.0;
  for (std::size_t k = 0; k < stock.size(); ++k) {
    cov += (stock[k] - ms) * (market[k] - mm);
    var += (market[k] - mm) * (market[k] - mm);
  }
  if (var <= 0.0) throw Error(ErrorCode::degenerate_window, "zero market variance");
  return cov / var;
}

/// Beta over the same window the correlation uses at day t.
inline double market_beta(const LogReturnSeries& stock, const MarketReturnSeries& market,
                          std::size_t t, std::size_t tau) {
  if (tau < 3 || t < 1) throw Error(ErrorCode::insufficient_history, "market beta needs tau >= 3");
  return market_beta(stock.window(t - 1, tau - 1), market.window(t - 1, tau - 1));
}

inline double hedge_ratio(double beta_i, double beta_j) {
  if (beta_j == 0.0) throw Error(ErrorCode::invalid_argument, "hedge ratio undefined for beta_j = 0");
  return beta_i / beta_j;
}

}  // namespace fptrade
