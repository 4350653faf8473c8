#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fptrade/date.hpp"
#include "fptrade/error.hpp"

namespace fptrade {

inline constexpr std::size_t kDefaultTau = 250;

struct TradingCalendar {
  std::vector<Date> days;

  std::size_t size() const { return days.size(); }

  void validate(std::size_t tau) const {
    for (std::size_t k = 1; k < days.size(); ++k) {
      if (!(days[k - 1] < days[k])) {
        throw Error(ErrorCode::malformed_input,
                    "calendar not strictly increasing at " + days[k].iso());
      }
    }
    if (days.size() < tau + 1) {
      throw Error(ErrorCode::insufficient_history,
                  "calendar has " + std::to_string(days.size()) + " days, need at least " +
                      std::to_string(tau + 1));
    }
  }
};

struct PriceSeries {
  std::string ticker;
  std::vector<double> prices;

  std::span<const double> view() const { return prices; }
};

// Immutable after construction; shared read-only by the sweep workers.
struct PriceUniverse {
  TradingCalendar calendar;
  std::vector<PriceSeries> series;
  std::size_t warm_up = kDefaultTau;

  std::size_t n_tickers() const { return series.size(); }
  std::size_t n_days() const { return calendar.size(); }
  std::size_t evaluation_days() const {
    return n_days() > warm_up ? n_days() - warm_up : 0;
  }

  std::optional<std::size_t> index_of(const std::string& ticker) const {
    for (std::size_t k = 0; k < series.size(); ++k) {
      if (series[k].ticker == ticker) return k;
    }
    return std::nullopt;
  }

  void validate() const {
    calendar.validate(warm_up);
    std::vector<std::string> names;
    names.reserve(series.size());
    for (const auto& s : series) {
      if (s.prices.size() != calendar.size()) {
        throw Error(ErrorCode::malformed_input,
                    "series " + s.ticker + " not aligned to calendar");
      }
      for (std::size_t t = 0; t < s.prices.size(); ++t) {
        if (!(s.prices[t] > 0.0) || !std::isfinite(s.prices[t])) {
          throw Error(ErrorCode::invalid_price, "series " + s.ticker + " has non-positive price on " +
                                                    calendar.days[t].iso());
        }
      }
      names.push_back(s.ticker);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
      throw Error(ErrorCode::malformed_input, "duplicate ticker identifiers");
    }
  }
};

}  // namespace fptrade
