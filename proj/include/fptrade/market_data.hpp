#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fptrade/date.hpp"
#include "fptrade/error.hpp"
#include "fptrade/indicators.hpp"
#include "fptrade/universe.hpp"

namespace fptrade {

struct GapPolicy {
  // A ticker survives iff its missing-day fraction is at most this.
  double max_missing_fraction = 0.05;
};

struct LoadResult {
  PriceUniverse universe;
  std::vector<std::string> dropped;  // sorted
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Parse the long-format CSV (`date,ticker,adj_close`), apply the gap policy and align every
/// surviving ticker to one calendar. Tickers come out sorted.
inline LoadResult load_universe(std::istream& in, const GapPolicy& policy = {},
                                std::size_t tau = kDefaultTau, const std::string& source = "<stream>") {
  auto fail = [&](std::size_t line_no, const std::string& msg, ErrorCode code = ErrorCode::malformed_input) {
    throw Error(code, source + ":" + std::to_string(line_no) + ": " + msg);
  };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(1, "empty file, expected header date,ticker,adj_close");
  ++line_no;
  {
    const auto header = detail::split_csv(line);
    if (header.size() != 3 || header[0] != "date" || header[1] != "ticker" || header[2] != "adj_close") {
      fail(line_no, "bad header, expected date,ticker,adj_close");
    }
  }

  std::map<std::string, std::map<Date, double>> by_ticker;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 3) fail(line_no, "expected 3 fields, got " + std::to_string(f.size()));
    const auto date = Date::parse(f[0]);
    if (!date) fail(line_no, "bad date '" + std::string(f[0]) + "'");
    if (f[1].empty()) fail(line_no, "empty ticker");
    double price = 0.0;
    const auto [p, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), price);
    if (ec != std::errc{} || p != f[2].data() + f[2].size()) {
      fail(line_no, "bad price '" + std::string(f[2]) + "'");
    }
    if (!(price > 0.0) || !std::isfinite(price)) {
      fail(line_no, "non-positive price '" + std::string(f[2]) + "'", ErrorCode::invalid_price);
    }
    auto& rows = by_ticker[std::string(f[1])];
    if (!rows.emplace(*date, price).second) {
      fail(line_no, "duplicate row for " + std::string(f[1]) + " on " + date->iso());
    }
  }

  std::vector<Date> all_days;
  for (const auto& [ticker, rows] : by_ticker) {
    for (const auto& [d, _] : rows) all_days.push_back(d);
  }
  std::sort(all_days.begin(), all_days.end());
  all_days.erase(std::unique(all_days.begin(), all_days.end()), all_days.end());

  LoadResult result;
  std::vector<const std::pair<const std::string, std::map<Date, double>>*> survivors;
  for (const auto& entry : by_ticker) {
    const double missing = static_cast<double>(all_days.size() - entry.second.size());
    if (missing > policy.max_missing_fraction * static_cast<double>(all_days.size()) + 1e-9) {
      result.dropped.push_back(entry.first);
    } else {
      survivors.push_back(&entry);
    }
  }

  // Forward fill needs a real first observation, so the calendar starts at the latest first day
  // among survivors.
  Date start = all_days.empty() ? Date{} : all_days.front();
  for (const auto* s : survivors) start = std::max(start, s->second.begin()->first);
  std::vector<Date> days;
  for (Date d : all_days) {
    if (d < start) continue;
    const bool anyone = std::any_of(survivors.begin(), survivors.end(),
                                    [&](const auto* s) { return s->second.contains(d); });
    if (anyone) days.push_back(d);
  }
  if (survivors.empty() || days.size() < tau + 1) {
    throw Error(ErrorCode::insufficient_history,
                source + ": " + std::to_string(days.size()) + " common trading days, need at least " +
                    std::to_string(tau + 1));
  }

  PriceUniverse& u = result.universe;
  u.calendar.days = std::move(days);
  u.warm_up = tau;
  for (const auto* s : survivors) {
    PriceSeries ps{s->first, {}};
    ps.prices.reserve(u.calendar.size());
    double last = 0.0;
    for (Date d : u.calendar.days) {
      const auto it = s->second.find(d);
      if (it != s->second.end()) last = it->second;
      ps.prices.push_back(last);
    }
    u.series.push_back(std::move(ps));
  }
  u.validate();
  return result;
}

inline LoadResult load_universe(const std::string& path, const GapPolicy& policy = {},
                                std::size_t tau = kDefaultTau) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  return load_universe(in, policy, tau, path);
}

/// Long-format cache, date-major then ticker order. Shortest round-trip decimal prices, so the
/// output is byte-stable and reloads to identical values.
inline void write_universe_csv(std::ostream& out, const PriceUniverse& u) {
  out << "date,ticker,adj_close\n";
  for (std::size_t t = 0; t < u.n_days(); ++t) {
    const std::string date = u.calendar.days[t].iso();
    for (const auto& s : u.series) {
      out << date << ',' << s.ticker << ',' << detail::format_double(s.prices[t]) << '\n';
    }
  }
}

inline std::string universe_csv(const PriceUniverse& u) {
  std::ostringstream os;
  write_universe_csv(os, u);
  return os.str();
}

// ---------------------------------------------------------------------------------------------
// Synthetic universes

struct BlockSpec {
  std::size_t size = 0;
  double rho = 0.0;  // target correlation of daily log-price increments within the block
};

struct SyntheticSpec {
  std::size_t n_tickers = 0;
  std::size_t n_days = 0;
  std::vector<BlockSpec> blocks;  // tickers beyond the blocks' total are independent
  double drift = 0.0;             // per-day log drift
  double step_vol = 0.01;         // per-day log-increment volatility
  std::uint64_t seed = 1;

  void validate(std::size_t tau) const {
    if (n_tickers == 0) throw Error(ErrorCode::invalid_argument, "synthetic spec: n_tickers must be > 0");
    if (n_days < tau + 1) {
      throw Error(ErrorCode::insufficient_history,
                  "synthetic spec: n_days must be at least " + std::to_string(tau + 1));
    }
    if (!(step_vol > 0.0) || !std::isfinite(step_vol)) {
      throw Error(ErrorCode::invalid_argument, "synthetic spec: step_vol must be > 0");
    }
    if (!std::isfinite(drift)) throw Error(ErrorCode::invalid_argument, "synthetic spec: drift not finite");
    std::size_t total = 0;
    for (const auto& b : blocks) {
      if (!(b.rho > -1.0 && b.rho < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "synthetic spec: block rho must lie in (-1, 1)");
      }
      total += b.size;
    }
    if (total > n_tickers) {
      throw Error(ErrorCode::invalid_argument, "synthetic spec: blocks hold more tickers than n_tickers");
    }
  }
};

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  try {
    s.n_tickers = j.at("n_tickers").get<std::size_t>();
    s.n_days = j.at("n_days").get<std::size_t>();
    s.drift = j.at("drift").get<double>();
    s.step_vol = j.at("step_vol").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& b : j.at("blocks")) {
      s.blocks.push_back({b.at("size").get<std::size_t>(), b.at("rho").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed_input, std::string("synthetic spec: ") + e.what());
  }
  return s;
}

inline SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed_input, path + ": " + e.what());
  }
  return synthetic_spec_from_json(j);
}

inline nlohmann::json to_json(const SyntheticSpec& s) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : s.blocks) blocks.push_back({{"size", b.size}, {"rho", b.rho}});
  return {{"n_tickers", s.n_tickers}, {"n_days", s.n_days}, {"blocks", blocks},
          {"drift", s.drift},         {"step_vol", s.step_vol}, {"seed", s.seed}};
}

namespace detail {

// Lower Cholesky factor of the m x m equicorrelation matrix; throws if not positive definite.
inline std::vector<double> equicorrelation_cholesky(std::size_t m, double rho) {
  std::vector<double> L(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = (i == j) ? 1.0 : rho;
      for (std::size_t k = 0; k < j; ++k) s -= L[i * m + k] * L[j * m + k];
      if (i == j) {
        if (!(s > 1e-12)) {
          throw Error(ErrorCode::infeasible, "block of " + std::to_string(m) + " with rho " +
                                                 format_double(rho) + " is not positive definite");
        }
        L[i * m + i] = std::sqrt(s);
      } else {
        L[i * m + j] = s / L[j * m + j];
      }
    }
  }
  return L;
}

inline std::string synthetic_ticker(std::size_t k) {
  std::string digits = std::to_string(k);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "S" + digits;
}

}  // namespace detail

/// Correlated geometric random walks. Each day a ticker's log price moves by
/// drift + step_vol * z, where z is unit normal and z's within a block share correlation rho
/// (one common factor for rho >= 0, a Cholesky mix for rho < 0). Deterministic given the seed.
inline PriceUniverse generate_synthetic(const SyntheticSpec& spec, std::size_t tau = kDefaultTau) {
  spec.validate(tau);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_level(std::log(10.0), std::log(5000.0));

  PriceUniverse u;
  u.warm_up = tau;
  const Date origin = Date::from_ymd(2000, 1, 3);
  u.calendar.days.reserve(spec.n_days);
  for (std::size_t t = 0, d = 0; t < spec.n_days; ++d) {
    const Date day(origin.days_since_epoch() + static_cast<int>(d));
    const int weekday = (day.days_since_epoch() + 4) % 7;  // 0 = Sunday
    if (weekday == 0 || weekday == 6) continue;
    u.calendar.days.push_back(day);
    ++t;
  }

  std::vector<std::vector<double>> log_prices(spec.n_tickers, std::vector<double>(spec.n_days));
  for (std::size_t k = 0; k < spec.n_tickers; ++k) log_prices[k][0] = log_level(rng);

  struct Block {
    std::size_t begin, size;
    double rho;
    std::vector<double> chol;  // only for rho < 0
  };
  std::vector<Block> blocks;
  std::size_t next = 0;
  for (const auto& b : spec.blocks) {
    Block blk{next, b.size, b.rho, {}};
    if (b.rho < 0.0 && b.size > 1) blk.chol = detail::equicorrelation_cholesky(b.size, b.rho);
    blocks.push_back(std::move(blk));
    next += b.size;
  }
  for (; next < spec.n_tickers; ++next) blocks.push_back({next, 1, 0.0, {}});

  std::vector<double> z;
  std::vector<double> mixed;
  for (std::size_t t = 1; t < spec.n_days; ++t) {
    for (const auto& b : blocks) {
      if (b.size == 0) continue;
      z.resize(b.size);
      mixed.assign(b.size, 0.0);
      if (!b.chol.empty()) {
        for (auto& v : z) v = normal(rng);
        for (std::size_t i = 0; i < b.size; ++i) {
          for (std::size_t j = 0; j <= i; ++j) mixed[i] += b.chol[i * b.size + j] * z[j];
        }
      } else {
        const double factor = normal(rng);
        const double a = std::sqrt(b.rho), c = std::sqrt(1.0 - b.rho);
        for (std::size_t i = 0; i < b.size; ++i) mixed[i] = a * factor + c * normal(rng);
      }
      for (std::size_t i = 0; i < b.size; ++i) {
        auto& lp = log_prices[b.begin + i];
        lp[t] = lp[t - 1] + spec.drift + spec.step_vol * mixed[i];
      }
    }
  }

  u.series.reserve(spec.n_tickers);
  for (std::size_t k = 0; k < spec.n_tickers; ++k) {
    PriceSeries s{detail::synthetic_ticker(k), {}};
    s.prices.reserve(spec.n_days);
    for (double lp : log_prices[k]) s.prices.push_back(std::exp(lp));
    u.series.push_back(std::move(s));
  }
  u.validate();
  return u;
}

/// Equal-weight average over tickers of the daily log-return of the rescaled price. Defined on
/// raw days tau-1 .. n-2.
inline MarketReturnSeries market_return_series(const PriceUniverse& u) {
  const std::size_t tau = u.warm_up;
  if (u.series.empty()) throw Error(ErrorCode::invalid_argument, "market return of an empty universe");
  if (tau == 0 || u.n_days() < tau + 2) {
    throw Error(ErrorCode::insufficient_history, "market return needs an evaluation window of >= 2 days");
  }
  MarketReturnSeries m{"market", tau - 1, std::vector<double>(u.n_days() - tau, 0.0)};
  for (const auto& s : u.series) {
    const auto lr = log_return_series(s, tau);
    for (std::size_t k = 0; k < m.values.size(); ++k) m.values[k] += lr.values[k];
  }
  const double n = static_cast<double>(u.series.size());
  for (auto& v : m.values) v /= n;
  return m;
}

}  // namespace fptrade
