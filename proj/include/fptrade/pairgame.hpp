#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fptrade/error.hpp"
#include "fptrade/indicators.hpp"
#include "fptrade/rolling.hpp"
#include "fptrade/universe.hpp"

namespace fptrade {

// ---------------------------------------------------------------------------------------------
// Thresholds

/// Spread level in basis points of a fraction (1 bp = 0.0001 = 0.01%). Integer storage keeps
/// Omega = 2*theta - epsilon and alpha = 1 exact.
class Level {
 public:
  constexpr Level() = default;
  constexpr explicit Level(std::int64_t bp) : bp_(bp) {}

  static Level from_fraction(double f) { return from_scaled(f * 1e4, f, "fraction"); }
  static Level from_percent(double p) { return from_scaled(p * 1e2, p, "percent"); }

  constexpr std::int64_t bp() const { return bp_; }
  constexpr double fraction() const { return static_cast<double>(bp_) / 1e4; }
  constexpr double percent() const { return static_cast<double>(bp_) / 1e2; }

  friend constexpr auto operator<=>(Level, Level) = default;

 private:
  static Level from_scaled(double scaled, double raw, const char* unit) {
    const double r = std::round(scaled);
    if (!std::isfinite(scaled) || std::abs(scaled - r) > 1e-6) {
      throw Error(ErrorCode::invalid_argument, "threshold " + std::to_string(raw) + " (" + unit +
                                                   ") is not a multiple of 0.01%");
    }
    return Level(static_cast<std::int64_t>(r));
  }

  std::int64_t bp_ = 0;
};

/// Percent with at most two decimals and no trailing zeros: 1000 -> "10", 110 -> "1.1".
inline std::string to_string(Level l) {
  const std::int64_t bp = l.bp();
  std::string s = (bp < 0 ? "-" : "") + std::to_string(std::abs(bp) / 100);
  if (const std::int64_t frac = std::abs(bp) % 100; frac != 0) {
    s += '.';
    s += static_cast<char>('0' + frac / 10);
    if (frac % 10 != 0) s += static_cast<char>('0' + frac % 10);
  }
  return s;
}

struct ThresholdSet {
  Level theta;    // start
  Level epsilon;  // profit-take
  Level omega;    // loss-cut

  static ThresholdSet make(Level theta, Level epsilon, Level omega) {
    if (!(Level(0) <= epsilon && epsilon < theta && theta < omega)) {
      throw Error(ErrorCode::invalid_argument,
                  "thresholds must satisfy 0 <= epsilon < theta < omega (got epsilon=" +
                      to_string(epsilon) + "%, theta=" + to_string(theta) +
                      "%, omega=" + to_string(omega) + "%)");
    }
    return {theta, epsilon, omega};
  }
};

/// Loss-cut level of the neutral strategy: Omega = 2*theta - epsilon.
inline Level omega_from(Level theta, Level epsilon) {
  if (epsilon < Level(0) || !(epsilon < theta)) {
    throw Error(ErrorCode::invalid_argument,
                "epsilon must satisfy 0 <= epsilon < theta (got epsilon=" + to_string(epsilon) +
                    "%, theta=" + to_string(theta) + "%)");
  }
  return Level(2 * theta.bp() - epsilon.bp());
}

inline ThresholdSet neutral_thresholds(Level theta, Level epsilon) {
  return ThresholdSet::make(theta, epsilon, omega_from(theta, epsilon));
}

/// Ratio of the marginal loss (Omega - theta) to the marginal profit (theta - epsilon).
inline double alpha(const ThresholdSet& th) {
  return static_cast<double>(th.omega.bp() - th.theta.bp()) /
         static_cast<double>(th.theta.bp() - th.epsilon.bp());
}

// ---------------------------------------------------------------------------------------------
// Filters and outcomes

struct FilterParams {
  double rho_0 = 0.6;
  double sigma_min = 0.05;
  double sigma_max = 0.2;
  std::size_t tau = kDefaultTau;
  std::size_t tau_max = 250;
  VolatilityMode volatility_mode = VolatilityMode::standard;

  void validate() const {
    if (!(rho_0 > -1.0 && rho_0 < 1.0)) throw Error(ErrorCode::invalid_argument, "rho0 must lie in (-1, 1)");
    if (!(sigma_min >= 0.0 && sigma_min < sigma_max)) {
      throw Error(ErrorCode::invalid_argument, "need 0 <= sigma_min < sigma_max");
    }
    if (tau < 3) throw Error(ErrorCode::invalid_argument, "tau must be >= 3");
    if (tau_max < 1) throw Error(ErrorCode::invalid_argument, "tau_max must be >= 1");
  }
};

enum class OutcomeKind : std::uint8_t { win, lose, unresolved };

inline const char* to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::win: return "win";
    case OutcomeKind::lose: return "lose";
    case OutcomeKind::unresolved: return "unresolved";
  }
  return "?";
}

struct TradeContext {
  double rho = 0.0;
  double sigma_i = 0.0;
  double sigma_j = 0.0;

  friend bool operator==(const TradeContext&, const TradeContext&) = default;
};

/// One pair's game. Days are on the game clock (0 = first day with all statistics defined).
/// Profit is per unit volume; NaN for unresolved trades.
struct TradeOutcome {
  std::uint32_t i = 0, j = 0;  // ticker indices, i < j
  std::uint32_t t_start = 0;
  std::uint32_t t_decision = 0;
  OutcomeKind kind = OutcomeKind::unresolved;
  double d_start = 0.0;
  double d_decision = 0.0;
  double profit = 0.0;
  TradeContext context;

  std::uint32_t first_passage() const { return t_decision - t_start; }
  bool counted() const { return kind != OutcomeKind::unresolved; }
};

inline bool same_trade(const TradeOutcome& a, const TradeOutcome& b) {
  auto same_double = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.i == b.i && a.j == b.j && a.t_start == b.t_start && a.t_decision == b.t_decision &&
         a.kind == b.kind && same_double(a.d_start, b.d_start) &&
         same_double(a.d_decision, b.d_decision) && same_double(a.profit, b.profit) &&
         a.context == b.context;
}

// ---------------------------------------------------------------------------------------------
// Per-ticker and per-pair statistics on the game clock

/// Per-ticker rolling statistics shared by every pair. Built once per universe and filter set;
/// read-only afterwards.
struct UniverseStats {
  FilterParams filters;
  std::size_t origin = 0;   // raw index of game day 0
  std::size_t horizon = 0;  // last game day with data, capped at tau_max
  std::vector<RateSeries> rates;
  std::vector<LogReturnSeries> log_returns;
  std::vector<std::vector<double>> sigma;       // game clock, NaN if undefined
  std::vector<std::vector<std::uint64_t>> band;  // bit t set iff sigma_min < sigma(t) < sigma_max

  std::size_t n_tickers() const { return rates.size(); }
  std::size_t n_game_days() const { return horizon + 1; }

  bool bands_overlap(std::size_t i, std::size_t j) const {
    for (std::size_t w = 0; w < band[i].size(); ++w) {
      if (band[i][w] & band[j][w]) return true;
    }
    return false;
  }
};

inline UniverseStats compute_universe_stats(const PriceUniverse& u, const FilterParams& filters) {
  filters.validate();
  const std::size_t tau = filters.tau;
  UniverseStats st;
  st.filters = filters;
  st.origin = stats_origin(tau);
  if (u.n_days() <= st.origin) {
    throw Error(ErrorCode::insufficient_history,
                "universe has " + std::to_string(u.n_days()) + " days; trading needs at least " +
                    std::to_string(st.origin + 1) + " (2*tau-1) for tau=" + std::to_string(tau));
  }
  st.horizon = std::min(filters.tau_max, u.n_days() - 1 - st.origin);
  const std::size_t days = st.n_game_days();
  const std::size_t words = (days + 63) / 64;

  st.rates.reserve(u.n_tickers());
  st.log_returns.reserve(u.n_tickers());
  std::vector<double> buf;
  for (const auto& s : u.series) {
    st.rates.push_back(rate_series(s, tau));
    st.log_returns.push_back(log_return_series(st.rates.back()));
    const auto& g = st.rates.back().values;
    buf.assign(g.size(), 0.0);
    rolling_volatility(g, tau, filters.volatility_mode, buf);
    std::vector<double> sig(days);
    std::vector<std::uint64_t> bits(words, 0);
    for (std::size_t t = 0; t < days; ++t) {
      sig[t] = buf[st.origin + t - st.rates.back().first];
      if (sig[t] > filters.sigma_min && sig[t] < filters.sigma_max) bits[t / 64] |= 1ULL << (t % 64);
    }
    st.sigma.push_back(std::move(sig));
    st.band.push_back(std::move(bits));
  }
  return st;
}

/// Day-by-day view of one pair on the game clock.
struct PairPath {
  std::uint32_t i = 0, j = 0;
  std::vector<double> spread;
  std::vector<double> rho;  // NaN where undefined

  std::size_t n_days() const { return spread.size(); }
};

/// Spread and rolling correlation of a pair; indices are canonicalized to i < j.
inline void build_pair_path(const UniverseStats& st, std::size_t i, std::size_t j, PairPath& path,
                            std::vector<double>& scratch) {
  if (i == j) throw Error(ErrorCode::invalid_argument, "a pair needs two distinct tickers");
  if (i > j) std::swap(i, j);
  const std::size_t tau = st.filters.tau;
  const std::size_t days = st.n_game_days();
  path.i = static_cast<std::uint32_t>(i);
  path.j = static_cast<std::uint32_t>(j);
  path.spread.resize(days);
  path.rho.resize(days);
  const auto& ri = st.rates[i];
  const auto& rj = st.rates[j];
  for (std::size_t t = 0; t < days; ++t) {
    path.spread[t] = spread(ri[st.origin + t], rj[st.origin + t]);
  }
  // rho at raw day r uses log-returns l = r-tau+1 .. r-1; the rolling output at l = r-1 is that
  // window. Only log-returns up to the last game day are needed.
  const auto& li = st.log_returns[i];
  const auto& lj = st.log_returns[j];
  const std::size_t last = st.origin + st.horizon - 1;  // last log-return index needed
  const std::size_t count = last + 1 - li.first;
  const auto xi = std::span<const double>(li.values).first(count);
  const auto xj = std::span<const double>(lj.values).first(count);
  scratch.resize(count);
  rolling_pearson(xi, xj, tau - 1, scratch);
  for (std::size_t t = 0; t < days; ++t) path.rho[t] = scratch[st.origin + t - 1 - li.first];
}

inline PairPath build_pair_path(const UniverseStats& st, std::size_t i, std::size_t j) {
  PairPath path;
  std::vector<double> scratch;
  build_pair_path(st, i, j, path, scratch);
  return path;
}

/// Filter status of a pair on one day, independent of thresholds.
inline bool filters_pass(const UniverseStats& st, const PairPath& path, std::size_t t) {
  const auto& f = st.filters;
  const double si = st.sigma[path.i][t], sj = st.sigma[path.j][t], r = path.rho[t];
  return si > f.sigma_min && si < f.sigma_max && sj > f.sigma_min && sj < f.sigma_max && r > f.rho_0;
}

inline bool start_level(double d, const ThresholdSet& th) {
  return d >= th.theta.fraction() && d <= th.omega.fraction();
}

/// First day t >= from (and t <= tau_max) on which both legs' volatilities are inside the band,
/// the correlation beats rho_0 and theta <= spread <= Omega. Days with an undefined statistic
/// never pass.
inline std::optional<std::size_t> start_scan(const UniverseStats& st, const PairPath& path,
                                             const ThresholdSet& th, std::size_t from = 0) {
  const std::size_t last = std::min(st.filters.tau_max, path.n_days() - 1);
  for (std::size_t t = from; t <= last; ++t) {
    if (start_level(path.spread[t], th) && filters_pass(st, path, t)) return t;
  }
  return std::nullopt;
}

/// Follow the spread after the start: the first day with d <= epsilon wins, the first with
/// d > Omega loses; no decision by tau_max (or by the end of the data) is unresolved.
inline TradeOutcome resolve_trade(const UniverseStats& st, const PairPath& path, std::size_t t_start,
                                  const ThresholdSet& th) {
  TradeOutcome out;
  out.i = path.i;
  out.j = path.j;
  out.t_start = static_cast<std::uint32_t>(t_start);
  out.d_start = path.spread[t_start];
  out.context = {path.rho[t_start], st.sigma[path.i][t_start], st.sigma[path.j][t_start]};
  const double eps = th.epsilon.fraction(), omega = th.omega.fraction();
  const std::size_t last = std::min(st.filters.tau_max, path.n_days() - 1);
  for (std::size_t t = t_start + 1; t <= last; ++t) {
    const double d = path.spread[t];
    if (d <= eps || d > omega) {
      out.kind = d <= eps ? OutcomeKind::win : OutcomeKind::lose;
      out.t_decision = static_cast<std::uint32_t>(t);
      out.d_decision = d;
      out.profit = out.d_start - d;
      return out;
    }
  }
  out.kind = OutcomeKind::unresolved;
  out.t_decision = static_cast<std::uint32_t>(last + 1);
  out.d_decision = std::numeric_limits<double>::quiet_NaN();
  out.profit = std::numeric_limits<double>::quiet_NaN();
  return out;
}

/// At most one trade per pair and threshold set; the pair is discarded once it resolves.
inline std::optional<TradeOutcome> play_pair(const UniverseStats& st, const PairPath& path,
                                             const ThresholdSet& th) {
  const auto start = start_scan(st, path, th);
  if (!start) return std::nullopt;
  return resolve_trade(st, path, *start, th);
}

inline std::optional<TradeOutcome> play_pair(const UniverseStats& st, std::size_t i, std::size_t j,
                                             const ThresholdSet& th) {
  return play_pair(st, build_pair_path(st, i, j), th);
}

}  // namespace fptrade
