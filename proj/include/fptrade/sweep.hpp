#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "fptrade/error.hpp"
#include "fptrade/pairgame.hpp"
#include "fptrade/universe.hpp"

namespace fptrade {

// ---------------------------------------------------------------------------------------------
// Grid

struct GridCell {
  Level theta;
  Level epsilon;

  ThresholdSet thresholds() const { return neutral_thresholds(theta, epsilon); }
  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

enum class GridPreset { standard, coarse, fine };

inline GridPreset parse_grid_preset(std::string_view s) {
  if (s == "default") return GridPreset::standard;
  if (s == "coarse") return GridPreset::coarse;
  if (s == "fine") return GridPreset::fine;
  throw Error(ErrorCode::invalid_argument, "unknown grid '" + std::string(s) + "'");
}

inline std::string_view to_string(GridPreset g) {
  switch (g) {
    case GridPreset::standard: return "default";
    case GridPreset::coarse: return "coarse";
    case GridPreset::fine: return "fine";
  }
  return "?";
}

struct GridSpec {
  std::vector<GridCell> cells;  // ordered by theta, then epsilon
  // Cells with epsilon = theta/10 for the profit-vs-volatility scattergram.
  std::vector<GridCell> scatter_cells;

  void validate() const {
    if (cells.empty()) throw Error(ErrorCode::invalid_argument, "grid has no cells");
    for (const auto& c : cells) (void)c.thresholds();
    for (const auto& c : scatter_cells) (void)c.thresholds();
  }
};

namespace detail {

// theta = k * step for k in [k_lo, k_hi]; epsilon = 0, step, ..., theta - step.
inline void add_regime(std::vector<GridCell>& out, std::int64_t step_bp, int k_lo, int k_hi) {
  for (int k = k_lo; k <= k_hi; ++k) {
    for (int m = 0; m < k; ++m) out.push_back({Level(k * step_bp), Level(m * step_bp)});
  }
}

}  // namespace detail

/// theta in 0.10 .. 0.30 by 0.01 with epsilon = 0.1 * theta.
inline std::vector<GridCell> scatter_family() {
  std::vector<GridCell> out;
  for (std::int64_t bp = 1000; bp <= 3000; bp += 100) out.push_back({Level(bp), Level(bp / 10)});
  return out;
}

/// fine: theta 0.01..0.09 (step 0.01); coarse: theta 0.1..1.0 (step 0.1); default: both.
/// Epsilon runs from 0 below theta in the step of theta's regime.
inline GridSpec make_grid(GridPreset preset) {
  GridSpec g;
  if (preset != GridPreset::coarse) detail::add_regime(g.cells, 100, 1, 9);
  if (preset != GridPreset::fine) detail::add_regime(g.cells, 1000, 1, 10);
  g.scatter_cells = scatter_family();
  return g;
}

inline GridSpec single_cell_grid(Level theta, Level epsilon) {
  GridSpec g;
  g.cells.push_back({theta, epsilon});
  (void)g.cells.front().thresholds();
  return g;
}

// ---------------------------------------------------------------------------------------------
// Results

struct CellResult {
  ThresholdSet thresholds;
  std::size_t n_w = 0;
  std::size_t n_l = 0;
  std::size_t n_unresolved = 0;
  std::optional<double> p_w;  // absent when no counted outcome
  std::optional<double> eta;
  std::vector<TradeOutcome> outcomes;  // counted outcomes only, sorted by (i, j)

  std::size_t n_active() const { return n_w + n_l; }
};

struct FptHistogram {
  std::size_t bin_width = 1;
  std::map<std::size_t, std::size_t> counts;  // bin start (days) -> count

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [_, c] : counts) n += c;
    return n;
  }

  // Bin start of the highest count; the earliest wins ties.
  std::optional<std::size_t> mode() const {
    std::optional<std::size_t> best;
    std::size_t best_count = 0;
    for (const auto& [b, c] : counts) {
      if (c > best_count) {
        best = b;
        best_count = c;
      }
    }
    return best;
  }

  std::optional<std::size_t> max_value() const {
    if (counts.empty()) return std::nullopt;
    return counts.rbegin()->first + bin_width - 1;
  }
};

struct ScatterPoint {
  double sigma = 0.0;  // mean of both legs' volatility at the start day
  double profit = 0.0;
  Level theta;
};

struct SkipTally {
  std::size_t pairs = 0;
  std::size_t pairs_band_disjoint = 0;  // never both legs inside the volatility band
  std::size_t undefined_rho_days = 0;   // pair-days with a zero-variance correlation window
  std::size_t undefined_sigma_days = 0; // ticker-days with undefined volatility

  SkipTally& operator+=(const SkipTally& o) {
    pairs += o.pairs;
    pairs_band_disjoint += o.pairs_band_disjoint;
    undefined_rho_days += o.undefined_rho_days;
    undefined_sigma_days += o.undefined_sigma_days;
    return *this;
  }
};

struct SweepReport {
  FilterParams filters;
  std::size_t n_tickers = 0;
  std::size_t n_game_days = 0;
  std::vector<CellResult> cells;
  std::vector<CellResult> scatter_cells;
  FptHistogram fpt_win, fpt_lose;
  std::vector<ScatterPoint> scatter;
  SkipTally skips;
};

// ---------------------------------------------------------------------------------------------
// Operations

/// Visit every unordered pair once as (i, j) with i < j.
template <class F>
void enumerate_pairs(std::size_t n, F&& visit) {
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
  }
}

constexpr std::uint64_t pair_count(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

inline bool outcome_order(const TradeOutcome& a, const TradeOutcome& b) {
  return a.i != b.i ? a.i < b.i : a.j < b.j;
}

/// Aggregate one cell from its outcomes. Sums run in canonical pair order, so the result does
/// not depend on how the outcomes were collected.
inline CellResult summarize_cell(const ThresholdSet& th, std::vector<TradeOutcome> outcomes,
                                 std::size_t n_unresolved = 0) {
  CellResult r;
  r.thresholds = th;
  r.n_unresolved = n_unresolved;
  std::erase_if(outcomes, [&](const TradeOutcome& o) {
    if (o.counted()) return false;
    ++r.n_unresolved;
    return true;
  });
  std::sort(outcomes.begin(), outcomes.end(), outcome_order);
  double sum = 0.0;
  for (const auto& o : outcomes) {
    (o.kind == OutcomeKind::win ? r.n_w : r.n_l) += 1;
    sum += o.profit;
  }
  if (!outcomes.empty()) {
    r.p_w = static_cast<double>(r.n_w) / static_cast<double>(r.n_active());
    r.eta = sum / static_cast<double>(outcomes.size());
  }
  r.outcomes = std::move(outcomes);
  return r;
}

/// Win and lose histograms of the first-passage time t_decision - t_start.
inline std::pair<FptHistogram, FptHistogram> fpt_histograms(std::span<const TradeOutcome> outcomes,
                                                            std::size_t bin_width = 1) {
  if (bin_width < 1) throw Error(ErrorCode::invalid_argument, "histogram bin width must be >= 1 day");
  FptHistogram win{bin_width, {}}, lose{bin_width, {}};
  for (const auto& o : outcomes) {
    if (!o.counted()) continue;
    const std::size_t fpt = o.first_passage();
    auto& h = o.kind == OutcomeKind::win ? win : lose;
    ++h.counts[fpt / bin_width * bin_width];
  }
  return {win, lose};
}

/// One point per winner of the given cells: (mean leg volatility at start, profit).
inline std::vector<ScatterPoint> scattergram(std::span<const CellResult> cells) {
  std::vector<ScatterPoint> pts;
  for (const auto& c : cells) {
    for (const auto& o : c.outcomes) {
      if (o.kind != OutcomeKind::win) continue;
      pts.push_back({0.5 * (o.context.sigma_i + o.context.sigma_j), o.profit, c.thresholds.theta});
    }
  }
  return pts;
}

/// Play every pair for one threshold cell, straightforwardly (one path per pair).
inline CellResult run_cell(const UniverseStats& st, const ThresholdSet& th) {
  std::vector<TradeOutcome> outcomes;
  PairPath path;
  std::vector<double> scratch;
  enumerate_pairs(st.n_tickers(), [&](std::size_t i, std::size_t j) {
    build_pair_path(st, i, j, path, scratch);
    if (auto o = play_pair(st, path, th)) outcomes.push_back(*o);
  });
  return summarize_cell(th, std::move(outcomes));
}

inline CellResult run_cell(const PriceUniverse& u, const FilterParams& filters, Level theta, Level epsilon) {
  return run_cell(compute_universe_stats(u, filters), neutral_thresholds(theta, epsilon));
}

struct SweepOptions {
  std::size_t workers = 1;
  std::size_t fpt_bin_width = 1;
};

namespace detail {

struct WorkerState {
  std::vector<std::vector<TradeOutcome>> per_cell;  // all outcomes incl. unresolved
  SkipTally skips;
  PairPath path;
  std::vector<double> scratch;
  std::vector<std::uint32_t> eligible;  // game days passing the filters
};

// Plays every cell on one pair. Filter status does not depend on the thresholds, so it is
// computed once per pair; each cell then only looks at the spread.
inline void play_pair_all_cells(const UniverseStats& st, std::size_t i, std::size_t j,
                                std::span<const ThresholdSet> cells, WorkerState& w) {
  ++w.skips.pairs;
  if (!st.bands_overlap(i, j)) {
    ++w.skips.pairs_band_disjoint;
    return;
  }
  build_pair_path(st, i, j, w.path, w.scratch);
  const auto& path = w.path;
  const std::size_t last = std::min(st.filters.tau_max, path.n_days() - 1);
  w.eligible.clear();
  for (std::size_t t = 0; t <= last; ++t) {
    if (std::isnan(path.rho[t])) ++w.skips.undefined_rho_days;
    if (filters_pass(st, path, t)) w.eligible.push_back(static_cast<std::uint32_t>(t));
  }
  if (w.eligible.empty()) return;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& th = cells[c];
    for (std::uint32_t t : w.eligible) {
      if (start_level(path.spread[t], th)) {
        w.per_cell[c].push_back(resolve_trade(st, path, t, th));
        break;
      }
    }
  }
}

}  // namespace detail

/// Run every grid cell (and the scatter cells) over all pairs. Pairs are sharded across workers
/// by row; each worker keeps its own outcome lists, merged and canonically sorted afterwards,
/// so the report is identical for any worker count.
inline SweepReport run_sweep(const UniverseStats& st, const GridSpec& grid, const SweepOptions& opt = {}) {
  grid.validate();
  if (opt.workers < 1) throw Error(ErrorCode::invalid_argument, "worker count must be >= 1");

  std::vector<ThresholdSet> cells;
  for (const auto& c : grid.cells) cells.push_back(c.thresholds());
  for (const auto& c : grid.scatter_cells) cells.push_back(c.thresholds());

  const std::size_t n = st.n_tickers();
  std::vector<detail::WorkerState> states(opt.workers);
  for (auto& s : states) s.per_cell.resize(cells.size());
  std::atomic<std::size_t> next_row{0};

  auto work = [&](detail::WorkerState& w) {
    for (;;) {
      const std::size_t i = next_row.fetch_add(1, std::memory_order_relaxed);
      if (i + 1 >= n) break;
      for (std::size_t j = i + 1; j < n; ++j) detail::play_pair_all_cells(st, i, j, cells, w);
    }
  };
  if (opt.workers == 1) {
    work(states[0]);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(opt.workers);
    for (auto& s : states) threads.emplace_back([&work, &s] { work(s); });
  }

  SweepReport rep;
  rep.filters = st.filters;
  rep.n_tickers = n;
  rep.n_game_days = st.n_game_days();
  for (const auto& s : states) rep.skips += s.skips;
  for (const auto& sig : st.sigma) {
    for (double v : sig) rep.skips.undefined_sigma_days += std::isnan(v) ? 1 : 0;
  }

  std::vector<TradeOutcome> all_counted;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<TradeOutcome> merged;
    for (auto& s : states) {
      merged.insert(merged.end(), s.per_cell[c].begin(), s.per_cell[c].end());
      std::vector<TradeOutcome>().swap(s.per_cell[c]);
    }
    auto result = summarize_cell(cells[c], std::move(merged));
    if (c < grid.cells.size()) {
      all_counted.insert(all_counted.end(), result.outcomes.begin(), result.outcomes.end());
      rep.cells.push_back(std::move(result));
    } else {
      rep.scatter_cells.push_back(std::move(result));
    }
  }
  std::tie(rep.fpt_win, rep.fpt_lose) = fpt_histograms(all_counted, opt.fpt_bin_width);
  rep.scatter = scattergram(rep.scatter_cells);
  return rep;
}

inline SweepReport run_sweep(const PriceUniverse& u, const FilterParams& filters, const GridSpec& grid,
                             const SweepOptions& opt = {}) {
  return run_sweep(compute_universe_stats(u, filters), grid, opt);
}

inline std::size_t default_workers() {
  const auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace fptrade
