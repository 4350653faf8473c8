#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fptrade/error.hpp"
#include "fptrade/indicators.hpp"
#include "fptrade/market_data.hpp"
#include "fptrade/pairgame.hpp"
#include "fptrade/report.hpp"
#include "fptrade/sweep.hpp"

namespace fptrade::cli {

inline constexpr const char* kUniverseFile = "universe.csv";
inline constexpr const char* kRhoHistogramFile = "rho_histogram.csv";
inline constexpr const char* kSigmaHistogramFile = "sigma_histogram.csv";

struct RunConfig {
  std::string input;           // CSV path
  std::string synthetic_spec;  // JSON path
  std::string out;
  FilterParams filters;
  std::string theta, epsilon;  // "0.2" (fraction) or "20%" (percent)
  std::string grid = "default";
  std::string volatility_mode = "std";
  std::size_t workers = default_workers();
  std::optional<std::uint64_t> seed;
  std::size_t bin_width = 1;
  std::size_t day = 0;
};

/// "0.2" is a fraction, "20%" a percent; both must sit on the 0.01% grid.
inline Level parse_level(const std::string& s, const char* flag) {
  std::string body = s;
  const bool percent = !body.empty() && body.back() == '%';
  if (percent) body.pop_back();
  double v = 0.0;
  const auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (body.empty() || ec != std::errc{} || p != body.data() + body.size()) {
    throw Error(ErrorCode::invalid_argument, std::string(flag) + ": cannot parse '" + s + "'");
  }
  return percent ? Level::from_percent(v) : Level::from_fraction(v);
}

inline std::filesystem::path output_dir(const RunConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  if (const char* env = std::getenv("FPTRADE_OUT"); env && *env) return env;
  return ".";
}

struct LoadedInput {
  PriceUniverse universe;
  std::vector<std::string> dropped;
  std::optional<std::uint64_t> seed;
};

inline LoadedInput load_input(const RunConfig& cfg) {
  if (cfg.input.empty() == cfg.synthetic_spec.empty()) {
    throw Error(ErrorCode::invalid_argument, "exactly one of --input or --synthetic-spec is required");
  }
  if (!cfg.input.empty()) {
    auto r = load_universe(cfg.input, GapPolicy{}, cfg.filters.tau);
    return {std::move(r.universe), std::move(r.dropped), std::nullopt};
  }
  auto spec = load_synthetic_spec(cfg.synthetic_spec);
  if (cfg.seed) spec.seed = *cfg.seed;
  return {generate_synthetic(spec, cfg.filters.tau), {}, spec.seed};
}

inline void print_summary(std::ostream& out, const PriceUniverse& u, const std::vector<std::string>& dropped) {
  out << "tickers: " << u.n_tickers() << '\n'
      << "days: " << u.n_days() << " (" << u.calendar.days.front().iso() << " .. "
      << u.calendar.days.back().iso() << ")\n"
      << "warm_up_days: " << u.warm_up << '\n'
      << "evaluation_days: " << u.evaluation_days() << '\n'
      << "dropped: " << dropped.size();
  for (std::size_t k = 0; k < dropped.size(); ++k) out << (k == 0 ? " " : ",") << dropped[k];
  out << '\n';
}

inline void write_universe(const std::filesystem::path& dir, const PriceUniverse& u) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());
  write_text_file(dir / kUniverseFile, universe_csv(u));
}

inline int cmd_ingest(const RunConfig& cfg, std::ostream& out) {
  if (cfg.input.empty()) throw Error(ErrorCode::invalid_argument, "ingest needs --input");
  auto r = load_universe(cfg.input, GapPolicy{}, cfg.filters.tau);
  const auto dir = output_dir(cfg);
  write_universe(dir, r.universe);
  print_summary(out, r.universe, r.dropped);
  out << "cache: " << (dir / kUniverseFile).string() << '\n';
  return 0;
}

inline int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  if (cfg.synthetic_spec.empty()) throw Error(ErrorCode::invalid_argument, "synth needs --synthetic-spec");
  const auto in = load_input(cfg);
  const auto dir = output_dir(cfg);
  write_universe(dir, in.universe);
  print_summary(out, in.universe, in.dropped);
  out << "seed: " << *in.seed << '\n' << "cache: " << (dir / kUniverseFile).string() << '\n';
  return 0;
}

inline GridSpec grid_from(const RunConfig& cfg, std::string& name) {
  if (cfg.theta.empty() != cfg.epsilon.empty()) {
    throw Error(ErrorCode::invalid_argument, "--theta and --epsilon go together");
  }
  if (!cfg.theta.empty()) {
    const Level theta = parse_level(cfg.theta, "--theta");
    const Level epsilon = parse_level(cfg.epsilon, "--epsilon");
    name = "single";
    return single_cell_grid(theta, epsilon);
  }
  name = cfg.grid;
  return make_grid(parse_grid_preset(cfg.grid));
}

inline int cmd_sweep(RunConfig cfg, std::ostream& out) {
  cfg.filters.volatility_mode = parse_volatility_mode(cfg.volatility_mode);
  cfg.filters.validate();
  std::string grid_name;
  const GridSpec grid = grid_from(cfg, grid_name);
  if (cfg.workers < 1) throw Error(ErrorCode::invalid_argument, "--workers must be >= 1");
  const auto in = load_input(cfg);
  const auto report = run_sweep(in.universe, cfg.filters, grid, {cfg.workers, cfg.bin_width});
  ReportMetadata meta{sha256_hex(universe_csv(in.universe)), in.seed, grid_name, cfg.bin_width};
  write_report(output_dir(cfg), report, grid, meta);
  print_cell_table(out, report.cells);
  return 0;
}

namespace detail {

inline void write_binned(std::ostream& out, const std::map<long long, std::size_t>& bins, double width) {
  out << "bin_start,bin_width,count\n";
  for (const auto& [k, c] : bins) {
    out << fptrade::detail::fixed(static_cast<double>(k) * width, 4) << ','
        << fptrade::detail::fixed(width, 4) << ',' << c << '\n';
  }
}

}  // namespace detail

inline constexpr double kRhoBinWidth = 0.05;
inline constexpr double kSigmaBinWidth = 0.005;

struct StatsHistograms {
  std::map<long long, std::size_t> rho;    // bin index -> count, bin = floor(value / width)
  std::map<long long, std::size_t> sigma;
  std::size_t undefined_rho = 0;
};

/// Correlation of every pair and volatility of every ticker on one game day.
inline StatsHistograms distribution_at(const PriceUniverse& u, const FilterParams& filters, std::size_t day) {
  filters.validate();
  const std::size_t tau = filters.tau;
  const std::size_t origin = stats_origin(tau);
  if (u.n_days() <= origin || day > u.n_days() - 1 - origin) {
    throw Error(ErrorCode::invalid_argument,
                "day " + std::to_string(day) + " is outside the evaluation window (0 .. " +
                    (u.n_days() > origin ? std::to_string(u.n_days() - 1 - origin) : std::string("none")) + ")");
  }
  const std::size_t raw = origin + day;
  StatsHistograms h;
  std::vector<LogReturnSeries> lr;
  for (const auto& s : u.series) {
    const auto rates = rate_series(s, tau);
    const double sig = volatility(rates, raw, tau, filters.volatility_mode);
    ++h.sigma[static_cast<long long>(std::floor(sig / kSigmaBinWidth))];
    lr.push_back(log_return_series(rates));
  }
  enumerate_pairs(u.n_tickers(), [&](std::size_t i, std::size_t j) {
    try {
      const double r = pearson(lr[i], lr[j], raw, tau);
      // rho = 1 falls into the last bin
      const auto bin = std::min(static_cast<long long>(std::floor(r / kRhoBinWidth)),
                                static_cast<long long>(std::lround(1.0 / kRhoBinWidth)) - 1);
      ++h.rho[bin];
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_window) throw;
      ++h.undefined_rho;
    }
  });
  return h;
}

inline int cmd_stats(RunConfig cfg, std::ostream& out) {
  cfg.filters.volatility_mode = parse_volatility_mode(cfg.volatility_mode);
  const auto in = load_input(cfg);
  const auto h = distribution_at(in.universe, cfg.filters, cfg.day);
  const auto dir = output_dir(cfg);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());
  std::ostringstream rho, sigma;
  detail::write_binned(rho, h.rho, kRhoBinWidth);
  detail::write_binned(sigma, h.sigma, kSigmaBinWidth);
  write_text_file(dir / kRhoHistogramFile, rho.str());
  write_text_file(dir / kSigmaHistogramFile, sigma.str());
  std::size_t n_rho = 0;
  for (const auto& [_, c] : h.rho) n_rho += c;
  out << "day: " << cfg.day << '\n'
      << "rho_values: " << n_rho << '\n'
      << "rho_undefined: " << h.undefined_rho << '\n'
      << "sigma_values: " << in.universe.n_tickers() << '\n';
  return 0;
}

/// Entry point shared by the binary and the tests. Failures print one line
/// "fptrade: error: <code>: <message>" and return nonzero (2 for usage, 1 otherwise).
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"First-passage pairs-trading backtester"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "long-format CSV: date,ticker,adj_close");
    sub->add_option("--synthetic-spec", cfg.synthetic_spec, "JSON synthetic universe spec");
    sub->add_option("--seed", cfg.seed, "override the synthetic seed");
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "output directory (default: $FPTRADE_OUT or .)");
    sub->add_option("--tau", cfg.filters.tau, "rolling window in trading days")->capture_default_str();
  };
  auto add_filters = [&](CLI::App* sub) {
    sub->add_option("--rho0", cfg.filters.rho_0, "correlation floor")->capture_default_str();
    sub->add_option("--sigma-min", cfg.filters.sigma_min, "volatility band lower edge")->capture_default_str();
    sub->add_option("--sigma-max", cfg.filters.sigma_max, "volatility band upper edge")->capture_default_str();
    sub->add_option("--tau-max", cfg.filters.tau_max, "playing horizon in trading days")->capture_default_str();
    sub->add_option("--volatility-mode", cfg.volatility_mode, "std | paper-literal")
        ->check(CLI::IsMember({"std", "paper-literal"}))
        ->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "validate and align a price CSV, write the universe cache");
  ingest->add_option("--input", cfg.input, "long-format CSV")->required();
  add_common(ingest);

  auto* synth = app.add_subcommand("synth", "generate a synthetic universe");
  synth->add_option("--synthetic-spec", cfg.synthetic_spec, "JSON synthetic universe spec")->required();
  synth->add_option("--seed", cfg.seed, "override the spec's seed");
  add_common(synth);

  auto* sweep = app.add_subcommand("sweep", "run the threshold sweep and write reports");
  add_input(sweep);
  add_common(sweep);
  add_filters(sweep);
  sweep->add_option("--theta", cfg.theta, "single cell start threshold (0.2 or 20%)");
  sweep->add_option("--epsilon", cfg.epsilon, "single cell profit-take threshold (0.1 or 10%)");
  sweep->add_option("--grid", cfg.grid, "default | coarse | fine")
      ->check(CLI::IsMember({"default", "coarse", "fine"}))
      ->capture_default_str();
  sweep->add_option("--workers", cfg.workers, "worker threads")->capture_default_str();
  sweep->add_option("--bin-width", cfg.bin_width, "first-passage histogram bin width in days")
      ->capture_default_str();

  auto* stats = app.add_subcommand("stats", "correlation and volatility distributions on one day");
  add_input(stats);
  add_common(stats);
  add_filters(stats);
  stats->add_option("--day", cfg.day, "game day (0 = first day with all statistics)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& ch : msg) ch = ch == '\n' ? ' ' : ch;
    err << "fptrade: error: usage: " << msg << '\n';
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(cfg, out);
    if (*synth) return cmd_synth(cfg, out);
    if (*sweep) return cmd_sweep(cfg, out);
    if (*stats) return cmd_stats(cfg, out);
  } catch (const Error& e) {
    err << "fptrade: error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "fptrade: error: internal: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace fptrade::cli
