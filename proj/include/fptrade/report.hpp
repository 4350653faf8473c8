#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "json.hpp"

#include "fptrade/error.hpp"
#include "fptrade/sweep.hpp"

namespace fptrade {

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // no "-0.000"
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

}  // namespace detail

/// Basis points as a percent with at most two decimals and no trailing zeros: 1000 -> "10",
/// 110 -> "1.1", 5 -> "0.05".
inline std::string format_percent(Level l) { return to_string(l); }

inline constexpr std::string_view kNull = "null";

inline void write_cells_csv(std::ostream& out, std::span<const CellResult> cells) {
  out << "epsilon_pct,theta_pct,omega_pct,n_w,n_l,p_w_pct,eta\n";
  for (const auto& c : cells) {
    out << format_percent(c.thresholds.epsilon) << ',' << format_percent(c.thresholds.theta) << ','
        << format_percent(c.thresholds.omega) << ',' << c.n_w << ',' << c.n_l << ','
        << (c.p_w ? detail::fixed(100.0 * *c.p_w, 4) : std::string(kNull)) << ','
        << (c.eta ? detail::fixed(*c.eta, 10) : std::string(kNull)) << '\n';
  }
}

inline void write_histogram_csv(std::ostream& out, const FptHistogram& win, const FptHistogram& lose) {
  out << "bin_start_days,bin_width_days,count,kind\n";
  auto emit = [&](const FptHistogram& h, std::string_view kind) {
    if (h.counts.empty()) return;
    const std::size_t lo = h.counts.begin()->first, hi = h.counts.rbegin()->first;
    for (std::size_t b = lo; b <= hi; b += h.bin_width) {
      const auto it = h.counts.find(b);
      out << b << ',' << h.bin_width << ',' << (it == h.counts.end() ? 0 : it->second) << ',' << kind << '\n';
    }
  };
  emit(win, "win");
  emit(lose, "lose");
}

inline void write_scatter_csv(std::ostream& out, std::span<const ScatterPoint> pts) {
  out << "sigma,eta_pct,theta_pct\n";
  for (const auto& p : pts) {
    out << detail::fixed(p.sigma, 10) << ',' << detail::fixed(100.0 * p.profit, 8) << ','
        << format_percent(p.theta) << '\n';
  }
}

/// Table layout for the terminal: one row per cell.
inline void print_cell_table(std::ostream& out, std::span<const CellResult> cells) {
  out << std::right << std::setw(8) << "eps[%]" << std::setw(9) << "theta[%]" << std::setw(9) << "Omega[%]"
      << std::setw(9) << "N_w" << std::setw(9) << "N_l" << std::setw(9) << "p_w[%]" << std::setw(14) << "eta"
      << '\n';
  for (const auto& c : cells) {
    out << std::setw(8) << format_percent(c.thresholds.epsilon) << std::setw(9)
        << format_percent(c.thresholds.theta) << std::setw(9) << format_percent(c.thresholds.omega)
        << std::setw(9) << c.n_w << std::setw(9) << c.n_l << std::setw(9)
        << (c.p_w ? detail::fixed(100.0 * *c.p_w, 1) : std::string(kNull)) << std::setw(14)
        << (c.eta ? detail::fixed(*c.eta, 6) : std::string(kNull)) << '\n';
  }
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::io, "sha256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return os.str();
}

struct ReportMetadata {
  std::string input_digest;           // sha256 of the canonical universe CSV
  std::optional<std::uint64_t> seed;  // synthetic input only
  std::string grid_name;
  std::size_t fpt_bin_width = 1;
};

inline nlohmann::json metadata_json(const SweepReport& rep, const GridSpec& grid, const ReportMetadata& meta) {
  using nlohmann::json;
  const auto& f = rep.filters;
  json cells = json::array();
  for (const auto& c : grid.cells) {
    cells.push_back({{"theta_pct", format_percent(c.theta)},
                     {"epsilon_pct", format_percent(c.epsilon)},
                     {"omega_pct", format_percent(c.thresholds().omega)}});
  }
  json scatter = json::array();
  for (const auto& c : grid.scatter_cells) {
    scatter.push_back({{"theta_pct", format_percent(c.theta)}, {"epsilon_pct", format_percent(c.epsilon)}});
  }
  json out;
  out["parameters"] = {{"rho0", f.rho_0},
                       {"sigma_min", f.sigma_min},
                       {"sigma_max", f.sigma_max},
                       {"tau", f.tau},
                       {"tau_max", f.tau_max},
                       {"volatility_mode", std::string(to_string(f.volatility_mode))},
                       {"fpt_bin_width_days", meta.fpt_bin_width}};
  out["grid"] = {{"name", meta.grid_name}, {"cells", cells}, {"scatter_cells", scatter}};
  out["seed"] = meta.seed ? json(*meta.seed) : json(nullptr);
  out["input_digest"] = meta.input_digest;
  out["universe"] = {{"n_tickers", rep.n_tickers}, {"n_game_days", rep.n_game_days}};
  out["skips"] = {{"pairs", rep.skips.pairs},
                  {"pairs_band_disjoint", rep.skips.pairs_band_disjoint},
                  {"undefined_rho_days", rep.skips.undefined_rho_days},
                  {"undefined_sigma_days", rep.skips.undefined_sigma_days}};
  return out;
}

struct ReportFiles {
  static constexpr const char* cells = "cells.csv";
  static constexpr const char* histogram = "fpt_histogram.csv";
  static constexpr const char* scatter = "scatter.csv";
  static constexpr const char* metadata = "report.json";
};

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for '" + p.string() + "'");
}

inline void write_report(const std::filesystem::path& dir, const SweepReport& rep, const GridSpec& grid,
                         const ReportMetadata& meta) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());
  std::ostringstream cells, hist, scatter;
  write_cells_csv(cells, rep.cells);
  write_histogram_csv(hist, rep.fpt_win, rep.fpt_lose);
  write_scatter_csv(scatter, rep.scatter);
  write_text_file(dir / ReportFiles::cells, cells.str());
  write_text_file(dir / ReportFiles::histogram, hist.str());
  write_text_file(dir / ReportFiles::scatter, scatter.str());
  write_text_file(dir / ReportFiles::metadata, metadata_json(rep, grid, meta).dump(2) + "\n");
}

}  // namespace fptrade
