#pragma once

// Day-by-day brute-force reference for the pair game. Written against the raw definitions and
// sharing no code with the library: every statistic is recomputed from prices on every day.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace reference {

enum class Kind { win, lose, unresolved };

struct Params {
  std::size_t tau = 250;
  std::size_t tau_max = 250;
  double rho0 = 0.6;
  double sigma_min = 0.05;
  double sigma_max = 0.2;
  bool literal_volatility = false;
};

struct Cell {
  double theta, epsilon, omega;  // fractions
};

struct Outcome {
  Kind kind = Kind::unresolved;
  std::size_t t_start = 0;     // game day
  std::size_t t_decision = 0;  // game day
  double profit = 0.0;
  double sigma_i = 0.0, sigma_j = 0.0;
};

inline double gamma(const std::vector<double>& p, std::size_t day, std::size_t tau) {
  return p[day] / p[day - tau + 1] - 1.0;
}

inline std::optional<double> sigma(const std::vector<double>& p, std::size_t day, const Params& prm) {
  const std::size_t tau = prm.tau;
  std::vector<double> g;
  for (std::size_t l = day - tau + 1; l <= day; ++l) g.push_back(gamma(p, l, tau));
  bool constant = true;
  for (double v : g) constant = constant && v == g[0];
  if (constant) return 0.0;
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= static_cast<double>(g.size());
  double ss = 0.0;
  for (double v : g) ss += (v - mean) * (v - mean);
  return prm.literal_volatility ? std::sqrt(ss) : std::sqrt(ss / static_cast<double>(tau));
}

inline std::optional<double> rho(const std::vector<double>& a, const std::vector<double>& b,
                                 std::size_t day, std::size_t tau) {
  std::vector<double> x, y;
  for (std::size_t l = day - tau + 1; l + 1 <= day; ++l) {
    x.push_back(std::log(gamma(a, l + 1, tau) + 1.0) - std::log(gamma(a, l, tau) + 1.0));
    y.push_back(std::log(gamma(b, l + 1, tau) + 1.0) - std::log(gamma(b, l, tau) + 1.0));
  }
  bool cx = true, cy = true;
  for (std::size_t k = 0; k < x.size(); ++k) {
    cx = cx && x[k] == x[0];
    cy = cy && y[k] == y[0];
  }
  if (cx || cy) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  double r = sxy / std::sqrt(sxx * syy);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

/// Plays one pair on one cell. Day 0 of the game is raw day 2*tau-2.
inline std::optional<Outcome> play(const std::vector<double>& a, const std::vector<double>& b,
                                   const Params& prm, const Cell& cell) {
  const std::size_t tau = prm.tau;
  const std::size_t origin = 2 * tau - 2;
  const std::size_t n = a.size();
  if (n <= origin) return std::nullopt;
  auto spread = [&](std::size_t day) { return std::abs(gamma(a, day, tau) - gamma(b, day, tau)); };

  std::size_t t = 0;
  std::optional<std::size_t> start;
  Outcome out;
  for (; t <= prm.tau_max && origin + t < n; ++t) {
    const std::size_t day = origin + t;
    const double d = spread(day);
    if (!(d >= cell.theta && d <= cell.omega)) continue;
    const auto si = sigma(a, day, prm), sj = sigma(b, day, prm);
    const auto r = rho(a, b, day, tau);
    if (!r || !(*r > prm.rho0)) continue;
    if (!(*si > prm.sigma_min && *si < prm.sigma_max)) continue;
    if (!(*sj > prm.sigma_min && *sj < prm.sigma_max)) continue;
    start = t;
    out.sigma_i = *si;
    out.sigma_j = *sj;
    break;
  }
  if (!start) return std::nullopt;

  out.t_start = *start;
  const double d0 = spread(origin + *start);
  for (t = *start + 1; t <= prm.tau_max && origin + t < n; ++t) {
    const double d = spread(origin + t);
    if (d <= cell.epsilon) {
      out.kind = Kind::win;
      out.t_decision = t;
      out.profit = d0 - d;
      return out;
    }
    if (d > cell.omega) {
      out.kind = Kind::lose;
      out.t_decision = t;
      out.profit = d0 - d;
      return out;
    }
  }
  out.kind = Kind::unresolved;
  out.t_decision = t;
  return out;
}

}  // namespace reference
