#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "fptrade/error.hpp"
#include "fptrade/indicators.hpp"

namespace fptrade {

// Running sums drift; they are rebuilt from the raw window after this many slides.
inline constexpr std::size_t kRecomputeEvery = 1000;

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Cancellation makes a running central moment unreliable when it is tiny compared to the raw
// shifted second moment; those windows are recomputed directly.
inline bool suspicious(double central, double raw) {
  return central <= 1e-9 * raw || central <= 0.0;
}

}  // namespace detail

/// Rolling volatility over `window` consecutive values. out[k] is the volatility of the window
/// ending at k, NaN for k < window-1. `out` must be as long as `values`.
inline void rolling_volatility(std::span<const double> values, std::size_t window,
                               VolatilityMode mode, std::span<double> out) {
  if (window == 0 || out.size() != values.size()) {
    throw Error(ErrorCode::invalid_argument, "rolling_volatility: bad window or output size");
  }
  const double n = static_cast<double>(window);
  double shift = values.empty() ? 0.0 : values[0];
  double s1 = 0.0, s2 = 0.0;
  std::size_t slides = 0;

  auto rebuild = [&](std::size_t last) {
    shift = values[last + 1 - window];
    s1 = s2 = 0.0;
    for (std::size_t l = last + 1 - window; l <= last; ++l) {
      const double d = values[l] - shift;
      s1 += d;
      s2 += d * d;
    }
    slides = 0;
  };

  for (std::size_t k = 0; k < values.size(); ++k) {
    const double d = values[k] - shift;
    s1 += d;
    s2 += d * d;
    if (k >= window) {
      const double r = values[k - window] - shift;
      s1 -= r;
      s2 -= r * r;
      if (++slides >= kRecomputeEvery) rebuild(k);
    }
    if (k + 1 < window) {
      out[k] = detail::kNaN;
      continue;
    }
    const double central = s2 - s1 * s1 / n;
    if (detail::suspicious(central, s2)) {
      out[k] = volatility(values.subspan(k + 1 - window, window), mode);
      continue;
    }
    out[k] = mode == VolatilityMode::standard ? std::sqrt(central / n) : std::sqrt(central);
  }
}

/// Rolling Pearson estimator over `window` paired observations. out[k] covers the window ending
/// at k; NaN when k < window-1 or either window has zero variance.
inline void rolling_pearson(std::span<const double> x, std::span<const double> y,
                            std::size_t window, std::span<double> out) {
  if (window < 2 || x.size() != y.size() || out.size() != x.size()) {
    throw Error(ErrorCode::invalid_argument, "rolling_pearson: bad window or sizes");
  }
  const double n = static_cast<double>(window);
  double shx = x.empty() ? 0.0 : x[0], shy = y.empty() ? 0.0 : y[0];
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  std::size_t slides = 0;

  auto rebuild = [&](std::size_t last) {
    shx = x[last + 1 - window];
    shy = y[last + 1 - window];
    sx = sy = sxx = syy = sxy = 0.0;
    for (std::size_t l = last + 1 - window; l <= last; ++l) {
      const double dx = x[l] - shx, dy = y[l] - shy;
      sx += dx;
      sy += dy;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    slides = 0;
  };

  for (std::size_t k = 0; k < x.size(); ++k) {
    {
      const double dx = x[k] - shx, dy = y[k] - shy;
      sx += dx;
      sy += dy;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    if (k >= window) {
      const double dx = x[k - window] - shx, dy = y[k - window] - shy;
      sx -= dx;
      sy -= dy;
      sxx -= dx * dx;
      syy -= dy * dy;
      sxy -= dx * dy;
      if (++slides >= kRecomputeEvery) rebuild(k);
    }
    if (k + 1 < window) {
      out[k] = detail::kNaN;
      continue;
    }
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    if (detail::suspicious(vx, sxx) || detail::suspicious(vy, syy)) {
      const auto wx = x.subspan(k + 1 - window, window);
      const auto wy = y.subspan(k + 1 - window, window);
      if (detail::is_constant(wx) || detail::is_constant(wy)) {
        out[k] = detail::kNaN;
      } else {
        out[k] = pearson(wx, wy);
      }
      continue;
    }
    const double cov = sxy - sx * sy / n;
    out[k] = detail::clamp_correlation(cov / std::sqrt(vx * vy));
  }
}

/// Rolling arithmetic mean; out[k] covers the window ending at k, NaN before it fills.
inline void rolling_mean(std::span<const double> values, std::size_t window, std::span<double> out) {
  if (window == 0 || out.size() != values.size()) {
    throw Error(ErrorCode::invalid_argument, "rolling_mean: bad window or output size");
  }
  double sum = 0.0;
  std::size_t slides = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    sum += values[k];
    if (k >= window) {
      sum -= values[k - window];
      if (++slides >= kRecomputeEvery) {
        sum = 0.0;
        for (std::size_t l = k + 1 - window; l <= k; ++l) sum += values[l];
        slides = 0;
      }
    }
    out[k] = k + 1 < window ? detail::kNaN : sum / static_cast<double>(window);
  }
}

}  // namespace fptrade
