#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "longmem/error.hpp"
#include "longmem/processes.hpp"

namespace longmem {

enum class Method { rs, mrs };

inline constexpr std::string_view to_string(Method method) noexcept {
  return method == Method::rs ? "rs" : "mrs";
}

inline std::optional<Method> parse_method(std::string_view name) noexcept {
  if (name == "rs") return Method::rs;
  if (name == "mrs") return Method::mrs;
  return std::nullopt;
}

/// Dyadic scales 2^min_power .. 2^max_power, with 2^max_power the largest
/// power of two not exceeding the series length.
struct ScaleGrid {
  unsigned base = 2;
  unsigned min_power = 5;
  unsigned max_power = 5;
  std::vector<std::size_t> scales;

  /// Length of the prefix that the grid tiles exactly.
  std::size_t analyzed_length() const noexcept { return scales.empty() ? 0 : scales.back(); }

  friend bool operator==(const ScaleGrid&, const ScaleGrid&) = default;
};

inline ScaleGrid build_grid(std::size_t length, unsigned min_power) {
  if (min_power >= 62) throw ParameterError("build_grid: min_power too large");
  const std::size_t needed = std::size_t{1} << (min_power + 1);
  if (length < needed)
    throw InputError("build_grid: series of length " + std::to_string(length) + " is shorter than " +
                     std::to_string(needed) + ", at least two scales are required");
  ScaleGrid grid;
  grid.min_power = min_power;
  grid.max_power = static_cast<unsigned>(std::bit_width(length) - 1);
  for (unsigned p = min_power; p <= grid.max_power; ++p) grid.scales.push_back(std::size_t{1} << p);
  return grid;
}

/// Lag chosen for the long-run variance of one window.
struct LagChoice {
  std::size_t lag = 0;
  bool capped = false;  // hit the upper bound scale - 1 (or rho degenerate)
};

namespace detail {

// Mean with one correction pass, so a large common offset does not leak
// into the deviations.
inline double window_mean(std::span<const double> window) noexcept {
  const double n = static_cast<double>(window.size());
  double sum = 0.0;
  for (double x : window) sum += x;
  const double rough = sum / n;
  double residual = 0.0;
  for (double x : window) residual += x - rough;
  return rough + residual / n;
}

}  // namespace detail

/// Sample lag-1 autocorrelation in mean-deviation form. Zero when the window
/// has no dispersion.
inline double lag1_autocorrelation(std::span<const double> window) noexcept {
  const std::size_t n = window.size();
  if (n < 2) return 0.0;
  const double mean = detail::window_mean(window);
  double denom = 0.0, numer = 0.0;
  double previous = window[0] - mean;
  denom += previous * previous;
  for (std::size_t t = 1; t < n; ++t) {
    const double current = window[t] - mean;
    numer += previous * current;
    denom += current * current;
    previous = current;
  }
  return denom > 0.0 ? numer / denom : 0.0;
}

/// Lo's automatic lag floor((3 scale / 2)^(1/3) (2 rho / (1 - rho^2))^(2/3)),
/// zero for rho <= 0 and capped at scale - 1.
inline LagChoice optimal_lag_from_rho(double rho, std::size_t scale) {
  if (scale < 2) throw InputError("optimal_lag: window length must be at least 2");
  const std::size_t cap = scale - 1;
  if (!(rho > 0.0)) return {0, false};
  if (rho >= 1.0 - 1e-12) return {cap, true};
  const double value = std::cbrt(1.5 * static_cast<double>(scale)) * std::pow(2.0 * rho / (1.0 - rho * rho), 2.0 / 3.0);
  const double lag = std::floor(value);
  if (lag >= static_cast<double>(cap)) return {cap, true};
  return {static_cast<std::size_t>(lag), false};
}

inline LagChoice optimal_lag(std::span<const double> window) {
  return optimal_lag_from_rho(lag1_autocorrelation(window), window.size());
}

namespace detail {

struct WindowMoments {
  double mean = 0.0;
  double sum_squares = 0.0;  // sum of squared deviations
  double range = 0.0;        // range of the cumulative deviation profile
  double max_abs = 0.0;      // largest |x| in the window
};

inline WindowMoments window_moments(std::span<const double> window) noexcept {
  WindowMoments out;
  for (double x : window) out.max_abs = std::max(out.max_abs, std::fabs(x));
  out.mean = window_mean(window);
  double profile = 0.0, high = 0.0, low = 0.0;
  for (double x : window) {
    const double dev = x - out.mean;
    out.sum_squares += dev * dev;
    profile += dev;
    high = std::max(high, profile);
    low = std::min(low, profile);
  }
  out.range = high - low;
  return out;
}

// sum_{t} (x_t - m)(x_{t+j} - m) / n.
inline double autocovariance(std::span<const double> window, double mean, std::size_t lag) noexcept {
  const std::size_t n = window.size();
  double acc = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) acc += (window[t] - mean) * (window[t + lag] - mean);
  return acc / static_cast<double>(n);
}

// Dispersion below this multiple of max|x| is treated as exactly zero.
inline constexpr double kZeroDispersion = 64.0 * std::numeric_limits<double>::epsilon();

inline double bartlett_radicand(std::span<const double> window, double mean, double variance, std::size_t lag) {
  double correction = 0.0;
  const double denom = static_cast<double>(lag + 1);
  for (std::size_t j = 1; j <= lag; ++j)
    correction += autocovariance(window, mean, j) * (1.0 - static_cast<double>(j) / denom);
  return variance + 2.0 * correction;
}

inline double checked_sqrt(double radicand, double variance) {
  if (radicand < 0.0) {
    if (radicand < -1e-12 * std::max(variance, 1.0))
      throw InternalError("modified standard deviation: negative radicand " + std::to_string(radicand));
    return 0.0;
  }
  return std::sqrt(radicand);
}

}  // namespace detail

/// Bartlett-weighted long-run standard deviation
/// sqrt(S^2 + 2 sum_{j<=lag} gamma_j (1 - j / (lag + 1))), all moments with
/// denominator equal to the window length. lag = 0 gives exactly S.
inline double modified_std(std::span<const double> window, std::size_t lag) {
  if (window.empty()) throw InputError("modified_std: empty window");
  if (lag >= window.size()) throw InputError("modified_std: lag must be below the window length");
  const auto moments = detail::window_moments(window);
  const double variance = moments.sum_squares / static_cast<double>(window.size());
  return detail::checked_sqrt(detail::bartlett_radicand(window, moments.mean, variance, lag), variance);
}

/// Statistics of one sub-period.
struct WindowStats {
  std::size_t index = 0;
  double range = 0.0;
  double std_dev = 0.0;
  double modified_std = 0.0;  // equals std_dev for plain R/S
  std::size_t lag = 0;
  double rho1 = 0.0;
  bool capped = false;
  bool skipped = false;
};

/// Selects the lag used in the denominator of each window.
struct ZeroLag {
  LagChoice operator()(std::span<const double>) const noexcept { return {}; }
};

struct LoLag {
  LagChoice operator()(std::span<const double> window) const { return optimal_lag(window); }
};

struct FixedLag {
  std::size_t lag = 0;
  LagChoice operator()(std::span<const double> window) const {
    return lag >= window.size() ? LagChoice{window.size() - 1, true} : LagChoice{lag, false};
  }
};

namespace detail {

// R/S: denominator S taken directly. M-R/S: Bartlett-corrected S with the
// lag from `select`; with lag 0 the radicand is S^2 + 0.0, bit-identical to R/S.
template <class LagSelector>
WindowStats analyze_window(std::span<const double> window, bool modified, const LagSelector& select) {
  WindowStats out;
  const auto moments = window_moments(window);
  const double variance = moments.sum_squares / static_cast<double>(window.size());
  out.range = moments.range;
  out.std_dev = std::sqrt(variance);
  out.modified_std = out.std_dev;
  if (modified) {
    const LagChoice choice = select(window);
    out.lag = choice.lag;
    out.capped = choice.capped;
    out.modified_std = checked_sqrt(bartlett_radicand(window, moments.mean, variance, choice.lag), variance);
  }
  const double denominator = modified ? out.modified_std : out.std_dev;
  out.skipped = !(denominator > kZeroDispersion * moments.max_abs);
  return out;
}

}  // namespace detail

/// Averaged rescaled range at one scale plus window diagnostics.
struct ScaleResult {
  std::size_t scale = 0;
  double mean_rescaled_range = 0.0;
  std::size_t windows = 0;
  std::size_t skipped = 0;
  std::size_t capped = 0;
};

/// Mean of R/denominator over the non-overlapping windows of length `scale`
/// tiling the longest prefix of `increments` that is a multiple of `scale`.
/// `modified` selects S_M (lag from `select`) over S. Zero-dispersion windows
/// are skipped; if every window is skipped an EstimationError is thrown.
template <class LagSelector>
ScaleResult rescaled_range_at_scale(std::span<const double> increments, std::size_t scale, bool modified,
                                    const LagSelector& select, std::vector<WindowStats>* windows_out = nullptr) {
  if (scale < 2) throw InputError("rescaled_range_at_scale: scale must be at least 2");
  if (increments.size() < scale) throw InputError("rescaled_range_at_scale: series shorter than the scale");
  ScaleResult out;
  out.scale = scale;
  out.windows = increments.size() / scale;
  double sum = 0.0;
  for (std::size_t n = 0; n < out.windows; ++n) {
    auto stats = detail::analyze_window(increments.subspan(n * scale, scale), modified, select);
    stats.index = n;
    if (stats.capped) ++out.capped;
    if (stats.skipped) {
      ++out.skipped;
    } else {
      sum += stats.range / (modified ? stats.modified_std : stats.std_dev);
    }
    if (windows_out) {
      if (modified) stats.rho1 = lag1_autocorrelation(increments.subspan(n * scale, scale));
      windows_out->push_back(stats);
    }
  }
  if (out.skipped == out.windows)
    throw EstimationError("scale " + std::to_string(scale) + ": every window has zero dispersion");
  out.mean_rescaled_range = sum / static_cast<double>(out.windows - out.skipped);
  return out;
}

inline ScaleResult rescaled_range_at_scale(std::span<const double> increments, std::size_t scale, Method method,
                                           std::vector<WindowStats>* windows_out = nullptr) {
  return method == Method::rs ? rescaled_range_at_scale(increments, scale, false, ZeroLag{}, windows_out)
                              : rescaled_range_at_scale(increments, scale, true, LoLag{}, windows_out);
}

struct CurvePoint {
  double scale = 0.0;
  double value = 0.0;
};

struct ScaleDiagnostics {
  std::size_t scale = 0;
  std::size_t windows = 0;
  std::size_t skipped = 0;
  std::size_t capped = 0;
  bool degenerate = false;  // every window skipped, scale dropped from the fit
};

struct RescaledRangeCurve {
  Method method = Method::rs;
  std::vector<CurvePoint> points;
  std::vector<ScaleDiagnostics> diagnostics;

  std::size_t skipped_windows() const noexcept {
    std::size_t total = 0;
    for (const auto& d : diagnostics) total += d.skipped;
    return total;
  }
  std::size_t capped_windows() const noexcept {
    std::size_t total = 0;
    for (const auto& d : diagnostics) total += d.capped;
    return total;
  }
};

template <class LagSelector>
RescaledRangeCurve rs_curve(std::span<const double> increments, const ScaleGrid& grid, bool modified,
                            const LagSelector& select) {
  if (grid.scales.empty() || increments.size() < grid.analyzed_length())
    throw InputError("rs_curve: grid does not fit the series");
  RescaledRangeCurve curve;
  curve.method = modified ? Method::mrs : Method::rs;
  const auto prefix = increments.first(grid.analyzed_length());
  for (std::size_t scale : grid.scales) {
    ScaleDiagnostics diag;
    diag.scale = scale;
    try {
      const auto result = rescaled_range_at_scale(prefix, scale, modified, select);
      diag.windows = result.windows;
      diag.skipped = result.skipped;
      diag.capped = result.capped;
      curve.points.push_back({static_cast<double>(scale), result.mean_rescaled_range});
    } catch (const EstimationError&) {
      diag.windows = prefix.size() / scale;
      diag.skipped = diag.windows;
      diag.degenerate = true;
    }
    curve.diagnostics.push_back(diag);
  }
  if (curve.points.size() < 2)
    throw EstimationError("rs_curve: fewer than two scales with non-zero dispersion");
  return curve;
}

inline RescaledRangeCurve rs_curve(std::span<const double> increments, const ScaleGrid& grid, Method method) {
  return method == Method::rs ? rs_curve(increments, grid, false, ZeroLag{})
                              : rs_curve(increments, grid, true, LoLag{});
}

/// Ordinary least squares of y on x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_sum_squares = 0.0;
  double max_abs_residual = 0.0;
  double r_squared = 1.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("fit_line: size mismatch");
  if (x.size() < 2) throw EstimationError("fit_line: at least two points are required");
  const double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x, dy = y[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw EstimationError("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residual_sum_squares += r * r;
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::fabs(r));
  }
  fit.r_squared = syy > 0.0 ? 1.0 - fit.residual_sum_squares / syy : 1.0;
  return fit;
}

struct HurstEstimate {
  double hurst = 0.0;
  double intercept = 0.0;  // natural-log intercept
  Method method = Method::rs;
  std::vector<double> scales;  // scales that entered the regression
  double residual_sum_squares = 0.0;
  double max_abs_residual = 0.0;
  double r_squared = 1.0;
  std::size_t analyzed_length = 0;
  std::size_t discarded = 0;  // trailing observations beyond the largest power of two
  std::size_t skipped_windows = 0;
  std::size_t capped_windows = 0;
};

/// Slope of log (R/S) on log scale, equal weight per scale.
inline HurstEstimate fit_hurst(const RescaledRangeCurve& curve) {
  if (curve.points.size() < 2) throw EstimationError("fit_hurst: at least two points are required");
  std::vector<double> log_scale, log_value;
  HurstEstimate est;
  for (const auto& p : curve.points) {
    if (!(p.value > 0.0) || !(p.scale > 0.0)) throw EstimationError("fit_hurst: curve values must be positive");
    log_scale.push_back(std::log(p.scale));
    log_value.push_back(std::log(p.value));
    est.scales.push_back(p.scale);
  }
  const auto fit = fit_line(log_scale, log_value);
  est.hurst = fit.slope;
  est.intercept = fit.intercept;
  est.method = curve.method;
  est.residual_sum_squares = fit.residual_sum_squares;
  est.max_abs_residual = fit.max_abs_residual;
  est.r_squared = fit.r_squared;
  est.skipped_windows = curve.skipped_windows();
  est.capped_windows = curve.capped_windows();
  return est;
}

/// Full pipeline on an increment series. Series whose length is not a power
/// of two are truncated to the largest power-of-two prefix.
inline HurstEstimate estimate_hurst(std::span<const double> increments, Method method, unsigned min_power = 5) {
  const auto grid = build_grid(increments.size(), min_power);
  auto est = fit_hurst(rs_curve(increments, grid, method));
  est.analyzed_length = grid.analyzed_length();
  est.discarded = increments.size() - grid.analyzed_length();
  return est;
}

inline HurstEstimate estimate_hurst(const IncrementSeries& series, Method method, unsigned min_power = 5) {
  return estimate_hurst(series.values(), method, min_power);
}

inline HurstEstimate estimate_hurst(const LevelSeries& levels, Method method, unsigned min_power = 5) {
  return estimate_hurst(increments_from_levels(levels), method, min_power);
}

}  // namespace longmem
