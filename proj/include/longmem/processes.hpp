#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "longmem/error.hpp"

namespace longmem {

enum class ProcessKind { iid, ar1, arfima };

inline constexpr std::array<ProcessKind, 3> kAllProcesses = {ProcessKind::iid, ProcessKind::ar1, ProcessKind::arfima};

inline constexpr std::string_view to_string(ProcessKind kind) noexcept {
  switch (kind) {
    case ProcessKind::iid: return "iid";
    case ProcessKind::ar1: return "ar1";
    case ProcessKind::arfima: return "arfima";
  }
  return "unknown";
}

inline std::optional<ProcessKind> parse_process_kind(std::string_view name) noexcept {
  for (auto kind : kAllProcesses)
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

/// Memory structure of a simulated increment series. `ar_coefficient` is read
/// for ar1 only; `d` and `truncation` for arfima only. The first `burn_in`
/// generated values are discarded, starting from a zero pre-history.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::iid;
  double ar_coefficient = 0.25;
  double d = 0.25;
  std::size_t truncation = 100;
  std::size_t burn_in = 1000;

  static ProcessSpec make(ProcessKind kind) noexcept {
    ProcessSpec spec;
    spec.kind = kind;
    return spec;
  }

  void validate() const {
    if (kind == ProcessKind::ar1 && !(std::fabs(ar_coefficient) < 1.0))
      throw ParameterError("ar1: |theta| must be below 1");
    if (kind == ProcessKind::arfima) {
      if (!(d > 0.0 && d < 0.5)) throw ParameterError("arfima: d must lie in (0, 0.5)");
      if (truncation < 1) throw ParameterError("arfima: truncation must be at least 1");
    }
  }

  /// Short human-readable label used in reports.
  std::string label() const {
    switch (kind) {
      case ProcessKind::iid: return "iid";
      case ProcessKind::ar1: return "ar1(theta=" + format_param(ar_coefficient) + ")";
      case ProcessKind::arfima: return "arfima(d=" + format_param(d) + ")";
    }
    return "unknown";
  }

  friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;

 private:
  static std::string format_param(double value) {
    std::string text = std::to_string(value);
    while (text.size() > 1 && text.back() == '0') text.pop_back();
    if (!text.empty() && text.back() == '.') text.pop_back();
    return text;
  }
};

/// Increments x_1..x_T of a series.
class IncrementSeries {
 public:
  IncrementSeries() = default;
  explicit IncrementSeries(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InputError("increment series must not be empty");
    for (double v : values_)
      if (!std::isfinite(v)) throw InputError("increment series contains a non-finite value");
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::vector<double> release() && noexcept { return std::move(values_); }

  friend bool operator==(const IncrementSeries&, const IncrementSeries&) = default;

 private:
  std::vector<double> values_;
};

/// Levels X_0..X_T with X_0 = 0.
class LevelSeries {
 public:
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  friend LevelSeries integrate(const IncrementSeries& increments);
  std::vector<double> values_;
};

/// AR(inf) weights a_i(d) = d Gamma(i - d) / (Gamma(1 - d) Gamma(1 + i)) for
/// i = 1..max_lag, evaluated in log space.
inline std::vector<double> arfima_weights(double d, std::size_t max_lag) {
  if (!(d > 0.0 && d < 0.5)) throw ParameterError("arfima_weights: d must lie in (0, 0.5)");
  if (max_lag < 1) throw ParameterError("arfima_weights: max_lag must be at least 1");
  std::vector<double> weights(max_lag);
  const double log_d = std::log(d);
  const double log_gamma_one_minus_d = std::lgamma(1.0 - d);
  for (std::size_t i = 1; i <= max_lag; ++i) {
    const double x = static_cast<double>(i);
    weights[i - 1] = std::exp(log_d + std::lgamma(x - d) - log_gamma_one_minus_d - std::lgamma(1.0 + x));
  }
  return weights;
}

namespace detail {

// sum_{i=0}^{n-1} weights[i] * history[-1 - i], where history points one past
// the most recent value. Four accumulators in a fixed order.
inline double lagged_dot(const double* weights, const double* history, std::size_t n) noexcept {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 += weights[i] * history[-1 - static_cast<std::ptrdiff_t>(i)];
    acc1 += weights[i + 1] * history[-2 - static_cast<std::ptrdiff_t>(i)];
    acc2 += weights[i + 2] * history[-3 - static_cast<std::ptrdiff_t>(i)];
    acc3 += weights[i + 3] * history[-4 - static_cast<std::ptrdiff_t>(i)];
  }
  for (; i < n; ++i) acc0 += weights[i] * history[-1 - static_cast<std::ptrdiff_t>(i)];
  return (acc0 + acc1) + (acc2 + acc3);
}

}  // namespace detail

/// Runs the recursion of `spec` over `innovations` into `out` (full length,
/// burn-in included). `weights` must hold the arfima weights when needed.
inline void run_recursion(const ProcessSpec& spec, std::span<const double> weights,
                          std::span<const double> innovations, std::span<double> out) {
  const std::size_t n = innovations.size();
  switch (spec.kind) {
    case ProcessKind::iid: std::copy(innovations.begin(), innovations.end(), out.begin()); break;
    case ProcessKind::ar1: {
      double previous = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        previous = spec.ar_coefficient * previous + innovations[t];
        out[t] = previous;
      }
      break;
    }
    case ProcessKind::arfima: {
      const std::size_t lags = std::min(weights.size(), spec.truncation);
      for (std::size_t t = 0; t < n; ++t)
        out[t] = detail::lagged_dot(weights.data(), out.data() + t, std::min(t, lags)) + innovations[t];
      break;
    }
  }
}

/// Generates T = innovations.size() - burn_in increments with the memory
/// structure of `spec`.
inline IncrementSeries generate_increments(const ProcessSpec& spec, std::span<const double> innovations,
                                           std::size_t length) {
  spec.validate();
  if (innovations.size() < length + spec.burn_in)
    throw InputError("generate_increments: need " + std::to_string(length + spec.burn_in) + " innovations, got " +
                     std::to_string(innovations.size()));
  if (length == 0) throw InputError("generate_increments: length must be at least 1");
  const auto used = innovations.first(length + spec.burn_in);
  std::vector<double> weights;
  if (spec.kind == ProcessKind::arfima) weights = arfima_weights(spec.d, spec.truncation);
  std::vector<double> full(used.size());
  run_recursion(spec, weights, used, full);
  return IncrementSeries(std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(spec.burn_in), full.end()));
}

/// Convenience overload: T is inferred as innovations.size() - burn_in.
inline IncrementSeries generate_increments(const ProcessSpec& spec, std::span<const double> innovations) {
  if (innovations.size() <= spec.burn_in)
    throw InputError("generate_increments: innovations must be longer than the burn-in");
  return generate_increments(spec, innovations, innovations.size() - spec.burn_in);
}

/// X_0 = 0, X_t = X_{t-1} + x_t.
inline LevelSeries integrate(const IncrementSeries& increments) {
  LevelSeries levels;
  levels.values_.reserve(increments.size() + 1);
  double running = 0.0;
  levels.values_.push_back(running);
  for (double x : increments.values()) {
    running += x;
    levels.values_.push_back(running);
  }
  return levels;
}

inline IncrementSeries increments_from_levels(std::span<const double> levels) {
  if (levels.size() < 2) throw InputError("increments_from_levels: need at least 2 levels");
  std::vector<double> out(levels.size() - 1);
  for (std::size_t t = 1; t < levels.size(); ++t) out[t - 1] = levels[t] - levels[t - 1];
  return IncrementSeries(std::move(out));
}

inline IncrementSeries increments_from_levels(const LevelSeries& levels) {
  return increments_from_levels(levels.values());
}

}  // namespace longmem
