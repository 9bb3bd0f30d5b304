#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "longmem/error.hpp"
#include "longmem/estimators.hpp"

namespace longmem {

enum class BaselineFormula { anis_lloyd, peters };

/// Summand of the finite-sample sum: `conventional` is sqrt((v - i) / i),
/// `printed` is the constant-numerator sqrt((v - 1) / i).
enum class Summand { conventional, printed };

inline constexpr std::string_view to_string(BaselineFormula formula) noexcept {
  return formula == BaselineFormula::anis_lloyd ? "anis-lloyd" : "peters";
}

inline constexpr std::string_view to_string(Summand summand) noexcept {
  return summand == Summand::conventional ? "conventional" : "printed";
}

inline std::optional<BaselineFormula> parse_baseline_formula(std::string_view name) noexcept {
  if (name == "anis-lloyd") return BaselineFormula::anis_lloyd;
  if (name == "peters") return BaselineFormula::peters;
  return std::nullopt;
}

inline std::optional<Summand> parse_summand(std::string_view name) noexcept {
  if (name == "conventional") return Summand::conventional;
  if (name == "printed") return Summand::printed;
  return std::nullopt;
}

namespace detail {

inline long double rescaled_range_sum(std::size_t scale, Summand summand) noexcept {
  const long double v = static_cast<long double>(scale);
  long double sum = 0.0L;
  for (std::size_t i = 1; i < scale; ++i) {
    const long double li = static_cast<long double>(i);
    sum += std::sqrt((summand == Summand::conventional ? v - li : v - 1.0L) / li);
  }
  return sum;
}

}  // namespace detail

/// Expected rescaled range of an independent Gaussian window of length `scale`.
///
/// Anis-Lloyd:  Gamma((v-1)/2) / (sqrt(pi) Gamma(v/2)) * sum
/// Peters:      ((v - 1/2) / v) * sqrt(2 / (v pi)) * sum
///
/// The gamma ratio is taken as a difference of extended-precision log-gamma
/// values so it stays finite for any practical scale.
inline double expected_rs(std::size_t scale, BaselineFormula formula, Summand summand = Summand::conventional) {
  if (scale < 2) throw ParameterError("expected_rs: scale must be at least 2");
  const long double v = static_cast<long double>(scale);
  const long double pi = std::numbers::pi_v<long double>;
  long double front;
  if (formula == BaselineFormula::anis_lloyd) {
    front = std::exp(std::lgamma((v - 1.0L) / 2.0L) - std::lgamma(v / 2.0L) - 0.5L * std::log(pi));
  } else {
    front = ((v - 0.5L) / v) * std::sqrt(2.0L / (v * pi));
  }
  return static_cast<double>(front * detail::rescaled_range_sum(scale, summand));
}

struct ExpectedCurve {
  BaselineFormula formula = BaselineFormula::anis_lloyd;
  Summand summand = Summand::conventional;
  std::vector<CurvePoint> points;
};

inline ExpectedCurve expected_curve(const ScaleGrid& grid, BaselineFormula formula,
                                    Summand summand = Summand::conventional) {
  ExpectedCurve curve{formula, summand, {}};
  for (std::size_t scale : grid.scales)
    curve.points.push_back({static_cast<double>(scale), expected_rs(scale, formula, summand)});
  return curve;
}

/// E(H): the log-log slope of the expected curve over the estimator's grid.
inline double expected_hurst(std::size_t length, unsigned min_power, BaselineFormula formula,
                             Summand summand = Summand::conventional) {
  const auto grid = build_grid(length, min_power);
  RescaledRangeCurve curve;
  curve.points = expected_curve(grid, formula, summand).points;
  return fit_hurst(curve).hurst;
}

}  // namespace longmem
