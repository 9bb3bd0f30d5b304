// longmem: rescaled range analysis and Monte Carlo reproduction driver.
//
//   longmem simulate --config <file> --out <dir> [--dump-estimates] [--paper-format] [--workers N]
//   longmem estimate --input <file> --kind levels|increments --method rs|mrs [--min-scale 32] [--curve]
//   longmem expected --length <T> --formula anis-lloyd|peters [--summand conventional|printed] [--min-scale 32]
//
// Exit codes: 0 success, 1 usage or validation error, 2 runtime failure.

#include <bit>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "longmem/io.hpp"
#include "longmem/longmem.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct UsageError : longmem::Error {
  using longmem::Error::Error;
};

unsigned min_power_from_scale(std::size_t scale) {
  if (scale < 2 || !std::has_single_bit(scale)) throw UsageError("--min-scale must be a power of two >= 2");
  return static_cast<unsigned>(std::bit_width(scale) - 1);
}

int run_simulate(const std::string& config_path, const std::string& out_dir, bool dump, bool paper_format,
                 std::size_t workers) {
  const auto config = longmem::parse_config(config_path);
  longmem::RunOptions options;
  options.workers = workers ? workers : longmem::default_worker_count();
  const auto start = std::chrono::steady_clock::now();
  const auto results = longmem::run_experiment(config, options);
  const auto table = longmem::summarize(results, config);
  longmem::RunMetadata meta;
  meta.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  meta.workers = options.workers;
  const auto written = longmem::write_outputs(out_dir, config, table, results, meta, {paper_format, dump});
  for (const auto& path : written) std::cout << "wrote " << path.string() << "\n";
  std::cout << "cells " << results.size() << ", replications " << config.replications << ", "
            << longmem::format_fixed(meta.wall_seconds, 1) << " s\n";
  return 0;
}

int run_estimate(const std::string& input, const std::string& kind_name, const std::string& method_name,
                 std::size_t min_scale, bool show_curve) {
  const auto kind = longmem::parse_series_kind(kind_name);
  if (!kind) throw UsageError("--kind must be levels or increments");
  const auto method = longmem::parse_method(method_name);
  if (!method) throw UsageError("--method must be rs or mrs");
  const unsigned min_power = min_power_from_scale(min_scale);
  const auto series = longmem::load_series(input, *kind);
  const auto grid = longmem::build_grid(series.size(), min_power);
  const auto curve = longmem::rs_curve(series.values(), grid, *method);
  auto estimate = longmem::fit_hurst(curve);
  estimate.analyzed_length = grid.analyzed_length();
  estimate.discarded = series.size() - grid.analyzed_length();

  std::cout << "method " << longmem::to_string(*method) << "\n";
  std::cout << "hurst " << longmem::format_double(estimate.hurst) << "\n";
  std::cout << "intercept " << longmem::format_double(estimate.intercept) << "\n";
  std::cout << "r_squared " << longmem::format_double(estimate.r_squared) << "\n";
  std::cout << "analyzed_length " << estimate.analyzed_length << "\n";
  std::cout << "discarded " << estimate.discarded << "\n";
  std::cout << "skipped_windows " << estimate.skipped_windows << "\n";
  if (*method == longmem::Method::mrs) std::cout << "capped_lag_windows " << estimate.capped_windows << "\n";
  if (show_curve) {
    std::cout << "scale,rescaled_range\n";
    for (const auto& p : curve.points)
      std::cout << static_cast<std::size_t>(p.scale) << "," << longmem::format_double(p.value) << "\n";
  }
  return 0;
}

int run_expected(std::size_t length, const std::string& formula_name, const std::string& summand_name,
                 std::size_t min_scale) {
  const auto formula = longmem::parse_baseline_formula(formula_name);
  if (!formula) throw UsageError("--formula must be anis-lloyd or peters");
  const auto summand = longmem::parse_summand(summand_name);
  if (!summand) throw UsageError("--summand must be conventional or printed");
  const unsigned min_power = min_power_from_scale(min_scale);
  const auto grid = longmem::build_grid(length, min_power);
  const auto curve = longmem::expected_curve(grid, *formula, *summand);
  std::cout << "scale,expected_rescaled_range\n";
  for (const auto& p : curve.points)
    std::cout << static_cast<std::size_t>(p.scale) << "," << longmem::format_double(p.value) << "\n";
  std::cout << "expected_hurst " << longmem::format_double(longmem::expected_hurst(length, min_power, *formula, *summand))
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classical and modified rescaled range analysis"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool dump = false, paper_format = false;
  std::size_t workers = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment grid");
  simulate->add_option("--config", config_path, "Experiment config (JSON)")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_flag("--dump-estimates", dump, "Also write per-replication estimates.csv");
  simulate->add_flag("--paper-format", paper_format, "Round summary values to 4 decimals");
  simulate->add_option("--workers", workers, "Worker threads (default: LONGMEM_WORKERS or hardware)");

  std::string input, kind = "increments", method = "rs";
  std::size_t min_scale = 32;
  bool show_curve = false;
  auto* estimate = app.add_subcommand("estimate", "Estimate the Hurst exponent of a series file");
  estimate->add_option("--input", input, "Series file, one value per line")->required();
  estimate->add_option("--kind", kind, "levels or increments")->required();
  estimate->add_option("--method", method, "rs or mrs")->required();
  estimate->add_option("--min-scale", min_scale, "Smallest window length (power of two)");
  estimate->add_flag("--curve", show_curve, "Print the rescaled range curve");

  std::size_t length = 0;
  std::string formula = "anis-lloyd", summand = "conventional";
  auto* expected = app.add_subcommand("expected", "Expected rescaled ranges and E(H) under independence");
  expected->add_option("--length", length, "Series length T")->required();
  expected->add_option("--formula", formula, "anis-lloyd or peters");
  expected->add_option("--summand", summand, "conventional or printed");
  expected->add_option("--min-scale", min_scale, "Smallest window length (power of two)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*simulate) return run_simulate(config_path, out_dir, dump, paper_format, workers);
    if (*estimate) return run_estimate(input, kind, method, min_scale, show_curve);
    if (*expected) return run_expected(length, formula, summand, min_scale);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const longmem::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const longmem::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const longmem::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
