#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "longmem/baselines.hpp"
#include "longmem/distributions.hpp"
#include "longmem/error.hpp"
#include "longmem/estimators.hpp"
#include "longmem/format.hpp"
#include "longmem/processes.hpp"
#include "longmem/random.hpp"

namespace longmem {

/// The simulation grid. Lengths default to 2^9..2^14.
struct ExperimentConfig {
  std::vector<DistributionSpec> distributions;
  std::vector<ProcessSpec> processes;
  std::vector<std::size_t> lengths = {512, 1024, 2048, 4096, 8192, 16384};
  std::size_t replications = 1000;
  std::vector<Method> methods = {Method::rs, Method::mrs};
  std::uint64_t master_seed = 0;
  unsigned min_power = 5;
  BaselineFormula baseline = BaselineFormula::anis_lloyd;
  Summand summand = Summand::conventional;
  // Share innovations across methods for the same (distribution, process, length, replication).
  bool common_random_numbers = false;

  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct CellId {
  Method method = Method::rs;
  DistributionSpec distribution;
  ProcessSpec process;
  std::size_t length = 0;

  friend bool operator==(const CellId&, const CellId&) = default;
};

namespace detail {

inline std::string distribution_key(const DistributionSpec& spec) {
  std::string key(to_string(spec.kind));
  switch (spec.kind) {
    case DistributionKind::log_t: key += ";dof=" + format_double(spec.degrees_of_freedom); break;
    case DistributionKind::gamma:
    case DistributionKind::inv_gamma:
      key += ";shape=" + format_double(spec.shape) + ";scale=" + format_double(spec.scale);
      break;
    case DistributionKind::laplace:
    case DistributionKind::log_laplace: key += ";sd=" + format_double(spec.std_dev); break;
    default: break;
  }
  return key + ";shift=" + format_double(spec.shift);
}

inline std::string process_key(const ProcessSpec& spec) {
  std::string key(to_string(spec.kind));
  if (spec.kind == ProcessKind::ar1) key += ";theta=" + format_double(spec.ar_coefficient);
  if (spec.kind == ProcessKind::arfima)
    key += ";d=" + format_double(spec.d) + ";truncation=" + std::to_string(spec.truncation);
  return key + ";burn-in=" + std::to_string(spec.burn_in);
}

// Ordering used for canonical output: method, process, distribution, length.
inline auto sort_key(const CellId& id) {
  return std::make_tuple(static_cast<int>(id.method), static_cast<int>(id.process.kind), process_key(id.process),
                         static_cast<int>(id.distribution.kind), distribution_key(id.distribution), id.length);
}

}  // namespace detail

inline bool cell_less(const CellId& a, const CellId& b) { return detail::sort_key(a) < detail::sort_key(b); }

/// Stable 64-bit cell id. Under common random numbers the method is left
/// out so both methods see the same innovations.
inline std::uint64_t cell_stream_id(const CellId& id, bool common_random_numbers) {
  std::string key = detail::distribution_key(id.distribution) + "|" + detail::process_key(id.process) + "|" +
                    std::to_string(id.length);
  if (!common_random_numbers) key += "|" + std::string(to_string(id.method));
  return fnv1a64(key);
}

inline RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t cell_id, std::uint64_t replication) {
  return RandomStream(StreamId{master_seed, cell_id, replication});
}

inline void ExperimentConfig::validate() const {
  if (distributions.empty()) throw ParameterError("distributions: at least one distribution is required");
  if (processes.empty()) throw ParameterError("processes: at least one process is required");
  if (lengths.empty()) throw ParameterError("lengths: at least one length is required");
  if (methods.empty()) throw ParameterError("methods: at least one method is required");
  if (replications < 2) throw ParameterError("replications: at least 2 replications are required");
  if (min_power < 1 || min_power > 40) throw ParameterError("min-power: must lie in [1, 40]");
  for (const auto& d : distributions) d.validate();
  for (const auto& p : processes) p.validate();
  const std::size_t needed = std::size_t{1} << (min_power + 1);
  for (std::size_t length : lengths)
    if (length < needed)
      throw ParameterError("lengths: " + std::to_string(length) + " leaves fewer than two scales (need at least " +
                           std::to_string(needed) + ")");
  auto has_duplicates = [](auto keys) {
    std::sort(keys.begin(), keys.end());
    return std::adjacent_find(keys.begin(), keys.end()) != keys.end();
  };
  std::vector<std::string> keys;
  for (const auto& d : distributions) keys.push_back(detail::distribution_key(d));
  if (has_duplicates(keys)) throw ParameterError("distributions: duplicate entry");
  keys.clear();
  for (const auto& p : processes) keys.push_back(p.label());
  if (has_duplicates(keys)) throw ParameterError("processes: duplicate entry");
  if (has_duplicates(lengths)) throw ParameterError("lengths: duplicate entry");
  std::vector<int> method_ids;
  for (auto m : methods) method_ids.push_back(static_cast<int>(m));
  if (has_duplicates(method_ids)) throw ParameterError("methods: duplicate entry");
}

struct ReplicationFailure {
  std::size_t replication = 0;
  std::string reason;
};

struct CellResult {
  CellId id;
  std::size_t replications = 0;            // attempted
  std::vector<std::size_t> indices;        // replication index of each estimate
  std::vector<double> estimates;           // successful estimates, ascending replication
  std::vector<ReplicationFailure> failures;
  std::size_t skipped_windows = 0;
  std::size_t capped_windows = 0;
  double compute_seconds = 0.0;  // summed task time, not wall time

  /// More than 1% of replications failed.
  bool failed() const noexcept { return failures.size() * 100 > replications; }
};

/// Cells of the configuration in canonical order.
inline std::vector<CellId> enumerate_cells(const ExperimentConfig& config) {
  std::vector<CellId> cells;
  for (auto method : config.methods)
    for (const auto& process : config.processes)
      for (const auto& distribution : config.distributions)
        for (std::size_t length : config.lengths) cells.push_back({method, distribution, process, length});
  std::stable_sort(cells.begin(), cells.end(), cell_less);
  return cells;
}

/// LONGMEM_WORKERS if set and positive, otherwise the hardware concurrency.
inline std::size_t default_worker_count() {
  if (const char* env = std::getenv("LONGMEM_WORKERS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<std::size_t>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct RunOptions {
  std::size_t workers = 0;  // 0: default_worker_count()
  // Called after each finished task with (done, total); invoked under a lock.
  std::function<void(std::size_t, std::size_t)> progress;
};

namespace detail {

struct TaskOutcome {
  double hurst = 0.0;
  bool ok = false;
  std::string reason;
  std::size_t skipped = 0;
  std::size_t capped = 0;
  double seconds = 0.0;
};

struct WorkerScratch {
  std::vector<double> innovations;
  std::vector<double> path;
};

inline TaskOutcome run_replication(const CellId& cell, std::span<const double> weights, std::uint64_t master_seed,
                                   std::uint64_t stream_id, std::size_t replication, unsigned min_power,
                                   WorkerScratch& scratch) {
  const auto start = std::chrono::steady_clock::now();
  TaskOutcome outcome;
  try {
    const std::size_t total = cell.length + cell.process.burn_in;
    scratch.innovations.resize(total);
    scratch.path.resize(total);
    auto stream = derive_stream(master_seed, stream_id, replication);
    sample_into(cell.distribution, scratch.innovations, stream);
    run_recursion(cell.process, weights, scratch.innovations, scratch.path);
    const auto increments = std::span<const double>(scratch.path).subspan(cell.process.burn_in, cell.length);
    for (double x : increments)
      if (!std::isfinite(x)) throw EstimationError("simulated series contains a non-finite value");
    const auto estimate = estimate_hurst(increments, cell.method, min_power);
    if (!std::isfinite(estimate.hurst)) throw EstimationError("non-finite Hurst estimate");
    outcome.hurst = estimate.hurst;
    outcome.skipped = estimate.skipped_windows;
    outcome.capped = estimate.capped_windows;
    outcome.ok = true;
  } catch (const Error& e) {
    outcome.reason = e.what();
  }
  outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

}  // namespace detail

/// Runs every (cell, replication) task on a pool of workers. Each task owns a
/// stream derived from (master_seed, cell, replication) and writes into its
/// own slot, so results do not depend on the number of workers.
inline std::vector<CellResult> run_experiment(const ExperimentConfig& config, const RunOptions& options = {}) {
  config.validate();
  const auto cells = enumerate_cells(config);
  const std::size_t reps = config.replications;

  std::map<std::string, std::vector<double>> weight_cache;
  std::vector<const std::vector<double>*> cell_weights(cells.size(), nullptr);
  std::vector<std::uint64_t> stream_ids(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& process = cells[c].process;
    if (process.kind == ProcessKind::arfima) {
      auto [it, inserted] = weight_cache.try_emplace(detail::process_key(process));
      if (inserted) it->second = arfima_weights(process.d, process.truncation);
      cell_weights[c] = &it->second;
    }
    stream_ids[c] = cell_stream_id(cells[c], config.common_random_numbers);
  }

  const std::size_t total_tasks = cells.size() * reps;
  std::vector<detail::TaskOutcome> outcomes(total_tasks);
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex progress_mutex;
  std::exception_ptr fatal;
  std::mutex fatal_mutex;

  auto worker = [&] {
    detail::WorkerScratch scratch;
    for (;;) {
      const std::size_t task = next.fetch_add(1, std::memory_order_relaxed);
      if (task >= total_tasks) return;
      const std::size_t c = task / reps, r = task % reps;
      try {
        const std::span<const double> weights =
            cell_weights[c] ? std::span<const double>(*cell_weights[c]) : std::span<const double>();
        outcomes[task] =
            detail::run_replication(cells[c], weights, config.master_seed, stream_ids[c], r, config.min_power, scratch);
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(total_tasks);
        return;
      }
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(++done, total_tasks);
      }
    }
  };

  const std::size_t workers = std::min(std::max<std::size_t>(1, options.workers ? options.workers : default_worker_count()),
                                       std::max<std::size_t>(1, total_tasks));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  std::vector<CellResult> results(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cell = results[c];
    cell.id = cells[c];
    cell.replications = reps;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& outcome = outcomes[c * reps + r];
      cell.compute_seconds += outcome.seconds;
      if (outcome.ok) {
        cell.indices.push_back(r);
        cell.estimates.push_back(outcome.hurst);
        cell.skipped_windows += outcome.skipped;
        cell.capped_windows += outcome.capped;
      } else {
        cell.failures.push_back({r, outcome.reason});
      }
    }
  }
  return results;
}

/// Pairwise summation in a fixed recursion order.
inline double pairwise_sum(std::span<const double> values) noexcept {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct EstimateStats {
  double mean = 0.0;
  double bias = 0.0;
  double variance = 0.0;  // population form
  double mse = 0.0;       // bias^2 + variance
};

inline EstimateStats summarize_estimates(std::span<const double> estimates, double reference) {
  if (estimates.empty()) throw SummaryError("summarize: no estimates");
  const double n = static_cast<double>(estimates.size());
  EstimateStats out;
  out.mean = pairwise_sum(estimates) / n;
  std::vector<double> squared(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double dev = estimates[i] - out.mean;
    squared[i] = dev * dev;
  }
  out.variance = pairwise_sum(squared) / n;
  out.bias = out.mean - reference;
  out.mse = out.bias * out.bias + out.variance;
  return out;
}

struct SummaryRow {
  CellId id;
  std::size_t successful = 0;
  std::size_t failed = 0;
  double reference = 0.0;  // E(H) used for bias and MSE
  double mean = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;

  const SummaryRow* find(Method method, DistributionKind distribution, ProcessKind process, std::size_t length) const {
    for (const auto& row : rows)
      if (row.id.method == method && row.id.distribution.kind == distribution && row.id.process.kind == process &&
          row.id.length == length)
        return &row;
    return nullptr;
  }
};

/// Reference value of H for a cell: the finite-sample expectation for
/// iid and ar1, d + 1/2 for arfima.
inline double reference_hurst(const CellId& id, unsigned min_power, BaselineFormula formula, Summand summand) {
  if (id.process.kind == ProcessKind::arfima) return id.process.d + 0.5;
  return expected_hurst(id.length, min_power, formula, summand);
}

inline SummaryTable summarize(const std::vector<CellResult>& results, unsigned min_power, BaselineFormula formula,
                              Summand summand = Summand::conventional) {
  SummaryTable table;
  std::map<std::size_t, double> expected_cache;
  for (const auto& cell : results) {
    const std::string name = std::string(to_string(cell.id.method)) + "/" +
                             std::string(to_string(cell.id.distribution.kind)) + "/" + cell.id.process.label() + "/" +
                             std::to_string(cell.id.length);
    if (cell.failed())
      throw SummaryError("cell " + name + ": " + std::to_string(cell.failures.size()) + " of " +
                         std::to_string(cell.replications) + " replications failed");
    if (cell.estimates.size() < 2) throw SummaryError("cell " + name + ": fewer than two successful replications");
    double reference;
    if (cell.id.process.kind == ProcessKind::arfima) {
      reference = reference_hurst(cell.id, min_power, formula, summand);
    } else {
      auto it = expected_cache.find(cell.id.length);
      if (it == expected_cache.end())
        it = expected_cache.emplace(cell.id.length, expected_hurst(cell.id.length, min_power, formula, summand)).first;
      reference = it->second;
    }
    const auto stats = summarize_estimates(cell.estimates, reference);
    table.rows.push_back({cell.id, cell.estimates.size(), cell.failures.size(), reference, stats.mean, stats.bias,
                          stats.variance, stats.mse});
  }
  return table;
}

inline SummaryTable summarize(const std::vector<CellResult>& results, const ExperimentConfig& config) {
  return summarize(results, config.min_power, config.baseline, config.summand);
}

}  // namespace longmem
