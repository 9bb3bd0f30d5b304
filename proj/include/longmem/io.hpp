#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "longmem/distributions.hpp"
#include "longmem/error.hpp"
#include "longmem/format.hpp"
#include "longmem/harness.hpp"
#include "longmem/processes.hpp"
#include "longmem/random.hpp"

namespace longmem {

inline constexpr std::string_view kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Experiment configuration
//
// {
//   "seed": 20120101,
//   "distributions": ["normal", {"name": "gamma", "shape": 4, "scale": 0.25}],
//   "processes": ["iid", {"name": "ar1", "theta": 0.25},
//                 {"name": "arfima", "d": 0.25, "truncation": 100, "burn-in": 1000}],
//   "lengths": [512, 1024],            default 2^9..2^14
//   "replications": 1000,              default 1000
//   "methods": ["rs", "mrs"],          default both
//   "min-power": 5,                    default 5
//   "baseline": "anis-lloyd",          or "peters"
//   "summand": "conventional",         or "printed"
//   "common-random-numbers": false
// }
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

template <class T>
T get_number(const json& node, const std::string& key) {
  if (!node.is_number()) throw ParseError(key + ": expected a number");
  if constexpr (std::is_integral_v<T>) {
    if (!node.is_number_integer() && !(node.is_number_float() && node.get<double>() == std::floor(node.get<double>())))
      throw ParseError(key + ": expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (node.is_number_integer() && !node.is_number_unsigned() && node.get<std::int64_t>() < 0)
        throw ParseError(key + ": must not be negative");
      if (node.is_number_float() && node.get<double>() < 0.0) throw ParseError(key + ": must not be negative");
    }
  }
  return node.get<T>();
}

inline const json* optional_field(const json& object, const char* name) {
  auto it = object.find(name);
  return it == object.end() ? nullptr : &*it;
}

inline void reject_unknown_keys(const json& object, const std::string& where,
                                std::initializer_list<std::string_view> allowed) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    bool known = false;
    for (auto key : allowed) known = known || it.key() == key;
    if (!known) throw ParseError(where + ": unknown key \"" + it.key() + "\"");
  }
}

inline DistributionSpec parse_distribution(const json& node, const std::string& where) {
  std::string name;
  if (node.is_string()) {
    name = node.get<std::string>();
  } else if (node.is_object() && node.contains("name") && node["name"].is_string()) {
    name = node["name"].get<std::string>();
  } else {
    throw ParseError(where + ": expected a name or an object with \"name\"");
  }
  const auto kind = parse_distribution_kind(name);
  if (!kind) throw ParseError(where + ": unknown distribution \"" + name + "\" (valid: " + distribution_names() + ")");
  auto spec = DistributionSpec::make(*kind);
  if (node.is_object()) {
    switch (*kind) {
      case DistributionKind::log_t: reject_unknown_keys(node, where, {"name", "dof", "shift"}); break;
      case DistributionKind::gamma:
      case DistributionKind::inv_gamma: reject_unknown_keys(node, where, {"name", "shape", "scale", "shift"}); break;
      case DistributionKind::laplace:
      case DistributionKind::log_laplace: reject_unknown_keys(node, where, {"name", "sd", "shift"}); break;
      default: reject_unknown_keys(node, where, {"name", "shift"}); break;
    }
    if (auto* v = optional_field(node, "dof")) spec.degrees_of_freedom = get_number<double>(*v, where + ".dof");
    if (auto* v = optional_field(node, "shape")) spec.shape = get_number<double>(*v, where + ".shape");
    if (auto* v = optional_field(node, "scale")) spec.scale = get_number<double>(*v, where + ".scale");
    if (auto* v = optional_field(node, "sd")) spec.std_dev = get_number<double>(*v, where + ".sd");
    if (auto* v = optional_field(node, "shift")) spec.shift = get_number<double>(*v, where + ".shift");
  }
  try {
    spec.validate();
  } catch (const ParameterError& e) {
    throw ParseError(where + ": " + e.what());
  }
  return spec;
}

inline ProcessSpec parse_process(const json& node, const std::string& where) {
  std::string name;
  if (node.is_string()) {
    name = node.get<std::string>();
  } else if (node.is_object() && node.contains("name") && node["name"].is_string()) {
    name = node["name"].get<std::string>();
  } else {
    throw ParseError(where + ": expected a name or an object with \"name\"");
  }
  const auto kind = parse_process_kind(name);
  if (!kind) throw ParseError(where + ": unknown process \"" + name + "\" (valid: iid, ar1, arfima)");
  auto spec = ProcessSpec::make(*kind);
  if (node.is_object()) {
    switch (*kind) {
      case ProcessKind::iid: reject_unknown_keys(node, where, {"name", "burn-in"}); break;
      case ProcessKind::ar1: reject_unknown_keys(node, where, {"name", "theta", "burn-in"}); break;
      case ProcessKind::arfima: reject_unknown_keys(node, where, {"name", "d", "truncation", "burn-in"}); break;
    }
    if (auto* v = optional_field(node, "theta")) spec.ar_coefficient = get_number<double>(*v, where + ".theta");
    if (auto* v = optional_field(node, "d")) spec.d = get_number<double>(*v, where + ".d");
    if (auto* v = optional_field(node, "truncation"))
      spec.truncation = get_number<std::size_t>(*v, where + ".truncation");
    if (auto* v = optional_field(node, "burn-in")) spec.burn_in = get_number<std::size_t>(*v, where + ".burn-in");
  }
  try {
    spec.validate();
  } catch (const ParameterError& e) {
    throw ParseError(where + ": " + e.what());
  }
  return spec;
}

}  // namespace detail

inline ExperimentConfig parse_config_json(const nlohmann::json& root) {
  using detail::get_number;
  using detail::optional_field;
  if (!root.is_object()) throw ParseError("config: top level must be an object");
  detail::reject_unknown_keys(root, "config",
                              {"seed", "distributions", "processes", "lengths", "replications", "methods",
                               "min-power", "baseline", "summand", "common-random-numbers"});
  ExperimentConfig config;

  const auto* seed = optional_field(root, "seed");
  if (!seed) throw ParseError("seed: required");
  config.master_seed = get_number<std::uint64_t>(*seed, "seed");

  auto require_array = [&](const char* key) -> const nlohmann::json& {
    const auto* node = optional_field(root, key);
    if (!node) throw ParseError(std::string(key) + ": required");
    if (!node->is_array() || node->empty()) throw ParseError(std::string(key) + ": expected a non-empty array");
    return *node;
  };
  const auto& distributions = require_array("distributions");
  for (std::size_t i = 0; i < distributions.size(); ++i)
    config.distributions.push_back(
        detail::parse_distribution(distributions[i], "distributions[" + std::to_string(i) + "]"));
  const auto& processes = require_array("processes");
  for (std::size_t i = 0; i < processes.size(); ++i)
    config.processes.push_back(detail::parse_process(processes[i], "processes[" + std::to_string(i) + "]"));

  if (const auto* node = optional_field(root, "lengths")) {
    if (!node->is_array() || node->empty()) throw ParseError("lengths: expected a non-empty array");
    config.lengths.clear();
    for (const auto& item : *node) config.lengths.push_back(get_number<std::size_t>(item, "lengths"));
  }
  if (const auto* node = optional_field(root, "replications"))
    config.replications = get_number<std::size_t>(*node, "replications");
  if (const auto* node = optional_field(root, "methods")) {
    if (!node->is_array() || node->empty()) throw ParseError("methods: expected a non-empty array");
    config.methods.clear();
    for (const auto& item : *node) {
      const auto method = item.is_string() ? parse_method(item.get<std::string>()) : std::nullopt;
      if (!method) throw ParseError("methods: unknown method " + item.dump() + " (valid: rs, mrs)");
      config.methods.push_back(*method);
    }
  }
  if (const auto* node = optional_field(root, "min-power"))
    config.min_power = get_number<unsigned>(*node, "min-power");
  if (const auto* node = optional_field(root, "baseline")) {
    const auto formula = node->is_string() ? parse_baseline_formula(node->get<std::string>()) : std::nullopt;
    if (!formula) throw ParseError("baseline: expected \"anis-lloyd\" or \"peters\"");
    config.baseline = *formula;
  }
  if (const auto* node = optional_field(root, "summand")) {
    const auto summand = node->is_string() ? parse_summand(node->get<std::string>()) : std::nullopt;
    if (!summand) throw ParseError("summand: expected \"conventional\" or \"printed\"");
    config.summand = *summand;
  }
  if (const auto* node = optional_field(root, "common-random-numbers")) {
    if (!node->is_boolean()) throw ParseError("common-random-numbers: expected a boolean");
    config.common_random_numbers = node->get<bool>();
  }
  try {
    config.validate();
  } catch (const ParameterError& e) {
    throw ParseError(e.what());
  }
  return config;
}

inline ExperimentConfig parse_config_text(std::string_view text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config_json(root);
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline nlohmann::json distribution_to_json(const DistributionSpec& spec) {
  nlohmann::json node = {{"name", std::string(to_string(spec.kind))}};
  switch (spec.kind) {
    case DistributionKind::log_t: node["dof"] = spec.degrees_of_freedom; break;
    case DistributionKind::gamma:
    case DistributionKind::inv_gamma:
      node["shape"] = spec.shape;
      node["scale"] = spec.scale;
      break;
    case DistributionKind::laplace:
    case DistributionKind::log_laplace: node["sd"] = spec.std_dev; break;
    default: break;
  }
  node["shift"] = spec.shift;
  return node;
}

inline nlohmann::json process_to_json(const ProcessSpec& spec) {
  nlohmann::json node = {{"name", std::string(to_string(spec.kind))}};
  if (spec.kind == ProcessKind::ar1) node["theta"] = spec.ar_coefficient;
  if (spec.kind == ProcessKind::arfima) {
    node["d"] = spec.d;
    node["truncation"] = spec.truncation;
  }
  node["burn-in"] = spec.burn_in;
  return node;
}

/// Full echo of a configuration; parse_config_json reads it back unchanged.
/// Parameters that the kind ignores are not written, and come back as defaults.
inline nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json root;
  root["seed"] = config.master_seed;
  root["distributions"] = nlohmann::json::array();
  for (const auto& d : config.distributions) root["distributions"].push_back(distribution_to_json(d));
  root["processes"] = nlohmann::json::array();
  for (const auto& p : config.processes) root["processes"].push_back(process_to_json(p));
  root["lengths"] = config.lengths;
  root["replications"] = config.replications;
  root["methods"] = nlohmann::json::array();
  for (auto m : config.methods) root["methods"].push_back(std::string(to_string(m)));
  root["min-power"] = config.min_power;
  root["baseline"] = std::string(to_string(config.baseline));
  root["summand"] = std::string(to_string(config.summand));
  root["common-random-numbers"] = config.common_random_numbers;
  return root;
}

// ---------------------------------------------------------------------------
// Series files: one number per line, blank lines ignored, an optional
// non-numeric header on the first non-blank line.
// ---------------------------------------------------------------------------

enum class SeriesKind { levels, increments };

inline std::optional<SeriesKind> parse_series_kind(std::string_view name) noexcept {
  if (name == "levels") return SeriesKind::levels;
  if (name == "increments") return SeriesKind::increments;
  return std::nullopt;
}

namespace detail {

inline std::string_view trim(std::string_view text) noexcept {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

inline std::optional<double> parse_number(std::string_view token) noexcept {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

}  // namespace detail

inline IncrementSeries read_series(std::istream& in, SeriesKind kind, const std::string& source = "series") {
  std::vector<double> values;
  std::string line;
  std::size_t line_number = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_number;
    const auto token = detail::trim(line);
    if (token.empty()) continue;
    const bool first = !seen_content;
    seen_content = true;
    if (token.find(',') != std::string_view::npos)
      throw ParseError(source + ":" + std::to_string(line_number) + ": expected a single column");
    const auto value = detail::parse_number(token);
    if (!value) {
      if (first) continue;  // header
      throw ParseError(source + ":" + std::to_string(line_number) + ": not a number: \"" + std::string(token) + "\"");
    }
    if (!std::isfinite(*value))
      throw ParseError(source + ":" + std::to_string(line_number) + ": non-finite value");
    values.push_back(*value);
  }
  if (kind == SeriesKind::levels) {
    if (values.size() < 2) throw InputError(source + ": levels need at least 2 values");
    return increments_from_levels(values);
  }
  if (values.empty()) throw InputError(source + ": no values");
  return IncrementSeries(std::move(values));
}

inline IncrementSeries load_series(const std::filesystem::path& path, SeriesKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_series(in, kind, path.string());
}

// ---------------------------------------------------------------------------
// Outputs
// ---------------------------------------------------------------------------

struct OutputOptions {
  bool paper_format = false;    // round values to 4 decimals
  bool dump_estimates = false;  // write estimates.csv
};

struct RunMetadata {
  double wall_seconds = 0.0;
  std::size_t workers = 1;
};

inline std::string summary_csv(const SummaryTable& table, bool paper_format = false) {
  auto render = [&](double v) { return paper_format ? format_fixed(v, 4) : format_double(v); };
  std::string out = "method,distribution,process,length,statistic,value,reference\n";
  for (const auto& row : table.rows) {
    const std::string prefix = std::string(to_string(row.id.method)) + "," +
                               std::string(to_string(row.id.distribution.kind)) + "," + row.id.process.label() + "," +
                               std::to_string(row.id.length) + ",";
    const std::string reference = render(row.reference) + "\n";
    out += prefix + "bias," + render(row.bias) + "," + reference;
    out += prefix + "variance," + render(row.variance) + "," + reference;
    out += prefix + "mse," + render(row.mse) + "," + reference;
  }
  return out;
}

inline std::string estimates_csv(const std::vector<CellResult>& results) {
  std::string out = "method,distribution,process,length,replication,hurst\n";
  for (const auto& cell : results) {
    const std::string prefix = std::string(to_string(cell.id.method)) + "," +
                               std::string(to_string(cell.id.distribution.kind)) + "," + cell.id.process.label() +
                               "," + std::to_string(cell.id.length) + ",";
    for (std::size_t i = 0; i < cell.estimates.size(); ++i)
      out += prefix + std::to_string(cell.indices[i]) + "," + format_double(cell.estimates[i]) + "\n";
  }
  return out;
}

inline nlohmann::json run_json(const ExperimentConfig& config, const std::vector<CellResult>& results,
                               const RunMetadata& meta) {
  nlohmann::json root;
  root["version"] = std::string(kVersion);
  root["generator"] = std::string(kGeneratorName);
  root["config"] = config_to_json(config);
  root["wall_seconds"] = meta.wall_seconds;
  root["workers"] = meta.workers;
  nlohmann::json failures = nlohmann::json::array();
  std::size_t skipped = 0, capped = 0;
  for (const auto& cell : results) {
    skipped += cell.skipped_windows;
    capped += cell.capped_windows;
    for (const auto& f : cell.failures)
      failures.push_back({{"method", std::string(to_string(cell.id.method))},
                          {"distribution", std::string(to_string(cell.id.distribution.kind))},
                          {"process", cell.id.process.label()},
                          {"length", cell.id.length},
                          {"replication", f.replication},
                          {"reason", f.reason}});
  }
  root["failed_replications"] = failures;
  root["skipped_windows"] = skipped;
  root["capped_lag_windows"] = capped;
  return root;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw Error("error while writing " + path.string());
}

}  // namespace detail

/// Writes summary.csv, run.json and, when requested, estimates.csv into
/// `out_dir` (created if missing). Returns the paths written.
inline std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& out_dir,
                                                        const ExperimentConfig& config, const SummaryTable& table,
                                                        const std::vector<CellResult>& results,
                                                        const RunMetadata& meta, const OutputOptions& options = {}) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  written.push_back(out_dir / "summary.csv");
  detail::write_file(written.back(), summary_csv(table, options.paper_format));
  if (options.dump_estimates) {
    written.push_back(out_dir / "estimates.csv");
    detail::write_file(written.back(), estimates_csv(results));
  }
  written.push_back(out_dir / "run.json");
  detail::write_file(written.back(), run_json(config, results, meta).dump(2) + "\n");
  return written;
}

}  // namespace longmem
