#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aanimpute/data.hpp"
#include "aanimpute/errors.hpp"
#include "aanimpute/forest.hpp"
#include "aanimpute/metrics.hpp"
#include "aanimpute/network.hpp"
#include "aanimpute/optimizers.hpp"
#include "aanimpute/parallel.hpp"
#include "aanimpute/text.hpp"

namespace aanimpute {

enum class TaskKind { prediction, classification };

inline std::string_view to_string(TaskKind k) { return k == TaskKind::prediction ? "prediction" : "classification"; }

/// Methods in the order the comparison tables list them.
inline const std::vector<std::string>& all_methods() {
  static const std::vector<std::string> methods{"ga", "sa", "pso", "rf", "ns"};
  return methods;
}

struct ExperimentConfig {
  std::string dataset_path;
  bool header = true;
  std::vector<std::string> column_names;  // optional override
  std::vector<ColumnKind> column_kinds;   // optional; numeric when empty
  std::string missing_column;             // 0-based index or column name
  TaskKind task_kind = TaskKind::prediction;
  std::optional<std::size_t> hidden_size;  // empty: search 2..n-1
  std::vector<std::string> methods = all_methods();
  NormalizationScope normalization = NormalizationScope::full;
  TTestKind comparison_test = TTestKind::welch;
  TrainConfig train;
  OptimizerSettings optimizers;
  ForestConfig forest;
  std::uint64_t master_seed = 1;
  std::string output_dir = "report";
  std::size_t threads = default_thread_count();

  std::vector<ColumnHint> column_hints() const {
    const std::size_t n = std::max(column_names.size(), column_kinds.size());
    std::vector<ColumnHint> hints(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (i < column_names.size()) hints[i].name = column_names[i];
      if (i < column_kinds.size()) hints[i].kind = column_kinds[i];
    }
    return hints;
  }

  bool uses(std::string_view method) const {
    return std::find(methods.begin(), methods.end(), method) != methods.end();
  }
};

namespace detail {

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto v = trim(value);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "'");
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view value) {
  const auto v = trim(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected true/false");
}

inline std::vector<std::string> parse_list(std::string_view value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  for (auto f : split_fields(value, ',')) out.emplace_back(trim(f));
  return out;
}

inline std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + items[i];
  return s;
}

template <class T>
std::string optional_text(const std::optional<T>& v) {
  if (!v) return "auto";
  if constexpr (std::is_floating_point_v<T>)
    return format_double(*v);
  else
    return std::to_string(*v);
}

}  // namespace detail

/// Applies one key = value assignment. Unknown keys are errors.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_number;
  auto& ga = cfg.optimizers.ga;
  auto& sa = cfg.optimizers.sa;
  auto& pso = cfg.optimizers.pso;
  auto& ns = cfg.optimizers.ns;
  const auto v = std::string(trim(value));

  if (key == "dataset") cfg.dataset_path = v;
  else if (key == "header") cfg.header = detail::parse_bool(key, v);
  else if (key == "columns.names") cfg.column_names = detail::parse_list(v);
  else if (key == "columns.kinds") {
    cfg.column_kinds.clear();
    for (const auto& k : detail::parse_list(v)) {
      try {
        cfg.column_kinds.push_back(parse_column_kind(k));
      } catch (const DomainError& e) {
        throw ConfigError("config key 'columns.kinds': " + std::string(e.what()));
      }
    }
  } else if (key == "missing_column") cfg.missing_column = v;
  else if (key == "task") {
    if (v == "prediction") cfg.task_kind = TaskKind::prediction;
    else if (v == "classification") cfg.task_kind = TaskKind::classification;
    else throw ConfigError("config key 'task': expected prediction or classification");
  } else if (key == "hidden_size") {
    cfg.hidden_size = v == "auto" ? std::nullopt : std::optional(parse_number<std::size_t>(key, v));
  } else if (key == "methods") {
    cfg.methods.clear();
    for (const auto& m : detail::parse_list(v)) {
      if (std::find(all_methods().begin(), all_methods().end(), m) == all_methods().end())
        throw ConfigError("config key 'methods': unknown method '" + m + "'");
      if (!cfg.uses(m)) cfg.methods.push_back(m);
    }
    // canonical order keeps reports independent of how the list was written
    std::vector<std::string> ordered;
    for (const auto& m : all_methods())
      if (cfg.uses(m)) ordered.push_back(m);
    cfg.methods = ordered;
  } else if (key == "normalization") {
    if (v == "full") cfg.normalization = NormalizationScope::full;
    else if (v == "train") cfg.normalization = NormalizationScope::train;
    else throw ConfigError("config key 'normalization': expected full or train");
  } else if (key == "comparison.test") {
    if (v == "welch") cfg.comparison_test = TTestKind::welch;
    else if (v == "pooled") cfg.comparison_test = TTestKind::pooled;
    else throw ConfigError("config key 'comparison.test': expected welch or pooled");
  } else if (key == "master_seed") cfg.master_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "output_dir") cfg.output_dir = v;
  else if (key == "threads") cfg.threads = std::max<std::size_t>(1, parse_number<std::size_t>(key, v));
  else if (key == "train.max_iterations") cfg.train.max_iterations = parse_number<std::size_t>(key, v);
  else if (key == "train.gradient_tolerance") cfg.train.gradient_tolerance = parse_number<double>(key, v);
  else if (key == "train.objective_tolerance") cfg.train.objective_tolerance = parse_number<double>(key, v);
  else if (key == "ga.population") ga.population = parse_number<std::size_t>(key, v);
  else if (key == "ga.bits_per_variable") ga.bits_per_variable = parse_number<std::size_t>(key, v);
  else if (key == "ga.crossover_prob") ga.crossover_prob = parse_number<double>(key, v);
  else if (key == "ga.mutation_prob") ga.mutation_prob = v == "auto" ? std::nullopt : std::optional(parse_number<double>(key, v));
  else if (key == "ga.tournament_size") ga.tournament_size = parse_number<std::size_t>(key, v);
  else if (key == "ga.elitism") ga.elitism = parse_number<std::size_t>(key, v);
  else if (key == "ga.generations") ga.generations = parse_number<std::size_t>(key, v);
  else if (key == "sa.initial_temperature")
    sa.initial_temperature = v == "auto" ? std::nullopt : std::optional(parse_number<double>(key, v));
  else if (key == "sa.cooling_factor") sa.cooling_factor = parse_number<double>(key, v);
  else if (key == "sa.temperature_steps") sa.temperature_steps = parse_number<std::size_t>(key, v);
  else if (key == "sa.moves_per_step") sa.moves_per_step = parse_number<std::size_t>(key, v);
  else if (key == "sa.neighbor_sigma") sa.neighbor_sigma = parse_number<double>(key, v);
  else if (key == "pso.swarm") pso.swarm = parse_number<std::size_t>(key, v);
  else if (key == "pso.phi1") pso.phi1 = parse_number<double>(key, v);
  else if (key == "pso.phi2") pso.phi2 = parse_number<double>(key, v);
  else if (key == "pso.v_max") pso.v_max = parse_number<double>(key, v);
  else if (key == "pso.iterations") pso.iterations = parse_number<std::size_t>(key, v);
  else if (key == "ns.detectors") ns.detectors = parse_number<std::size_t>(key, v);
  else if (key == "ns.generations") ns.generations = parse_number<std::size_t>(key, v);
  else if (key == "rf.n_trees") cfg.forest.n_trees = parse_number<std::size_t>(key, v);
  else if (key == "rf.mtry") cfg.forest.mtry = v == "auto" ? std::nullopt : std::optional(parse_number<std::size_t>(key, v));
  else if (key == "rf.min_leaf") cfg.forest.min_leaf = parse_number<std::size_t>(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

/// Checks everything that can be checked before the dataset is read.
inline void validate(const ExperimentConfig& cfg) {
  if (cfg.dataset_path.empty()) throw ConfigError("config: 'dataset' is required");
  if (cfg.missing_column.empty()) throw ConfigError("config: 'missing_column' is required");
  if (cfg.methods.empty()) throw ConfigError("config: 'methods' must name at least one method");
  if (!cfg.column_names.empty() && !cfg.column_kinds.empty() && cfg.column_names.size() != cfg.column_kinds.size())
    throw ConfigError("config: columns.names and columns.kinds differ in length");
  try {
    cfg.train.validate();
    cfg.optimizers.ga.validate();
    cfg.optimizers.sa.validate();
    cfg.optimizers.pso.validate();
    cfg.optimizers.ns.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cfg.forest.n_trees < 1 || cfg.forest.min_leaf < 1) throw ConfigError("config: rf.n_trees and rf.min_leaf must be >= 1");
}

/// Parses "key = value" lines; '#' starts a comment. A relative dataset path
/// is resolved against `base_dir`.
inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(t.substr(0, eq)));
    if (!seen.insert(key).second) throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    try {
      apply_setting(cfg, key, std::string(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!cfg.dataset_path.empty() && !base_dir.empty()) {
    const std::filesystem::path p(cfg.dataset_path);
    if (p.is_relative()) cfg.dataset_path = (base_dir / p).lexically_normal().string();
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  const auto base = std::filesystem::absolute(std::filesystem::path(path)).parent_path();
  return parse_config(in, base);
}

/// Every result-affecting setting, defaults resolved, as key/value text.
/// Execution details (output directory, thread count) are left out so the
/// echo is identical across runs that must produce identical results.
inline std::vector<std::pair<std::string, std::string>> resolved_settings(const ExperimentConfig& cfg,
                                                                          std::size_t unknown_count = 1,
                                                                          std::optional<std::size_t> predictors = {}) {
  const auto& ga = cfg.optimizers.ga;
  const auto& sa = cfg.optimizers.sa;
  const auto& pso = cfg.optimizers.pso;
  const auto& ns = cfg.optimizers.ns;
  std::vector<std::string> kinds;
  for (auto k : cfg.column_kinds) kinds.emplace_back(to_string(k));
  return {
      {"dataset", cfg.dataset_path},
      {"header", cfg.header ? "true" : "false"},
      {"columns.names", detail::join(cfg.column_names)},
      {"columns.kinds", detail::join(kinds)},
      {"missing_column", cfg.missing_column},
      {"task", std::string(to_string(cfg.task_kind))},
      {"hidden_size", detail::optional_text(cfg.hidden_size)},
      {"methods", detail::join(cfg.methods)},
      {"normalization", cfg.normalization == NormalizationScope::full ? "full" : "train"},
      {"comparison.test", cfg.comparison_test == TTestKind::welch ? "welch" : "pooled"},
      {"master_seed", std::to_string(cfg.master_seed)},
      {"train.max_iterations", std::to_string(cfg.train.max_iterations)},
      {"train.gradient_tolerance", format_double(cfg.train.gradient_tolerance)},
      {"train.objective_tolerance", format_double(cfg.train.objective_tolerance)},
      {"ga.population", std::to_string(ga.population)},
      {"ga.bits_per_variable", std::to_string(ga.bits_per_variable)},
      {"ga.crossover_prob", format_double(ga.crossover_prob)},
      {"ga.mutation_prob", format_double(ga.mutation_for(unknown_count))},
      {"ga.tournament_size", std::to_string(ga.tournament_size)},
      {"ga.elitism", std::to_string(ga.elitism)},
      {"ga.generations", std::to_string(ga.generations)},
      {"sa.initial_temperature", detail::optional_text(sa.initial_temperature)},
      {"sa.cooling_factor", format_double(sa.cooling_factor)},
      {"sa.temperature_steps", std::to_string(sa.temperature_steps)},
      {"sa.moves_per_step", std::to_string(sa.moves_per_step)},
      {"sa.neighbor_sigma", format_double(sa.neighbor_sigma)},
      {"pso.swarm", std::to_string(pso.swarm)},
      {"pso.phi1", format_double(pso.phi1)},
      {"pso.phi2", format_double(pso.phi2)},
      {"pso.v_max", format_double(pso.v_max)},
      {"pso.iterations", std::to_string(pso.iterations)},
      {"ns.detectors", std::to_string(ns.detectors)},
      {"ns.generations", std::to_string(ns.generations)},
      {"rf.n_trees", std::to_string(cfg.forest.n_trees)},
      {"rf.mtry", predictors ? std::to_string(cfg.forest.mtry_for(*predictors)) : detail::optional_text(cfg.forest.mtry)},
      {"rf.min_leaf", std::to_string(cfg.forest.min_leaf)},
  };
}

}  // namespace aanimpute
