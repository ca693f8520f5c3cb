// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dnnpart/evaluator.hpp"
#include "dnnpart/optimizer.hpp"

namespace dnnpart {

enum class RunMode { explore, exhaustive, evaluate_one };
enum class OrderMode { memory, random };

RunMode parse_run_mode(std::string_view text);
OrderMode parse_order_mode(std::string_view text);

struct RunConfig {
  std::filesystem::path graph_path;
  std::vector<std::filesystem::path> platform_paths;
  std::vector<std::filesystem::path> link_paths;
  std::optional<std::filesystem::path> accuracy_path;
  /// Constraints / weights / references document.
  std::optional<std::filesystem::path> constraints_path;
  /// Inline "metric:coef,..." weights; override the document's weights.
  std::optional<std::string> weights;
  std::optional<std::vector<Metric>> objectives;
  std::optional<std::size_t> population;
  std::optional<std::size_t> generations;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  RunMode mode = RunMode::explore;
  OrderMode order = OrderMode::memory;
  /// Cut list for evaluate-one, e.g. "3" or "2,5".
  std::string cuts;
  std::size_t threads = 1;
};

/// Process exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInfeasible = 2;

/// Parses "latency:1,energy:0.5".
std::vector<std::pair<Metric, double>> parse_weight_list(std::string_view text);

/// Constraints / weights document:
/// {"constraints":{...}, "weights":{"latency":1,...}, "references":"auto"|{...}}
struct ObjectiveSettings {
  Constraints constraints;
  ObjectiveWeights weights;
};
ObjectiveSettings parse_objective_settings(std::string_view text);

/// Loads and validates every input named by the config, and fixes the layer
/// order. Throws Error with the offending path on any problem.
SystemSpec load_system(const RunConfig& config);

/// Objectives used for the Pareto search when none are configured.
std::vector<Metric> default_objectives();

/// Runs the configured mode. explore / exhaustive write evaluations.csv,
/// pareto.csv, selected.json, memory_profile.csv and run_manifest.json into
/// output_dir; evaluate-one prints the record as JSON to `out`. Errors go to
/// `err`. Returns kExitOk, kExitInputError or kExitInfeasible.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace dnnpart
