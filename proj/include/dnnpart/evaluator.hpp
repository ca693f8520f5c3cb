// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dnnpart/cost.hpp"
#include "dnnpart/graph.hpp"
#include "dnnpart/memory.hpp"
#include "dnnpart/scheme.hpp"

namespace dnnpart {

enum class Metric { latency, energy, throughput, bandwidth, accuracy, memory };

inline constexpr Metric kAllMetrics[] = {Metric::latency,   Metric::energy,   Metric::throughput,
                                         Metric::bandwidth, Metric::accuracy, Metric::memory};

std::string_view metric_name(Metric m);
/// Throws Error for unknown names.
Metric parse_metric(std::string_view name);
/// Comma separated metric names, e.g. "latency,energy".
std::vector<Metric> parse_metric_list(std::string_view text);
/// Throughput and accuracy are maximized; every other metric is minimized.
bool is_benefit(Metric m);

/// Optional bounds, compared inclusively. Memory capacities live with the
/// platforms.
struct Constraints {
  std::optional<double> max_latency_s;
  std::optional<double> max_energy_j;
  std::optional<double> min_throughput_fps;
  /// Applies to every single link.
  std::optional<double> max_link_bits;
  std::optional<double> min_top1;

  void validate() const;
};

/// Coefficients of the weighted-sum objective and the per-metric references
/// used to make them unit free.
struct ObjectiveWeights {
  std::vector<std::pair<Metric, double>> entries;
  /// Explicit references. Metrics without one use the automatic reference.
  std::map<Metric, double> references;

  void validate() const;
};

/// Everything needed to evaluate a scheme. Immutable once built.
struct SystemSpec {
  DnnGraph graph;
  LayerOrder order;
  std::vector<PlatformModel> platforms;
  std::vector<LinkModel> links;
  AccuracyModel accuracy;
  Constraints constraints;
  ObjectiveWeights weights;
  std::vector<RegionSchedule> region_schedules;

  std::size_t layer_count() const { return graph.size(); }
  std::size_t platform_count() const { return platforms.size(); }
  /// Throws Error when the pieces do not fit together.
  void validate() const;
};

struct StageUsage {
  std::size_t layers = 0;
  double latency_s = 0.0;
  double energy_j = 0.0;
};

struct LinkUsage {
  std::uint64_t bits = 0;
  double latency_s = 0.0;
  double energy_j = 0.0;
};

struct EvaluationRecord {
  PartitionScheme scheme;
  std::size_t partition_count = 0;
  double latency_s = 0.0;
  double energy_j = 0.0;
  /// +infinity when every stage and link takes zero time.
  double throughput_fps = 0.0;
  std::vector<StageUsage> stages;
  std::vector<LinkUsage> links;
  std::uint64_t link_bits_total = 0;
  MemoryReport memory;
  double top1 = 1.0;
  bool feasible = true;
  std::vector<std::string> violated;
  /// Sum of relative constraint excesses; 0 when feasible.
  double violation = 0.0;

  /// The raw metric value (bandwidth = total link bits, memory = the largest
  /// per-platform need).
  double metric(Metric m) const;
  std::uint64_t max_link_bits() const;
};

/// 1 / max(latencies), ignoring zero entries; +infinity when all are zero.
double throughput(std::span<const double> stage_latencies, std::span<const double> link_latencies);

struct ConstraintCheck {
  bool feasible = true;
  std::vector<std::string> violated;
  double violation = 0.0;
};

ConstraintCheck check_constraints(const EvaluationRecord& rec, const Constraints& constraints);

/// Full evaluation of one scheme.
///
/// A link carries every tensor crossing its cut, at the sender's bit width.
/// A cut equal to the previous one (the platform in between is skipped) adds
/// no traffic: the tensors are charged once, on the first link of the run.
/// Links with zero payload cost nothing.
EvaluationRecord evaluate_scheme(const PartitionScheme& scheme, const SystemSpec& sys);

/// The all-on-last-platform scheme.
PartitionScheme last_platform_scheme(std::size_t platform_count);

/// Fills every missing reference in `weights` from the all-on-last-platform
/// record. Zero or non-finite references become 1.
ObjectiveWeights resolve_references(ObjectiveWeights weights, const SystemSpec& sys);

/// Sum of c_i * normalized metric, lower is better. Cost metrics are divided
/// by their reference, benefit metrics invert it. Missing references count as
/// 1. Throws Error("degenerate benefit metric ...") for a zero benefit metric
/// with a nonzero weight.
double weighted_cost(const EvaluationRecord& rec, const ObjectiveWeights& weights);

}  // namespace dnnpart
