// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dnnpart/graph.hpp"
#include "dnnpart/scheme.hpp"

namespace dnnpart {

struct CostEntry {
  double latency_s = 0.0;
  double energy_j = 0.0;

  bool operator==(const CostEntry&) const = default;
};

/// One accelerator: quantization width, on-chip memory, and per-layer costs.
struct PlatformModel {
  std::string name;
  int bits = 16;
  /// Zero is accepted and makes every non-empty segment infeasible.
  std::uint64_t mem_capacity_bytes = 0;
  std::unordered_map<std::string, CostEntry> cost_table;
  std::optional<CostEntry> default_cost;

  /// Throws Error for unsupported widths or negative / non-finite costs.
  void validate() const;
};

/// Affine transport model between two neighbouring platforms.
struct LinkModel {
  std::string name;
  double bandwidth_bps = 1e9;
  double fixed_latency_s = 0.0;
  double energy_per_bit_j = 0.0;
  double fixed_energy_j = 0.0;

  void validate() const;
};

/// Top-1 accuracy per scheme, measured offline and supplied as data.
struct AccuracyModel {
  enum class Kind { constant, cut_table };

  /// Table key for a boundary with no layer before it (everything runs on
  /// the later platform).
  static constexpr std::string_view kNoLayerKey = "<input>";

  Kind kind = Kind::constant;
  double constant_top1 = 1.0;
  std::map<std::string, double, std::less<>> table;
  std::optional<double> fallback;

  void validate() const;
};

/// Display labels along a chain: the platform name, suffixed with "_<k>"
/// when names repeat.
std::vector<std::string> platform_labels(std::span<const PlatformModel> platforms);

PlatformModel parse_platform(std::string_view text);
LinkModel parse_link(std::string_view text);
AccuracyModel parse_accuracy(std::string_view text);

PlatformModel load_platform(const std::filesystem::path& path);
LinkModel load_link(const std::filesystem::path& path);
AccuracyModel load_accuracy(const std::filesystem::path& path);

/// Table entry for the layer, else the platform default.
/// Throws Error("uncosted layer <id> on <platform>") when neither exists.
CostEntry layer_cost(const PlatformModel& platform, std::string_view layer_id);

/// latency = fixed + bits / bandwidth, energy = fixed + bits * energy_per_bit.
CostEntry link_transfer(const LinkModel& link, std::uint64_t bits);

/// Accuracy of a scheme.
///
/// The cut_table kind is keyed by the last layer executed before the relevant
/// boundary: the single cut for two platforms; for longer chains the first
/// boundary after which the bit width drops below the chain's maximum. A chain
/// with uniform widths uses the fallback, or the entry of the final layer when
/// no fallback is declared. Throws Error for an uncovered key without fallback.
double accuracy_eval(const AccuracyModel& model, const PartitionScheme& scheme,
                     const LayerOrder& order, const DnnGraph& graph,
                     std::span<const PlatformModel> platforms);

}  // namespace dnnpart
