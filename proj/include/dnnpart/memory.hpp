// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dnnpart/cost.hpp"
#include "dnnpart/graph.hpp"
#include "dnnpart/scheme.hpp"

namespace dnnpart {

inline constexpr std::size_t kDefaultOrderLimit = 10'000;

/// ceil(elems * bits / 8).
std::uint64_t elems_to_bytes(std::uint64_t elems, int bits);

/// Peak number of live feature-map elements while executing order[lo, hi).
///
/// Each step executes one layer. A tensor is live from its production until
/// its last consumer inside the segment has run. Tensors entering from earlier
/// layers and the external inputs of source layers are live from step 0.
/// Tensors still needed after the segment, and network outputs, stay live
/// until the segment ends. On a chain this is max(in_elems + out_elems).
std::uint64_t segment_peak_elems(const DnnGraph& graph, const LayerOrder& order, std::size_t lo,
                                 std::size_t hi);

std::uint64_t segment_param_elems(const DnnGraph& graph, const LayerOrder& order, std::size_t lo,
                                  std::size_t hi);

/// (sum of parameters + peak live elements) at `bits` per element, in bytes.
/// Throws Error unless lo <= hi <= L. An empty segment needs 0 bytes.
std::uint64_t segment_memory(const DnnGraph& graph, const LayerOrder& order, std::size_t lo,
                             std::size_t hi, int bits);

struct MemoryOrder {
  LayerOrder order;
  std::uint64_t peak_live_elems = 0;
  /// Set when the region was too large for the exact search and the greedy
  /// schedule was used instead.
  bool heuristic = false;
};

/// Schedule of `region` with the smallest peak of live elements.
///
/// The live set after a prefix depends only on which layers have run, so the
/// exact search is a shortest-bottleneck-path over downward-closed layer sets.
/// It runs when the region has at most `limit` such sets (and at most 64
/// layers); otherwise a greedy rule picks, at each step, the ready layer that
/// leaves the smallest live set (ties: smaller out_elems, then smaller id).
/// Exact ties prefer the lexicographically smallest order of layer indices.
MemoryOrder min_memory_order(const DnnGraph& region, std::size_t limit = kDefaultOrderLimit);

/// Greedy schedule only; exposed for comparison against the exact search.
MemoryOrder greedy_memory_order(const DnnGraph& region);

/// Schedule of one maximal fork/join region inside the full graph.
struct RegionSchedule {
  LayerIndex entry = 0;
  std::vector<LayerIndex> order;  // indices into the full graph
  std::uint64_t peak_live_elems = 0;
  bool heuristic = false;
};

struct ScheduledOrder {
  LayerOrder order;
  std::vector<RegionSchedule> regions;
};

/// Seeded topological order in which every maximal fork/join region runs as a
/// contiguous block in its minimum-memory internal order.
ScheduledOrder memory_aware_order(const DnnGraph& graph, std::uint64_t seed,
                                  std::size_t limit = kDefaultOrderLimit);

struct PlatformMemory {
  std::string platform;
  std::uint64_t bytes = 0;
  std::uint64_t param_elems = 0;
  std::uint64_t peak_live_elems = 0;
  std::uint64_t capacity_bytes = 0;

  bool fits() const { return bytes <= capacity_bytes; }
};

struct MemoryReport {
  std::vector<PlatformMemory> platforms;
  /// Internal order used for each fork/join region, as layer ids.
  std::vector<std::vector<std::string>> schedule_used;

  bool feasible() const;
  std::uint64_t max_bytes() const;
};

/// Memory need of every platform's segment against its capacity (inclusive).
MemoryReport memory_feasible(const DnnGraph& graph, const LayerOrder& order,
                             const PartitionScheme& scheme,
                             std::span<const PlatformModel> platforms);

}  // namespace dnnpart
