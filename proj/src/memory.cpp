// SPDX-License-Identifier: Apache-2.0
#include "dnnpart/memory.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "dnnpart/error.hpp"
#include "dnnpart/rng.hpp"

namespace dnnpart {

std::uint64_t elems_to_bytes(std::uint64_t elems, int bits) {
  const std::uint64_t total_bits = elems * static_cast<std::uint64_t>(bits);
  return total_bits / 8 + (total_bits % 8 != 0 ? 1 : 0);
}

std::uint64_t segment_peak_elems(const DnnGraph& graph, const LayerOrder& order, std::size_t lo,
                                 std::size_t hi) {
  if (lo > hi || hi > order.size())
    throw Error("invalid segment [" + std::to_string(lo) + ", " + std::to_string(hi) +
                ") for " + std::to_string(order.size()) + " layers");
  const std::size_t steps = hi - lo;
  if (steps == 0) return 0;
  const auto pos = order.positions();

  // Difference array over steps; unsigned wrap-around cancels exactly.
  std::vector<std::uint64_t> delta(steps + 1, 0);
  auto live_between = [&](std::size_t first, std::size_t last, std::uint64_t elems) {
    delta[first] += elems;
    delta[last + 1] -= elems;
  };
  // Last step at which a tensor produced by `v` is needed, or nullopt when
  // nothing at or after `lo` consumes it.
  auto last_use = [&](LayerIndex v) -> std::optional<std::size_t> {
    if (graph.succs(v).empty()) return steps - 1;
    std::optional<std::size_t> last;
    for (LayerIndex c : graph.succs(v)) {
      const std::size_t pc = pos[c];
      if (pc < lo) continue;
      const std::size_t step = pc >= hi ? steps - 1 : pc - lo;
      last = last ? std::max(*last, step) : step;
    }
    return last;
  };

  for (std::size_t k = 0; k < lo; ++k) {
    const LayerIndex u = order[k];
    if (graph.succs(u).empty()) continue;  // earlier network outputs are not resident here
    if (auto last = last_use(u)) live_between(0, *last, graph.layer(u).out_elems);
  }
  for (std::size_t step = 0; step < steps; ++step) {
    const LayerIndex v = order[lo + step];
    const LayerNode& node = graph.layer(v);
    if (graph.preds(v).empty()) live_between(0, step, node.in_elems);
    live_between(step, *last_use(v), node.out_elems);
  }

  std::uint64_t live = 0;
  std::uint64_t peak = 0;
  for (std::size_t step = 0; step < steps; ++step) {
    live += delta[step];
    peak = std::max(peak, live);
  }
  return peak;
}

std::uint64_t segment_param_elems(const DnnGraph& graph, const LayerOrder& order, std::size_t lo,
                                  std::size_t hi) {
  std::uint64_t total = 0;
  for (std::size_t k = lo; k < hi; ++k) total += graph.layer(order[k]).param_count;
  return total;
}

std::uint64_t segment_memory(const DnnGraph& graph, const LayerOrder& order, std::size_t lo,
                             std::size_t hi, int bits) {
  const std::uint64_t peak = segment_peak_elems(graph, order, lo, hi);
  return elems_to_bytes(segment_param_elems(graph, order, lo, hi) + peak, bits);
}

namespace {

using Mask = std::uint64_t;

constexpr Mask bit(std::size_t i) { return Mask{1} << i; }

// Exact minimum-peak schedule over downward-closed sets of a region with at
// most 64 layers.
class IdealSearch {
 public:
  explicit IdealSearch(const DnnGraph& g) : g_(g), n_(g.size()) {
    pred_.assign(n_, 0);
    succ_.assign(n_, 0);
    for (auto [f, t] : g.edges()) {
      pred_[t] |= bit(f);
      succ_[f] |= bit(t);
    }
    full_ = n_ == 64 ? ~Mask{0} : bit(n_) - 1;
  }

  // Counts downward-closed sets, stopping once the count exceeds `limit`.
  bool ideals_within(std::size_t limit) const {
    std::unordered_set<Mask> seen{0};
    std::vector<Mask> frontier{0};
    while (!frontier.empty()) {
      std::vector<Mask> next;
      for (Mask s : frontier)
        for (std::size_t v = 0; v < n_; ++v) {
          if ((s & bit(v)) || (pred_[v] & ~s)) continue;
          if (seen.insert(s | bit(v)).second) {
            if (seen.size() > limit) return false;
            next.push_back(s | bit(v));
          }
        }
      frontier = std::move(next);
    }
    return true;
  }

  MemoryOrder solve() {
    std::uint64_t live0 = 0;
    for (LayerIndex s : g_.sources()) live0 += g_.layer(s).in_elems;
    MemoryOrder out;
    out.peak_live_elems = best(0, live0);
    Mask state = 0;
    while (state != full_) {
      const LayerIndex v = memo_.at(state).choice;
      out.order.order.push_back(v);
      state |= bit(v);
    }
    return out;
  }

 private:
  struct Entry {
    std::uint64_t cost;
    LayerIndex choice;
  };

  std::uint64_t live_after(Mask state, std::uint64_t live, LayerIndex v) const {
    const Mask done = state | bit(v);
    live += g_.layer(v).out_elems;
    if (pred_[v] == 0) live -= g_.layer(v).in_elems;
    for (LayerIndex p : g_.preds(v))
      if ((succ_[p] & ~done) == 0) live -= g_.layer(p).out_elems;
    return live;
  }

  std::uint64_t best(Mask state, std::uint64_t live) {
    if (state == full_) return 0;
    if (auto it = memo_.find(state); it != memo_.end()) return it->second.cost;
    Entry e{std::numeric_limits<std::uint64_t>::max(), 0};
    for (LayerIndex v = 0; v < n_; ++v) {
      if ((state & bit(v)) || (pred_[v] & ~state)) continue;
      const std::uint64_t step = live + g_.layer(v).out_elems;
      const std::uint64_t cost = std::max(step, best(state | bit(v), live_after(state, live, v)));
      if (cost < e.cost) e = {cost, v};
    }
    memo_.emplace(state, e);
    return e.cost;
  }

  const DnnGraph& g_;
  std::size_t n_;
  Mask full_ = 0;
  std::vector<Mask> pred_;
  std::vector<Mask> succ_;
  std::unordered_map<Mask, Entry> memo_;
};

}  // namespace

MemoryOrder greedy_memory_order(const DnnGraph& region) {
  const std::size_t n = region.size();
  std::vector<std::size_t> waiting_preds(n), open_consumers(n);
  std::vector<LayerIndex> ready;
  std::uint64_t live = 0;
  for (LayerIndex v = 0; v < n; ++v) {
    waiting_preds[v] = region.preds(v).size();
    open_consumers[v] = region.succs(v).size();
    if (waiting_preds[v] == 0) {
      ready.push_back(v);
      live += region.layer(v).in_elems;
    }
  }
  MemoryOrder out;
  out.heuristic = true;
  while (!ready.empty()) {
    std::size_t pick = 0;
    std::uint64_t pick_live = 0;
    for (std::size_t k = 0; k < ready.size(); ++k) {
      const LayerIndex v = ready[k];
      const LayerNode& node = region.layer(v);
      std::uint64_t after = live + node.out_elems;
      if (region.preds(v).empty()) after -= node.in_elems;
      for (LayerIndex p : region.preds(v))
        if (open_consumers[p] == 1) after -= region.layer(p).out_elems;
      if (k == 0) {
        pick_live = after;
        continue;
      }
      const LayerNode& best = region.layer(ready[pick]);
      if (std::tie(after, node.out_elems, node.id) < std::tie(pick_live, best.out_elems, best.id)) {
        pick = k;
        pick_live = after;
      }
    }
    const LayerIndex v = ready[pick];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
    out.peak_live_elems = std::max(out.peak_live_elems, live + region.layer(v).out_elems);
    live = pick_live;
    for (LayerIndex p : region.preds(v)) --open_consumers[p];
    out.order.order.push_back(v);
    for (LayerIndex s : region.succs(v))
      if (--waiting_preds[s] == 0) ready.push_back(s);
  }
  return out;
}

MemoryOrder min_memory_order(const DnnGraph& region, std::size_t limit) {
  if (region.size() <= 64) {
    IdealSearch search(region);
    if (search.ideals_within(limit)) return search.solve();
  }
  return greedy_memory_order(region);
}

ScheduledOrder memory_aware_order(const DnnGraph& graph, std::uint64_t seed, std::size_t limit) {
  const std::size_t n = graph.size();
  ScheduledOrder out;
  out.order.seed = seed;

  std::vector<std::size_t> region_of(n, std::numeric_limits<std::size_t>::max());
  for (const auto& region : find_branch_regions(graph)) {
    const DnnGraph sub = induced_subgraph(graph, region.members, graph.name());
    MemoryOrder local = min_memory_order(sub, limit);
    RegionSchedule schedule;
    schedule.entry = region.entry;
    schedule.peak_live_elems = local.peak_live_elems;
    schedule.heuristic = local.heuristic;
    for (LayerIndex v : local.order.order) schedule.order.push_back(region.members[v]);
    region_of[region.entry] = out.regions.size();
    out.regions.push_back(std::move(schedule));
  }

  Rng rng(seed);
  std::vector<std::size_t> indegree(n);
  std::vector<bool> emitted(n, false), claimed(n, false);
  std::vector<LayerIndex> ready;
  for (LayerIndex v = 0; v < n; ++v) {
    indegree[v] = graph.preds(v).size();
    if (indegree[v] == 0) ready.push_back(v);
  }
  // Emits `v`; when v opens a region the rest of that region follows at once.
  // The region's exit comes last and may itself open the next region.
  auto emit = [&](auto&& self, LayerIndex v) -> void {
    emitted[v] = true;
    out.order.order.push_back(v);
    const bool opens = region_of[v] != std::numeric_limits<std::size_t>::max();
    if (opens)
      for (LayerIndex m : out.regions[region_of[v]].order) claimed[m] = true;
    for (LayerIndex s : graph.succs(v))
      if (--indegree[s] == 0 && !claimed[s] && !emitted[s]) ready.push_back(s);
    if (!opens) return;
    const auto& members = out.regions[region_of[v]].order;
    for (std::size_t k = 1; k < members.size(); ++k) self(self, members[k]);
  };
  while (!ready.empty()) {
    const std::size_t pick = ready.size() == 1 ? 0 : rng.index(ready.size());
    const LayerIndex v = ready[pick];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
    emit(emit, v);
  }
  return out;
}

bool MemoryReport::feasible() const {
  return std::all_of(platforms.begin(), platforms.end(), [](const auto& p) { return p.fits(); });
}

std::uint64_t MemoryReport::max_bytes() const {
  std::uint64_t m = 0;
  for (const auto& p : platforms) m = std::max(m, p.bytes);
  return m;
}

MemoryReport memory_feasible(const DnnGraph& graph, const LayerOrder& order,
                             const PartitionScheme& scheme,
                             std::span<const PlatformModel> platforms) {
  validate_scheme(scheme, platforms.size(), order.size());
  MemoryReport report;
  const auto labels = platform_labels(platforms);
  for (std::size_t k = 0; k < platforms.size(); ++k) {
    const std::size_t lo = scheme.segment_begin(k);
    const std::size_t hi = scheme.segment_end(k, order.size());
    PlatformMemory m;
    m.platform = labels[k];
    m.capacity_bytes = platforms[k].mem_capacity_bytes;
    m.param_elems = segment_param_elems(graph, order, lo, hi);
    m.peak_live_elems = segment_peak_elems(graph, order, lo, hi);
    m.bytes = lo == hi ? 0 : elems_to_bytes(m.param_elems + m.peak_live_elems, platforms[k].bits);
    report.platforms.push_back(std::move(m));
  }
  return report;
}

}  // namespace dnnpart
