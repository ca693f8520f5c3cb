// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <limits>

#include "dnnpart/error.hpp"
#include "dnnpart/graph.hpp"

namespace dnnpart {

namespace {

constexpr std::size_t kUndefined = std::numeric_limits<std::size_t>::max();

using Adjacency = std::vector<std::vector<std::size_t>>;

// Immediate dominators (Cooper, Harvey, Kennedy) of a rooted graph given as
// successor / predecessor lists. Unreachable nodes keep kUndefined.
std::vector<std::size_t> immediate_dominators(std::size_t root, const Adjacency& succ,
                                              const Adjacency& pred) {
  const std::size_t n = succ.size();
  std::vector<std::size_t> postorder;
  postorder.reserve(n);
  std::vector<bool> visited(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
  visited[root] = true;
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    if (next < succ[v].size()) {
      const std::size_t s = succ[v][next++];
      if (!visited[s]) {
        visited[s] = true;
        stack.emplace_back(s, 0);
      }
    } else {
      postorder.push_back(v);
      stack.pop_back();
    }
  }
  std::vector<std::size_t> rank(n, kUndefined);
  for (std::size_t k = 0; k < postorder.size(); ++k) rank[postorder[k]] = k;

  std::vector<std::size_t> idom(n, kUndefined);
  idom[root] = root;
  auto intersect = [&](std::size_t a, std::size_t b) {
    while (a != b) {
      while (rank[a] < rank[b]) a = idom[a];
      while (rank[b] < rank[a]) b = idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = postorder.rbegin(); it != postorder.rend(); ++it) {
      const std::size_t v = *it;
      if (v == root) continue;
      std::size_t candidate = kUndefined;
      for (std::size_t p : pred[v]) {
        if (idom[p] == kUndefined) continue;
        candidate = candidate == kUndefined ? p : intersect(p, candidate);
      }
      if (candidate != idom[v]) {
        idom[v] = candidate;
        changed = true;
      }
    }
  }
  return idom;
}

struct RegionProbe {
  std::vector<LayerIndex> members;
  bool entry_leaks = false;  // some member other than the entry has an outside producer
  bool exit_leaks = false;   // some member other than the exit has an outside consumer
};

RegionProbe probe_region(const DnnGraph& g, LayerIndex entry, LayerIndex exit) {
  const std::size_t n = g.size();
  std::vector<bool> fwd(n, false), bwd(n, false);
  std::vector<LayerIndex> stack{entry};
  fwd[entry] = true;
  while (!stack.empty()) {
    LayerIndex v = stack.back();
    stack.pop_back();
    if (v == exit) continue;
    for (LayerIndex s : g.succs(v))
      if (!fwd[s]) {
        fwd[s] = true;
        stack.push_back(s);
      }
  }
  stack.push_back(exit);
  bwd[exit] = true;
  while (!stack.empty()) {
    LayerIndex v = stack.back();
    stack.pop_back();
    if (v == entry) continue;
    for (LayerIndex p : g.preds(v))
      if (!bwd[p]) {
        bwd[p] = true;
        stack.push_back(p);
      }
  }
  RegionProbe probe;
  std::vector<bool> inside(n, false);
  for (LayerIndex v = 0; v < n; ++v)
    if (fwd[v] && bwd[v]) {
      inside[v] = true;
      probe.members.push_back(v);
    }
  for (LayerIndex v : probe.members) {
    if (v != entry)
      for (LayerIndex p : g.preds(v)) probe.entry_leaks = probe.entry_leaks || !inside[p];
    if (v != exit)
      for (LayerIndex s : g.succs(v)) probe.exit_leaks = probe.exit_leaks || !inside[s];
  }
  return probe;
}

}  // namespace

std::vector<BranchRegion> find_branch_regions(const DnnGraph& graph) {
  const std::size_t n = graph.size();
  const std::size_t vsource = n;
  const std::size_t vsink = n + 1;
  Adjacency succ(n + 2), pred(n + 2);
  for (auto [f, t] : graph.edges()) {
    succ[f].push_back(t);
    pred[t].push_back(f);
  }
  for (LayerIndex s : graph.sources()) {
    succ[vsource].push_back(s);
    pred[s].push_back(vsource);
  }
  for (LayerIndex s : graph.sinks()) {
    succ[s].push_back(vsink);
    pred[vsink].push_back(s);
  }
  const auto idom = immediate_dominators(vsource, succ, pred);
  const auto ipdom = immediate_dominators(vsink, pred, succ);

  std::vector<BranchRegion> candidates;
  for (LayerIndex fork = 0; fork < n; ++fork) {
    if (graph.succs(fork).size() < 2) continue;
    std::size_t entry = fork;
    std::size_t exit = ipdom[fork];
    for (;;) {
      if (entry >= n || exit >= n) break;
      RegionProbe probe = probe_region(graph, entry, exit);
      if (!probe.entry_leaks && !probe.exit_leaks) {
        candidates.push_back({entry, exit, std::move(probe.members)});
        break;
      }
      if (probe.entry_leaks) entry = idom[entry];
      if (probe.exit_leaks) exit = ipdom[exit];
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
    return std::tie(a.entry, a.exit) < std::tie(b.entry, b.exit);
  });
  std::vector<BranchRegion> maximal;
  for (auto& c : candidates) {
    bool nested = false;
    for (const auto& m : maximal)
      nested = nested || std::includes(m.members.begin(), m.members.end(), c.members.begin(),
                                       c.members.end());
    if (!nested) maximal.push_back(std::move(c));
  }
  std::sort(maximal.begin(), maximal.end(),
            [](const auto& a, const auto& b) { return a.entry < b.entry; });
  return maximal;
}

DnnGraph induced_subgraph(const DnnGraph& graph, std::span<const LayerIndex> members,
                          std::string name) {
  std::vector<bool> inside(graph.size(), false);
  for (LayerIndex v : members) inside[v] = true;
  std::vector<LayerNode> layers;
  for (LayerIndex v = 0; v < graph.size(); ++v)
    if (inside[v]) layers.push_back(graph.layer(v));
  std::vector<std::pair<std::string, std::string>> edges;
  for (auto [f, t] : graph.edges())
    if (inside[f] && inside[t]) edges.emplace_back(graph.layer(f).id, graph.layer(t).id);
  // Producers outside the member set no longer exist, so each member's
  // in_elems is reduced to what its remaining producers deliver; members left
  // without producers keep their full input as an external tensor.
  for (auto& layer : layers) {
    const LayerIndex v = graph.index_of(layer.id);
    std::uint64_t inner = 0;
    bool has_inner = false;
    for (LayerIndex p : graph.preds(v))
      if (inside[p]) {
        inner += graph.layer(p).out_elems;
        has_inner = true;
      }
    if (has_inner) layer.in_elems = inner;
  }
  return DnnGraph(std::move(name), std::move(layers), std::move(edges));
}

std::vector<DnnGraph> branch_subgraphs(const DnnGraph& graph) {
  std::vector<DnnGraph> out;
  for (const auto& region : find_branch_regions(graph))
    out.push_back(induced_subgraph(graph, region.members,
                                   graph.name() + "/" + graph.layer(region.entry).id));
  return out;
}

}  // namespace dnnpart
