// SPDX-License-Identifier: Apache-2.0
//
// Builders for synthetic graphs and systems, plus reference implementations
// used as oracles. The oracles deliberately avoid the library's algorithms.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dnnpart/evaluator.hpp"
#include "dnnpart/graph.hpp"
#include "dnnpart/rng.hpp"

namespace dnnpart::testing {

struct Sizes {
  std::uint64_t params;
  std::uint64_t in;
  std::uint64_t out;
};

inline std::string layer_name(std::size_t i) { return "l" + std::to_string(i); }

/// Chain l0 -> l1 -> ...; in_elems of non-sources are taken from the producer.
inline DnnGraph chain(const std::vector<Sizes>& sizes, std::string name = "chain") {
  std::vector<LayerNode> layers;
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::uint64_t in = i == 0 ? sizes[i].in : sizes[i - 1].out;
    layers.push_back({layer_name(i), "Op", sizes[i].params, in, sizes[i].out});
    if (i > 0) edges.emplace_back(layer_name(i - 1), layer_name(i));
  }
  return DnnGraph(std::move(name), std::move(layers), std::move(edges));
}

/// Graph from index edges; in_elems of non-sources are the sum of producer
/// outputs, sources get `source_in`.
inline DnnGraph graph_from(const std::vector<std::uint64_t>& params,
                           const std::vector<std::uint64_t>& outs,
                           const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                           std::uint64_t source_in = 8, std::string name = "g") {
  const std::size_t n = outs.size();
  std::vector<std::uint64_t> in(n, 0);
  std::vector<bool> has_pred(n, false);
  for (auto [f, t] : edges) {
    in[t] += outs[f];
    has_pred[t] = true;
  }
  std::vector<LayerNode> layers;
  for (std::size_t i = 0; i < n; ++i)
    layers.push_back({layer_name(i), "Op", params[i], has_pred[i] ? in[i] : source_in, outs[i]});
  std::vector<std::pair<std::string, std::string>> named;
  for (auto [f, t] : edges) named.emplace_back(layer_name(f), layer_name(t));
  return DnnGraph(std::move(name), std::move(layers), std::move(named));
}

inline std::vector<Sizes> random_chain_sizes(Rng& rng, std::size_t n) {
  std::vector<Sizes> s;
  for (std::size_t i = 0; i < n; ++i)
    s.push_back({rng.between(0, 5000), rng.between(1, 4000), rng.between(1, 4000)});
  return s;
}

/// Connected DAG: every layer after the first has a producer among earlier
/// layers, extra forward edges appear with probability `p`.
inline DnnGraph random_dag(Rng& rng, std::size_t n, double p) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t j = 1; j < n; ++j) {
    const std::size_t first = rng.index(j);
    for (std::size_t i = 0; i < j; ++i)
      if (i == first || rng.chance(p)) edges.emplace_back(i, j);
  }
  std::vector<std::uint64_t> params(n), outs(n);
  for (std::size_t i = 0; i < n; ++i) {
    params[i] = rng.between(0, 1000);
    outs[i] = rng.between(1, 500);
  }
  return graph_from(params, outs, edges, rng.between(1, 500));
}

/// Single-entry single-exit region with `n` >= 4 layers: entry l0, exit
/// l(n-1), a random DAG in between and at least two paths leaving the entry.
inline DnnGraph random_region(Rng& rng, std::size_t n, double p) {
  const std::size_t inner = n - 2;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<bool> has_pred(n, false), has_succ(n, false);
  auto add = [&](std::size_t f, std::size_t t) {
    edges.emplace_back(f, t);
    has_pred[t] = true;
    has_succ[f] = true;
  };
  for (std::size_t j = 1; j <= inner; ++j)
    for (std::size_t i = 1; i < j; ++i)
      if (rng.chance(p)) add(i, j);
  std::size_t fan_out = 0;
  for (std::size_t j = 1; j <= inner; ++j)
    if (!has_pred[j]) {
      add(0, j);
      ++fan_out;
    }
  if (fan_out < 2) {
    for (std::size_t j = 1; j <= inner && fan_out < 2; ++j)
      if (std::find(edges.begin(), edges.end(), std::pair<std::size_t, std::size_t>{0, j}) ==
          edges.end()) {
        add(0, j);
        ++fan_out;
      }
  }
  for (std::size_t i = 1; i <= inner; ++i)
    if (!has_succ[i]) add(i, n - 1);
  std::sort(edges.begin(), edges.end());
  std::vector<std::uint64_t> params(n), outs(n);
  for (std::size_t i = 0; i < n; ++i) {
    params[i] = rng.between(0, 100);
    outs[i] = rng.between(1, 200);
  }
  return graph_from(params, outs, edges, rng.between(1, 200), "region");
}

/// Calls visit(order) for every topological order of `g`.
inline void for_each_topological_order(const DnnGraph& g,
                                       const std::function<void(const std::vector<std::size_t>&)>& visit) {
  const std::size_t n = g.size();
  std::vector<std::size_t> missing(n);
  for (std::size_t v = 0; v < n; ++v) missing[v] = g.preds(v).size();
  std::vector<bool> done(n, false);
  std::vector<std::size_t> prefix;
  std::function<void()> rec = [&] {
    if (prefix.size() == n) {
      visit(prefix);
      return;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v] || missing[v] != 0) continue;
      done[v] = true;
      prefix.push_back(v);
      for (std::size_t s : g.succs(v)) --missing[s];
      rec();
      for (std::size_t s : g.succs(v)) ++missing[s];
      prefix.pop_back();
      done[v] = false;
    }
  };
  rec();
}

/// Peak live elements of a whole-graph schedule, step by step: at step t the
/// not-yet-run sources hold their inputs, and every produced tensor stays
/// until its last consumer has run (network outputs stay to the end).
inline std::uint64_t simulate_peak(const DnnGraph& g, const std::vector<std::size_t>& order) {
  const std::size_t n = g.size();
  std::vector<std::size_t> pos(n);
  for (std::size_t t = 0; t < n; ++t) pos[order[t]] = t;
  std::uint64_t peak = 0;
  for (std::size_t t = 0; t < n; ++t) {
    std::uint64_t live = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (g.preds(v).empty() && pos[v] >= t) live += g.layer(v).in_elems;
      if (pos[v] > t) continue;
      bool needed = g.succs(v).empty();
      for (std::size_t c : g.succs(v)) needed = needed || pos[c] >= t;
      if (needed) live += g.layer(v).out_elems;
    }
    peak = std::max(peak, live);
  }
  return peak;
}

inline std::uint64_t brute_force_min_peak(const DnnGraph& g, std::size_t* orders = nullptr) {
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  std::size_t count = 0;
  for_each_topological_order(g, [&](const std::vector<std::size_t>& order) {
    best = std::min(best, simulate_peak(g, order));
    ++count;
  });
  if (orders) *orders = count;
  return best;
}

/// Pairwise domination with every objective minimized.
inline bool dominated_by(const std::vector<double>& a, const std::vector<double>& b) {
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] > a[i]) return false;
    if (b[i] < a[i]) strictly = true;
  }
  return strictly;
}

/// Objective values with benefit metrics negated, computed from the record's
/// plain fields.
inline std::vector<double> oriented(const EvaluationRecord& r, const std::vector<Metric>& objectives) {
  std::vector<double> v;
  for (Metric m : objectives) {
    switch (m) {
      case Metric::latency: v.push_back(r.latency_s); break;
      case Metric::energy: v.push_back(r.energy_j); break;
      case Metric::throughput: v.push_back(-r.throughput_fps); break;
      case Metric::bandwidth: v.push_back(static_cast<double>(r.link_bits_total)); break;
      case Metric::accuracy: v.push_back(-r.top1); break;
      case Metric::memory: {
        std::uint64_t m_max = 0;
        for (const auto& p : r.memory.platforms) m_max = std::max(m_max, p.bytes);
        v.push_back(static_cast<double>(m_max));
        break;
      }
    }
  }
  return v;
}

/// Cut vectors of the feasible records no other feasible record dominates.
inline std::set<std::vector<std::size_t>> pareto_cuts(const std::vector<EvaluationRecord>& records,
                                                      const std::vector<Metric>& objectives) {
  std::set<std::vector<std::size_t>> out;
  for (const auto& a : records) {
    if (!a.feasible) continue;
    bool beaten = false;
    for (const auto& b : records)
      if (b.feasible && dominated_by(oriented(a, objectives), oriented(b, objectives))) beaten = true;
    if (!beaten) out.insert(a.scheme.cuts);
  }
  return out;
}

/// All monotone cut vectors of length k over [0, L], by nested recursion.
inline std::vector<std::vector<std::size_t>> all_cut_vectors(std::size_t L, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t lo) {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t c = lo; c <= L; ++c) {
      cur.push_back(c);
      rec(c);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

inline PlatformModel uniform_platform(std::string name, int bits, std::uint64_t capacity,
                                      double latency_s, double energy_j) {
  PlatformModel p;
  p.name = std::move(name);
  p.bits = bits;
  p.mem_capacity_bytes = capacity;
  p.default_cost = CostEntry{latency_s, energy_j};
  return p;
}

inline LinkModel simple_link(double bandwidth_bps, double fixed_latency_s = 0.0,
                             double energy_per_bit_j = 0.0, double fixed_energy_j = 0.0) {
  LinkModel l;
  l.name = "link";
  l.bandwidth_bps = bandwidth_bps;
  l.fixed_latency_s = fixed_latency_s;
  l.energy_per_bit_j = energy_per_bit_j;
  l.fixed_energy_j = fixed_energy_j;
  return l;
}

inline SystemSpec make_system(DnnGraph graph, std::vector<PlatformModel> platforms,
                              std::vector<LinkModel> links, Constraints constraints = {},
                              std::uint64_t seed = 0) {
  LayerOrder order = topo_order(graph, seed);
  SystemSpec sys{std::move(graph), std::move(order), std::move(platforms), std::move(links),
                 AccuracyModel{},  constraints,      ObjectiveWeights{{{Metric::latency, 1.0}}, {}},
                 {}};
  sys.validate();
  return sys;
}

/// Random chain or DAG system with per-layer cost tables on every platform.
inline SystemSpec random_system(Rng& rng, std::size_t L, std::size_t N) {
  DnnGraph graph = rng.chance(0.5) ? chain(random_chain_sizes(rng, L)) : random_dag(rng, L, 0.25);
  static constexpr int kBits[] = {4, 8, 16, 32};
  std::vector<PlatformModel> platforms;
  for (std::size_t k = 0; k < N; ++k) {
    PlatformModel p;
    p.name = "P" + std::to_string(k);
    p.bits = kBits[rng.index(4)];
    p.mem_capacity_bytes = std::numeric_limits<std::uint32_t>::max();
    for (const auto& layer : graph.layers())
      p.cost_table[layer.id] = {1e-3 * (0.1 + rng.unit()), 1e-3 * (0.1 + rng.unit())};
    platforms.push_back(std::move(p));
  }
  std::vector<LinkModel> links;
  for (std::size_t k = 0; k + 1 < N; ++k)
    links.push_back(simple_link(1e6 * (1.0 + 99.0 * rng.unit()), 1e-5 * rng.unit(),
                                1e-9 * rng.unit(), 1e-6 * rng.unit()));
  return make_system(std::move(graph), std::move(platforms), std::move(links), {}, rng.next());
}

}  // namespace dnnpart::testing
