// SPDX-License-Identifier: Apache-2.0
#include "dnnpart/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "dnnpart/error.hpp"
#include "dnnpart/rng.hpp"
#include "json_util.hpp"

namespace dnnpart {

namespace {

// Returns a layer that lies on a cycle among the nodes left over by Kahn's
// algorithm. Walking producers inside the leftover set must revisit a node.
LayerIndex find_cycle_member(const std::vector<std::vector<LayerIndex>>& preds,
                             const std::vector<std::size_t>& indegree) {
  LayerIndex v = 0;
  while (indegree[v] == 0) ++v;
  std::vector<bool> seen(preds.size(), false);
  while (!seen[v]) {
    seen[v] = true;
    for (LayerIndex p : preds[v]) {
      if (indegree[p] > 0) {
        v = p;
        break;
      }
    }
  }
  return v;
}

}  // namespace

DnnGraph::DnnGraph(std::string name, std::vector<LayerNode> layers,
                   std::vector<std::pair<std::string, std::string>> edges)
    : name_(std::move(name)), layers_(std::move(layers)) {
  if (layers_.empty()) throw Error("graph \"" + name_ + "\" has no layers");

  for (LayerIndex i = 0; i < layers_.size(); ++i) {
    if (layers_[i].id.empty()) throw Error("layer #" + std::to_string(i) + " has an empty id");
    if (!index_.emplace(layers_[i].id, i).second)
      throw Error("duplicate layer id " + layers_[i].id);
  }

  const std::size_t n = layers_.size();
  preds_.resize(n);
  succs_.resize(n);
  std::set<Edge> unique;
  edges_.reserve(edges.size());
  for (const auto& [from, to] : edges) {
    auto f = find(from);
    auto t = find(to);
    if (!f) throw Error("unknown edge endpoint " + from + " in edge " + from + "->" + to);
    if (!t) throw Error("unknown edge endpoint " + to + " in edge " + from + "->" + to);
    if (*f == *t) throw Error("cycle detected at " + from + " (self edge)");
    if (!unique.emplace(*f, *t).second) throw Error("duplicate edge " + from + "->" + to);
    edges_.emplace_back(*f, *t);
    preds_[*t].push_back(*f);
    succs_[*f].push_back(*t);
  }
  for (auto& p : preds_) std::sort(p.begin(), p.end());
  for (auto& s : succs_) std::sort(s.begin(), s.end());

  // Acyclicity.
  std::vector<std::size_t> indegree(n);
  for (LayerIndex i = 0; i < n; ++i) indegree[i] = preds_[i].size();
  std::vector<LayerIndex> stack;
  for (LayerIndex i = 0; i < n; ++i)
    if (indegree[i] == 0) stack.push_back(i);
  std::size_t visited = 0;
  while (!stack.empty()) {
    LayerIndex v = stack.back();
    stack.pop_back();
    ++visited;
    for (LayerIndex s : succs_[v])
      if (--indegree[s] == 0) stack.push_back(s);
  }
  if (visited != n)
    throw Error("cycle detected at " + layers_[find_cycle_member(preds_, indegree)].id);

  // Single weakly connected component.
  std::vector<LayerIndex> parent(n);
  std::iota(parent.begin(), parent.end(), LayerIndex{0});
  auto root = [&](LayerIndex v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (auto [f, t] : edges_) parent[root(f)] = root(t);
  for (LayerIndex i = 1; i < n; ++i)
    if (root(i) != root(0))
      throw Error("disconnected component: layer " + layers_[i].id + " is not connected to " +
                  layers_[0].id);

  for (LayerIndex i = 0; i < n; ++i) {
    if (preds_[i].empty()) {
      sources_.push_back(i);
      continue;
    }
    std::uint64_t expected = 0;
    for (LayerIndex p : preds_[i]) expected += layers_[p].out_elems;
    if (expected != layers_[i].in_elems)
      throw Error("in_elems mismatch at " + layers_[i].id + " (declared " +
                  std::to_string(layers_[i].in_elems) + ", producers emit " +
                  std::to_string(expected) + ")");
  }
  for (LayerIndex i = 0; i < n; ++i)
    if (succs_[i].empty()) sinks_.push_back(i);
}

std::optional<LayerIndex> DnnGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

LayerIndex DnnGraph::index_of(std::string_view id) const {
  auto i = find(id);
  if (!i) throw Error("unknown layer " + std::string(id) + " in graph " + name_);
  return *i;
}

std::vector<std::size_t> LayerOrder::positions() const {
  std::vector<std::size_t> pos(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
  return pos;
}

std::vector<std::string> LayerOrder::ids(const DnnGraph& graph) const {
  return layer_ids(graph, order);
}

std::vector<std::string> layer_ids(const DnnGraph& graph, std::span<const LayerIndex> layers) {
  std::vector<std::string> out;
  out.reserve(layers.size());
  for (LayerIndex i : layers) out.push_back(graph.layer(i).id);
  return out;
}

DnnGraph parse_graph(std::string_view text) {
  using detail::Json;
  const Json doc = detail::parse_json(text, "graph");
  detail::require_object(doc, "graph");
  detail::reject_unknown(doc, {"name", "layers", "edges"}, "graph");

  std::string name = detail::get_string(doc, "name", "graph");
  const Json& layers_json = detail::require_key(doc, "layers", "graph");
  if (!layers_json.is_array()) throw Error("graph: \"layers\" must be an array");

  std::vector<LayerNode> layers;
  layers.reserve(layers_json.size());
  for (std::size_t i = 0; i < layers_json.size(); ++i) {
    const Json& l = layers_json[i];
    std::string ctx = "layer #" + std::to_string(i);
    detail::require_object(l, ctx);
    if (auto it = l.find("id"); it != l.end() && it->is_string()) ctx = "layer " + it->get<std::string>();
    detail::reject_unknown(l, {"id", "op", "param_count", "in_elems", "out_elems"}, ctx);
    LayerNode node;
    node.id = detail::get_string(l, "id", ctx);
    node.op = detail::get_string(l, "op", ctx);
    node.param_count = detail::get_uint(l, "param_count", ctx);
    node.in_elems = detail::get_uint(l, "in_elems", ctx);
    node.out_elems = detail::get_uint(l, "out_elems", ctx);
    layers.push_back(std::move(node));
  }

  std::vector<std::pair<std::string, std::string>> edges;
  if (auto it = doc.find("edges"); it != doc.end()) {
    if (!it->is_array()) throw Error("graph: \"edges\" must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& e = (*it)[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
        throw Error("graph: edge #" + std::to_string(i) + " must be [producer_id, consumer_id]");
      edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  } else {
    throw Error("graph: missing field \"edges\"");
  }
  return DnnGraph(std::move(name), std::move(layers), std::move(edges));
}

DnnGraph load_graph(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  try {
    return parse_graph(text);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string serialize_graph(const DnnGraph& graph) {
  using detail::Json;
  Json layers = Json::array();
  for (const auto& l : graph.layers()) {
    Json j = Json::object();
    j["id"] = l.id;
    j["op"] = l.op;
    j["param_count"] = l.param_count;
    j["in_elems"] = l.in_elems;
    j["out_elems"] = l.out_elems;
    layers.push_back(std::move(j));
  }
  Json edges = Json::array();
  for (auto [f, t] : graph.edges())
    edges.push_back(Json::array({graph.layer(f).id, graph.layer(t).id}));
  Json doc = Json::object();
  doc["name"] = graph.name();
  doc["layers"] = std::move(layers);
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

LayerOrder topo_order(const DnnGraph& graph, std::uint64_t seed) {
  const std::size_t n = graph.size();
  Rng rng(seed);
  std::vector<std::size_t> indegree(n);
  std::vector<LayerIndex> ready;
  for (LayerIndex i = 0; i < n; ++i) {
    indegree[i] = graph.preds(i).size();
    if (indegree[i] == 0) ready.push_back(i);
  }
  LayerOrder out;
  out.seed = seed;
  out.order.reserve(n);
  while (!ready.empty()) {
    const std::size_t pick = ready.size() == 1 ? 0 : rng.index(ready.size());
    const LayerIndex v = ready[pick];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
    out.order.push_back(v);
    for (LayerIndex s : graph.succs(v))
      if (--indegree[s] == 0) ready.push_back(s);
  }
  return out;
}

bool is_topological(const DnnGraph& graph, std::span<const LayerIndex> order) {
  if (order.size() != graph.size()) return false;
  std::vector<std::size_t> pos(graph.size(), graph.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] >= graph.size() || pos[order[k]] != graph.size()) return false;
    pos[order[k]] = k;
  }
  for (auto [f, t] : graph.edges())
    if (pos[f] >= pos[t]) return false;
  return true;
}

std::vector<LayerIndex> cut_tensors(const DnnGraph& graph, const LayerOrder& order,
                                    std::size_t cut) {
  if (cut > order.size())
    throw Error("cut " + std::to_string(cut) + " out of range [0, " +
                std::to_string(order.size()) + "]");
  std::vector<LayerIndex> out;
  if (cut == 0 || cut == order.size()) return out;
  const auto pos = order.positions();
  for (std::size_t k = 0; k < cut; ++k) {
    const LayerIndex v = order[k];
    for (LayerIndex s : graph.succs(v)) {
      if (pos[s] >= cut) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

}  // namespace dnnpart
