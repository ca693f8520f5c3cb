// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dnnpart {

using LayerIndex = std::size_t;

/// One layer of the workload. Sizes are element counts; bytes are derived per
/// platform from its bit width.
struct LayerNode {
  std::string id;
  std::string op;
  std::uint64_t param_count = 0;
  std::uint64_t in_elems = 0;
  std::uint64_t out_elems = 0;

  /// Input plus output feature-map elements.
  std::uint64_t activation_elems() const { return in_elems + out_elems; }

  bool operator==(const LayerNode&) const = default;
};

/// Validated, immutable DAG of layers.
///
/// Construction checks every structural invariant: unique ids, known edge
/// endpoints, no duplicate edges or self loops, acyclicity, a single weakly
/// connected component, and that each non-source layer's in_elems equals the
/// sum of its producers' out_elems. Layers keep their declaration order; that
/// order is the canonical index used everywhere else.
class DnnGraph {
 public:
  using Edge = std::pair<LayerIndex, LayerIndex>;

  DnnGraph(std::string name, std::vector<LayerNode> layers,
           std::vector<std::pair<std::string, std::string>> edges);

  const std::string& name() const { return name_; }
  std::size_t size() const { return layers_.size(); }
  const std::vector<LayerNode>& layers() const { return layers_; }
  const LayerNode& layer(LayerIndex i) const { return layers_[i]; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Producers / consumers of a layer, ascending by index.
  std::span<const LayerIndex> preds(LayerIndex i) const { return preds_[i]; }
  std::span<const LayerIndex> succs(LayerIndex i) const { return succs_[i]; }

  const std::vector<LayerIndex>& sources() const { return sources_; }
  const std::vector<LayerIndex>& sinks() const { return sinks_; }

  std::optional<LayerIndex> find(std::string_view id) const;
  /// Throws Error for unknown ids.
  LayerIndex index_of(std::string_view id) const;

 private:
  std::string name_;
  std::vector<LayerNode> layers_;
  std::vector<Edge> edges_;
  std::vector<std::vector<LayerIndex>> preds_;
  std::vector<std::vector<LayerIndex>> succs_;
  std::vector<LayerIndex> sources_;
  std::vector<LayerIndex> sinks_;
  std::unordered_map<std::string, LayerIndex> index_;
};

/// A topologically valid permutation of layer indices.
struct LayerOrder {
  std::vector<LayerIndex> order;
  std::uint64_t seed = 0;

  std::size_t size() const { return order.size(); }
  LayerIndex operator[](std::size_t pos) const { return order[pos]; }

  /// positions()[layer] is the position of `layer` in the order.
  std::vector<std::size_t> positions() const;
  std::vector<std::string> ids(const DnnGraph& graph) const;
};

/// Parses and validates a Graph JSON document. Unknown fields are rejected.
DnnGraph parse_graph(std::string_view text);
DnnGraph load_graph(const std::filesystem::path& path);
/// Inverse of parse_graph; layers and edges keep their order.
std::string serialize_graph(const DnnGraph& graph);

/// Seeded Kahn sort: at each step one ready layer is drawn uniformly.
///
/// The ready list is kept in a canonical order (layers become ready in
/// ascending consumer order and leave by erase), so the same graph and seed
/// always give the same order.
LayerOrder topo_order(const DnnGraph& graph, std::uint64_t seed);

/// True when `order` is a permutation of the layers respecting every edge.
bool is_topological(const DnnGraph& graph, std::span<const LayerIndex> order);

/// A single-entry / single-exit fork-join region, by layer index (ascending).
struct BranchRegion {
  LayerIndex entry = 0;
  LayerIndex exit = 0;
  std::vector<LayerIndex> members;
};

/// Maximal fork/join regions, ordered by entry index. Nested forks belong to
/// the enclosing region. Forks whose paths never rejoin yield no region.
std::vector<BranchRegion> find_branch_regions(const DnnGraph& graph);

/// The graph restricted to `members` (kept in the graph's index order).
/// Members whose producers lie outside become sources.
DnnGraph induced_subgraph(const DnnGraph& graph, std::span<const LayerIndex> members,
                          std::string name);

/// find_branch_regions materialized as standalone graphs.
std::vector<DnnGraph> branch_subgraphs(const DnnGraph& graph);

/// Producers inside the first `cut` layers of `order` with at least one
/// consumer outside that prefix, listed by position in the order. Empty for
/// cut 0 and cut L. Throws Error when cut > L.
std::vector<LayerIndex> cut_tensors(const DnnGraph& graph, const LayerOrder& order,
                                    std::size_t cut);

std::vector<std::string> layer_ids(const DnnGraph& graph, std::span<const LayerIndex> layers);

}  // namespace dnnpart
