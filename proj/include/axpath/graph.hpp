// Copyright 2026 The axpath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "axpath/error.hpp"
#include "axpath/matrix.hpp"

namespace axpath {

using NodeId = std::uint32_t;

/// Undirected edge stored canonically (u < v).
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge canonical(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Edges added between two snapshots. Node set is fixed.
struct EdgeDelta {
  std::vector<Edge> added;
};

/// Immutable graph snapshot. Every node carries an implicit self-loop, so
/// neighbors(v) always contains v. Features are shared between snapshots of
/// the same evolving graph.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an edge list. Pairs may be given in either order;
  /// self-loop pairs are accepted and ignored (they are always present).
  /// Duplicate pairs are rejected.
  Graph(std::size_t num_nodes, std::span<const Edge> edges,
        std::shared_ptr<const Matrix> features)
      : num_nodes_(num_nodes), features_(std::move(features)) {
    if (!features_) throw InputError("graph requires a feature matrix");
    if (features_->rows() != num_nodes)
      throw InputError("feature rows (" + std::to_string(features_->rows()) +
                       ") != node count (" + std::to_string(num_nodes) + ")");
    edges_.reserve(edges.size());
    for (const Edge& e : edges) {
      if (e.u >= num_nodes || e.v >= num_nodes)
        throw InputError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                         ") has an endpoint out of range");
      if (e.u == e.v) continue;
      edges_.push_back(Edge::canonical(e.u, e.v));
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
      throw InputError("duplicate edge in edge list");
    build_adjacency();
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t feature_dim() const { return features_ ? features_->cols() : 0; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Matrix& features() const { return *features_; }
  const std::shared_ptr<const Matrix>& shared_features() const { return features_; }

  /// Sorted neighbor list of v, self included.
  std::span<const NodeId> neighbors(NodeId v) const {
    if (v >= num_nodes_) throw InputError("node " + std::to_string(v) + " out of range");
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }

  std::size_t degree(NodeId v) const { return neighbors(v).size(); }

  std::size_t max_degree() const {
    std::size_t best = 0;
    for (std::size_t v = 0; v < num_nodes_; ++v)
      best = std::max<std::size_t>(best, offsets_[v + 1] - offsets_[v]);
    return best;
  }

  /// True when u and v are adjacent; true for u == v.
  bool has_edge(NodeId u, NodeId v) const {
    if (u >= num_nodes_ || v >= num_nodes_) return false;
    auto nb = neighbors(v);
    return std::binary_search(nb.begin(), nb.end(), u);
  }

 private:
  void build_adjacency() {
    std::vector<std::uint32_t> deg(num_nodes_, 1);
    for (const Edge& e : edges_) {
      ++deg[e.u];
      ++deg[e.v];
    }
    offsets_.assign(num_nodes_ + 1, 0);
    for (std::size_t v = 0; v < num_nodes_; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
    adj_.assign(offsets_.back(), 0);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t v = 0; v < num_nodes_; ++v) adj_[cursor[v]++] = static_cast<NodeId>(v);
    for (const Edge& e : edges_) {
      adj_[cursor[e.u]++] = e.v;
      adj_[cursor[e.v]++] = e.u;
    }
    for (std::size_t v = 0; v < num_nodes_; ++v)
      std::sort(adj_.begin() + offsets_[v], adj_.begin() + offsets_[v + 1]);
  }

  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adj_;
  std::shared_ptr<const Matrix> features_;
};

inline std::span<const NodeId> neighbors(const Graph& g, NodeId v) { return g.neighbors(v); }

/// Returns g0 with the delta's edges added. Rejects pairs already present,
/// self-loops, duplicates within the delta, and out-of-range endpoints.
inline Graph apply_delta(const Graph& g0, const EdgeDelta& delta) {
  std::vector<Edge> added;
  added.reserve(delta.added.size());
  for (const Edge& e : delta.added) {
    if (e.u >= g0.num_nodes() || e.v >= g0.num_nodes())
      throw InputError("delta edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                       ") has an endpoint out of range");
    if (g0.has_edge(e.u, e.v))
      throw InputError("delta edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                       ") already present");
    added.push_back(Edge::canonical(e.u, e.v));
  }
  std::sort(added.begin(), added.end());
  if (std::adjacent_find(added.begin(), added.end()) != added.end())
    throw InputError("duplicate edge in delta");
  std::vector<Edge> all = g0.edges();
  all.insert(all.end(), added.begin(), added.end());
  return Graph(g0.num_nodes(), all, g0.shared_features());
}

/// True when every edge of g0 is in g1 and node sets agree.
inline bool is_supergraph(const Graph& g1, const Graph& g0) {
  if (g1.num_nodes() != g0.num_nodes()) return false;
  return std::includes(g1.edges().begin(), g1.edges().end(), g0.edges().begin(),
                       g0.edges().end());
}

}  // namespace axpath
