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
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "axpath/error.hpp"
#include "axpath/graph.hpp"

namespace axpath {

inline constexpr std::size_t kDefaultPathCap = 200000;

/// A computation-graph path of T+1 nodes: nodes[0] is the leaf (input
/// layer), nodes[T] the root (output layer). split_layer is the deepest
/// layer whose incoming step uses an added edge; 0 for unaltered paths.
struct Path {
  std::vector<NodeId> nodes;
  std::size_t split_layer = 0;

  std::size_t layers() const { return nodes.size() - 1; }
  NodeId root() const { return nodes.back(); }
  friend bool operator==(const Path& a, const Path& b) { return a.nodes == b.nodes; }
};

/// "v0>v1>...>vT", leaf first.
inline std::string to_string(const Path& p) {
  std::string s;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    if (i) s += '>';
    s += std::to_string(p.nodes[i]);
  }
  return s;
}

/// Paths sharing a root and a length, in lexicographic order of their node
/// sequences. A path's position in this order is its index everywhere else
/// (contribution rows, optimizer variables).
class PathSet {
 public:
  PathSet() = default;
  explicit PathSet(std::vector<Path> paths) : paths_(std::move(paths)) {
    std::sort(paths_.begin(), paths_.end(),
              [](const Path& a, const Path& b) { return a.nodes < b.nodes; });
    if (std::adjacent_find(paths_.begin(), paths_.end()) != paths_.end())
      throw InputError("duplicate path in path set");
    for (const Path& p : paths_)
      if (p.nodes.size() != paths_.front().nodes.size() || p.root() != paths_.front().root())
        throw InputError("paths in a set must share root and length");
  }

  std::size_t size() const { return paths_.size(); }
  bool empty() const { return paths_.empty(); }
  const Path& operator[](std::size_t i) const { return paths_[i]; }
  auto begin() const { return paths_.begin(); }
  auto end() const { return paths_.end(); }
  const std::vector<Path>& paths() const { return paths_; }

  std::optional<std::size_t> index_of(std::span<const NodeId> nodes) const {
    auto it = std::lower_bound(paths_.begin(), paths_.end(), nodes,
                               [](const Path& p, std::span<const NodeId> key) {
                                 return std::lexicographical_compare(p.nodes.begin(), p.nodes.end(),
                                                                     key.begin(), key.end());
                               });
    if (it == paths_.end() || !std::equal(it->nodes.begin(), it->nodes.end(), nodes.begin(), nodes.end()))
      return std::nullopt;
    return static_cast<std::size_t>(it - paths_.begin());
  }

  /// Subset by index, preserving order of the given indices.
  PathSet subset(std::span<const std::size_t> indices) const {
    std::vector<Path> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(paths_.at(i));
    return PathSet(std::move(out));
  }

 private:
  std::vector<Path> paths_;
};

/// Precomputed view of an evolving pair (g0 -> g1, edges added only), shared
/// by every target of one evolution step.
class DeltaIndex {
 public:
  DeltaIndex(const Graph& g0, const Graph& g1, std::size_t max_layers)
      : g0_(&g0), g1_(&g1) {
    if (!is_supergraph(g1, g0)) throw InputError("g1 must contain every node and edge of g0");
    // hops_[v]: BFS distance in g1 from v to the nearest endpoint of an added
    // edge, capped at max_layers + 1.
    const auto far = static_cast<std::uint8_t>(std::min<std::size_t>(max_layers + 1, 255));
    hops_.assign(g1.num_nodes(), far);
    std::deque<NodeId> queue;
    std::vector<Edge> e0 = g0.edges();
    for (const Edge& e : g1.edges()) {
      if (std::binary_search(e0.begin(), e0.end(), e)) continue;
      ++num_added_;
      for (NodeId x : {e.u, e.v})
        if (hops_[x] != 0) {
          hops_[x] = 0;
          queue.push_back(x);
        }
    }
    while (!queue.empty()) {
      NodeId x = queue.front();
      queue.pop_front();
      if (hops_[x] + 1 >= far) continue;
      for (NodeId y : g1.neighbors(x))
        if (hops_[y] > hops_[x] + 1) {
          hops_[y] = static_cast<std::uint8_t>(hops_[x] + 1);
          queue.push_back(y);
        }
    }
  }

  const Graph& g0() const { return *g0_; }
  const Graph& g1() const { return *g1_; }
  std::size_t num_added() const { return num_added_; }

  bool is_added(NodeId u, NodeId v) const { return u != v && !g0_->has_edge(u, v); }

  /// A walk of `steps` more hops starting at v can still cross an added edge.
  bool can_reach_added(NodeId v, std::size_t steps) const {
    return steps >= 1 && static_cast<std::size_t>(hops_[v]) + 1 <= steps;
  }

 private:
  const Graph* g0_;
  const Graph* g1_;
  std::vector<std::uint8_t> hops_;
  std::size_t num_added_ = 0;
};

/// Depth-first traversal of the depth-T computation tree of `root`.
///
/// With a DeltaIndex only altered chains are visited; subtrees that cannot
/// contain an added edge are skipped. Without one (`index == nullptr`) every
/// chain of g is visited. The visitor receives
///   bool enter(NodeId u, std::size_t layer, bool above_split)
///   void leaf(std::span<const NodeId> root_first, std::size_t split_layer)
///   void leave()
/// `above_split` is true when no added edge occurs at or above u's outgoing
/// step, i.e. u's layer is >= the chain's split layer.
template <class Visitor>
void traverse_computation_tree(const Graph& g, const DeltaIndex* index, NodeId root,
                               std::size_t layers, Visitor& visitor) {
  std::vector<NodeId> stack{root};
  stack.reserve(layers + 1);
  auto recurse = [&](auto& self, NodeId v, std::size_t layer, std::size_t split) -> void {
    for (NodeId u : g.neighbors(v)) {
      std::size_t child_split = split;
      if (index && split == 0 && index->is_added(u, v)) child_split = layer;
      if (index && child_split == 0 && !index->can_reach_added(u, layer - 1)) continue;
      if (!visitor.enter(u, layer - 1, index != nullptr && child_split == 0)) continue;
      stack.push_back(u);
      if (layer - 1 == 0)
        visitor.leaf(stack, child_split);
      else
        self(self, u, layer - 1, child_split);
      stack.pop_back();
      visitor.leave();
    }
  };
  recurse(recurse, root, layers, 0);
}

namespace detail {

struct PathCollector {
  std::size_t cap;
  std::vector<Path> out;
  bool enter(NodeId, std::size_t, bool) { return true; }
  void leave() {}
  void leaf(std::span<const NodeId> root_first, std::size_t split) {
    if (out.size() >= cap) throw PathCapExceeded(cap);
    Path p;
    p.nodes.assign(root_first.rbegin(), root_first.rend());
    p.split_layer = split;
    out.push_back(std::move(p));
  }
};

}  // namespace detail

/// W_root(g): every length-(T+1) chain ending at root.
inline PathSet enumerate_paths(const Graph& g, NodeId root, std::size_t layers,
                               std::size_t cap = kDefaultPathCap) {
  if (layers < 1) throw InputError("layer count must be >= 1");
  if (root >= g.num_nodes()) throw InputError("root out of range");
  detail::PathCollector c{cap, {}};
  traverse_computation_tree(g, nullptr, root, layers, c);
  return PathSet(std::move(c.out));
}

/// Altered paths W_root(g1) \ W_root(g0), each annotated with its split layer.
inline PathSet delta_paths(const DeltaIndex& index, NodeId root, std::size_t layers,
                           std::size_t cap = kDefaultPathCap) {
  if (layers < 1) throw InputError("layer count must be >= 1");
  if (root >= index.g1().num_nodes()) throw InputError("root out of range");
  detail::PathCollector c{cap, {}};
  traverse_computation_tree(index.g1(), &index, root, layers, c);
  return PathSet(std::move(c.out));
}

inline PathSet delta_paths(const Graph& g0, const Graph& g1, NodeId root, std::size_t layers,
                           std::size_t cap = kDefaultPathCap) {
  DeltaIndex index(g0, g1, layers);
  return delta_paths(index, root, layers, cap);
}

/// |delta_paths(g0, g1, root, T)| by memoized walk counting; no paths stored.
inline std::uint64_t count_delta_paths(const Graph& g0, const Graph& g1, NodeId root,
                                       std::size_t layers) {
  if (!is_supergraph(g1, g0)) throw InputError("g1 must contain every node and edge of g0");
  if (root >= g1.num_nodes()) throw InputError("root out of range");
  // count(v, s, crossed): chains of s more steps below v, crossed = an added
  // edge has already been used above v.
  std::unordered_map<std::uint64_t, std::uint64_t> memo;
  auto count = [&](auto& self, NodeId v, std::size_t s, bool crossed) -> std::uint64_t {
    if (s == 0) return crossed ? 1 : 0;
    const std::uint64_t key = (static_cast<std::uint64_t>(v) << 9) | (s << 1) | (crossed ? 1 : 0);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::uint64_t total = 0;
    for (NodeId u : g1.neighbors(v))
      total += self(self, u, s - 1, crossed || (u != v && !g0.has_edge(u, v)));
    memo.emplace(key, total);
    return total;
  };
  return count(count, root, layers, false);
}

}  // namespace axpath
