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
#include <span>
#include <vector>

#include "axpath/error.hpp"
#include "axpath/forward.hpp"
#include "axpath/graph.hpp"
#include "axpath/model.hpp"
#include "axpath/paths.hpp"

namespace axpath {

struct PrunedResult {
  Vector logits;
  std::size_t recomputed_vertices = 0;
};

namespace detail {

/// Prefix tree over removed chains, read from the root downwards.
class RemovalTrie {
 public:
  RemovalTrie() : nodes_(1) {}

  void insert(std::span<const NodeId> leaf_first) {
    std::size_t cur = 0;
    for (std::size_t i = leaf_first.size() - 1; i-- > 0;) {
      const NodeId id = leaf_first[i];
      auto& kids = nodes_[cur].children;
      auto it = std::lower_bound(kids.begin(), kids.end(), id,
                                 [](const Child& c, NodeId x) { return c.id < x; });
      if (it != kids.end() && it->id == id) {
        cur = it->index;
      } else {
        const std::size_t next = nodes_.size();
        kids.insert(it, Child{id, next});
        nodes_.emplace_back();
        cur = next;
      }
    }
  }

  /// Trie index of child `id` below `at`, or npos.
  std::size_t child(std::size_t at, NodeId id) const {
    const auto& kids = nodes_[at].children;
    auto it = std::lower_bound(kids.begin(), kids.end(), id,
                               [](const Child& c, NodeId x) { return c.id < x; });
    return it != kids.end() && it->id == id ? it->index : npos;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  struct Child {
    NodeId id;
    std::size_t index;
  };
  struct TrieNode {
    std::vector<Child> children;
  };
  std::vector<TrieNode> nodes_;
};

}  // namespace detail

/// Root logits of G1's computation tree with the given chains deleted.
///
/// The depth-T tree of `root` is unrolled only along removed chains; every
/// other subtree reuses the graph-level message from `trace1`, which equals
/// the unpruned value under sum aggregation. With nothing removed the result
/// is bit-identical to trace1.logits(root).
inline PrunedResult forward_pruned(const GnnModel& model, const Graph& g1, const ForwardTrace& trace1,
                                   NodeId root, std::span<const Path> removed) {
  const std::size_t T = model.num_layers();
  if (root >= g1.num_nodes()) throw InputError("root out of range");
  detail::RemovalTrie trie;
  for (const Path& p : removed) {
    if (p.layers() != T || p.root() != root)
      throw InputError("removed path " + to_string(p) + " does not end at the root");
    for (std::size_t t = 1; t <= T; ++t)
      if (!g1.has_edge(p.nodes[t - 1], p.nodes[t]))
        throw InputError("removed path " + to_string(p) + " is not in the computation tree");
    trie.insert(p.nodes);
  }
  PrunedResult result;
  // Pre-activation of node v at layer t (t >= 1) whose subtree is trie node `at`.
  auto eval = [&](auto& self, NodeId v, std::size_t t, std::size_t at) -> Vector {
    ++result.recomputed_vertices;
    const std::size_t width = model.dim(t);
    Vector z(width, 0.0);
    Vector msg(width);
    for (NodeId u : g1.neighbors(v)) {
      const std::size_t sub = trie.child(at, u);
      if (sub == detail::RemovalTrie::npos) {
        detail::add_message(trace1.message(t, u), z);
      } else if (t > 1) {
        Vector h = self(self, u, t - 1, sub);
        for (double& x : h) x = relu(x);
        detail::project(h, model.weight(t), msg);
        detail::add_message(msg, z);
      }
      // t == 1 with a trie hit: the leaf is deleted and sends nothing.
    }
    return z;
  };
  result.logits = eval(eval, root, T, 0);
  return result;
}

inline PrunedResult forward_pruned(const GnnModel& model, const Graph& g1, const ForwardTrace& trace1,
                                   NodeId root, const PathSet& removed) {
  return forward_pruned(model, g1, trace1, root, std::span<const Path>(removed.paths()));
}

inline PrunedResult forward_pruned(const GnnModel& model, const Graph& g1, NodeId root,
                                   const PathSet& removed) {
  return forward_pruned(model, g1, forward(model, g1), root, removed);
}

}  // namespace axpath
