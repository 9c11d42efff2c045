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

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "axpath/attribution.hpp"
#include "axpath/forward.hpp"
#include "axpath/graph.hpp"
#include "axpath/model.hpp"
#include "axpath/paths.hpp"
#include "axpath/select.hpp"

namespace axpath {

/// d z_{target, cls}(G1) / d gate_e for every edge gate in the receptive
/// field. Each undirected edge and each self-loop carries one multiplicative
/// gate (fixed at 1) shared by both directions and all layers.
class EdgeGradients {
 public:
  double at(NodeId a, NodeId b) const {
    auto it = grads_.find(key(a, b));
    return it == grads_.end() ? 0.0 : it->second;
  }
  void add(NodeId a, NodeId b, double g) { grads_[key(a, b)] += g; }
  std::size_t size() const { return grads_.size(); }

 private:
  static std::uint64_t key(NodeId a, NodeId b) {
    const Edge e = Edge::canonical(a, b);
    return (static_cast<std::uint64_t>(e.u) << 32) | e.v;
  }
  std::unordered_map<std::uint64_t, double> grads_;
};

/// Reverse-mode pass through the sum-aggregation forward of trace1.
inline EdgeGradients edge_gate_gradients(const GnnModel& model, const Graph& g1,
                                         const ForwardTrace& trace1, NodeId target, std::size_t cls) {
  const std::size_t T = model.num_layers();
  if (cls >= model.num_classes()) throw InputError("class index out of range");
  EdgeGradients out;
  std::unordered_map<NodeId, Vector> delta;  // d z_{target,cls} / d z_v^(t)
  delta[target] = Vector(model.num_classes(), 0.0);
  delta[target][cls] = 1.0;
  for (std::size_t t = T; t >= 1; --t) {
    const Matrix& w = model.weight(t);
    std::unordered_map<NodeId, Vector> below;
    for (const auto& [v, dv] : delta) {
      Vector back;
      if (t >= 2) {
        back.assign(w.rows(), 0.0);
        for (std::size_t u = 0; u < w.rows(); ++u) {
          const auto wr = w.row(u);
          double acc = 0.0;
          for (std::size_t k = 0; k < dv.size(); ++k) acc += wr[k] * dv[k];
          back[u] = acc;
        }
      }
      for (NodeId u : g1.neighbors(v)) {
        const auto msg = trace1.message(t, u);
        double acc = 0.0;
        for (std::size_t k = 0; k < dv.size(); ++k) acc += dv[k] * msg[k];
        out.add(u, v, acc);
        if (t >= 2) {
          auto [it, fresh] = below.try_emplace(u, Vector(w.rows(), 0.0));
          for (std::size_t k = 0; k < back.size(); ++k) it->second[k] += back[k];
        }
      }
    }
    if (t >= 2) {
      for (auto& [u, dh] : below) {
        const auto z = trace1.pre_activation(t - 1, u);
        for (std::size_t k = 0; k < dh.size(); ++k)
          if (!(z[k] > 0.0)) dh[k] = 0.0;
      }
    }
    delta = std::move(below);
  }
  return out;
}

/// Grad baseline: a path scores the sum of |gate gradient| over its edges.
inline SelectionResult rank_grad(const GnnModel& model, const Graph& g1, const ForwardTrace& trace1,
                                 const PathSet& pool, std::size_t n, std::size_t cls) {
  if (pool.empty()) return rank_by_scores(Method::kGrad, {}, n);
  const EdgeGradients grads = edge_gate_gradients(model, g1, trace1, pool[0].root(), cls);
  Vector scores(pool.size(), 0.0);
  for (std::size_t p = 0; p < pool.size(); ++p)
    for (std::size_t t = 1; t < pool[p].nodes.size(); ++t)
      scores[p] += std::abs(grads.at(pool[p].nodes[t - 1], pool[p].nodes[t]));
  return rank_by_scores(Method::kGrad, scores, n);
}

/// GNN-LRP baseline: a path scores its relevance for class `cls`.
inline SelectionResult rank_lrp(const GnnModel& model, const ForwardTrace& trace1, const PathSet& pool,
                                std::size_t n, std::size_t cls) {
  if (cls >= model.num_classes()) throw InputError("class index out of range");
  Vector scores(pool.size(), 0.0);
  for (std::size_t p = 0; p < pool.size(); ++p) scores[p] = lrp_path_relevance(model, trace1, pool[p])[cls];
  return rank_by_scores(Method::kLrp, scores, n);
}

}  // namespace axpath
