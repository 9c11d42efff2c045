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
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "axpath/error.hpp"
#include "axpath/graph.hpp"
#include "axpath/matrix.hpp"
#include "axpath/model.hpp"

namespace axpath {

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

/// Numerically stable log(sum(exp(z))).
inline double log_sum_exp(std::span<const double> z) {
  if (z.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - mx);
  return mx + std::log(s);
}

/// Max-subtracted softmax.
inline Vector softmax(std::span<const double> z) {
  Vector p(z.size());
  if (z.empty()) return p;
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) s += (p[j] = std::exp(z[j] - mx));
  for (double& v : p) v /= s;
  return p;
}

/// KL(p || q) in nats with 0 ln 0 = 0.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InputError("kl_divergence: length mismatch");
  double kl = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0) kl += p[j] * std::log(p[j] / q[j]);
  return kl;
}

/// KL(softmax(z1) || softmax(z0)) written in terms of the logit change:
///   sum_j Pr_j(G1) (z1_j - z0_j) - log(Z(G1) / Z(G0)).
inline double kl_via_logits(std::span<const double> z1, std::span<const double> z0) {
  if (z1.size() != z0.size()) throw InputError("kl_via_logits: length mismatch");
  const Vector p1 = softmax(z1);
  double lin = 0.0;
  for (std::size_t j = 0; j < z1.size(); ++j) lin += p1[j] * (z1[j] - z0[j]);
  return lin - (log_sum_exp(z1) - log_sum_exp(z0));
}

inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// All per-layer quantities of one forward pass over a graph.
///
/// Layer t (1..T) stores the pre-activation z^(t), the projected message
/// h^(t-1) W^(t) of every node, and (for t < T) the activation h^(t).
struct ForwardTrace {
  std::size_t layers = 0;
  std::shared_ptr<const Matrix> features;
  std::vector<Matrix> pre;       // index t in 1..T
  std::vector<Matrix> post;      // index t in 1..T-1
  std::vector<Matrix> messages;  // index t in 1..T
  Matrix probs;

  std::size_t num_nodes() const { return features->rows(); }

  std::span<const double> logits(NodeId v) const { return pre[layers].row(v); }
  std::span<const double> distribution(NodeId v) const { return probs.row(v); }

  /// h^(t)_v; features at t = 0 and logits at t = T.
  std::span<const double> activation(std::size_t t, NodeId v) const {
    if (t == 0) return features->row(v);
    if (t == layers) return pre[t].row(v);
    return post[t].row(v);
  }
  std::span<const double> pre_activation(std::size_t t, NodeId v) const { return pre[t].row(v); }
  std::span<const double> message(std::size_t t, NodeId v) const { return messages[t].row(v); }
};

namespace detail {

/// Projects one activation row through W^(t). Shared by the full and the
/// pruned evaluation so both produce bit-identical messages.
inline void project(std::span<const double> h, const Matrix& w, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  accumulate_row_times(h, w, out);
}

/// Adds msg into acc. Callers iterate neighbors in ascending id order.
inline void add_message(std::span<const double> msg, std::span<double> acc) {
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += msg[k];
}

}  // namespace detail

inline ForwardTrace forward(const GnnModel& model, const Graph& g) {
  if (g.feature_dim() != model.dim(0))
    throw InputError("feature dim " + std::to_string(g.feature_dim()) + " != model input dim " +
                     std::to_string(model.dim(0)));
  const std::size_t T = model.num_layers();
  const std::size_t n = g.num_nodes();
  ForwardTrace tr;
  tr.layers = T;
  tr.features = g.shared_features();
  tr.pre.resize(T + 1);
  tr.post.resize(T);
  tr.messages.resize(T + 1);
  for (std::size_t t = 1; t <= T; ++t) {
    const Matrix& w = model.weight(t);
    Matrix msg(n, w.cols());
    for (NodeId u = 0; u < n; ++u) detail::project(tr.activation(t - 1, u), w, msg.row(u));
    Matrix z(n, w.cols());
    for (NodeId v = 0; v < n; ++v)
      for (NodeId u : g.neighbors(v)) detail::add_message(msg.row(u), z.row(v));
    tr.messages[t] = std::move(msg);
    tr.pre[t] = std::move(z);
    if (t < T) {
      Matrix h(n, w.cols());
      auto zs = tr.pre[t].values();
      auto hs = h.values();
      for (std::size_t i = 0; i < zs.size(); ++i) hs[i] = relu(zs[i]);
      tr.post[t] = std::move(h);
    }
  }
  tr.probs = Matrix(n, model.num_classes());
  for (NodeId v = 0; v < n; ++v) {
    const Vector p = softmax(tr.logits(v));
    std::copy(p.begin(), p.end(), tr.probs.row(v).begin());
  }
  return tr;
}

}  // namespace axpath
