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
#include <span>
#include <string>
#include <vector>

#include "axpath/error.hpp"
#include "axpath/forward.hpp"
#include "axpath/graph.hpp"
#include "axpath/model.hpp"

namespace axpath {

struct TrainOptions {
  std::size_t layers = 2;
  std::size_t hidden = 16;
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

struct TrainLog {
  std::vector<double> loss;  ///< per epoch, before the update
  double train_accuracy = 0.0;
};

/// Mean cross-entropy over `mask` and its gradient with respect to every
/// weight matrix.
inline double cross_entropy_gradient(const GnnModel& model, const Graph& g, const ForwardTrace& trace,
                                     std::span<const std::uint32_t> labels, std::span<const NodeId> mask,
                                     std::vector<Matrix>* grads) {
  const std::size_t T = model.num_layers();
  const std::size_t n = g.num_nodes();
  const double scale = 1.0 / static_cast<double>(mask.size());
  double loss = 0.0;
  Matrix dz(n, model.num_classes());
  for (NodeId v : mask) {
    const auto z = trace.logits(v);
    const auto p = trace.distribution(v);
    loss += (log_sum_exp(z) - z[labels[v]]) * scale;
    for (std::size_t j = 0; j < p.size(); ++j) dz(v, j) = p[j] * scale;
    dz(v, labels[v]) -= scale;
  }
  if (!grads) return loss;
  grads->clear();
  for (std::size_t t = 1; t <= T; ++t) grads->emplace_back(model.dim(t - 1), model.dim(t));
  for (std::size_t t = T; t >= 1; --t) {
    // Symmetric adjacency with self-loops: dL/dM_u = sum_{v in N(u)} dL/dz_v.
    Matrix dm(n, model.dim(t));
    for (NodeId u = 0; u < n; ++u) {
      auto out = dm.row(u);
      for (NodeId v : g.neighbors(u)) detail::add_message(dz.row(v), out);
    }
    Matrix& dw = (*grads)[t - 1];
    const Matrix& w = model.weight(t);
    Matrix dh(t > 1 ? n : 0, model.dim(t - 1));
    for (NodeId u = 0; u < n; ++u) {
      const auto h = trace.activation(t - 1, u);
      const auto gm = dm.row(u);
      for (std::size_t a = 0; a < h.size(); ++a) {
        if (h[a] == 0.0) continue;
        auto wr = dw.row(a);
        for (std::size_t b = 0; b < gm.size(); ++b) wr[b] += h[a] * gm[b];
      }
      if (t == 1) continue;
      const auto zpre = trace.pre_activation(t - 1, u);
      auto back = dh.row(u);
      for (std::size_t a = 0; a < back.size(); ++a) {
        if (!(zpre[a] > 0.0)) continue;
        const auto wr = w.row(a);
        double acc = 0.0;
        for (std::size_t b = 0; b < gm.size(); ++b) acc += wr[b] * gm[b];
        back[a] = acc;
      }
    }
    if (t > 1) dz = std::move(dh);
  }
  return loss;
}

/// Full-batch gradient descent on the masked cross-entropy, starting from
/// the Glorot initialisation drawn from `opts.seed`.
inline GnnModel train_reference_model(const Graph& g, std::span<const std::uint32_t> labels,
                                      std::span<const NodeId> train_mask, std::size_t num_classes,
                                      const TrainOptions& opts, TrainLog* log = nullptr) {
  if (opts.layers < 1) throw InputError("model needs at least one layer");
  if (labels.size() != g.num_nodes()) throw InputError("label count does not match node count");
  if (train_mask.empty()) throw InputError("empty training mask");
  for (NodeId v : train_mask) {
    if (v >= g.num_nodes()) throw InputError("training node out of range");
    if (labels[v] >= num_classes) throw InputError("label exceeds class count");
  }
  std::vector<std::size_t> dims{g.feature_dim()};
  for (std::size_t t = 1; t < opts.layers; ++t) dims.push_back(opts.hidden);
  dims.push_back(num_classes);
  GnnModel model = random_model(dims, opts.seed);
  std::vector<Matrix> grads;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    const ForwardTrace trace = forward(model, g);
    const double loss = cross_entropy_gradient(model, g, trace, labels, train_mask, &grads);
    if (!std::isfinite(loss))
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) + " (loss not finite)");
    if (log) log->loss.push_back(loss);
    if (opts.learning_rate == 0.0) continue;
    auto& weights = model.mutable_weights();
    for (std::size_t t = 0; t < weights.size(); ++t) {
      auto dst = weights[t].values();
      const auto src = grads[t].values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= opts.learning_rate * src[i];
    }
  }
  for (const Matrix& w : model.weights())
    for (double x : w.values())
      if (!std::isfinite(x)) throw NumericalError("training produced non-finite weights");
  if (log) {
    const ForwardTrace trace = forward(model, g);
    std::size_t hits = 0;
    for (NodeId v : train_mask) hits += argmax(trace.logits(v)) == labels[v];
    log->train_accuracy = static_cast<double>(hits) / static_cast<double>(train_mask.size());
  }
  return model;
}

}  // namespace axpath
