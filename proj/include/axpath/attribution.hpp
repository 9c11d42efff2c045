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

#include <chrono>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "axpath/error.hpp"
#include "axpath/forward.hpp"
#include "axpath/graph.hpp"
#include "axpath/model.hpp"
#include "axpath/paths.hpp"

namespace axpath {

/// Below this magnitude the rescale ratio dh/dz is replaced by the ReLU gate
/// at the current pre-activation.
inline constexpr double kRescaleEpsilon = 1e-9;

/// Per-class tolerance of the completeness check sum_p C[p][j] == dz_j.
inline constexpr double kCompletenessTolerance = 1e-5;

/// Reference and current activations for one explained node. A null
/// `reference` means all-zero reference activations (the empty graph).
struct ReferencePair {
  const GnnModel* model = nullptr;
  const ForwardTrace* reference = nullptr;
  const ForwardTrace* current = nullptr;
  NodeId target = 0;

  ReferencePair(const GnnModel& m, const ForwardTrace* ref, const ForwardTrace& cur, NodeId t)
      : model(&m), reference(ref), current(&cur), target(t) {
    if (t >= cur.num_nodes()) throw InputError("target out of range");
    if (cur.layers != m.num_layers() || (ref && ref->layers != m.num_layers()))
      throw InputError("trace layer count does not match model");
  }
};

/// Difference-from-reference at one path position.
struct LayerDelta {
  Vector dh;  ///< activation difference; equals dz at the output layer
  Vector dz;  ///< pre-activation difference; empty at layer 0
};

namespace detail {

/// Layer t of a path uses the G0 activations as reference iff t >= split.
inline bool uses_reference(const ReferencePair& pair, const Path& path, std::size_t t) {
  if (!pair.reference) return false;
  if (path.split_layer == 0) throw InputError("path " + to_string(path) + " is not an altered path");
  return t >= path.split_layer;
}

inline Vector difference(std::span<const double> a, std::span<const double> b, bool subtract) {
  Vector out(a.begin(), a.end());
  if (subtract)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b[k];
  return out;
}

/// Rescale ratio dh/dz for every neuron of node v at hidden layer t.
inline void rescale_ratio(const ReferencePair& pair, NodeId v, std::size_t t, bool with_reference,
                          std::span<double> out) {
  const auto z1 = pair.current->pre_activation(t, v);
  if (!with_reference) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = z1[k] > 0.0 ? 1.0 : 0.0;
    return;
  }
  const auto z0 = pair.reference->pre_activation(t, v);
  const auto h1 = pair.current->activation(t, v);
  const auto h0 = pair.reference->activation(t, v);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double dz = z1[k] - z0[k];
    out[k] = std::abs(dz) < kRescaleEpsilon ? (z1[k] > 0.0 ? 1.0 : 0.0) : (h1[k] - h0[k]) / dz;
  }
}

}  // namespace detail

inline LayerDelta diff_from_reference(const ReferencePair& pair, const Path& path, std::size_t t) {
  const std::size_t T = pair.model->num_layers();
  if (t > T) throw InputError("layer " + std::to_string(t) + " out of [0," + std::to_string(T) + "]");
  if (path.layers() != T || path.root() != pair.target)
    throw InputError("path " + to_string(path) + " does not match model depth or target");
  const NodeId v = path.nodes[t];
  const bool ref = detail::uses_reference(pair, path, t);
  LayerDelta d;
  if (t == 0) {
    d.dh = detail::difference(pair.current->activation(0, v),
                              ref ? pair.reference->activation(0, v) : std::span<const double>{}, ref);
    return d;
  }
  d.dz = detail::difference(pair.current->pre_activation(t, v),
                            ref ? pair.reference->pre_activation(t, v) : std::span<const double>{}, ref);
  d.dh = t == T ? d.dz
                : detail::difference(pair.current->activation(t, v),
                                     ref ? pair.reference->activation(t, v) : std::span<const double>{},
                                     ref);
  return d;
}

/// Multiplier from neuron u of path position t-1 to neuron v of position t
/// (1 <= t <= T). At the output layer v is a class index and the multiplier
/// is the raw weight.
inline double multiplier(const ReferencePair& pair, const Path& path, std::size_t t, std::size_t u,
                         std::size_t v) {
  const std::size_t T = pair.model->num_layers();
  if (t < 1 || t > T) throw InputError("multiplier layer out of range");
  const double w = pair.model->weight(t)(u, v);
  if (t == T) return w;
  Vector ratio(pair.model->dim(t));
  detail::rescale_ratio(pair, path.nodes[t], t, detail::uses_reference(pair, path, t), ratio);
  return ratio[v] * w;
}

/// C_{p, .}: leaf features contracted with the chained multipliers along p.
inline Vector path_contribution(const ReferencePair& pair, const Path& path) {
  const GnnModel& model = *pair.model;
  const std::size_t T = model.num_layers();
  if (path.layers() != T || path.root() != pair.target)
    throw InputError("path " + to_string(path) + " does not match model depth or target");
  const auto x = pair.current->activation(0, path.nodes[0]);
  if (x.size() != model.dim(0)) throw InputError("feature dim mismatch");
  // Layer 0 never uses the reference: features do not change, so an altered
  // path always has split >= 1 and its leaf difference is the full feature.
  Vector acc(x.begin(), x.end());
  for (std::size_t t = 1; t <= T; ++t) {
    Vector next(model.dim(t), 0.0);
    accumulate_row_times(acc, model.weight(t), next);
    if (t < T) {
      Vector ratio(model.dim(t));
      detail::rescale_ratio(pair, path.nodes[t], t, detail::uses_reference(pair, path, t), ratio);
      for (std::size_t k = 0; k < next.size(); ++k) next[k] *= ratio[k];
    }
    acc = std::move(next);
  }
  return acc;
}

/// Exact per-path, per-class decomposition of a logit change.
struct ContributionMatrix {
  NodeId target = 0;
  PathSet paths;
  Matrix values;  ///< m x c, row order = paths order
  Vector delta_z;
  double completeness_error = 0.0;  ///< max_j |dz_j - sum_p C[p][j]|
  double elapsed_ms = 0.0;

  std::size_t num_paths() const { return values.rows(); }
  std::size_t num_classes() const { return delta_z.size(); }
};

namespace detail {

/// Walks the computation tree carrying, for the current suffix, the
/// sensitivity of the root logits to each hidden neuron. Chains that share a
/// suffix share those products.
class ContributionVisitor {
 public:
  ContributionVisitor(const ReferencePair& pair, std::size_t cap)
      : pair_(pair), model_(*pair.model), T_(model_.num_layers()), c_(model_.num_classes()),
        cap_(cap), sens_(T_ + 1), scaled_(T_ + 1), ratio_(T_ + 1) {
    if (T_ >= 2) sens_[T_ - 1] = model_.weight(T_);
    for (std::size_t s = 1; s < T_; ++s) ratio_[s].resize(model_.dim(s));
    if (T_ == 1) {
      scaled_[1] = Matrix(c_, c_);
      for (std::size_t j = 0; j < c_; ++j) scaled_[1](j, j) = 1.0;
    }
  }

  bool enter(NodeId u, std::size_t s, bool with_reference) {
    if (s == 0) return true;
    rescale_ratio(pair_, u, s, with_reference, ratio_[s]);
    const Matrix& unscaled = sens_[s];
    Matrix& scaled = scaled_[s];
    scaled = unscaled;
    for (std::size_t k = 0; k < unscaled.rows(); ++k) {
      const double r = ratio_[s][k];
      for (double& x : scaled.row(k)) x *= r;
    }
    if (s >= 2) sens_[s - 1] = matmul(model_.weight(s), scaled);
    return true;
  }

  void leave() {}

  void leaf(std::span<const NodeId> root_first, std::size_t split) {
    if (paths_.size() >= cap_) throw PathCapExceeded(cap_);
    Path p;
    p.nodes.assign(root_first.rbegin(), root_first.rend());
    p.split_layer = split;
    const auto msg = pair_.current->message(1, p.nodes[0]);
    const std::size_t row = rows_.size();
    rows_.resize(row + c_, 0.0);
    accumulate_row_times(msg, scaled_[1], std::span<double>(rows_.data() + row, c_));
    paths_.push_back(std::move(p));
  }

  std::vector<Path> take_paths() { return std::move(paths_); }
  const std::vector<double>& rows() const { return rows_; }

 private:
  const ReferencePair& pair_;
  const GnnModel& model_;
  std::size_t T_;
  std::size_t c_;
  std::size_t cap_;
  std::vector<Matrix> sens_;    // sens_[s]: d_s x c, before the ratio of the layer-s node
  std::vector<Matrix> scaled_;  // scaled_[s] = diag(ratio) * sens_[s]
  std::vector<Vector> ratio_;
  std::vector<Path> paths_;
  std::vector<double> rows_;
};

inline ContributionMatrix assemble(NodeId target, std::vector<Path> paths,
                                   const std::vector<double>& rows, std::size_t c, Vector delta_z) {
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return paths[a].nodes < paths[b].nodes; });
  ContributionMatrix cm;
  cm.target = target;
  cm.values = Matrix(paths.size(), c);
  std::vector<Path> sorted;
  sorted.reserve(paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::copy_n(rows.begin() + order[i] * c, c, cm.values.row(i).begin());
    sorted.push_back(std::move(paths[order[i]]));
  }
  cm.paths = PathSet(std::move(sorted));
  cm.delta_z = std::move(delta_z);
  for (std::size_t j = 0; j < c; ++j) {
    double s = 0.0;
    for (std::size_t p = 0; p < cm.values.rows(); ++p) s += cm.values(p, j);
    cm.completeness_error = std::max(cm.completeness_error, std::abs(cm.delta_z[j] - s));
  }
  return cm;
}

}  // namespace detail

struct AttributionOptions {
  std::size_t path_cap = kDefaultPathCap;
  /// Throw NumericalError when the completeness check fails.
  bool verify = true;
};

/// Attributes z_target(G1) - z_target(G0) to the altered paths, using traces
/// already computed on both snapshots.
inline ContributionMatrix contribution_matrix(const GnnModel& model, const DeltaIndex& index,
                                              const ForwardTrace& trace0, const ForwardTrace& trace1,
                                              NodeId target, const AttributionOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  ReferencePair pair(model, &trace0, trace1, target);
  detail::ContributionVisitor visitor(pair, opts.path_cap);
  traverse_computation_tree(index.g1(), &index, target, model.num_layers(), visitor);
  Vector dz = detail::difference(trace1.logits(target), trace0.logits(target), true);
  ContributionMatrix cm = detail::assemble(target, visitor.take_paths(), visitor.rows(),
                                           model.num_classes(), std::move(dz));
  cm.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (opts.verify && !(cm.completeness_error < kCompletenessTolerance))
    throw NumericalError("completeness violated at node " + std::to_string(target) +
                         ": max error " + std::to_string(cm.completeness_error));
  return cm;
}

inline ContributionMatrix contribution_matrix(const GnnModel& model, const Graph& g0, const Graph& g1,
                                              NodeId target, const AttributionOptions& opts = {}) {
  DeltaIndex index(g0, g1, model.num_layers());
  const ForwardTrace t0 = forward(model, g0);
  const ForwardTrace t1 = forward(model, g1);
  return contribution_matrix(model, index, t0, t1, target, opts);
}

/// Same attribution with all-zero reference activations, over every path of
/// W_target(G1). Completeness then reads z_target(G1) = sum_p C[p].
inline ContributionMatrix contribution_matrix_zero_reference(const GnnModel& model, const Graph& g1,
                                                             const ForwardTrace& trace1, NodeId target,
                                                             const AttributionOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  ReferencePair pair(model, nullptr, trace1, target);
  detail::ContributionVisitor visitor(pair, opts.path_cap);
  traverse_computation_tree(g1, nullptr, target, model.num_layers(), visitor);
  const auto z = trace1.logits(target);
  ContributionMatrix cm = detail::assemble(target, visitor.take_paths(), visitor.rows(),
                                           model.num_classes(), Vector(z.begin(), z.end()));
  cm.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return cm;
}

/// GNN-LRP (gamma = 0) relevance of one path of W_target(G1), per class.
/// Relevance z_j at the output is redistributed to each predecessor neuron u
/// in proportion h_u W_uv / z_v along the path.
inline Vector lrp_path_relevance(const GnnModel& model, const ForwardTrace& trace1, const Path& path) {
  const std::size_t T = model.num_layers();
  const std::size_t c = model.num_classes();
  if (path.layers() != T) throw InputError("path length does not match model depth");
  auto share = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
  // rel(k, j): relevance of class j held by neuron k of the current position.
  const auto z_root = trace1.logits(path.root());
  Matrix rel(c, c);
  for (std::size_t j = 0; j < c; ++j) rel(j, j) = z_root[j];
  for (std::size_t t = T; t >= 2; --t) {
    const Matrix& w = model.weight(t);
    const auto h_prev = trace1.activation(t - 1, path.nodes[t - 1]);
    const auto z = trace1.pre_activation(t, path.nodes[t]);
    Matrix next(w.rows(), c);
    for (std::size_t u = 0; u < w.rows(); ++u) {
      if (h_prev[u] == 0.0) continue;
      for (std::size_t v = 0; v < w.cols(); ++v) {
        const double a = share(h_prev[u] * w(u, v), z[v]);
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < c; ++j) next(u, j) += a * rel(v, j);
      }
    }
    rel = std::move(next);
  }
  // Input layer: sum over the leaf's input neurons i of x_i W_iv / z_v, which
  // is the leaf's projected message divided by z_v.
  const auto msg = trace1.message(1, path.nodes[0]);
  const auto z1 = trace1.pre_activation(1, path.nodes[1]);
  Vector out(c, 0.0);
  for (std::size_t v = 0; v < msg.size(); ++v) {
    const double a = share(msg[v], z1[v]);
    if (a == 0.0) continue;
    for (std::size_t j = 0; j < c; ++j) out[j] += a * rel(v, j);
  }
  return out;
}

/// GNN-LRP relevances for every path of W_target(G1).
inline ContributionMatrix lrp_contributions(const GnnModel& model, const Graph& g1,
                                            const ForwardTrace& trace1, NodeId target,
                                            std::size_t cap = kDefaultPathCap) {
  const auto start = std::chrono::steady_clock::now();
  PathSet paths = enumerate_paths(g1, target, model.num_layers(), cap);
  const std::size_t c = model.num_classes();
  ContributionMatrix cm;
  cm.target = target;
  cm.values = Matrix(paths.size(), c);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const Vector r = lrp_path_relevance(model, trace1, paths[p]);
    std::copy(r.begin(), r.end(), cm.values.row(p).begin());
  }
  const auto z = trace1.logits(target);
  cm.delta_z.assign(z.begin(), z.end());
  for (std::size_t j = 0; j < c; ++j) {
    double s = 0.0;
    for (std::size_t p = 0; p < paths.size(); ++p) s += cm.values(p, j);
    cm.completeness_error = std::max(cm.completeness_error, std::abs(cm.delta_z[j] - s));
  }
  cm.paths = std::move(paths);
  cm.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return cm;
}

inline ContributionMatrix lrp_contributions(const GnnModel& model, const Graph& g1, NodeId target,
                                            std::size_t cap = kDefaultPathCap) {
  return lrp_contributions(model, g1, forward(model, g1), target, cap);
}

}  // namespace axpath
