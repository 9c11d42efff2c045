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

// Shared fixtures and brute-force oracles. Oracles here deliberately avoid
// the library's adjacency lists, traversal and caching so that agreement is
// evidence rather than tautology.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <iterator>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "axpath/axpath.hpp"

namespace axtest {

using namespace axpath;

inline constexpr NodeId J = 0, K = 1, L = 2;

inline std::shared_ptr<const Matrix> make_features(std::size_t n, std::size_t d, std::mt19937_64& rng,
                                                   double zero_prob = 0.3) {
  auto m = std::make_shared<Matrix>(n, d);
  std::uniform_real_distribution<double> val(-1.0, 1.0), coin(0.0, 1.0);
  for (double& x : m->values()) x = coin(rng) < zero_prob ? 0.0 : val(rng);
  return m;
}

inline Graph make_graph(std::size_t n, std::vector<Edge> edges, std::shared_ptr<const Matrix> feats) {
  return Graph(n, edges, std::move(feats));
}

/// Erdos-Renyi graph with edge probability p.
inline Graph random_graph(std::size_t n, double p, std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (coin(rng) < p) edges.push_back(Edge{u, v});
  return Graph(n, edges, make_features(n, d, rng));
}

/// k distinct absent pairs of g.
inline EdgeDelta random_delta(const Graph& g, std::size_t k, std::mt19937_64& rng) {
  return simulate_evolution(g, k, rng());
}

inline std::vector<std::size_t> random_dims(std::size_t T, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> width(2, 5);
  std::vector<std::size_t> dims;
  for (std::size_t t = 0; t <= T; ++t) dims.push_back(width(rng));
  return dims;
}

/// Figure-1 snapshots: G0 = {J, K, L; (K, L)}, G1 adds (J, K).
struct FigureOne {
  Graph g0, g1;
  explicit FigureOne(std::shared_ptr<const Matrix> feats) {
    g0 = Graph(3, std::vector<Edge>{{K, L}}, feats);
    g1 = apply_delta(g0, EdgeDelta{{{J, K}}});
  }
};

/// Adjacency test that reads only the canonical edge list.
inline bool adjacent(const Graph& g, NodeId u, NodeId v) {
  if (u == v) return true;
  const Edge e = Edge::canonical(u, v);
  for (const Edge& f : g.edges())
    if (f == e) return true;
  return false;
}

/// Every sequence of T+1 node ids ending at root whose steps are edges or
/// self-loops: n^T candidates filtered, leaf first.
inline std::vector<std::vector<NodeId>> brute_paths(const Graph& g, NodeId root, std::size_t T) {
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> seq(T + 1);
  seq[T] = root;
  std::function<void(std::size_t)> fill = [&](std::size_t pos) {
    if (pos == static_cast<std::size_t>(-1)) {
      for (std::size_t t = 1; t <= T; ++t)
        if (!adjacent(g, seq[t - 1], seq[t])) return;
      out.push_back(seq);
      return;
    }
    for (NodeId v = 0; v < n; ++v) {
      seq[pos] = v;
      fill(pos - 1);
    }
  };
  fill(T - 1);
  std::sort(out.begin(), out.end());
  return out;
}

/// Dense forward pass: z^(t) = A H^(t-1) W^(t) with A the 0/1 adjacency
/// plus identity, evaluated in (aggregate, then project) order.
inline std::vector<Matrix> dense_forward(const GnnModel& model, const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<Matrix> pre;
  Matrix h = g.features();
  for (std::size_t t = 1; t <= model.num_layers(); ++t) {
    const Matrix& w = model.weight(t);
    Matrix agg(n, w.rows());
    for (NodeId v = 0; v < n; ++v)
      for (NodeId u = 0; u < n; ++u)
        if (adjacent(g, u, v))
          for (std::size_t k = 0; k < w.rows(); ++k) agg(v, k) += h(u, k);
    Matrix z(n, w.cols());
    for (NodeId v = 0; v < n; ++v)
      for (std::size_t a = 0; a < w.rows(); ++a)
        for (std::size_t b = 0; b < w.cols(); ++b) z(v, b) += agg(v, a) * w(a, b);
    pre.push_back(z);
    h = z;
    if (t < model.num_layers())
      for (double& x : h.values()) x = x > 0.0 ? x : 0.0;
  }
  return pre;
}

/// Root logits of the unrolled computation tree with the given leaf-first
/// chains deleted, by full recursion without any caching.
inline Vector tree_oracle(const GnnModel& model, const Graph& g, NodeId root,
                          const std::set<std::vector<NodeId>>& removed) {
  const std::size_t T = model.num_layers();
  std::vector<NodeId> chain(T + 1);
  chain[T] = root;
  std::function<Vector(NodeId, std::size_t)> eval = [&](NodeId v, std::size_t t) {
    const Matrix& w = model.weight(t);
    Vector z(w.cols(), 0.0);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      if (!adjacent(g, u, v)) continue;
      chain[t - 1] = u;
      Vector h;
      if (t == 1) {
        if (removed.count(chain)) continue;
        const auto x = g.features().row(u);
        h.assign(x.begin(), x.end());
      } else {
        h = eval(u, t - 1);
        for (double& x : h) x = x > 0.0 ? x : 0.0;
      }
      for (std::size_t a = 0; a < w.rows(); ++a)
        for (std::size_t b = 0; b < w.cols(); ++b) z[b] += h[a] * w(a, b);
    }
    return z;
  };
  return eval(root, T);
}

/// Direct KL between two softmaxes, written out longhand.
inline double direct_kl(const std::vector<double>& z1, const std::vector<double>& z0) {
  auto sm = [](const std::vector<double>& z) {
    double mx = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) s += (p[j] = std::exp(z[j] - mx));
    for (double& x : p) x /= s;
    return p;
  };
  const auto p = sm(z1), q = sm(z0);
  double kl = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0) kl += p[j] * std::log(p[j] / q[j]);
  return kl;
}

inline Vector to_vec(std::span<const double> s) { return Vector(s.begin(), s.end()); }

/// Random selection problem whose contributions are complete by
/// construction: pr1 = softmax(z0 + sum_p C[p]).
struct RandomProblem {
  Matrix c;
  SelectionProblem prob;
  Vector z1;
  /// The problem with its matrix pointer rebound to this object.
  const SelectionProblem& get() {
    prob.contributions = &c;
    return prob;
  }
};

inline RandomProblem random_problem(std::size_t m, std::size_t classes, std::size_t n, std::mt19937_64& rng,
                                    double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  RandomProblem r;
  r.c = Matrix(m, classes);
  for (double& x : r.c.values()) x = g(rng);
  r.prob.z0.resize(classes);
  for (double& x : r.prob.z0) x = g(rng);
  r.z1 = r.prob.z0;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t j = 0; j < classes; ++j) r.z1[j] += r.c(p, j);
  r.prob.pr1 = softmax(r.z1);
  r.prob.n = n;
  return r;
}

/// Capped-simplex projection by scanning every breakpoint of the piecewise
/// linear mass function lambda -> sum clip(v - lambda, 0, 1) and solving the
/// bracketing piece exactly.
inline std::vector<double> kkt_projection_oracle(const std::vector<double>& v, double n) {
  std::vector<long double> bp;
  for (double x : v) {
    bp.push_back(x);
    bp.push_back(static_cast<long double>(x) - 1.0L);
  }
  std::sort(bp.begin(), bp.end());
  auto mass = [&](long double lambda) {
    long double s = 0.0L;
    for (double x : v) s += std::clamp(static_cast<long double>(x) - lambda, 0.0L, 1.0L);
    return s;
  };
  long double lambda = bp.front();
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const long double a = bp[i], b = bp[i + 1];
    const long double ma = mass(a), mb = mass(b);
    if (ma >= n && mb <= n) {
      lambda = ma == mb ? a : a + (ma - n) * (b - a) / (ma - mb);
      break;
    }
  }
  std::vector<double> x;
  for (double vp : v) x.push_back(static_cast<double>(std::clamp(vp - lambda, 0.0L, 1.0L)));
  return x;
}

/// Calls fn(indices) for every n-subset of {0..m-1}, in lexicographic order.
inline void for_each_subset(std::size_t m, std::size_t n,
                            const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    std::size_t i = n;
    while (i > 0 && idx[i - 1] == m - n + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t k = i; k < n; ++k) idx[k] = idx[k - 1] + 1;
  }
}

/// Two-class problem with contributions (-9, 10, 1) on class 0 and z0 = 0.
struct IntroExample {
  Matrix c{3, 2};
  SelectionProblem prob;
  IntroExample() {
    c(0, 0) = -9.0;
    c(1, 0) = 10.0;
    c(2, 0) = 1.0;
    prob.contributions = &c;
    prob.z0 = {0.0, 0.0};
    prob.pr1 = softmax(Vector{2.0, 0.0});
    prob.n = 1;
  }
  IntroExample(const IntroExample&) = delete;
};

}  // namespace axtest
