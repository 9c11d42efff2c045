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

#include <gtest/gtest.h>

#include "support.hpp"

namespace axtest {
namespace {

struct Instance {
  GnnModel model;
  Graph g0, g1;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t T, double p, std::size_t added) {
  const auto dims = random_dims(T, rng);
  Graph g0 = random_graph(n, p, dims[0], rng);
  Graph g1 = apply_delta(g0, random_delta(g0, added, rng));
  return Instance{random_model(dims, rng()), std::move(g0), std::move(g1)};
}

TEST(Attribution, TwoNodeSingleLayer) {
  auto x = std::make_shared<Matrix>(2, 1);
  (*x)(0, 0) = 1.0;
  (*x)(1, 0) = 2.0;
  const Graph g0(2, std::vector<Edge>{}, x);
  const Graph g1 = apply_delta(g0, EdgeDelta{{{J, K}}});
  const GnnModel model(std::vector<Matrix>{Matrix(1, 1, 1.0)});
  const ContributionMatrix cm = contribution_matrix(model, g0, g1, J);
  ASSERT_EQ(cm.num_paths(), 1u);
  EXPECT_EQ(cm.paths[0].nodes, (std::vector<NodeId>{K, J}));
  EXPECT_EQ(cm.values(0, 0), 2.0);
  EXPECT_EQ(cm.delta_z[0], 2.0);
  EXPECT_EQ(cm.completeness_error, 0.0);
}

TEST(Attribution, DiffFromReference) {
  // 2 layers, J-K added, L hangs off K. theta1 = [[1]], theta2 = [[1, -1]].
  auto x = std::make_shared<Matrix>(3, 1);
  (*x)(J, 0) = 1.0;
  (*x)(K, 0) = 2.0;
  (*x)(L, 0) = 4.0;
  FigureOne fig(x);
  Matrix w2(1, 2);
  w2(0, 0) = 1.0;
  w2(0, 1) = -1.0;
  const GnnModel model(std::vector<Matrix>{Matrix(1, 1, 1.0), w2});
  const ForwardTrace t0 = forward(model, fig.g0), t1 = forward(model, fig.g1);
  ReferencePair pair(model, &t0, t1, J);
  // Path (L, K, J): split 2, so layers 0 and 1 take no reference.
  const Path p{{L, K, J}, 2};
  EXPECT_EQ(diff_from_reference(pair, p, 0).dh, (Vector{4.0}));
  // z1(K) on G1 = 1 + 2 + 4 = 7.
  EXPECT_EQ(diff_from_reference(pair, p, 1).dz, (Vector{7.0}));
  // z2(J): G1 = h(J) + h(K) = 3 + 7 = 10 per unit, G0 = 1.
  EXPECT_EQ(diff_from_reference(pair, p, 2).dz, (Vector{9.0, -9.0}));
  // Path (K, J, J): split 1, layer 1 differences against G0: z1(J) 3 vs 1.
  const Path q{{K, J, J}, 1};
  EXPECT_EQ(diff_from_reference(pair, q, 1).dz, (Vector{2.0}));
  EXPECT_EQ(diff_from_reference(pair, q, 1).dh, (Vector{2.0}));
  EXPECT_THROW(diff_from_reference(pair, p, 3), InputError);
}

TEST(Attribution, MultiplierOutputIsWeightAndDeadGateIsZero) {
  auto x = std::make_shared<Matrix>(3, 1);
  (*x)(J, 0) = -1.0;
  (*x)(K, 0) = -2.0;
  (*x)(L, 0) = -4.0;
  FigureOne fig(x);
  Matrix w2(1, 2);
  w2(0, 0) = 0.5;
  w2(0, 1) = -3.0;
  const GnnModel model(std::vector<Matrix>{Matrix(1, 1, 1.0), w2});
  const ForwardTrace t0 = forward(model, fig.g0), t1 = forward(model, fig.g1);
  ReferencePair pair(model, &t0, t1, J);
  const Path p{{L, K, J}, 2};
  EXPECT_EQ(multiplier(pair, p, 2, 0, 1), -3.0);
  // z1(K) = -7 on G1 with no reference: the ReLU gate is closed.
  EXPECT_EQ(multiplier(pair, p, 1, 0, 0), 0.0);
  EXPECT_THROW(multiplier(pair, p, 0, 0, 0), InputError);
  const Vector c = path_contribution(pair, p);
  EXPECT_EQ(c, (Vector{0.0, 0.0}));
}

TEST(Attribution, OneLayerContributionIsLeafMessage) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance s = random_instance(rng, 12, 1, 0.2, 3);
    for (NodeId v = 0; v < 12; ++v) {
      const ContributionMatrix cm = contribution_matrix(s.model, s.g0, s.g1, v);
      for (std::size_t p = 0; p < cm.num_paths(); ++p) {
        // 1 layer, no nonlinearity: C[p] = x_leaf W.
        const auto xr = s.g1.features().row(cm.paths[p].nodes[0]);
        const Matrix& w = s.model.weight(1);
        for (std::size_t j = 0; j < w.cols(); ++j) {
          double want = 0.0;
          for (std::size_t a = 0; a < w.rows(); ++a) want += xr[a] * w(a, j);
          EXPECT_NEAR(cm.values(p, j), want, 1e-12);
        }
      }
    }
  }
}

TEST(AttributionProperty, CompletenessOnRandomGraphs) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance s = random_instance(rng, 50, 3, 0.06, 10);
    const DeltaIndex index(s.g0, s.g1, 3);
    const ForwardTrace t0 = forward(s.model, s.g0), t1 = forward(s.model, s.g1);
    for (NodeId v = 0; v < 50; v += 7) {
      const ContributionMatrix cm = contribution_matrix(s.model, index, t0, t1, v);
      ReferencePair pv(s.model, &t0, t1, v);
      for (std::size_t j = 0; j < cm.num_classes(); ++j) {
        double sum = 0.0;
        for (std::size_t p = 0; p < cm.num_paths(); ++p) sum += cm.values(p, j);
        EXPECT_NEAR(sum, t1.logits(v)[j] - t0.logits(v)[j], 1e-6);
      }
      EXPECT_LT(cm.completeness_error, 1e-6);
      for (std::size_t p = 0; p < cm.num_paths(); p += 5) {
        const Vector c = path_contribution(pv, cm.paths[p]);
        for (std::size_t j = 0; j < c.size(); ++j) EXPECT_NEAR(c[j], cm.values(p, j), 1e-10);
      }
      if (cm.num_paths() == 0) {
        for (std::size_t j = 0; j < cm.num_classes(); ++j) EXPECT_EQ(cm.delta_z[j], 0.0);
      }
    }
  }
}

TEST(AttributionProperty, ZeroReferenceEqualsLrp) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t T = 1 + trial % 3;
    const auto dims = random_dims(T, rng);
    const Graph g = random_graph(15, 0.15, dims[0], rng);
    const GnnModel model = random_model(dims, rng());
    const ForwardTrace tr = forward(model, g);
    for (NodeId v = 0; v < 15; v += 4) {
      const ContributionMatrix a = contribution_matrix_zero_reference(model, g, tr, v);
      const ContributionMatrix b = lrp_contributions(model, g, tr, v);
      ASSERT_EQ(a.num_paths(), b.num_paths());
      for (std::size_t p = 0; p < a.num_paths(); ++p) {
        ASSERT_EQ(a.paths[p].nodes, b.paths[p].nodes);
        for (std::size_t j = 0; j < a.num_classes(); ++j) EXPECT_NEAR(a.values(p, j), b.values(p, j), 1e-8);
      }
      EXPECT_LT(a.completeness_error, 1e-8);
    }
  }
}

TEST(Lrp, TwoNodeRelevances) {
  auto x = std::make_shared<Matrix>(2, 1);
  (*x)(0, 0) = 1.0;
  (*x)(1, 0) = 2.0;
  const Graph g(2, std::vector<Edge>{{J, K}}, x);
  const GnnModel model(std::vector<Matrix>{Matrix(1, 1, 1.0)});
  const ContributionMatrix cm = lrp_contributions(model, g, J);
  ASSERT_EQ(cm.num_paths(), 2u);
  EXPECT_EQ(cm.paths[0].nodes, (std::vector<NodeId>{J, J}));
  EXPECT_EQ(cm.values(0, 0), 1.0);
  EXPECT_EQ(cm.values(1, 0), 2.0);
}

TEST(Lrp, ZeroFeaturesGiveZero) {
  std::mt19937_64 rng(53);
  const Graph g(5, std::vector<Edge>{{0, 1}, {1, 2}, {3, 4}}, std::make_shared<Matrix>(5, 3));
  const GnnModel model = random_model({3, 4, 2}, 5);
  const ContributionMatrix cm = lrp_contributions(model, g, 1);
  for (double v : cm.values.values()) EXPECT_EQ(v, 0.0);
}

TEST(LrpProperty, LinearInTheOutputWeights) {
  // Scaling the last layer scales every relevance by the same factor.
  std::mt19937_64 rng(59);
  const Graph g = random_graph(12, 0.25, 3, rng);
  GnnModel model = random_model({3, 4, 3}, 7);
  const ContributionMatrix a = lrp_contributions(model, g, 2);
  for (double& w : model.mutable_weights()[1].values()) w *= -1.5;
  const ContributionMatrix b = lrp_contributions(model, g, 2);
  for (std::size_t i = 0; i < a.values.values().size(); ++i)
    EXPECT_NEAR(b.values.values()[i], -1.5 * a.values.values()[i], 1e-10);
}

TEST(Attribution, RejectsBadTarget) {
  FigureOne fig(std::make_shared<Matrix>(3, 2, 1.0));
  const GnnModel model = random_model({2, 2}, 1);
  EXPECT_THROW(contribution_matrix(model, fig.g0, fig.g1, 3), InputError);
  EXPECT_THROW(contribution_matrix(model, fig.g1, fig.g0, 0), InputError);
}

TEST(Attribution, PathCapSurfaces) {
  std::mt19937_64 rng(61);
  const Instance s = random_instance(rng, 30, 3, 0.3, 10);
  AttributionOptions opts;
  opts.path_cap = 3;
  EXPECT_THROW(contribution_matrix(s.model, DeltaIndex(s.g0, s.g1, 3), forward(s.model, s.g0),
                                   forward(s.model, s.g1), 0, opts),
               PathCapExceeded);
}

}  // namespace
}  // namespace axtest
