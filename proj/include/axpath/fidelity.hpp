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
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "axpath/attribution.hpp"
#include "axpath/error.hpp"
#include "axpath/forward.hpp"
#include "axpath/pruned.hpp"
#include "axpath/select.hpp"

namespace axpath {

/// Targets with KL(Pr(G1) || Pr(G0)) below this are not scored.
inline constexpr double kBaseKlFloor = 1e-8;

struct FidelityRecord {
  std::string dataset;
  std::uint64_t seed = 0;
  NodeId target = 0;
  Method method = Method::kConvex;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t level = 0;
  double fidelity = 0.0;
  double residual_kl = 0.0;
  double base_kl = 0.0;
};

inline constexpr const char* kFidelityCsvHeader =
    "dataset,seed,target,method,m,n,level,fidelity,residual_kl,base_kl";

inline std::string to_csv_row(const FidelityRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g", r.fidelity, r.residual_kl, r.base_kl);
  return r.dataset + ',' + std::to_string(r.seed) + ',' + std::to_string(r.target) + ',' +
         std::string(method_name(r.method)) + ',' + std::to_string(r.m) + ',' + std::to_string(r.n) +
         ',' + std::to_string(r.level) + buf;
}

/// KL(Pr(G1) || Pr(G_n)) where G_n adds only the chosen paths'
/// contributions to the G0 logits:
///   sum_j Pr_j(G1)(z1_j - z0_j - sum_{p in E} C_pj) - log Z(G1)
///     + log sum_j exp(z0_j + sum_{p in E} C_pj).
inline double residual_kl_via_contributions(const Matrix& contributions, std::span<const double> z0,
                                            std::span<const double> z1,
                                            std::span<const std::size_t> chosen) {
  const std::size_t c = z0.size();
  if (z1.size() != c || contributions.cols() != c) throw InputError("residual_kl: class dimension mismatch");
  Vector partial(z0.begin(), z0.end());
  for (std::size_t p : chosen) {
    if (p >= contributions.rows()) throw InputError("residual_kl: path index out of range");
    for (std::size_t j = 0; j < c; ++j) partial[j] += contributions(p, j);
  }
  const Vector pr1 = softmax(z1);
  double lin = 0.0;
  for (std::size_t j = 0; j < c; ++j) lin += pr1[j] * (z1[j] - partial[j]);
  const double kl = lin - log_sum_exp(z1) + log_sum_exp(partial);
  return std::max(kl, 0.0);  // rounding can leave -1e-17 at the minimum
}

/// KL(Pr(not G_n) || Pr(G0)) / KL(Pr(G1) || Pr(G0)), where not G_n is G1's
/// computation tree with the chosen altered paths deleted.
inline FidelityRecord fidelity_kl_minus(const GnnModel& model, const Graph& g1, const ForwardTrace& trace0,
                                        const ForwardTrace& trace1, const ContributionMatrix& cm,
                                        std::span<const std::size_t> chosen) {
  const NodeId target = cm.target;
  FidelityRecord rec;
  rec.target = target;
  rec.m = cm.num_paths();
  rec.n = chosen.size();
  const auto pr0 = trace0.distribution(target);
  const auto pr1 = trace1.distribution(target);
  rec.base_kl = kl_divergence(pr1, pr0);
  if (!(rec.base_kl >= kBaseKlFloor))
    throw DegenerateTarget("base KL " + std::to_string(rec.base_kl) + " below floor at node " +
                           std::to_string(target));
  std::vector<Path> removed;
  removed.reserve(chosen.size());
  for (std::size_t p : chosen) {
    if (p >= cm.num_paths()) throw InputError("chosen index " + std::to_string(p) + " is not an altered path");
    removed.push_back(cm.paths[p]);
  }
  const PrunedResult pruned = forward_pruned(model, g1, trace1, target, removed);
  const Vector pr_neg = softmax(pruned.logits);
  rec.fidelity = kl_divergence(pr_neg, pr0) / rec.base_kl;
  rec.residual_kl =
      residual_kl_via_contributions(cm.values, trace0.logits(target), trace1.logits(target), chosen);
  return rec;
}

/// Overload taking explicit paths; each must belong to cm.paths.
inline FidelityRecord fidelity_kl_minus(const GnnModel& model, const Graph& g1, const ForwardTrace& trace0,
                                        const ForwardTrace& trace1, const ContributionMatrix& cm,
                                        const PathSet& chosen) {
  std::vector<std::size_t> idx;
  idx.reserve(chosen.size());
  for (const Path& p : chosen) {
    auto i = cm.paths.index_of(p.nodes);
    if (!i) throw InputError("path " + to_string(p) + " is not an altered path");
    idx.push_back(*i);
  }
  return fidelity_kl_minus(model, g1, trace0, trace1, cm, idx);
}

}  // namespace axpath
