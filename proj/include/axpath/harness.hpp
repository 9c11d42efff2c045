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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "axpath/attribution.hpp"
#include "axpath/baselines.hpp"
#include "axpath/error.hpp"
#include "axpath/fidelity.hpp"
#include "axpath/forward.hpp"
#include "axpath/graph.hpp"
#include "axpath/model.hpp"
#include "axpath/paths.hpp"
#include "axpath/select.hpp"

namespace axpath {

/// Max-norm tolerance for calling two class distributions different.
inline constexpr double kTargetTolerance = 1e-8;

/// Number of paths n to remove at each of the (up to) ten complexity levels
/// of a target with m altered paths.
inline std::vector<std::size_t> schedule_for(std::size_t m) {
  std::vector<std::size_t> out;
  if (m <= 10) {
    for (std::size_t n = 1; n <= m; ++n) out.push_back(n);
  } else if (m <= 30) {
    for (std::size_t n = 1; n <= 10; ++n) out.push_back(n);
  } else if (m < 100) {
    for (std::size_t n = 10; n <= 28; n += 2) out.push_back(n);
  } else {
    for (std::size_t n = 10; n <= 55; n += 5) out.push_back(n);
  }
  return out;
}

/// k node pairs absent from g, drawn uniformly without replacement.
inline EdgeDelta simulate_evolution(const Graph& g, std::size_t k, std::uint64_t seed) {
  const std::uint64_t n = g.num_nodes();
  const std::uint64_t pairs = n < 2 ? 0 : n * (n - 1) / 2;
  const std::uint64_t absent = pairs - g.num_edges();
  if (k > absent)
    throw InputError("cannot add " + std::to_string(k) + " edges: only " + std::to_string(absent) +
                     " node pairs are absent");
  EdgeDelta delta;
  if (k == 0) return delta;
  std::mt19937_64 rng(seed);
  if (2 * k > absent) {
    // Dense regime: rejection would stall, so draw from the explicit list.
    std::vector<Edge> pool;
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v)
        if (!g.has_edge(u, v)) pool.push_back(Edge{u, v});
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      delta.added.push_back(pool[i]);
    }
    return delta;
  }
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
  std::set<Edge> seen;
  while (delta.added.size() < k) {
    const NodeId a = node(rng), b = node(rng);
    if (a == b || g.has_edge(a, b)) continue;
    const Edge e = Edge::canonical(a, b);
    if (seen.insert(e).second) delta.added.push_back(e);
  }
  return delta;
}

/// Nodes whose class distribution moved by more than `tol` in max-norm.
inline std::vector<NodeId> collect_targets(const ForwardTrace& trace0, const ForwardTrace& trace1,
                                           double tol = kTargetTolerance) {
  if (trace0.num_nodes() != trace1.num_nodes()) throw InputError("traces cover different node counts");
  std::vector<NodeId> out;
  for (NodeId v = 0; v < trace0.num_nodes(); ++v) {
    const auto p0 = trace0.distribution(v);
    const auto p1 = trace1.distribution(v);
    double d = 0.0;
    for (std::size_t j = 0; j < p0.size(); ++j) d = std::max(d, std::abs(p1[j] - p0[j]));
    if (d > tol) out.push_back(v);
  }
  return out;
}

inline std::vector<NodeId> collect_targets(const GnnModel& model, const Graph& g0, const Graph& g1,
                                           double tol = kTargetTolerance) {
  return collect_targets(forward(model, g0), forward(model, g1), tol);
}

struct SelectionContext {
  const GnnModel* model = nullptr;
  const Graph* g1 = nullptr;
  const ForwardTrace* trace0 = nullptr;
  const ForwardTrace* trace1 = nullptr;
  const ContributionMatrix* cm = nullptr;
  bool topk_absolute = false;
  ConvexSolverOptions solver;
};

/// Runs one selection method for n paths over cm's altered paths.
inline SelectionResult select_paths(const SelectionContext& ctx, Method method, std::size_t n) {
  const NodeId target = ctx.cm->target;
  const auto z0 = ctx.trace0->logits(target);
  const auto z1 = ctx.trace1->logits(target);
  const auto pr1 = ctx.trace1->distribution(target);
  SelectionProblem prob{&ctx.cm->values, Vector(z0.begin(), z0.end()), Vector(pr1.begin(), pr1.end()), n};
  switch (method) {
    case Method::kConvex: return solve_convex(prob, ctx.solver);
    case Method::kLinear: return solve_linear(prob);
    case Method::kTopk: return rank_topk(prob, ctx.topk_absolute);
    case Method::kDeeplift: return rank_deeplift(prob, argmax(z0), argmax(z1));
    case Method::kGrad: return rank_grad(*ctx.model, *ctx.g1, *ctx.trace1, ctx.cm->paths, n, argmax(z1));
    case Method::kLrp: return rank_lrp(*ctx.model, *ctx.trace1, ctx.cm->paths, n, argmax(z1));
  }
  throw InputError("unknown method");
}

struct ExperimentConfig {
  std::string dataset_name = "dataset";
  std::size_t num_added_edges = 200;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::size_t layers = 2;
  std::size_t path_cap = kDefaultPathCap;
  std::size_t threads = 0;  ///< 0 picks hardware concurrency
  bool topk_absolute = false;
  /// Keep only targets whose predicted class (argmax) changed.
  bool prediction_changed_only = false;
  ConvexSolverOptions solver;

  void validate(const GnnModel& model) const {
    if (repeats < 1) throw InputError("repeats must be >= 1");
    if (methods.empty()) throw InputError("no selection method configured");
    if (layers != model.num_layers())
      throw InputError("config asks for " + std::to_string(layers) + " layers, model has " +
                       std::to_string(model.num_layers()));
  }
};

struct TimingRecord {
  std::uint64_t seed = 0;
  NodeId target = 0;
  std::size_t m = 0;
  double base_ms = 0.0;       ///< path enumeration + attribution of this target
  double shared_ms = 0.0;     ///< forwards on G0 and G1 plus the delta index, shared by all targets
  double opt_ms = 0.0;        ///< one convex solve, averaged over the target's levels
  double opt_total_ms = 0.0;  ///< all convex solves of the target
  double select_ms = 0.0;     ///< every configured method, summed over levels
  double eval_ms = 0.0;       ///< fidelity evaluation of every selection
};

inline constexpr const char* kTimingCsvHeader =
    "seed,target,m,base_ms,shared_ms,opt_ms,opt_total_ms,select_ms,eval_ms";

inline std::string to_csv_row(const TimingRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%llu,%u,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f",
                static_cast<unsigned long long>(r.seed), r.target, r.m, r.base_ms, r.shared_ms, r.opt_ms,
                r.opt_total_ms, r.select_ms, r.eval_ms);
  return buf;
}

struct SummaryRow {
  Method method = Method::kConvex;
  std::size_t level = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for a single record
};

struct ExperimentReport {
  std::vector<FidelityRecord> records;
  std::vector<TimingRecord> timings;
  std::vector<SummaryRow> summary;
  std::size_t targets = 0;       ///< |V*| summed over repeats
  std::size_t explained = 0;     ///< targets that produced records
  std::size_t degenerate = 0;    ///< base KL under the floor
  std::size_t failed = 0;        ///< path cap or numerical failure
  std::vector<std::string> log;  ///< deterministic order
};

/// Mean and sample std of fidelity per (method, level).
inline std::vector<SummaryRow> summarize(const std::vector<FidelityRecord>& records) {
  std::map<std::pair<Method, std::size_t>, std::vector<double>> groups;
  for (const auto& r : records) groups[{r.method, r.level}].push_back(r.fidelity);
  std::vector<SummaryRow> out;
  for (const auto& [key, vals] : groups) {
    SummaryRow row;
    row.method = key.first;
    row.level = key.second;
    row.count = vals.size();
    row.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    if (vals.size() > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - row.mean) * (v - row.mean);
      row.std = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    }
    out.push_back(row);
  }
  return out;
}

namespace detail {

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct TargetOutcome {
  enum class Status { kOk, kDegenerate, kFailed } status = Status::kOk;
  std::vector<FidelityRecord> records;
  TimingRecord timing;
  std::string message;
};

inline double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline TargetOutcome explain_target(const ExperimentConfig& cfg, const GnnModel& model, const DeltaIndex& index,
                                    const ForwardTrace& trace0, const ForwardTrace& trace1, NodeId target,
                                    std::uint64_t seed) {
  TargetOutcome out;
  out.timing.seed = seed;
  out.timing.target = target;
  const std::string where = "seed " + std::to_string(seed) + " node " + std::to_string(target) + ": ";
  const double base_kl = kl_divergence(trace1.distribution(target), trace0.distribution(target));
  if (!(base_kl >= kBaseKlFloor)) {
    out.status = TargetOutcome::Status::kDegenerate;
    out.message = where + "skipped, base KL " + std::to_string(base_kl) + " below floor";
    return out;
  }
  ContributionMatrix cm;
  try {
    AttributionOptions opts;
    opts.path_cap = cfg.path_cap;
    cm = contribution_matrix(model, index, trace0, trace1, target, opts);
  } catch (const std::exception& e) {
    out.status = TargetOutcome::Status::kFailed;
    out.message = where + "skipped, " + e.what();
    return out;
  }
  out.timing.m = cm.num_paths();
  out.timing.base_ms = cm.elapsed_ms;
  SelectionContext ctx{&model, &index.g1(), &trace0, &trace1, &cm, cfg.topk_absolute, cfg.solver};
  const auto levels = schedule_for(cm.num_paths());
  try {
    for (Method method : cfg.methods) {
      for (std::size_t level = 0; level < levels.size(); ++level) {
        auto start = std::chrono::steady_clock::now();
        const SelectionResult sel = select_paths(ctx, method, levels[level]);
        const double sel_ms = ms_since(start);
        out.timing.select_ms += sel_ms;
        if (method == Method::kConvex) out.timing.opt_total_ms += sel_ms;
        start = std::chrono::steady_clock::now();
        FidelityRecord rec = fidelity_kl_minus(model, index.g1(), trace0, trace1, cm, sel.chosen);
        out.timing.eval_ms += ms_since(start);
        rec.dataset = cfg.dataset_name;
        rec.seed = seed;
        rec.method = method;
        rec.level = level + 1;
        out.records.push_back(std::move(rec));
      }
    }
    if (!levels.empty()) out.timing.opt_ms = out.timing.opt_total_ms / static_cast<double>(levels.size());
  } catch (const std::exception& e) {
    out.status = TargetOutcome::Status::kFailed;
    out.records.clear();
    out.message = where + "skipped, " + e.what();
  }
  return out;
}

}  // namespace detail

/// Evolution, target collection, attribution, selection and fidelity over
/// cfg.repeats independent evolutions of g0.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const Graph& g0, const GnnModel& model) {
  cfg.validate(model);
  ExperimentReport report;
  report.log.push_back("targets with m <= 10 use n = 1..m; m >= 100 uses the n = 10..55 schedule");
  if (cfg.num_added_edges == 0) {
    report.log.push_back("no edges added: nothing changes, report is empty");
    return report;
  }
  std::mt19937_64 master(cfg.seed);
  std::vector<std::uint64_t> seeds(cfg.repeats);
  for (auto& s : seeds) s = master();
  auto start = std::chrono::steady_clock::now();
  const ForwardTrace trace0 = forward(model, g0);
  const double forward0_ms = detail::ms_since(start);
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const Graph g1 = apply_delta(g0, simulate_evolution(g0, cfg.num_added_edges, seeds[r]));
    start = std::chrono::steady_clock::now();
    const DeltaIndex index(g0, g1, model.num_layers());
    const ForwardTrace trace1 = forward(model, g1);
    const double shared_ms = forward0_ms + detail::ms_since(start);
    std::vector<NodeId> targets = collect_targets(trace0, trace1);
    if (cfg.prediction_changed_only)
      std::erase_if(targets, [&](NodeId v) { return argmax(trace0.logits(v)) == argmax(trace1.logits(v)); });
    report.targets += targets.size();
    std::vector<detail::TargetOutcome> outcomes(targets.size());
    detail::parallel_for(targets.size(), cfg.threads, [&](std::size_t i) {
      outcomes[i] = detail::explain_target(cfg, model, index, trace0, trace1, targets[i], seeds[r]);
    });
    for (auto& o : outcomes) {
      switch (o.status) {
        case detail::TargetOutcome::Status::kOk:
          ++report.explained;
          o.timing.shared_ms = shared_ms;
          report.timings.push_back(o.timing);
          for (auto& rec : o.records) report.records.push_back(std::move(rec));
          break;
        case detail::TargetOutcome::Status::kDegenerate:
          ++report.degenerate;
          report.log.push_back(o.message);
          break;
        case detail::TargetOutcome::Status::kFailed:
          ++report.failed;
          report.log.push_back(o.message);
          break;
      }
    }
  }
  std::sort(report.records.begin(), report.records.end(), [](const FidelityRecord& a, const FidelityRecord& b) {
    return std::tie(a.seed, a.target, a.method, a.level) < std::tie(b.seed, b.target, b.method, b.level);
  });
  std::sort(report.timings.begin(), report.timings.end(), [](const TimingRecord& a, const TimingRecord& b) {
    return std::tie(a.seed, a.target) < std::tie(b.seed, b.target);
  });
  report.summary = summarize(report.records);
  return report;
}

inline void write_results_csv(std::ostream& os, const std::vector<FidelityRecord>& records) {
  os << kFidelityCsvHeader << '\n';
  for (const auto& r : records) os << to_csv_row(r) << '\n';
}

inline void write_timing_csv(std::ostream& os, const std::vector<TimingRecord>& timings) {
  os << kTimingCsvHeader << '\n';
  for (const auto& t : timings) os << to_csv_row(t) << '\n';
}

inline void write_summary(std::ostream& os, const ExperimentReport& report) {
  os << "targets " << report.targets << ", explained " << report.explained << ", degenerate "
     << report.degenerate << ", failed " << report.failed << '\n';
  if (report.summary.empty()) {
    os << "no fidelity records\n";
  } else {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %5s %7s %12s %12s\n", "method", "level", "count", "mean", "std");
    os << buf;
    for (const auto& row : report.summary) {
      std::snprintf(buf, sizeof buf, "%-10s %5zu %7zu %12.6f %12.6f\n",
                    std::string(method_name(row.method)).c_str(), row.level, row.count, row.mean, row.std);
      os << buf;
    }
  }
  for (const auto& line : report.log) os << "# " << line << '\n';
}

struct PreservationOptions {
  std::size_t layers = 2;
  std::size_t hidden = 16;
  std::size_t num_added_edges = 200;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::size_t path_cap = kDefaultPathCap;
  std::size_t threads = 0;
  bool check_endpoints = true;
  /// Negative control: add 1.0 to one contribution entry before checking.
  bool corrupt = false;
};

struct PreservationReport {
  std::size_t targets = 0;
  std::size_t preserved = 0;
  std::size_t failed = 0;  ///< attribution did not complete (path cap)
  double max_error = 0.0;
  std::size_t endpoint_targets = 0;  ///< targets above the base-KL floor
  double max_start_deviation = 0.0;  ///< max |fidelity(n = 0) - 1|
  double max_full_fidelity = 0.0;    ///< max fidelity(n = m)

  bool vacuous() const { return targets == 0; }
  double rate() const {
    return targets == 0 ? 1.0 : static_cast<double>(preserved) / static_cast<double>(targets);
  }
};

/// Completeness over V* for randomly parameterised models, one fresh model
/// and evolution per repeat.
inline PreservationReport preservation_rate(const Graph& g0, std::size_t num_classes,
                                            const PreservationOptions& opts) {
  if (opts.layers < 1) throw InputError("layers must be >= 1");
  PreservationReport report;
  std::mt19937_64 master(opts.seed);
  std::vector<std::size_t> dims{g0.feature_dim()};
  for (std::size_t t = 1; t < opts.layers; ++t) dims.push_back(opts.hidden);
  dims.push_back(num_classes);
  for (std::size_t r = 0; r < opts.repeats; ++r) {
    const std::uint64_t model_seed = master();
    const std::uint64_t evo_seed = master();
    const GnnModel model = random_model(dims, model_seed);
    const Graph g1 = apply_delta(g0, simulate_evolution(g0, opts.num_added_edges, evo_seed));
    const DeltaIndex index(g0, g1, model.num_layers());
    const ForwardTrace trace0 = forward(model, g0);
    const ForwardTrace trace1 = forward(model, g1);
    const std::vector<NodeId> targets = collect_targets(trace0, trace1);
    struct Outcome {
      bool ok = false, preserved = false, endpoints = false;
      double error = 0.0, start_dev = 0.0, full = 0.0;
    };
    std::vector<Outcome> outcomes(targets.size());
    detail::parallel_for(targets.size(), opts.threads, [&](std::size_t i) {
      Outcome& o = outcomes[i];
      AttributionOptions aopts;
      aopts.path_cap = opts.path_cap;
      aopts.verify = false;
      ContributionMatrix cm;
      try {
        cm = contribution_matrix(model, index, trace0, trace1, targets[i], aopts);
      } catch (const PathCapExceeded&) {
        return;
      }
      o.ok = true;
      if (opts.corrupt && cm.num_paths() > 0) cm.values(0, 0) += 1.0;
      for (std::size_t j = 0; j < cm.num_classes(); ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < cm.num_paths(); ++p) s += cm.values(p, j);
        o.error = std::max(o.error, std::abs(cm.delta_z[j] - s));
      }
      o.preserved = o.error < kCompletenessTolerance;
      if (!opts.check_endpoints) return;
      const double base_kl = kl_divergence(trace1.distribution(targets[i]), trace0.distribution(targets[i]));
      if (!(base_kl >= kBaseKlFloor)) return;
      o.endpoints = true;
      const FidelityRecord none = fidelity_kl_minus(model, g1, trace0, trace1, cm, std::span<const std::size_t>{});
      std::vector<std::size_t> all(cm.num_paths());
      std::iota(all.begin(), all.end(), 0);
      const FidelityRecord full = fidelity_kl_minus(model, g1, trace0, trace1, cm, all);
      o.start_dev = std::abs(none.fidelity - 1.0);
      o.full = full.fidelity;
    });
    for (const Outcome& o : outcomes) {
      ++report.targets;
      if (!o.ok) {
        ++report.failed;
        continue;
      }
      report.preserved += o.preserved;
      report.max_error = std::max(report.max_error, o.error);
      if (o.endpoints) {
        ++report.endpoint_targets;
        report.max_start_deviation = std::max(report.max_start_deviation, o.start_dev);
        report.max_full_fidelity = std::max(report.max_full_fidelity, o.full);
      }
    }
  }
  return report;
}

}  // namespace axpath
