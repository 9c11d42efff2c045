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
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "axpath/error.hpp"
#include "axpath/forward.hpp"
#include "axpath/matrix.hpp"

namespace axpath {

enum class Method { kConvex, kLinear, kTopk, kDeeplift, kGrad, kLrp };

inline constexpr Method kAllMethods[] = {Method::kConvex,   Method::kLinear, Method::kTopk,
                                         Method::kDeeplift, Method::kGrad,   Method::kLrp};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::kConvex: return "convex";
    case Method::kLinear: return "linear";
    case Method::kTopk: return "topk";
    case Method::kDeeplift: return "deeplift";
    case Method::kGrad: return "grad";
    case Method::kLrp: return "lrp";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : kAllMethods)
    if (method_name(m) == s) return m;
  throw InputError("unknown method '" + std::string(s) + "'");
}

/// Inputs of the path-selection program for one target:
///   min_x  -sum_j pr1_j (C^T x)_j + logsumexp(z0 + C^T x)
///   s.t.   x in [0,1]^m, sum(x) = n.
struct SelectionProblem {
  const Matrix* contributions = nullptr;  ///< m x c
  Vector z0;
  Vector pr1;
  std::size_t n = 0;

  std::size_t num_paths() const { return contributions->rows(); }
  std::size_t num_classes() const { return contributions->cols(); }
};

struct SelectionResult {
  Method method = Method::kConvex;
  Vector x_star;
  std::vector<std::size_t> chosen;  ///< path indices, best first
  Vector objective_trace;
  std::size_t iterations = 0;
  bool converged = true;
  bool degenerate = false;  ///< score vector carries no information
};

inline void validate(const SelectionProblem& prob) {
  if (!prob.contributions) throw InputError("selection problem has no contribution matrix");
  const std::size_t m = prob.num_paths();
  if (prob.n > m) throw InputError("n = " + std::to_string(prob.n) + " exceeds m = " + std::to_string(m));
  if (prob.z0.size() != prob.num_classes() || prob.pr1.size() != prob.num_classes())
    throw InputError("selection problem class dimension mismatch");
}

namespace detail {

inline Vector shifted_logits(const SelectionProblem& prob, std::span<const double> x) {
  const Matrix& C = *prob.contributions;
  Vector y(prob.z0);
  for (std::size_t p = 0; p < C.rows(); ++p) {
    if (x[p] == 0.0) continue;
    const auto row = C.row(p);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += x[p] * row[j];
  }
  return y;
}

inline double objective_from_logits(const SelectionProblem& prob, std::span<const double> y) {
  double lin = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) lin += prob.pr1[j] * (y[j] - prob.z0[j]);
  return -lin + log_sum_exp(y);
}

}  // namespace detail

inline double objective(const SelectionProblem& prob, std::span<const double> x) {
  return detail::objective_from_logits(prob, detail::shifted_logits(prob, x));
}

/// d f / d x_p = sum_j (softmax(z0 + C^T x)_j - pr1_j) C[p][j].
inline Vector gradient(const SelectionProblem& prob, std::span<const double> x) {
  const Matrix& C = *prob.contributions;
  Vector s = softmax(detail::shifted_logits(prob, x));
  for (std::size_t j = 0; j < s.size(); ++j) s[j] -= prob.pr1[j];
  Vector g(C.rows(), 0.0);
  for (std::size_t p = 0; p < C.rows(); ++p) {
    const auto row = C.row(p);
    double acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) acc += s[j] * row[j];
    g[p] = acc;
  }
  return g;
}

/// Euclidean projection onto {x in [0,1]^m : sum x = n}. The solution is
/// x_p = clip(v_p - lambda, 0, 1); lambda is bracketed by bisection and then
/// solved exactly on its linear piece.
inline Vector project_capped_simplex(std::span<const double> v, double n) {
  const std::size_t m = v.size();
  if (!(n >= 0.0) || n > static_cast<double>(m))
    throw InputError("projection target " + std::to_string(n) + " outside [0, m]");
  auto mass = [&](double lambda) {
    double s = 0.0;
    for (double vp : v) s += std::clamp(vp - lambda, 0.0, 1.0);
    return s;
  };
  Vector x(m);
  if (m == 0) return x;
  // mass() is non-increasing in lambda: mass(lo) = m >= n, mass(hi) = 0 <= n.
  double lo = *std::min_element(v.begin(), v.end()) - 1.0;
  double hi = *std::max_element(v.begin(), v.end());
  const double tol = 1e-12 * std::max(1.0, n);
  double lambda = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    lambda = 0.5 * (lo + hi);
    double fixed = 0.0, free_sum = 0.0, at_mid = 0.0;
    std::size_t free_count = 0;
    for (double vp : v) {
      const double d = vp - lambda;
      if (d >= 1.0) {
        fixed += 1.0;
      } else if (d > 0.0) {
        free_sum += vp;
        ++free_count;
        at_mid += d;
      }
    }
    at_mid += fixed;
    // On the linear piece around lambda the free coordinates move 1:1, so
    // the root of that piece is available in closed form.
    if (free_count > 0) {
      const double exact = (free_sum - (n - fixed)) / static_cast<double>(free_count);
      if (std::abs(mass(exact) - n) <= tol) {
        lambda = exact;
        break;
      }
    }
    if (std::abs(at_mid - n) <= tol || hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) break;
    if (at_mid > n)
      lo = lambda;
    else
      hi = lambda;
  }
  for (std::size_t p = 0; p < m; ++p) x[p] = std::clamp(v[p] - lambda, 0.0, 1.0);
  return x;
}

/// Indices sorted by descending score, ties by ascending index; first n kept.
inline std::vector<std::size_t> top_n(std::span<const double> scores, std::size_t n) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  idx.resize(std::min(n, idx.size()));
  return idx;
}

/// Norm of the projected gradient: -g projected onto the tangent cone of
/// the capped simplex at x (sum of directions zero, coordinates at 0 may
/// only grow, coordinates at 1 may only shrink). Zero exactly at KKT points.
inline double projected_gradient_norm(std::span<const double> x, std::span<const double> g) {
  const std::size_t m = x.size();
  if (m == 0) return 0.0;
  auto direction = [&](std::size_t p, double mu) {
    const double d = -g[p] - mu;
    if (x[p] <= 0.0) return std::max(d, 0.0);
    if (x[p] >= 1.0) return std::min(d, 0.0);
    return d;
  };
  auto total = [&](double mu) {
    double s = 0.0;
    for (std::size_t p = 0; p < m; ++p) s += direction(p, mu);
    return s;
  };
  // total() is non-increasing in mu, >= 0 at lo and <= 0 at hi.
  double lo = -*std::max_element(g.begin(), g.end()) - 1.0;
  double hi = -*std::min_element(g.begin(), g.end()) + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) > 0.0 ? lo : hi) = mid;
  }
  const double mu = 0.5 * (lo + hi);
  double s = 0.0;
  for (std::size_t p = 0; p < m; ++p) s += direction(p, mu) * direction(p, mu);
  return std::sqrt(s);
}

struct ConvexSolverOptions {
  std::size_t max_iterations = 5000;
  double tolerance = 1e-6;  ///< on projected_gradient_norm, see solve_convex
  double armijo = 1e-4;
};

/// Projected gradient with backtracking (halving) line search from the
/// uniform point (n/m) 1. Stops once the projected-gradient norm falls below
/// tolerance * min(1, its value at the start). The first trial step of each iteration is the
/// Barzilai-Borwein step; the Armijo test keeps the trace monotone.
inline SelectionResult solve_convex(const SelectionProblem& prob, const ConvexSolverOptions& opts = {}) {
  validate(prob);
  const std::size_t m = prob.num_paths();
  const double n = static_cast<double>(prob.n);
  SelectionResult res;
  res.method = Method::kConvex;
  if (m == 0) return res;
  Vector x(m, n / static_cast<double>(m));
  double fx = objective(prob, x);
  Vector g = gradient(prob, x);
  res.objective_trace.push_back(fx);
  auto stationarity = [&](const Vector& xs, const Vector& gs) { return projected_gradient_norm(xs, gs); };
  // Relative to the starting point when that is below 1, so nearly flat
  // (saturated) problems are still solved to the same relative accuracy.
  const double threshold = opts.tolerance * std::min(1.0, stationarity(x, g));
  double alpha = 1.0;
  res.converged = false;
  Vector trial(m), xn(m);
  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    const double pg = stationarity(x, g);
    if (pg < threshold || pg == 0.0) {
      res.converged = true;
      break;
    }
    bool accepted = false;
    double fn = fx;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t p = 0; p < m; ++p) trial[p] = x[p] - alpha * g[p];
      xn = project_capped_simplex(trial, n);
      double decrease = 0.0;
      for (std::size_t p = 0; p < m; ++p) decrease += g[p] * (xn[p] - x[p]);
      fn = objective(prob, xn);
      if (fn <= fx + opts.armijo * decrease) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No representable descent left along the projected direction.
      res.converged = stationarity(x, g) < std::sqrt(threshold);
      break;
    }
    Vector gn = gradient(prob, xn);
    double ss = 0.0, sy = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      const double s = xn[p] - x[p];
      ss += s * s;
      sy += s * (gn[p] - g[p]);
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : std::min(alpha * 2.0, 1e12);
    x.swap(xn);
    g.swap(gn);
    fx = fn;
    res.objective_trace.push_back(fx);
  }
  res.x_star = x;
  res.chosen = top_n(res.x_star, prob.n);
  return res;
}

namespace detail {

inline SelectionResult ranked(Method method, const Vector& scores, std::size_t n) {
  SelectionResult res;
  res.method = method;
  res.chosen = top_n(scores, n);
  res.x_star.assign(scores.size(), 0.0);
  for (std::size_t p : res.chosen) res.x_star[p] = 1.0;
  res.degenerate = std::all_of(scores.begin(), scores.end(), [&](double s) { return s == scores.front(); });
  return res;
}

}  // namespace detail

/// Linear relaxation without the log-sum-exp term. Its vertices are
/// n-subsets, so the optimum keeps the n largest sum_j pr1_j C[p][j].
inline SelectionResult solve_linear(const SelectionProblem& prob) {
  validate(prob);
  const Matrix& C = *prob.contributions;
  Vector scores(C.rows(), 0.0);
  for (std::size_t p = 0; p < C.rows(); ++p)
    for (std::size_t j = 0; j < C.cols(); ++j) scores[p] += prob.pr1[j] * C(p, j);
  SelectionResult res = detail::ranked(Method::kLinear, scores, prob.n);
  res.objective_trace.push_back(objective(prob, res.x_star));
  return res;
}

/// Ranks by the total contribution to all classes, sum_j C[p][j]; signed by
/// default.
inline SelectionResult rank_topk(const SelectionProblem& prob, bool absolute = false) {
  validate(prob);
  const Matrix& C = *prob.contributions;
  Vector scores(C.rows(), 0.0);
  for (std::size_t p = 0; p < C.rows(); ++p) {
    for (std::size_t j = 0; j < C.cols(); ++j) scores[p] += C(p, j);
    if (absolute) scores[p] = std::abs(scores[p]);
  }
  return detail::ranked(Method::kTopk, scores, prob.n);
}

/// Ranks by C[p][new_class] - C[p][old_class].
inline SelectionResult rank_deeplift(const SelectionProblem& prob, std::size_t old_class,
                                     std::size_t new_class) {
  validate(prob);
  const Matrix& C = *prob.contributions;
  if (old_class >= C.cols() || new_class >= C.cols()) throw InputError("class index out of range");
  Vector scores(C.rows());
  for (std::size_t p = 0; p < C.rows(); ++p) scores[p] = C(p, new_class) - C(p, old_class);
  SelectionResult res = detail::ranked(Method::kDeeplift, scores, prob.n);
  if (old_class == new_class) res.degenerate = true;
  return res;
}

/// Generic top-n selection over externally computed path scores.
inline SelectionResult rank_by_scores(Method method, const Vector& scores, std::size_t n) {
  if (n > scores.size()) throw InputError("n exceeds number of scored paths");
  return detail::ranked(method, scores, n);
}

}  // namespace axpath
