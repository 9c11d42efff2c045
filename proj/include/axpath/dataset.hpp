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
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "axpath/error.hpp"
#include "axpath/graph.hpp"
#include "axpath/matrix.hpp"

namespace axpath {

/// A node-classification dataset: graph, labels and optional split masks.
struct DatasetBundle {
  std::string name;
  Graph graph;
  std::vector<std::uint32_t> labels;
  std::optional<std::vector<NodeId>> train_mask;
  std::optional<std::vector<NodeId>> test_mask;
  std::size_t num_classes = 0;

  std::size_t feature_dim() const { return graph.feature_dim(); }
};

/// Counts gathered while loading, for cross-checking against published
/// dataset tables.
struct LoadSummary {
  std::size_t nodes = 0;
  std::size_t edge_lines = 0;    ///< non-comment lines of the edge file
  std::size_t unique_edges = 0;  ///< undirected, self-loops excluded
  std::size_t self_loop_lines = 0;
  std::size_t classes = 0;
  std::size_t features = 0;
};

namespace detail {

inline bool skip_line(const std::string& line) {
  auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path.string());
  return is;
}

[[noreturn]] inline void malformed(const std::filesystem::path& path, std::size_t lineno,
                                   const std::string& what) {
  throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + what);
}

inline std::uint64_t parse_uint(const std::filesystem::path& path, std::size_t lineno,
                                std::istringstream& ss) {
  std::string tok;
  if (!(ss >> tok)) malformed(path, lineno, "missing integer");
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
  if (*end != '\0' || tok[0] == '-' || errno != 0) malformed(path, lineno, "bad integer '" + tok + "'");
  return v;
}

inline void expect_end(const std::filesystem::path& path, std::size_t lineno, std::istringstream& ss) {
  std::string extra;
  if (ss >> extra) malformed(path, lineno, "unexpected trailing token '" + extra + "'");
}

}  // namespace detail

/// Reads "u<TAB>v" pairs (any whitespace accepted), 0-based ids.
inline std::vector<Edge> read_edge_list(const std::filesystem::path& path, std::size_t* lines = nullptr) {
  auto is = detail::open_input(path);
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0, count = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    ++count;
    std::istringstream ss(line);
    const auto u = detail::parse_uint(path, lineno, ss);
    const auto v = detail::parse_uint(path, lineno, ss);
    detail::expect_end(path, lineno, ss);
    if (u > UINT32_MAX || v > UINT32_MAX) detail::malformed(path, lineno, "node id too large");
    edges.push_back(Edge{static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  if (lines) *lines = count;
  return edges;
}

inline void write_edge_list(const std::filesystem::path& path, const std::vector<Edge>& edges) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  for (const Edge& e : edges) os << e.u << '\t' << e.v << '\n';
}

inline EdgeDelta read_delta(const std::filesystem::path& path) { return EdgeDelta{read_edge_list(path)}; }

inline Matrix read_feature_matrix(const std::filesystem::path& path) {
  auto is = detail::open_input(path);
  std::vector<double> data;
  std::size_t cols = 0, rows = 0, lineno = 0;
  std::string line;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    const char* p = line.c_str();
    std::size_t count = 0;
    while (true) {
      while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
      if (*p == '\0') break;
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) detail::malformed(path, lineno, "bad real value");
      if (!std::isfinite(v)) detail::malformed(path, lineno, "non-finite feature value");
      data.push_back(v);
      ++count;
      p = end;
    }
    if (rows == 0) cols = count;
    if (count == 0 || count != cols)
      detail::malformed(path, lineno,
                        "expected " + std::to_string(cols) + " values, found " + std::to_string(count));
    ++rows;
  }
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.values().begin());
  return m;
}

inline void write_feature_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  char buf[40];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      if (c) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

inline std::vector<std::uint64_t> read_int_column(const std::filesystem::path& path) {
  auto is = detail::open_input(path);
  std::vector<std::uint64_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    std::istringstream ss(line);
    out.push_back(detail::parse_uint(path, lineno, ss));
    detail::expect_end(path, lineno, ss);
  }
  return out;
}

/// Loads edges.tsv, features.txt, labels.txt and the optional
/// train_mask.txt / test_mask.txt from a directory.
inline DatasetBundle load_dataset(const std::filesystem::path& dir, LoadSummary* summary = nullptr) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError("dataset directory " + dir.string() + " not found");
  auto features = std::make_shared<const Matrix>(read_feature_matrix(dir / "features.txt"));
  const std::size_t n = features->rows();
  std::size_t edge_lines = 0;
  std::vector<Edge> raw = read_edge_list(dir / "edges.tsv", &edge_lines);
  std::size_t self_loops = 0;
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Edge& e = raw[i];
    if (e.u >= n || e.v >= n)
      throw InputError((dir / "edges.tsv").string() + ": edge (" + std::to_string(e.u) + "," +
                       std::to_string(e.v) + ") references a node >= " + std::to_string(n));
    if (e.u == e.v) {
      ++self_loops;
      continue;
    }
    edges.push_back(Edge::canonical(e.u, e.v));
  }
  // Exporters often list both directions of an undirected edge.
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  DatasetBundle b;
  b.name = dir.filename().string();
  if (b.name.empty()) b.name = dir.parent_path().filename().string();
  b.graph = Graph(n, edges, features);
  const auto labels = read_int_column(dir / "labels.txt");
  if (labels.size() != n)
    throw InputError((dir / "labels.txt").string() + ": " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(n) + " nodes");
  b.labels.assign(labels.begin(), labels.end());
  b.num_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  auto mask = [&](const char* file) -> std::optional<std::vector<NodeId>> {
    if (!fs::exists(dir / file)) return std::nullopt;
    std::vector<NodeId> ids;
    for (auto id : read_int_column(dir / file)) {
      if (id >= n) throw InputError((dir / file).string() + ": node id " + std::to_string(id) + " out of range");
      ids.push_back(static_cast<NodeId>(id));
    }
    return ids;
  };
  b.train_mask = mask("train_mask.txt");
  b.test_mask = mask("test_mask.txt");
  if (summary) {
    summary->nodes = n;
    summary->edge_lines = edge_lines;
    summary->unique_edges = b.graph.num_edges();
    summary->self_loop_lines = self_loops;
    summary->classes = b.num_classes;
    summary->features = features->cols();
  }
  return b;
}

inline void save_dataset(const std::filesystem::path& dir, const DatasetBundle& b) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_edge_list(dir / "edges.tsv", b.graph.edges());
  write_feature_matrix(dir / "features.txt", b.graph.features());
  auto write_column = [&](const char* file, const auto& values) {
    std::ofstream os(dir / file);
    if (!os) throw InputError("cannot write " + (dir / file).string());
    for (auto v : values) os << v << '\n';
  };
  write_column("labels.txt", b.labels);
  if (b.train_mask) write_column("train_mask.txt", *b.train_mask);
  if (b.test_mask) write_column("test_mask.txt", *b.test_mask);
}

/// Parameters of the synthetic citation-like generator.
struct SyntheticSpec {
  std::string name = "synthetic";
  std::size_t nodes = 500;
  std::size_t classes = 7;
  std::size_t features = 64;
  double avg_degree = 4.0;
  double homophily = 0.8;      ///< probability an edge stays within a class
  double topic_focus = 0.75;   ///< probability a word comes from the class topic
  std::size_t words_min = 4;
  std::size_t words_max = 12;
  std::size_t train_per_class = 20;
  std::uint64_t seed = 1;
};

/// Homophilous graph with heavy-tailed degrees and binary bag-of-words
/// features whose vocabulary depends on the node class.
inline DatasetBundle make_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.nodes < 2 || spec.classes < 2 || spec.features < spec.classes)
    throw InputError("synthetic spec too small");
  std::mt19937_64 rng(spec.seed);
  const std::size_t n = spec.nodes;
  std::vector<std::uint32_t> labels(n);
  std::uniform_int_distribution<std::uint32_t> pick_class(0, static_cast<std::uint32_t>(spec.classes - 1));
  for (auto& y : labels) y = pick_class(rng);

  // Pareto popularity drives preferential attachment within class buckets.
  std::vector<double> weight(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& w : weight) w = std::pow(1.0 - unit(rng), -1.0 / 1.5);
  std::vector<std::vector<NodeId>> members(spec.classes);
  for (NodeId v = 0; v < n; ++v) members[labels[v]].push_back(v);
  std::vector<std::discrete_distribution<std::size_t>> in_class(spec.classes);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    std::vector<double> w;
    for (NodeId v : members[c]) w.push_back(weight[v]);
    if (w.empty()) w.push_back(1.0);
    in_class[c] = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }
  std::discrete_distribution<std::size_t> anywhere(weight.begin(), weight.end());
  std::uniform_int_distribution<NodeId> any_node(0, static_cast<NodeId>(n - 1));

  const auto target_edges = static_cast<std::size_t>(spec.avg_degree * static_cast<double>(n) / 2.0);
  const std::size_t max_edges = n * (n - 1) / 2;
  std::set<Edge> edges;
  std::size_t attempts = 0;
  while (edges.size() < std::min(target_edges, max_edges) && attempts < 50 * target_edges + 1000) {
    ++attempts;
    const NodeId u = any_node(rng);
    NodeId v;
    if (unit(rng) < spec.homophily && members[labels[u]].size() > 1)
      v = members[labels[u]][in_class[labels[u]](rng)];
    else
      v = static_cast<NodeId>(anywhere(rng));
    if (u == v) continue;
    edges.insert(Edge::canonical(u, v));
  }

  auto feats = std::make_shared<Matrix>(n, spec.features);
  const std::size_t topic = spec.features / spec.classes;
  std::uniform_int_distribution<std::size_t> nwords(spec.words_min, spec.words_max);
  std::uniform_int_distribution<std::size_t> any_word(0, spec.features - 1);
  std::uniform_int_distribution<std::size_t> topic_word(0, topic - 1);
  for (NodeId v = 0; v < n; ++v) {
    const std::size_t k = nwords(rng);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t w =
          unit(rng) < spec.topic_focus ? labels[v] * topic + topic_word(rng) : any_word(rng);
      (*feats)(v, w) = 1.0;
    }
  }

  DatasetBundle b;
  b.name = spec.name;
  std::vector<Edge> edge_list(edges.begin(), edges.end());
  b.graph = Graph(n, edge_list, std::move(feats));
  b.labels = std::move(labels);
  b.num_classes = spec.classes;
  std::vector<NodeId> train, test;
  std::vector<std::size_t> taken(spec.classes, 0);
  for (NodeId v = 0; v < n; ++v) {
    if (taken[b.labels[v]] < spec.train_per_class) {
      ++taken[b.labels[v]];
      train.push_back(v);
    } else {
      test.push_back(v);
    }
  }
  b.train_mask = std::move(train);
  b.test_mask = std::move(test);
  return b;
}

}  // namespace axpath
