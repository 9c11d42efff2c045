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
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "axpath/error.hpp"
#include "axpath/matrix.hpp"

namespace axpath {

/// T-layer GNN with element-wise sum aggregation and no bias:
///   z_v^(t) = sum_{u in N(v)} h_u^(t-1) * W^(t),  h^(t) = ReLU(z^(t)) for t < T.
/// Layer T is linear and produces the class logits.
class GnnModel {
 public:
  GnnModel() = default;
  explicit GnnModel(std::vector<Matrix> weights) : weights_(std::move(weights)) { validate(); }

  std::size_t num_layers() const { return weights_.size(); }
  /// Weight matrix of layer t, 1-based; shape dim(t-1) x dim(t).
  const Matrix& weight(std::size_t t) const { return weights_.at(t - 1); }
  std::vector<Matrix>& mutable_weights() { return weights_; }
  const std::vector<Matrix>& weights() const { return weights_; }

  /// dim(0) is the feature dimension, dim(T) the class count.
  std::size_t dim(std::size_t t) const {
    return t == 0 ? weights_.front().rows() : weights_.at(t - 1).cols();
  }
  std::size_t num_classes() const { return dim(num_layers()); }

  friend bool operator==(const GnnModel&, const GnnModel&) = default;

 private:
  void validate() const {
    if (weights_.empty()) throw InputError("model needs at least one layer");
    for (std::size_t t = 0; t < weights_.size(); ++t) {
      if (weights_[t].rows() == 0 || weights_[t].cols() == 0)
        throw InputError("layer " + std::to_string(t + 1) + " has an empty weight matrix");
      if (t > 0 && weights_[t].rows() != weights_[t - 1].cols())
        throw InputError("layer " + std::to_string(t + 1) + " input dim " +
                         std::to_string(weights_[t].rows()) + " != previous output dim " +
                         std::to_string(weights_[t - 1].cols()));
      for (double w : weights_[t].values())
        if (!std::isfinite(w)) throw InputError("non-finite weight in layer " + std::to_string(t + 1));
    }
  }

  std::vector<Matrix> weights_;
};

/// Glorot-uniform random weights for the given layer dims (d_0 .. d_T).
inline GnnModel random_model(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw InputError("random_model needs at least two dims");
  std::mt19937_64 rng(seed);
  std::vector<Matrix> ws;
  for (std::size_t t = 1; t < dims.size(); ++t) {
    const double limit = std::sqrt(6.0 / static_cast<double>(dims[t - 1] + dims[t]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(dims[t - 1], dims[t]);
    for (double& v : w.values()) v = dist(rng);
    ws.push_back(std::move(w));
  }
  return GnnModel(std::move(ws));
}

// Weight file format:
//   T d_0 d_1 ... d_T
//   then for t = 1..T, d_{t-1} lines of d_t reals.
// Lines starting with '#' are comments. An optional "# aggregation: <name>"
// comment is honored; anything other than "sum" is rejected.

inline void write_model(std::ostream& os, const GnnModel& model) {
  os << "# aggregation: sum\n";
  os << model.num_layers();
  for (std::size_t t = 0; t <= model.num_layers(); ++t) os << ' ' << model.dim(t);
  os << '\n';
  char buf[40];
  for (const Matrix& w : model.weights()) {
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", w(r, c));
        if (c) os << ' ';
        os << buf;
      }
      os << '\n';
    }
  }
}

inline void save_model(const std::string& path, const GnnModel& model) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write model file " + path);
  write_model(os, model);
}

inline GnnModel read_model(std::istream& is, const std::string& name = "<model>") {
  std::string line;
  std::size_t lineno = 0;
  auto next_data_line = [&](std::string& out) -> bool {
    while (std::getline(is, out)) {
      ++lineno;
      auto first = out.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (out[first] == '#') {
        const std::string key = "aggregation:";
        auto pos = out.find(key);
        if (pos != std::string::npos) {
          std::istringstream agg(out.substr(pos + key.size()));
          std::string kind;
          agg >> kind;
          if (kind != "sum")
            throw InputError(name + ":" + std::to_string(lineno) + ": aggregation '" + kind +
                             "' is not supported (only sum)");
        }
        continue;
      }
      return true;
    }
    return false;
  };
  if (!next_data_line(line)) throw InputError(name + ": empty model file");
  std::istringstream header(line);
  std::size_t layers = 0;
  if (!(header >> layers) || layers == 0)
    throw InputError(name + ":" + std::to_string(lineno) + ": bad layer count");
  std::vector<std::size_t> dims(layers + 1);
  for (auto& d : dims)
    if (!(header >> d) || d == 0)
      throw InputError(name + ":" + std::to_string(lineno) + ": bad dimension list");
  std::vector<Matrix> ws;
  for (std::size_t t = 1; t <= layers; ++t) {
    Matrix w(dims[t - 1], dims[t]);
    for (std::size_t r = 0; r < w.rows(); ++r) {
      if (!next_data_line(line))
        throw InputError(name + ": truncated weights in layer " + std::to_string(t));
      const char* p = line.c_str();
      for (std::size_t c = 0; c < w.cols(); ++c) {
        char* end = nullptr;
        w(r, c) = std::strtod(p, &end);
        if (end == p)
          throw InputError(name + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(w.cols()) + " reals");
        p = end;
      }
      while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
      if (*p != '\0')
        throw InputError(name + ":" + std::to_string(lineno) + ": trailing data");
    }
    ws.push_back(std::move(w));
  }
  if (next_data_line(line)) throw InputError(name + ":" + std::to_string(lineno) + ": trailing data");
  return GnnModel(std::move(ws));
}

inline GnnModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open model file " + path);
  return read_model(is, path);
}

}  // namespace axpath
