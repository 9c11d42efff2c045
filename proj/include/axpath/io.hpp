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

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "axpath/dataset.hpp"
#include "axpath/error.hpp"
#include "axpath/harness.hpp"
#include "axpath/select.hpp"
#include "axpath/train.hpp"

namespace axpath {

/// Everything `explain run` needs, read from a key=value file.
struct RunConfig {
  std::filesystem::path dataset;  ///< directory; empty selects the synthetic generator
  SyntheticSpec synthetic;
  std::filesystem::path model;  ///< empty trains one
  TrainOptions train;
  ExperimentConfig experiment;
  std::filesystem::path output = "results.csv";
  std::filesystem::path timing_output;
  std::filesystem::path summary_output;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::uint64_t to_uint(const std::string& v, const std::string& where) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || v[0] == '-' || errno != 0)
    throw InputError(where + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

inline double to_real(const std::string& v, const std::string& where) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(x))
    throw InputError(where + ": expected a real number, got '" + v + "'");
  return x;
}

inline bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError(where + ": expected a boolean, got '" + v + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& is, const std::string& name = "<config>") {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(where + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    auto& ex = cfg.experiment;
    if (key == "dataset") {
      cfg.dataset = value;
    } else if (key == "name") {
      ex.dataset_name = value;
      cfg.synthetic.name = value;
    } else if (key == "synthetic_nodes") {
      cfg.synthetic.nodes = detail::to_uint(value, where);
    } else if (key == "synthetic_classes") {
      cfg.synthetic.classes = detail::to_uint(value, where);
    } else if (key == "synthetic_features") {
      cfg.synthetic.features = detail::to_uint(value, where);
    } else if (key == "synthetic_seed") {
      cfg.synthetic.seed = detail::to_uint(value, where);
    } else if (key == "model") {
      cfg.model = value;
    } else if (key == "hidden") {
      cfg.train.hidden = detail::to_uint(value, where);
    } else if (key == "epochs") {
      cfg.train.epochs = detail::to_uint(value, where);
    } else if (key == "learning_rate") {
      cfg.train.learning_rate = detail::to_real(value, where);
    } else if (key == "train_seed") {
      cfg.train.seed = detail::to_uint(value, where);
    } else if (key == "layers") {
      ex.layers = cfg.train.layers = detail::to_uint(value, where);
      if (ex.layers < 1) throw InputError(where + ": layers must be >= 1");
    } else if (key == "num_added_edges") {
      ex.num_added_edges = detail::to_uint(value, where);
    } else if (key == "repeats") {
      ex.repeats = detail::to_uint(value, where);
      if (ex.repeats < 1) throw InputError(where + ": repeats must be >= 1");
    } else if (key == "seed") {
      ex.seed = detail::to_uint(value, where);
    } else if (key == "methods") {
      ex.methods.clear();
      for (const auto& m : detail::split(value, ',')) {
        try {
          ex.methods.push_back(parse_method(m));
        } catch (const InputError& e) {
          throw InputError(where + ": " + e.what());
        }
      }
    } else if (key == "path_cap") {
      ex.path_cap = detail::to_uint(value, where);
    } else if (key == "threads") {
      ex.threads = detail::to_uint(value, where);
    } else if (key == "topk_absolute") {
      ex.topk_absolute = detail::to_bool(value, where);
    } else if (key == "targets") {
      if (value != "distribution" && value != "prediction")
        throw InputError(where + ": targets must be 'distribution' or 'prediction'");
      ex.prediction_changed_only = value == "prediction";
    } else if (key == "output") {
      cfg.output = value;
    } else if (key == "timing_output") {
      cfg.timing_output = value;
    } else if (key == "summary_output") {
      cfg.summary_output = value;
    } else {
      throw InputError(where + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  auto is = detail::open_input(path);
  RunConfig cfg = parse_run_config(is, path.string());
  // Relative paths in a config resolve against the config's directory.
  const auto base = path.parent_path();
  for (auto* p : {&cfg.dataset, &cfg.model, &cfg.output, &cfg.timing_output, &cfg.summary_output})
    if (!p->empty() && p->is_relative()) *p = base / *p;
  return cfg;
}

struct PlotOutput {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

/// Turns a results CSV into one whitespace-separated data file per dataset:
/// level, then mean and std of fidelity for each method.
inline PlotOutput emit_plots(const std::filesystem::path& csv, const std::filesystem::path& out_dir) {
  auto is = detail::open_input(csv);
  std::filesystem::create_directories(out_dir);
  PlotOutput out;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(is, line)) {
    ++lineno;
    if (!detail::skip_line(line)) header = detail::split(detail::trim(line), ',');
  }
  if (header.empty()) {
    const auto file = out_dir / (csv.stem().string() + ".dat");
    std::ofstream(file).flush();
    out.files.push_back(file);
    out.warnings.push_back(csv.string() + " has no rows; wrote empty " + file.string());
    return out;
  }
  auto column = [&](const char* name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InputError(csv.string() + ": missing column '" + name + "'");
  };
  const std::size_t c_dataset = column("dataset"), c_method = column("method"), c_level = column("level"),
                    c_fid = column("fidelity");
  // dataset -> method -> level -> values
  std::map<std::string, std::map<Method, std::map<std::size_t, std::vector<double>>>> data;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    const auto cells = detail::split(detail::trim(line), ',');
    const std::string where = csv.string() + ":" + std::to_string(lineno);
    if (cells.size() != header.size())
      throw InputError(where + ": expected " + std::to_string(header.size()) + " fields");
    Method method;
    try {
      method = parse_method(cells[c_method]);
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    data[cells[c_dataset]][method][detail::to_uint(cells[c_level], where)].push_back(
        detail::to_real(cells[c_fid], where));
    ++rows;
  }
  if (rows == 0) {
    const auto file = out_dir / (csv.stem().string() + ".dat");
    std::ofstream(file).flush();
    out.files.push_back(file);
    out.warnings.push_back(csv.string() + " has no rows; wrote empty " + file.string());
    return out;
  }
  for (const auto& [dataset, by_method] : data) {
    std::set<std::size_t> levels;
    for (const auto& [m, by_level] : by_method)
      for (const auto& [lvl, v] : by_level) levels.insert(lvl);
    const auto file = out_dir / (dataset + ".dat");
    std::ofstream os(file);
    if (!os) throw InputError("cannot write " + file.string());
    os << "# level";
    for (const auto& [m, by_level] : by_method) os << ' ' << method_name(m) << "_mean " << method_name(m) << "_std";
    os << '\n';
    char buf[64];
    for (std::size_t lvl : levels) {
      os << lvl;
      for (const auto& [m, by_level] : by_method) {
        auto it = by_level.find(lvl);
        if (it == by_level.end()) {
          os << " nan nan";
          continue;
        }
        const auto& vals = it->second;
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        const double sd = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
        std::snprintf(buf, sizeof buf, " %.10g %.10g", mean, sd);
        os << buf;
      }
      os << '\n';
    }
    out.files.push_back(file);
  }
  return out;
}

/// One line per altered path: "v0>...>vT<TAB>C_1<TAB>...<TAB>C_c".
inline void write_contributions(std::ostream& os, const ContributionMatrix& cm) {
  char buf[40];
  for (std::size_t p = 0; p < cm.num_paths(); ++p) {
    os << to_string(cm.paths[p]);
    for (std::size_t j = 0; j < cm.num_classes(); ++j) {
      std::snprintf(buf, sizeof buf, "\t%.17g", cm.values(p, j));
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace axpath
