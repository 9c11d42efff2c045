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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

namespace axtest {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("axpath_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

using DatasetIo = TempDir;

TEST_F(DatasetIo, LoadsAndCounts) {
  write("d/features.txt", "1 0\n0 1\n# comment\n0.5 0.5\n");
  write("d/edges.tsv", "0\t1\n1\t0\n2 2\n\n1\t2\n");
  write("d/labels.txt", "0\n1\n1\n");
  LoadSummary s;
  const DatasetBundle b = load_dataset(dir_ / "d", &s);
  EXPECT_EQ(b.name, "d");
  EXPECT_EQ(s.nodes, 3u);
  EXPECT_EQ(s.edge_lines, 4u);
  EXPECT_EQ(s.unique_edges, 2u);
  EXPECT_EQ(s.self_loop_lines, 1u);
  EXPECT_EQ(s.classes, 2u);
  EXPECT_EQ(s.features, 2u);
  EXPECT_EQ(b.graph.edges(), (std::vector<Edge>{{0, 1}, {1, 2}}));
  EXPECT_FALSE(b.train_mask.has_value());
}

TEST_F(DatasetIo, EmptyEdgeFileGivesSelfLoopsOnly) {
  write("d/features.txt", "1\n2\n");
  write("d/edges.tsv", "");
  write("d/labels.txt", "0\n0\n");
  const DatasetBundle b = load_dataset(dir_ / "d");
  EXPECT_EQ(b.graph.num_edges(), 0u);
  EXPECT_EQ(b.graph.degree(0), 1u);
}

TEST_F(DatasetIo, MalformedLineReportsLineNumber) {
  write("d/features.txt", "1\n2\n");
  write("d/edges.tsv", "0 1\n# ok\n1 x\n");
  write("d/labels.txt", "0\n0\n");
  try {
    load_dataset(dir_ / "d");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("edges.tsv:3"), std::string::npos) << e.what();
  }
}

TEST_F(DatasetIo, RejectsDanglingEdgesAndRaggedFeatures) {
  write("a/features.txt", "1\n2\n");
  write("a/edges.tsv", "0 2\n");
  write("a/labels.txt", "0\n0\n");
  EXPECT_THROW(load_dataset(dir_ / "a"), InputError);
  write("b/features.txt", "1 2\n3\n");
  write("b/edges.tsv", "");
  write("b/labels.txt", "0\n0\n");
  EXPECT_THROW(load_dataset(dir_ / "b"), InputError);
  write("c/features.txt", "1\n2\n");
  write("c/edges.tsv", "");
  write("c/labels.txt", "0\n");
  EXPECT_THROW(load_dataset(dir_ / "c"), InputError);
  write("e/features.txt", "1\nnan\n");
  write("e/edges.tsv", "");
  write("e/labels.txt", "0\n0\n");
  EXPECT_THROW(load_dataset(dir_ / "e"), InputError);
  EXPECT_THROW(load_dataset(dir_ / "missing"), InputError);
}

TEST_F(DatasetIo, RoundTripIsIdentical) {
  SyntheticSpec spec;
  spec.nodes = 120;
  spec.classes = 4;
  spec.features = 16;
  spec.seed = 3;
  DatasetBundle a = make_synthetic_dataset(spec);
  a.test_mask = std::vector<NodeId>{5, 6, 7};
  save_dataset(dir_ / "rt", a);
  const DatasetBundle b = load_dataset(dir_ / "rt");
  EXPECT_EQ(a.graph.edges(), b.graph.edges());
  EXPECT_EQ(a.graph.features(), b.graph.features());
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.train_mask, b.train_mask);
  EXPECT_EQ(a.test_mask, b.test_mask);
  EXPECT_EQ(a.num_classes, b.num_classes);
}

TEST(Synthetic, ShapeAndDeterminism) {
  SyntheticSpec spec;
  spec.nodes = 300;
  spec.classes = 5;
  spec.features = 40;
  const DatasetBundle a = make_synthetic_dataset(spec), b = make_synthetic_dataset(spec);
  EXPECT_EQ(a.graph.num_nodes(), 300u);
  EXPECT_EQ(a.graph.feature_dim(), 40u);
  EXPECT_EQ(a.num_classes, 5u);
  EXPECT_EQ(a.graph.edges(), b.graph.edges());
  const double avg = 2.0 * static_cast<double>(a.graph.num_edges()) / 300.0;
  EXPECT_GT(avg, 2.0);
  EXPECT_LT(avg, 6.0);
  std::size_t same = 0;
  for (const Edge& e : a.graph.edges()) same += a.labels[e.u] == a.labels[e.v];
  EXPECT_GT(static_cast<double>(same) / static_cast<double>(a.graph.num_edges()), 0.6);
  ASSERT_TRUE(a.train_mask.has_value());
  EXPECT_EQ(a.train_mask->size(), 5u * 20u);
}

TEST(RunConfig, ParsesKeys) {
  std::istringstream is(
      "# experiment\nname = toy\nsynthetic_nodes = 200\nlayers = 3\nmethods = convex, topk\n"
      "targets = prediction\ntopk_absolute = yes\nlearning_rate = 0.05\nrepeats = 4\n");
  const RunConfig cfg = parse_run_config(is);
  EXPECT_EQ(cfg.experiment.dataset_name, "toy");
  EXPECT_EQ(cfg.synthetic.nodes, 200u);
  EXPECT_EQ(cfg.experiment.layers, 3u);
  EXPECT_EQ(cfg.train.layers, 3u);
  EXPECT_EQ(cfg.experiment.methods, (std::vector<Method>{Method::kConvex, Method::kTopk}));
  EXPECT_TRUE(cfg.experiment.prediction_changed_only);
  EXPECT_TRUE(cfg.experiment.topk_absolute);
  EXPECT_EQ(cfg.train.learning_rate, 0.05);
  EXPECT_EQ(cfg.experiment.repeats, 4u);
}

TEST(RunConfig, ErrorsCarryLineNumbers) {
  auto fails_at = [](const std::string& text, const std::string& where) {
    std::istringstream is(text);
    try {
      parse_run_config(is, "cfg");
    } catch (const InputError& e) {
      return std::string(e.what()).find(where) != std::string::npos;
    }
    return false;
  };
  EXPECT_TRUE(fails_at("layers = 2\nbogus = 1\n", "cfg:2"));
  EXPECT_TRUE(fails_at("repeats = -1\n", "cfg:1"));
  EXPECT_TRUE(fails_at("\nmethods = convex,gnnexplainer\n", "cfg:2"));
  EXPECT_TRUE(fails_at("layers 2\n", "cfg:1"));
  EXPECT_TRUE(fails_at("targets = some\n", "cfg:1"));
  EXPECT_TRUE(fails_at("repeats = 0\n", "cfg:1"));
}

using Plots = TempDir;

std::string results_csv(const std::vector<std::string>& methods, std::size_t levels) {
  std::string s = std::string(kFidelityCsvHeader) + "\n";
  for (const auto& m : methods)
    for (std::size_t l = 1; l <= levels; ++l)
      for (int seed = 0; seed < 2; ++seed)
        s += "toy," + std::to_string(seed) + ",3," + m + ",20," + std::to_string(l) + "," + std::to_string(l) + "," +
             std::to_string(0.1 * static_cast<double>(l) + 0.1 * seed) + ",0,1\n";
  return s;
}

std::vector<std::vector<std::string>> table(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> cells;
    for (std::string c; ls >> c;) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

TEST_F(Plots, OneMethodTenLevels) {
  const auto csv = write("r.csv", results_csv({"convex"}, 10));
  const PlotOutput out = emit_plots(csv, dir_ / "out");
  ASSERT_EQ(out.files.size(), 1u);
  EXPECT_EQ(out.files[0].filename(), "toy.dat");
  const auto rows = table(slurp(out.files[0]));
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0].size(), 3u);
  EXPECT_NEAR(std::stod(rows[0][1]), 0.15, 1e-9);
  EXPECT_NEAR(std::stod(rows[0][2]), std::sqrt(0.005), 1e-9);
  EXPECT_TRUE(out.warnings.empty());
}

TEST_F(Plots, TwoMethodsGiveFiveColumns) {
  const auto csv = write("r.csv", results_csv({"convex", "lrp"}, 4));
  const auto rows = table(slurp(emit_plots(csv, dir_ / "out").files.at(0)));
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_EQ(r.size(), 5u);
}

TEST_F(Plots, EmptyCsvGivesEmptyFileAndWarning) {
  const auto csv = write("empty.csv", "");
  const PlotOutput out = emit_plots(csv, dir_ / "out");
  ASSERT_EQ(out.files.size(), 1u);
  EXPECT_TRUE(fs::exists(out.files[0]));
  EXPECT_EQ(fs::file_size(out.files[0]), 0u);
  EXPECT_EQ(out.warnings.size(), 1u);
  const auto header_only = write("h.csv", std::string(kFidelityCsvHeader) + "\n");
  EXPECT_EQ(emit_plots(header_only, dir_ / "out").warnings.size(), 1u);
}

TEST_F(Plots, MissingColumnIsAnError) {
  const auto csv = write("bad.csv", "dataset,method,level\ntoy,convex,1\n");
  EXPECT_THROW(emit_plots(csv, dir_ / "out"), InputError);
}

TEST(Contributions, DumpFormat) {
  auto x = std::make_shared<Matrix>(2, 1);
  (*x)(0, 0) = 1.0;
  (*x)(1, 0) = 2.0;
  const Graph g0(2, std::vector<Edge>{}, x);
  const Graph g1 = apply_delta(g0, EdgeDelta{{{J, K}}});
  const ContributionMatrix cm = contribution_matrix(GnnModel(std::vector<Matrix>{Matrix(1, 1, 1.0)}), g0, g1, J);
  std::ostringstream os;
  write_contributions(os, cm);
  EXPECT_EQ(os.str(), "1>0\t2\n");
}

}  // namespace
}  // namespace axtest
