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

// Command-line front end. Exit codes: 0 ok, 2 bad input, 3 numerical
// invariant violated.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "axpath/axpath.hpp"

namespace fs = std::filesystem;
using namespace axpath;

namespace {

void print_summary(const LoadSummary& s, const std::string& name) {
  std::cerr << name << ": " << s.nodes << " nodes, " << s.unique_edges << " edges (" << s.edge_lines
            << " edge lines, " << s.self_loop_lines << " self-loops dropped), " << s.classes << " classes, "
            << s.features << " features\n";
}

DatasetBundle dataset_or_synthetic(const fs::path& dir, const SyntheticSpec& spec) {
  if (dir.empty()) return make_synthetic_dataset(spec);
  LoadSummary summary;
  DatasetBundle b = load_dataset(dir, &summary);
  print_summary(summary, b.name);
  return b;
}

std::vector<NodeId> training_nodes(const DatasetBundle& b) {
  if (b.train_mask) return *b.train_mask;
  std::vector<NodeId> all(b.graph.num_nodes());
  for (NodeId v = 0; v < all.size(); ++v) all[v] = v;
  std::cerr << "warning: no train_mask.txt, training on every node\n";
  return all;
}

void open_out(std::ofstream& os, const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  os.open(p);
  if (!os) throw InputError("cannot write " + p.string());
}

int cmd_run(const fs::path& config_path) {
  RunConfig cfg = load_run_config(config_path);
  const DatasetBundle data = dataset_or_synthetic(cfg.dataset, cfg.synthetic);
  if (!cfg.dataset.empty() && cfg.experiment.dataset_name == "dataset") cfg.experiment.dataset_name = data.name;
  GnnModel model;
  if (cfg.model.empty()) {
    TrainLog log;
    model = train_reference_model(data.graph, data.labels, training_nodes(data), data.num_classes, cfg.train, &log);
    std::cerr << "trained " << cfg.train.layers << "-layer model, train accuracy " << log.train_accuracy << '\n';
  } else {
    model = load_model(cfg.model.string());
  }
  const ExperimentReport report = run_experiment(cfg.experiment, data.graph, model);
  std::ofstream os;
  open_out(os, cfg.output);
  write_results_csv(os, report.records);
  if (!cfg.timing_output.empty()) {
    std::ofstream ts;
    open_out(ts, cfg.timing_output);
    write_timing_csv(ts, report.timings);
  }
  if (!cfg.summary_output.empty()) {
    std::ofstream ss;
    open_out(ss, cfg.summary_output);
    write_summary(ss, report);
  }
  write_summary(std::cout, report);
  return 0;
}

struct OneArgs {
  fs::path graph, delta, model, dump;
  NodeId target = 0;
  std::string method = "convex";
  std::size_t n = 1;
  std::size_t path_cap = kDefaultPathCap;
  bool topk_absolute = false;
};

int cmd_one(const OneArgs& a) {
  LoadSummary summary;
  const DatasetBundle data = load_dataset(a.graph, &summary);
  print_summary(summary, data.name);
  const GnnModel model = load_model(a.model.string());
  const Method method = parse_method(a.method);
  const Graph g1 = apply_delta(data.graph, read_delta(a.delta));
  if (a.target >= g1.num_nodes()) throw InputError("target " + std::to_string(a.target) + " out of range");
  const auto start = std::chrono::steady_clock::now();
  const DeltaIndex index(data.graph, g1, model.num_layers());
  const ForwardTrace t0 = forward(model, data.graph);
  const ForwardTrace t1 = forward(model, g1);
  AttributionOptions opts;
  opts.path_cap = a.path_cap;
  const ContributionMatrix cm = contribution_matrix(model, index, t0, t1, a.target, opts);
  if (!a.dump.empty()) {
    std::ofstream os;
    open_out(os, a.dump);
    write_contributions(os, cm);
  }
  if (a.n > cm.num_paths())
    throw InputError("n = " + std::to_string(a.n) + " exceeds the " + std::to_string(cm.num_paths()) +
                     " altered paths of node " + std::to_string(a.target));
  SelectionContext ctx{&model, &g1, &t0, &t1, &cm, a.topk_absolute, {}};
  const SelectionResult sel = select_paths(ctx, method, a.n);
  std::printf("target %u: m = %zu altered paths, completeness error %.3g\n", a.target, cm.num_paths(),
              cm.completeness_error);
  std::printf("method %s, n = %zu%s\n", std::string(method_name(method)).c_str(), a.n,
              sel.degenerate ? " (scores carry no information)" : "");
  for (std::size_t p : sel.chosen) {
    std::printf("  %s", to_string(cm.paths[p]).c_str());
    for (std::size_t j = 0; j < cm.num_classes(); ++j) std::printf(" %.6g", cm.values(p, j));
    std::printf("\n");
  }
  try {
    const FidelityRecord rec = fidelity_kl_minus(model, g1, t0, t1, cm, sel.chosen);
    std::printf("fidelity %.10g, residual KL %.10g, base KL %.10g\n", rec.fidelity, rec.residual_kl, rec.base_kl);
  } catch (const DegenerateTarget& e) {
    std::printf("fidelity undefined: %s\n", e.what());
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  std::printf("elapsed %.1f ms\n", ms);
  return 0;
}

struct PreserveArgs {
  fs::path dataset;
  SyntheticSpec synthetic;
  PreservationOptions opts;
};

int cmd_preserve(const PreserveArgs& a) {
  const DatasetBundle data = dataset_or_synthetic(a.dataset, a.synthetic);
  const PreservationReport r = preservation_rate(data.graph, data.num_classes, a.opts);
  if (r.vacuous()) {
    std::printf("preservation: vacuous pass, V* empty (count 0)\n");
    return 0;
  }
  std::printf("preservation: %zu / %zu targets (%.2f%%), max error %.3g, %zu hit the path cap\n", r.preserved,
              r.targets, 100.0 * r.rate(), r.max_error, r.failed);
  std::printf("endpoints over %zu targets: max |fidelity(0) - 1| = %.3g, max fidelity(m) = %.3g\n",
              r.endpoint_targets, r.max_start_deviation, r.max_full_fidelity);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explain GNN prediction changes on evolving graphs by attributing them to paths"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Repeated evolution experiment driven by a key=value config");
  fs::path config;
  run->add_option("--config", config, "config file")->required();

  auto* one = app.add_subcommand("one", "Explain one target node");
  OneArgs oa;
  one->add_option("--graph", oa.graph, "dataset directory of G0")->required();
  one->add_option("--delta", oa.delta, "edge list of added edges")->required();
  one->add_option("--model", oa.model, "weight file")->required();
  one->add_option("--target", oa.target, "target node id")->required();
  one->add_option("--method", oa.method, "convex|linear|topk|deeplift|grad|lrp");
  one->add_option("--n", oa.n, "number of paths to select");
  one->add_option("--dump-contributions", oa.dump, "write the contribution matrix here");
  one->add_option("--path-cap", oa.path_cap, "maximum number of altered paths");
  one->add_flag("--topk-absolute", oa.topk_absolute, "rank topk by absolute total contribution");

  auto* preserve = app.add_subcommand("preserve", "Completeness rate under random model weights");
  PreserveArgs pa;
  preserve->add_option("--layers", pa.opts.layers, "2 or 3")->check(CLI::IsMember({2, 3}));
  preserve->add_option("--dataset", pa.dataset, "dataset directory (default: synthetic)");
  preserve->add_option("--synthetic-nodes", pa.synthetic.nodes, "size of the synthetic graph");
  preserve->add_option("--edges", pa.opts.num_added_edges, "edges added per repeat");
  preserve->add_option("--repeats", pa.opts.repeats, "number of repeats");
  preserve->add_option("--seed", pa.opts.seed, "master seed");
  preserve->add_option("--hidden", pa.opts.hidden, "hidden width");
  preserve->add_flag("--corrupt", pa.opts.corrupt, "negative control: perturb one contribution");

  auto* train = app.add_subcommand("train", "Train a sum-aggregation GNN by full-batch gradient descent");
  fs::path train_dir, train_out;
  TrainOptions to;
  train->add_option("--dataset", train_dir, "dataset directory")->required();
  train->add_option("--out", train_out, "weight file to write")->required();
  train->add_option("--layers", to.layers, "number of layers");
  train->add_option("--hidden", to.hidden, "hidden width");
  train->add_option("--epochs", to.epochs, "epochs");
  train->add_option("--lr", to.learning_rate, "learning rate");
  train->add_option("--seed", to.seed, "initialisation seed");

  auto* synth = app.add_subcommand("synth", "Write a synthetic citation-like dataset");
  SyntheticSpec ss;
  fs::path synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--nodes", ss.nodes, "node count");
  synth->add_option("--classes", ss.classes, "class count");
  synth->add_option("--features", ss.features, "feature dimension");
  synth->add_option("--avg-degree", ss.avg_degree, "average degree");
  synth->add_option("--seed", ss.seed, "generator seed");

  auto* plots = app.add_subcommand("plots", "Per-dataset mean/std fidelity tables for plotting");
  fs::path plot_csv, plot_dir;
  plots->add_option("--results", plot_csv, "results CSV")->required();
  plots->add_option("--out", plot_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config);
    if (*one) return cmd_one(oa);
    if (*preserve) return cmd_preserve(pa);
    if (*train) {
      LoadSummary summary;
      const DatasetBundle data = load_dataset(train_dir, &summary);
      print_summary(summary, data.name);
      TrainLog log;
      const GnnModel model =
          train_reference_model(data.graph, data.labels, training_nodes(data), data.num_classes, to, &log);
      save_model(train_out.string(), model);
      std::printf("final loss %.6g, train accuracy %.4f\n", log.loss.empty() ? 0.0 : log.loss.back(),
                  log.train_accuracy);
      return 0;
    }
    if (*synth) {
      ss.name = synth_out.filename().string();
      save_dataset(synth_out, make_synthetic_dataset(ss));
      return 0;
    }
    if (*plots) {
      const PlotOutput out = emit_plots(plot_csv, plot_dir);
      for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& f : out.files) std::cout << f.string() << '\n';
      return 0;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
