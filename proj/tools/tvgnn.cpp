// tvgnn command-line toolkit: dataset generation, clustering and
// classification runs, assignment re-scoring, and the gradient-check suite.
//
// Exit codes: 0 success, 1 check failure, 2 usage/config error,
// 3 numerical abort.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tvgnn/check_suite.hpp"
#include "tvgnn/checkpoint.hpp"
#include "tvgnn/generators.hpp"
#include "tvgnn/io.hpp"
#include "tvgnn/log.hpp"
#include "tvgnn/metrics.hpp"
#include "tvgnn/models.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace tvgnn;

namespace {

// ---------------------------------------------------------------------------
// Flat key=value config files. Values are injected before the command-line
// arguments, so explicit flags override the file. Unknown keys are rejected.

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidConfig("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  const auto strip = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(f, line)) {
    ++lineno;
    std::string s = strip(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("config line " + std::to_string(lineno) + " is not key=value");
    const std::string key = strip(s.substr(0, eq));
    const std::string value = strip(s.substr(eq + 1));
    if (key.empty()) throw InvalidConfig("empty key in config line " + std::to_string(lineno));
    out[key] = value;
  }
  return out;
}

// Rebuilds argv with config-derived options placed ahead of the explicit
// ones; every option uses a take-last policy.
std::vector<std::string> inject_config(const std::vector<std::string>& args, CLI::App* sub,
                                       const std::string& sub_name) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::vector<std::string> out{args[0], sub_name};
  for (const auto& [key, value] : read_config_file(config_path)) {
    auto* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw InvalidConfig("unknown config key '" + key + "' for " + sub_name);
    if (opt->get_expected_min() == 0) {  // flags
      out.push_back("--" + key + "=" + value);
    } else {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (i == 1 && args[i] == sub_name) continue;
    out.push_back(args[i]);
  }
  return out;
}

void take_last_everywhere(CLI::App* app) {
  for (auto* opt : app->get_options())
    if (opt->get_expected_min() >= 1) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  for (auto* sub : app->get_subcommands({})) take_last_everywhere(sub);
}

// ---------------------------------------------------------------------------
// Shared option bundles.

struct HyperOpts {
  TrainConfig cfg;
  std::string loss = "tvgnn";
  std::string mp_activation = "elu";
  std::string mlp_activation = "relu";
  std::string mp_kind = "gtvconv";
  std::string variant = "simplified";
  double rho = -1.0;

  void add_to(CLI::App* sub) {
    sub->add_option("--epochs", cfg.epochs, "training epochs");
    sub->add_option("--lr", cfg.learning_rate, "Adam learning rate");
    sub->add_option("--l2", cfg.l2, "l2 penalty on weight matrices");
    sub->add_option("--alpha1", cfg.loss.alpha1, "GTV term coefficient");
    sub->add_option("--alpha2", cfg.loss.alpha2, "balance term coefficient");
    sub->add_option("--rho", rho, "asymmetry parameter (default K-1)");
    sub->add_option("--delta", cfg.delta, "GTVConv step size");
    sub->add_option("--epsilon", cfg.epsilon, "gamma stability floor");
    sub->add_option("--mp-layers", cfg.mp_layers, "message-passing layers");
    sub->add_option("--mp-channels", cfg.mp_channels, "message-passing width");
    sub->add_option("--mp-activation", mp_activation, "identity|relu|elu");
    sub->add_option("--mlp-layers", cfg.mlp_layers, "assignment MLP hidden layers");
    sub->add_option("--mlp-channels", cfg.mlp_channels, "assignment MLP width");
    sub->add_option("--mlp-activation", mlp_activation, "identity|relu|elu");
    sub->add_option("--loss", loss, "tvgnn|mincut|dmon");
    sub->add_option("--mp-kind", mp_kind, "gtvconv|gcn");
    sub->add_option("--variant", variant, "simplified|degree-weighted");
    sub->add_flag("--quantile-grad", cfg.loss.quantile_gradient,
                  "route gradient through the quantile entry");
    sub->add_flag("--dmon-normalized", cfg.dmon_normalized_degree,
                  "normalize the DMoN degree product by 2E");
  }

  TrainConfig resolve() const {
    TrainConfig out = cfg;
    out.loss.rho = rho;
    out.loss_kind = loss_kind_from_string(loss);
    out.mp_activation = activation_from_string(mp_activation);
    out.mlp_activation = activation_from_string(mlp_activation);
    if (mp_kind == "gtvconv") out.mp_kind = MpKind::kGtvConv;
    else if (mp_kind == "gcn") out.mp_kind = MpKind::kGcn;
    else throw InvalidConfig("unknown mp-kind '" + mp_kind + "'");
    if (variant == "simplified") out.variant = GtvVariant::kSimplified;
    else if (variant == "degree-weighted") out.variant = GtvVariant::kDegreeWeighted;
    else throw InvalidConfig("unknown variant '" + variant + "'");
    return out;
  }
};

struct DatasetOpts {
  std::string edges, features, labels;
  std::string gen;
  std::size_t n = 100, rows = 10, cols = 10;
  std::string sizes = "20,20";
  double p_in = 0.8, p_out = 0.05;
  std::uint64_t gen_seed = 0;

  void add_to(CLI::App* sub) {
    sub->add_option("--edges", edges, "edge list path");
    sub->add_option("--features", features, "feature CSV path");
    sub->add_option("--labels", labels, "label CSV path");
    sub->add_option("--gen", gen, "generator instead of files: ring|grid|sbm");
    sub->add_option("--n", n, "ring size");
    sub->add_option("--rows", rows, "grid rows");
    sub->add_option("--cols", cols, "grid cols");
    sub->add_option("--sizes", sizes, "sbm block sizes, comma separated");
    sub->add_option("--p-in", p_in, "sbm intra-block probability");
    sub->add_option("--p-out", p_out, "sbm inter-block probability");
    sub->add_option("--gen-seed", gen_seed, "sbm generator seed");
  }

  std::vector<std::size_t> parse_sizes() const {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= sizes.size()) {
      const auto comma = sizes.find(',', start);
      const std::string tok =
          sizes.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!tok.empty()) out.push_back(std::stoull(tok));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (out.empty()) throw InvalidConfig("--sizes is empty");
    return out;
  }

  Graph load() const {
    if (!gen.empty()) {
      if (gen == "ring") return gen_ring(n);
      if (gen == "grid") return gen_grid(rows, cols);
      if (gen == "sbm") return gen_sbm(parse_sizes(), p_in, p_out, gen_seed);
      throw InvalidConfig("unknown generator '" + gen + "'");
    }
    if (edges.empty() || features.empty())
      throw InvalidConfig("need --edges and --features (or --gen)");
    return load_vertex_dataset(edges, features,
                               labels.empty() ? std::nullopt : std::optional(labels));
  }
};

std::vector<std::uint64_t> parse_seed_list(const std::string& seeds, std::uint64_t single) {
  if (seeds.empty()) return {single};
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= seeds.size()) {
    const auto comma = seeds.find(',', start);
    const std::string tok =
        seeds.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) out.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw InvalidConfig("--seeds is empty");
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
}

ordered_json stats_json(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  ordered_json j;
  j["mean"] = mean;
  j["std"] = std::sqrt(var);
  j["values"] = values;
  return j;
}

// Number of circular boundaries equals the number of arcs; the partition is
// a clean arc split when that matches the non-empty clusters.
bool contiguous_arcs(const Partition& p, std::size_t k) {
  const std::size_t n = p.size();
  std::size_t boundaries = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (p[i] != p[(i + 1) % n]) ++boundaries;
  std::vector<char> present(k, 0);
  for (int c : p) present[c] = 1;
  std::size_t nonempty = 0;
  for (char c : present) nonempty += c;
  return boundaries == (nonempty > 1 ? nonempty : 0);
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const std::string& kind, const DatasetOpts& data, const std::string& out_dir) {
  Graph g;
  if (kind == "ring") g = gen_ring(data.n);
  else if (kind == "grid") g = gen_grid(data.rows, data.cols);
  else if (kind == "sbm") g = gen_sbm(data.parse_sizes(), data.p_in, data.p_out, data.gen_seed);
  else throw InvalidConfig("unknown generator kind '" + kind + "'");
  fs::create_directories(out_dir);
  save_edge_list(g, (fs::path(out_dir) / "edges.tsv").string());
  save_feature_csv(g.features, (fs::path(out_dir) / "features.csv").string());
  if (g.vertex_labels)
    save_label_csv(*g.vertex_labels, (fs::path(out_dir) / "labels.csv").string());
  log_info("wrote " + kind + " graph with " + std::to_string(g.n_vertices) + " vertices, " +
           std::to_string(g.n_edges()) + " edges to " + out_dir);
  return 0;
}

// ---------------------------------------------------------------------------
// cluster

struct SeedArtifacts {
  std::uint64_t seed = 0;
  ordered_json metrics;
};

SeedArtifacts run_cluster_seed(const Graph& g, std::size_t k, TrainConfig cfg,
                               std::uint64_t seed, const fs::path& dir,
                               const std::string& profile_mode, bool save_model,
                               bool sharpness_csv) {
  cfg.seed = seed;
  ClusterRun run = train_cluster(g, k, cfg);
  fs::create_directories(dir);
  if (save_model)
    save_checkpoint((dir / "model.json").string(), run.model.named_params(), cfg);

  const Tensor& s = run.assignment.values;
  const Partition part = argmax_partition(run.assignment);

  {
    std::string csv;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      csv += std::to_string(i) + "," + std::to_string(part[i]);
      for (std::size_t j = 0; j < s.cols(); ++j) csv += "," + format_double(s.at(i, j));
      csv += "\n";
    }
    write_text(dir / "assignments.csv", csv);
  }
  {
    std::string csv = "epoch,total";
    for (const auto& [name, v] : run.history.front().report.components) csv += "," + name;
    csv += "\n";
    for (const auto& e : run.history) {
      csv += std::to_string(e.epoch) + "," + format_double(e.report.total);
      for (const auto& [name, v] : e.report.components) csv += "," + format_double(v);
      csv += "\n";
    }
    write_text(dir / "history.csv", csv);
  }

  // Sharpness heatmap sorted by the Kuhn-Munkres-aligned clusters when
  // labels exist, otherwise by the raw clusters.
  Partition order = part;
  ordered_json m;
  m["seed"] = seed;
  m["k"] = k;
  m["loss"] = to_string(cfg.loss_kind);
  m["loss_total"] = run.history.back().report.total;
  for (const auto& [name, v] : run.history.back().report.components) m["loss_" + name] = v;
  if (g.vertex_labels) {
    const Partition& labels = *g.vertex_labels;
    m["nmi"] = nmi(labels, part);
    m["acc"] = accuracy(labels, part);
    int kk = static_cast<int>(k);
    for (int y : labels) kk = std::max(kk, y + 1);
    std::vector<std::vector<double>> confusion(kk, std::vector<double>(kk, 0.0));
    for (std::size_t i = 0; i < labels.size(); ++i) confusion[part[i]][labels[i]] += 1.0;
    const auto perm = kuhn_munkres(confusion);
    for (std::size_t i = 0; i < part.size(); ++i) order[i] = perm[part[i]];
  }
  const Tensor sharp = sharpness_matrix(s, order);
  write_pgm(sharp, (dir / "sharpness.pgm").string());
  if (sharpness_csv) {
    std::string csv;
    for (std::size_t i = 0; i < sharp.rows(); ++i) {
      for (std::size_t j = 0; j < sharp.cols(); ++j) {
        if (j) csv += ',';
        csv += format_double(sharp.at(i, j));
      }
      csv += '\n';
    }
    write_text(dir / "sharpness.csv", csv);
  }

  const auto profile = max_assignment_profile(
      s, profile_mode == "grid" ? ProfileOrder::kAscending : ProfileOrder::kVertex);
  {
    std::string csv;
    for (std::size_t i = 0; i < profile.size(); ++i)
      csv += std::to_string(i) + "," + format_double(profile[i]) + "\n";
    write_text(dir / "profile.csv", csv);
  }
  double mean_max = 0.0;
  for (double v : profile) mean_max += v;
  mean_max /= static_cast<double>(profile.size());
  m["mean_max_assignment"] = mean_max;

  const auto cut = cut_value(g, part, static_cast<int>(k));
  if (cut.infinite) m["cut_ratio"] = nullptr;
  else m["cut_ratio"] = cut.ratio;
  m["cut_per_cluster"] = cut.cuts;
  const auto balance = cluster_balance(part, static_cast<int>(k));
  m["balance_sizes"] = balance.sizes;
  m["balance_entropy"] = balance.entropy;
  std::size_t nonempty = 0;
  for (std::size_t c : balance.sizes) nonempty += c > 0 ? 1 : 0;
  m["n_clusters_nonempty"] = nonempty;
  if (profile_mode == "ring") m["contiguous_arcs"] = contiguous_arcs(part, k);

  write_text(dir / "metrics.json", m.dump(2) + "\n");
  return {seed, m};
}

int cmd_cluster(const DatasetOpts& data, const HyperOpts& hyper, std::size_t k,
                const std::string& seeds, std::uint64_t seed, const std::string& out_dir,
                const std::string& profile_mode, std::size_t jobs, bool save_model,
                bool sharpness_csv) {
  if (k == 0) throw InvalidConfig("--k is required");
  const Graph g = data.load();
  const TrainConfig cfg = hyper.resolve();
  const auto seed_list = parse_seed_list(seeds, seed);
  fs::create_directories(out_dir);

  std::vector<SeedArtifacts> results(seed_list.size());
  const auto worker = [&](std::size_t idx) {
    const fs::path dir = fs::path(out_dir) / ("seed_" + std::to_string(seed_list[idx]));
    results[idx] =
        run_cluster_seed(g, k, cfg, seed_list[idx], dir, profile_mode, save_model, sharpness_csv);
  };
  if (jobs > 1 && seed_list.size() > 1) {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, seed_list.size()); ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < seed_list.size(); i += jobs) worker(i);
      });
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t i = 0; i < seed_list.size(); ++i) worker(i);
  }

  ordered_json summary;
  summary["task"] = "cluster";
  summary["k"] = k;
  summary["seeds"] = seed_list;
  summary["config"] = train_config_json(cfg);
  const auto collect = [&](const std::string& key) {
    std::vector<double> vals;
    for (const auto& r : results)
      if (r.metrics.contains(key) && r.metrics[key].is_number())
        vals.push_back(r.metrics[key].get<double>());
    return vals;
  };
  ordered_json metrics;
  for (const std::string key :
       {"loss_total", "nmi", "acc", "mean_max_assignment", "balance_entropy"}) {
    const auto vals = collect(key);
    if (vals.size() == seed_list.size()) metrics[key] = stats_json(vals);
  }
  summary["metrics"] = metrics;
  {
    ordered_json per_seed = ordered_json::array();
    for (const auto& r : results) {
      ordered_json row;
      row["seed"] = r.seed;
      row["n_clusters_nonempty"] = r.metrics["n_clusters_nonempty"];
      if (r.metrics.contains("contiguous_arcs"))
        row["contiguous_arcs"] = r.metrics["contiguous_arcs"];
      per_seed.push_back(std::move(row));
    }
    summary["per_seed"] = std::move(per_seed);
  }
  write_text(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
  log_info("cluster run complete: " + out_dir + "/summary.json");
  return 0;
}

// ---------------------------------------------------------------------------
// classify

int cmd_classify(const std::string& data_path, const HyperOpts& hyper, std::size_t folds,
                 const std::string& seeds, std::uint64_t seed, std::uint64_t split_seed,
                 std::size_t k_pool, std::size_t batch, std::size_t patience,
                 const std::string& out_dir, std::size_t jobs) {
  const GraphCollection data = load_graph_collection(data_path);
  TrainConfig base = hyper.resolve();
  base.k_pool = k_pool;
  base.batch_size = batch;
  base.patience = patience;
  const auto seed_list = parse_seed_list(seeds, seed);
  const auto splits = stratified_kfold(data.labels(), folds, split_seed);
  fs::create_directories(out_dir);

  struct Row {
    std::size_t fold = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    std::size_t epochs = 0;
    std::size_t best_epoch = 0;
  };
  std::vector<Row> rows(folds * seed_list.size());
  const auto worker = [&](std::size_t idx) {
    const std::size_t f = idx / seed_list.size();
    const std::size_t si = idx % seed_list.size();
    TrainConfig c = base;
    c.seed = seed_list[si];
    const ClassifierRun run = train_classifier(data, c, splits[f].first, splits[f].second);
    rows[idx] = {f, seed_list[si], run.test_accuracy, run.epochs_run, run.best_epoch};
    log_info("fold " + std::to_string(f) + " seed " + std::to_string(seed_list[si]) +
             " accuracy " + std::to_string(run.test_accuracy));
  };
  if (jobs > 1) {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, rows.size()); ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < rows.size(); i += jobs) worker(i);
      });
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t i = 0; i < rows.size(); ++i) worker(i);
  }

  std::string csv = "fold,seed,accuracy,epochs,best_epoch\n";
  std::vector<double> accs;
  for (const auto& r : rows) {
    csv += std::to_string(r.fold) + "," + std::to_string(r.seed) + "," +
           format_double(r.accuracy) + "," + std::to_string(r.epochs) + "," +
           std::to_string(r.best_epoch) + "\n";
    accs.push_back(r.accuracy);
  }
  write_text(fs::path(out_dir) / "accuracy.csv", csv);

  ordered_json summary;
  summary["task"] = "classify";
  summary["data"] = data_path;
  summary["folds"] = folds;
  summary["seeds"] = seed_list;
  summary["config"] = train_config_json(base);
  summary["accuracy"] = stats_json(accs);
  write_text(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
  log_info("classification run complete: " + out_dir + "/summary.json");
  return 0;
}

// ---------------------------------------------------------------------------
// eval: re-score saved assignments against labels

int cmd_eval(const std::string& assignments_path, const std::string& labels_path,
             const std::string& edges_path, const std::string& out_path) {
  const auto labels = load_label_csv(labels_path);
  std::ifstream f(assignments_path);
  if (!f) throw Error("cannot open " + assignments_path);
  Partition clusters;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    if (c1 == std::string::npos)
      throw ParseError("assignment row needs vertex,cluster", lineno);
    const auto c2 = line.find(',', c1 + 1);
    const std::string cell =
        line.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1);
    try {
      clusters.push_back(std::stoi(cell));
    } catch (const std::exception&) {
      throw ParseError("bad cluster id '" + cell + "'", lineno);
    }
  }
  if (clusters.size() != labels.size())
    throw LengthMismatch("assignments cover " + std::to_string(clusters.size()) +
                         " vertices, labels " + std::to_string(labels.size()));
  int k = 0;
  for (int c : clusters) k = std::max(k, c + 1);
  for (int y : labels) k = std::max(k, y + 1);

  ordered_json m;
  m["nmi"] = nmi(labels, clusters);
  m["acc"] = accuracy(labels, clusters);
  const auto balance = cluster_balance(clusters, k);
  m["balance_sizes"] = balance.sizes;
  m["balance_entropy"] = balance.entropy;
  if (!edges_path.empty()) {
    const Graph g =
        make_graph(labels.size(), load_edge_list(edges_path), Tensor::zeros(labels.size(), 0));
    const auto cut = cut_value(g, clusters, k);
    if (cut.infinite) m["cut_ratio"] = nullptr;
    else m["cut_ratio"] = cut.ratio;
  }
  const std::string text = m.dump(2) + "\n";
  std::cout << text;
  if (!out_path.empty()) write_text(out_path, text);
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

int cmd_gradcheck(double h, int points, std::uint64_t seed) {
  const auto report = run_gradient_suite(h, seed, points);
  std::printf("gradient check: %d points per op, h = %g\n", points, h);
  std::printf("%-24s %12s\n", "op", "max rel err");
  bool ok = true;
  std::string worst;
  for (const auto& c : report) {
    std::printf("%-24s %12.3e%s\n", c.name.c_str(), c.max_error,
                c.max_error <= 1e-4 ? "" : "  FAIL");
    if (c.max_error > 1e-4 && worst.empty()) worst = c.name;
    ok = ok && c.max_error <= 1e-4;
  }
  if (!ok) {
    std::printf("FAIL: %s exceeds 1e-4\n", worst.c_str());
    return 1;
  }
  std::printf("PASS: all ops within 1e-4\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Total-variation graph neural network toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds, profile_mode = "none";
  std::uint64_t seed = 0, split_seed = 0;
  std::size_t jobs = 1;

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic dataset");
  std::string gen_kind;
  DatasetOpts gen_data;
  gen->add_option("--kind", gen_kind, "ring|grid|sbm")->required();
  gen_data.add_to(gen);
  gen->add_option("--seed", seed, "generator seed (alias of --gen-seed)");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--config", config_path, "flat key=value config file");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "train vertex clustering");
  DatasetOpts cluster_data;
  HyperOpts cluster_hyper;
  std::size_t cluster_k = 0;
  cluster_data.add_to(cluster);
  cluster_hyper.add_to(cluster);
  cluster->add_option("--k", cluster_k, "number of clusters");
  cluster->add_option("--seed", seed, "single seed");
  cluster->add_option("--seeds", seeds, "comma-separated seed list");
  cluster->add_option("--out", out_dir, "output directory")->required();
  cluster->add_option("--jobs", jobs, "parallel seeds");
  cluster->add_option("--profile", profile_mode, "none|ring|grid");
  bool save_model = false, sharpness_csv = false;
  cluster->add_flag("--save-model", save_model, "write model.json per seed");
  cluster->add_flag("--sharpness-csv", sharpness_csv,
                    "also write the sharpness matrix as CSV");
  cluster->add_option("--config", config_path, "flat key=value config file");

  // classify
  auto* classify = app.add_subcommand("classify", "train graph classification");
  std::string classify_data;
  HyperOpts classify_hyper;
  std::size_t folds = 5, k_pool = 0, batch = 8, patience = 20;
  classify->add_option("--data", classify_data, "graph collection (JSON lines)")->required();
  classify_hyper.add_to(classify);
  classify->add_option("--folds", folds, "stratified folds");
  classify->add_option("--seed", seed, "single seed");
  classify->add_option("--seeds", seeds, "comma-separated seed list");
  classify->add_option("--split-seed", split_seed, "fold split seed");
  classify->add_option("--kpool", k_pool, "pooled vertex count (0: mean N / 2)");
  classify->add_option("--batch", batch, "gradient accumulation batch size");
  classify->add_option("--patience", patience, "early stopping patience");
  classify->add_option("--out", out_dir, "output directory")->required();
  classify->add_option("--jobs", jobs, "parallel fold x seed runs");
  classify->add_option("--config", config_path, "flat key=value config file");

  // eval
  auto* eval = app.add_subcommand("eval", "re-score saved assignments");
  std::string eval_assignments, eval_labels, eval_edges, eval_out;
  eval->add_option("--assignments", eval_assignments, "assignments.csv")->required();
  eval->add_option("--labels", eval_labels, "label CSV")->required();
  eval->add_option("--edges", eval_edges, "edge list (enables cut ratio)");
  eval->add_option("--out", eval_out, "also write the report here");
  eval->add_option("--config", config_path, "flat key=value config file");

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  double gc_h = 1e-5;
  int gc_points = 100;
  std::uint64_t gc_seed = 91823;
  gradcheck->set_help_flag("--help", "print help");  // frees -h for the step size
  gradcheck->add_option("--h", gc_h, "central difference step");
  gradcheck->add_option("--points", gc_points, "evaluation points per op");
  gradcheck->add_option("--seed", gc_seed, "suite seed");
  gradcheck->add_option("--config", config_path, "flat key=value config file");

  take_last_everywhere(&app);

  std::vector<std::string> args(argv, argv + argc);
  try {
    if (args.size() >= 2 && !args[1].empty() && args[1][0] != '-') {
      CLI::App* sub = app.get_subcommand_no_throw(args[1]);
      if (sub) args = inject_config(args, sub, args[1]);
    }
    std::vector<const char*> cargs;
    cargs.reserve(args.size());
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));

    if (*gen) {
      if (gen->count("--seed") && !gen->count("--gen-seed")) gen_data.gen_seed = seed;
      return cmd_gen(gen_kind, gen_data, out_dir);
    }
    if (*cluster)
      return cmd_cluster(cluster_data, cluster_hyper, cluster_k, seeds, seed, out_dir,
                         profile_mode, jobs, save_model, sharpness_csv);
    if (*classify)
      return cmd_classify(classify_data, classify_hyper, folds, seeds, seed, split_seed, k_pool,
                          batch, patience, out_dir, jobs);
    if (*eval) return cmd_eval(eval_assignments, eval_labels, eval_edges, eval_out);
    if (*gradcheck) return cmd_gradcheck(gc_h, gc_points, gc_seed);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
