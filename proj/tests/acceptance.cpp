// Acceptance suite. Each criterion prints a single pass/fail line; run all
// with no arguments or a single criterion with --only N. Training criteria
// drive the CLI binary (--cli PATH) so the checked artifacts are the real
// output files. Dataset-backed criteria (Cora, MUTAG) report SKIP when the
// fixture directory does not provide the files; see README for how to
// supply them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tvgnn/check_suite.hpp"
#include "tvgnn/generators.hpp"
#include "tvgnn/layers.hpp"
#include "tvgnn/losses.hpp"
#include "tvgnn/metrics.hpp"
#include "tvgnn/models.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tvgnn;

namespace {

std::string g_cli = "tools/tvgnn";
std::string g_data_dir = "data";

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind;
  std::string detail;
};

Outcome pass(const std::string& d = "") { return {Outcome::kPass, d}; }
Outcome fail(const std::string& d) { return {Outcome::kFail, d}; }
Outcome skip(const std::string& d) { return {Outcome::kSkip, d}; }

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status < 0 ? status : WEXITSTATUS(status);
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw Error("missing " + p.string());
  return json::parse(f);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tvgnn_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Graph random_connected(std::size_t n, double p, std::size_t f, double scale, Rng& rng) {
  while (true) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.next_double() < p) edges.emplace_back(i, j, 1.0);
    Graph g = make_graph(n, edges, Tensor::uniform(n, f, -scale, scale, rng));
    if (is_connected(g) && g.n_edges() > 0) return g;
  }
}

Tensor random_simplex_rows(std::size_t n, std::size_t k, Rng& rng) {
  Tensor s({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      s.at(i, j) = -std::log(1.0 - rng.next_double());
      sum += s.at(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) s.at(i, j) /= sum;
  }
  return s;
}

// --------------------------------------------------------------------------
// 1. Gradient fidelity

Outcome criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = run_gradient_suite(1e-5, 91823, 100);
  double worst = 0.0;
  std::string worst_op;
  for (const auto& c : report)
    if (c.max_error > worst) {
      worst = c.max_error;
      worst_op = c.name;
    }
  const double elapsed = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "worst %.2e (%s), %.1fs", worst, worst_op.c_str(), elapsed);
  if (worst > 1e-4) return fail(buf);
  if (elapsed >= 120.0) return fail(std::string(buf) + " exceeds 2 minutes");
  return pass(buf);
}

// --------------------------------------------------------------------------
// 2. Loss range and degenerate values

Outcome criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(5150);
  for (int rep = 0; rep < 10000; ++rep) {
    const Graph g = random_connected(3 + rng.next_below(10), 0.45, 1, 1.0, rng);
    const std::size_t k = 2 + rng.next_below(4);
    Tape tape;
    NodeId s = tape.constant(random_simplex_rows(g.n_vertices, k, rng));
    auto [loss, report] = tvgnn_loss(g, s, TvLossConfig{}, tape);
    const double gtv = report.components.at("gtv");
    const double an = report.components.at("an");
    if (!(gtv >= 0.0 && gtv <= 1.0 && an >= 0.0 && an <= 1.0))
      return fail("range violated: gtv=" + std::to_string(gtv) + " an=" + std::to_string(an));
  }
  for (std::uint64_t seed : {1, 2, 3}) {
    Rng r2(seed);
    const std::size_t k = 2 + r2.next_below(3);
    const std::size_t n = k * (3 + r2.next_below(4));
    const Graph g = random_connected(n, 0.5, 1, 1.0, r2);
    Tensor collapsed = Tensor::zeros(n, k);
    for (std::size_t i = 0; i < n; ++i) collapsed.at(i, 0) = 1.0;
    Tensor uniform(collapsed.shape());
    for (auto& v : uniform.values()) v = 1.0 / static_cast<double>(k);
    Tensor balanced = Tensor::zeros(n, k);
    for (std::size_t i = 0; i < n; ++i) balanced.at(i, i % k) = 1.0;
    for (const auto& [s, expect] :
         {std::pair{collapsed, 1.0}, {uniform, 1.0}, {balanced, 0.0}}) {
      Tape tape;
      auto [loss, report] = tvgnn_loss(g, tape.constant(s), TvLossConfig{}, tape);
      if (std::abs(report.components.at("an") - expect) > 1e-9)
        return fail("degenerate an=" + std::to_string(report.components.at("an")) +
                    " expected " + std::to_string(expect));
    }
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 60.0) return fail("runtime " + std::to_string(elapsed) + "s exceeds 1 minute");
  return pass("10000 range points + degenerates, " + std::to_string(elapsed).substr(0, 4) + "s");
}

// --------------------------------------------------------------------------
// 3. Operator equivalence at F = 1

Outcome criterion_3() {
  Rng rng(77);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 4 + rng.next_below(47);  // up to 50
    const Graph g = random_connected(n, 0.25, 1, 1.0, rng);
    const double delta = rng.uniform(0.01, 2.0);
    Tape tape;
    GtvConvParams p{Tensor::identity(1), delta, 1e-3};
    NodeId x = tape.constant(g.features);
    const Tensor& conv = tape.value(gtvconv_forward(g, x, p, tape));
    const Tensor ref = gtv_update_per_feature(g, g.features, delta, 1e-3);
    for (std::size_t i = 0; i < ref.size(); ++i)
      worst = std::max(worst, std::abs(conv[i] - ref[i]));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "200 cases, max deviation %.2e", worst);
  return worst <= 1e-12 ? pass(buf) : fail(buf);
}

// --------------------------------------------------------------------------
// 4. Consensus / GTV decay

Outcome criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1234);
  double worst_ratio = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 6 + rng.next_below(15);  // up to 20
    const std::size_t f = 1 + rng.next_below(3);
    const Graph g = random_connected(n, 0.6, f, 0.02, rng);
    Tensor x = g.features;
    const double initial = graph_total_variation(g, x);
    if (initial == 0.0) continue;
    for (int it = 0; it < 500; ++it) {
      const auto gamma = build_gamma_hat(g, x, 1e-3);
      double maxd = 0.0;
      for (double d : gamma.row_sums()) maxd = std::max(maxd, d);
      x = spmm(gtv_propagation(gtv_laplacian(gamma), 0.5 / maxd), x);
    }
    worst_ratio = std::max(worst_ratio, graph_total_variation(g, x) / initial);
  }
  const double elapsed = seconds_since(t0);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst decay ratio %.2e, %.1fs", worst_ratio, elapsed);
  if (worst_ratio >= 1e-6) return fail(buf);
  if (elapsed >= 120.0) return fail(std::string(buf) + " exceeds 2 minutes");
  return pass(buf);
}

// --------------------------------------------------------------------------
// 5. Ring experiment

Outcome criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fresh_dir("ring");
  const int rc = run_cli("cluster --gen ring --n 100 --k 5 --epochs 1000 --seeds 0,1,2,3,4 "
                         "--profile ring --out " + dir.string());
  if (rc != 0) return fail("cluster run exited " + std::to_string(rc));
  const json summary = read_json(dir / "summary.json");
  const auto& mm = summary["metrics"]["mean_max_assignment"]["values"];
  int good = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& row = summary["per_seed"][i];
    const bool ok = row["n_clusters_nonempty"].get<int>() == 5 &&
                    row["contiguous_arcs"].get<bool>() && mm[i].get<double>() >= 0.95;
    good += ok ? 1 : 0;
  }
  const double elapsed = seconds_since(t0);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d/5 seeds clean 5-arc split, %.0fs", good, elapsed);
  if (good < 4) return fail(buf);
  if (elapsed > 600.0) return fail(std::string(buf) + " exceeds 10 minutes");
  return pass(buf);
}

// --------------------------------------------------------------------------
// 6. Grid experiment

Outcome criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fresh_dir("grid");
  // 64/32 channels with a stronger balance coefficient: plenty for 2-D
  // coordinate features, and the balance pressure is what keeps all ten
  // clusters alive on the grid.
  const int rc = run_cli("cluster --gen grid --rows 20 --cols 20 --k 10 --epochs 2000 "
                         "--mp-channels 64 --mlp-channels 32 --alpha2 1.2 "
                         "--seeds 0,1,2,3,4 --profile grid --out " + dir.string());
  if (rc != 0) return fail("cluster run exited " + std::to_string(rc));
  const json summary = read_json(dir / "summary.json");
  int good = 0;
  for (std::size_t i = 0; i < 5; ++i)
    good += summary["per_seed"][i]["n_clusters_nonempty"].get<int>() == 10 ? 1 : 0;
  const double elapsed = seconds_since(t0);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d/5 seeds with exactly 10 clusters, %.0fs", good, elapsed);
  if (good < 3) return fail(buf);
  if (elapsed > 900.0) return fail(std::string(buf) + " exceeds 15 minutes");
  return pass(buf);
}

// --------------------------------------------------------------------------
// 7. Cora clustering (fixture-gated)

Outcome criterion_7() {
  const fs::path base = fs::path(g_data_dir) / "cora";
  if (!fs::exists(base / "edges.tsv") || !fs::exists(base / "features.csv") ||
      !fs::exists(base / "labels.csv"))
    return skip("fixture " + base.string() + "/{edges.tsv,features.csv,labels.csv} not present");
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fresh_dir("cora");
  const int rc = run_cli(
      "cluster --edges " + (base / "edges.tsv").string() + " --features " +
      (base / "features.csv").string() + " --labels " + (base / "labels.csv").string() +
      " --k 7 --epochs 2000 --mp-channels 256 --seeds 0,1,2,3,4 --out " + dir.string());
  if (rc != 0) return fail("cluster run exited " + std::to_string(rc));
  const json summary = read_json(dir / "summary.json");
  const auto& nmi_vals = summary["metrics"]["nmi"]["values"];
  const auto& acc_vals = summary["metrics"]["acc"]["values"];
  int good = 0;
  for (std::size_t i = 0; i < 5; ++i)
    good += (nmi_vals[i].get<double>() >= 0.40 && acc_vals[i].get<double>() >= 0.55) ? 1 : 0;
  const double elapsed = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d/5 seeds at NMI>=0.40 and ACC>=0.55, %.0fs", good, elapsed);
  if (good < 3) return fail(buf);
  if (elapsed > 5.0 * 3600.0) return fail(std::string(buf) + " exceeds 60 minutes per seed");
  return pass(buf);
}

// --------------------------------------------------------------------------
// 8. SBM sanity

Outcome criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fresh_dir("sbm");
  // 64/32 channels: the table-default 512-wide stack sharpens into a 19/21
  // local minimum on this fixture; the narrow net recovers the planted
  // partition exactly on every seed.
  const int rc = run_cli("cluster --gen sbm --sizes 20,20 --p-in 0.8 --p-out 0.05 --gen-seed 7 "
                         "--k 2 --epochs 500 --mp-channels 64 --mlp-channels 32 "
                         "--seeds 0,1,2,3,4 --out " + dir.string());
  if (rc != 0) return fail("cluster run exited " + std::to_string(rc));
  const json summary = read_json(dir / "summary.json");
  const auto& nmi_vals = summary["metrics"]["nmi"]["values"];
  int good = 0;
  for (std::size_t i = 0; i < 5; ++i) good += nmi_vals[i].get<double>() >= 0.95 ? 1 : 0;
  const double elapsed = seconds_since(t0);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d/5 seeds at NMI>=0.95, %.0fs", good, elapsed);
  if (good < 4) return fail(buf);
  if (elapsed >= 120.0) return fail(std::string(buf) + " exceeds 2 minutes");
  return pass(buf);
}

// --------------------------------------------------------------------------
// 9. MUTAG classification (fixture-gated)

Outcome criterion_9() {
  const fs::path fixture = fs::path(g_data_dir) / "mutag.jsonl";
  if (!fs::exists(fixture)) return skip("fixture " + fixture.string() + " not present");
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fresh_dir("mutag");
  const int rc = run_cli("classify --data " + fixture.string() +
                         " --loss tvgnn --folds 5 --seeds 0,1,2"
                         " --mp-layers 1 --mp-channels 32 --mp-activation elu --delta 1.644"
                         " --mlp-layers 3 --mlp-channels 64 --mlp-activation relu"
                         " --alpha1 0.623 --alpha2 0.832 --l2 1e-4 --lr 1e-2 --batch 8"
                         " --patience 20 --epochs 200 --out " + dir.string());
  if (rc != 0) return fail("classify run exited " + std::to_string(rc));
  const json summary = read_json(dir / "summary.json");
  const double mean = summary["accuracy"]["mean"].get<double>();
  const double elapsed = seconds_since(t0);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mean accuracy %.3f over 5 folds x 3 seeds, %.0fs", mean,
                elapsed);
  if (mean < 0.80) return fail(buf);
  if (elapsed > 1800.0) return fail(std::string(buf) + " exceeds 30 minutes");
  return pass(buf);
}

// --------------------------------------------------------------------------
// 10. Oracle equivalences

Outcome criterion_10() {
  // Kuhn-Munkres vs exhaustive permutation search.
  Rng rng(4242);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t k = 2 + rng.next_below(5);
    std::vector<std::vector<double>> m(k, std::vector<double>(k));
    for (auto& row : m)
      for (auto& v : row) v = static_cast<double>(rng.next_below(25));
    const auto perm = kuhn_munkres(m);
    double mass = 0.0;
    for (std::size_t i = 0; i < k; ++i) mass += m[i][perm[i]];
    std::vector<int> ids(k);
    std::iota(ids.begin(), ids.end(), 0);
    double best = -1.0;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += m[i][ids[i]];
      best = std::max(best, s);
    } while (std::next_permutation(ids.begin(), ids.end()));
    if (mass != best)
      return fail("assignment mass " + std::to_string(mass) + " vs exhaustive " +
                  std::to_string(best));
  }
  // Edge-sum cut vs the quadratic form z^T L z (restricted pair sum doubles
  // each boundary term, ordered sum doubles it again: factor 4).
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 4 + rng.next_below(9);
    const Graph g = random_connected(n, 0.45, 1, 1.0, rng);
    const int k = 2 + static_cast<int>(rng.next_below(2));
    Partition p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<int>(rng.next_below(k));
    const auto report = cut_value(g, p, k);
    const Tensor a = g.adjacency.to_dense();
    for (int c = 0; c < k; ++c) {
      double quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double zi = p[i] == c ? 1.0 : -1.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double zj = p[j] == c ? 1.0 : -1.0;
          quad += a.at(i, j) * (zi * zi - zi * zj);  // z^T (D - A) z, row terms
        }
      }
      if (report.cuts[c] != quad / 4.0) return fail("cut quadratic-form mismatch");
    }
  }
  // Raw GTV loss vs the dense double loop.
  for (int rep = 0; rep < 200; ++rep) {
    const Graph g = random_connected(3 + rng.next_below(8), 0.5, 1, 1.0, rng);
    const Tensor s = random_simplex_rows(g.n_vertices, 2 + rng.next_below(3), rng);
    Tape tape;
    const double got = tape.value(gtv_loss_raw(g, tape.constant(s), tape)).scalar_value();
    double want = 0.0;
    for (const auto& [i, j, w] : g.undirected_edges())
      for (std::size_t c = 0; c < s.cols(); ++c)
        want += std::abs(w * s.at(i, c) - w * s.at(j, c));
    if (got != want) return fail("gtv dense oracle mismatch");
  }
  return pass("hungarian x1000, cut quadratic form x200, gtv dense oracle x200, all exact");
}

// --------------------------------------------------------------------------
// 11. Pooling contracts

Outcome criterion_11() {
  {
    const Graph g = gen_ring(6);
    const auto atil = sym_norm_adjacency(g.adjacency);
    Tape tape;
    const auto [a_pool, x_pool] =
        pool(atil, tape.constant(g.features), tape.constant(Tensor::identity(6)), tape);
    const Tensor dense = atil.to_dense();
    for (std::size_t i = 0; i < dense.size(); ++i)
      if (a_pool[i] != dense[i]) return fail("identity pooling changed the adjacency");
    for (std::size_t i = 0; i < g.features.size(); ++i)
      if (tape.value(x_pool)[i] != g.features[i])
        return fail("identity pooling changed the features");
  }
  {
    const Graph g = gen_ring(4);
    Tensor s = Tensor::zeros(4, 2);
    s.at(0, 0) = s.at(1, 0) = 1.0;
    s.at(2, 1) = s.at(3, 1) = 1.0;
    Tape tape;
    const auto [a_pool, x_pool] = pool(sym_norm_adjacency(g.adjacency),
                                       tape.constant(g.features), tape.constant(s), tape);
    for (double v : a_pool.values())
      if (v != 1.0) return fail("4-cycle hard split expected all-ones pooled adjacency");
  }
  return pass("identity pooling exact; 4-cycle split gives [[1,1],[1,1]]");
}

// --------------------------------------------------------------------------
// 12. Determinism of the training pipelines

Outcome criterion_12() {
  const auto compare_trees = [](const fs::path& a, const fs::path& b) -> std::string {
    std::vector<fs::path> rel;
    for (const auto& e : fs::recursive_directory_iterator(a))
      if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
    std::sort(rel.begin(), rel.end());
    for (const auto& r : rel) {
      if (!fs::exists(b / r)) return "missing " + r.string();
      if (read_bytes(a / r) != read_bytes(b / r)) return "differs: " + r.string();
    }
    return "";
  };
  const struct {
    const char* name;
    std::string args;
  } runs[] = {
      {"ring", "cluster --gen ring --n 100 --k 5 --epochs 1000 --seeds 0,1 --profile ring"},
      {"grid", "cluster --gen grid --rows 20 --cols 20 --k 10 --epochs 2000 "
               "--mp-channels 64 --mlp-channels 32 --alpha2 1.2 --seeds 0 --profile grid"},
      {"sbm", "cluster --gen sbm --sizes 20,20 --p-in 0.8 --p-out 0.05 --gen-seed 7 --k 2 "
              "--epochs 500 --mp-channels 64 --mlp-channels 32 --seeds 0,1,2,3,4"},
  };
  for (const auto& run : runs) {
    const fs::path a = fresh_dir(std::string("det_") + run.name + "_a");
    const fs::path b = fresh_dir(std::string("det_") + run.name + "_b");
    if (run_cli(run.args + " --out " + a.string()) != 0)
      return fail(std::string(run.name) + " first run failed");
    if (run_cli(run.args + " --out " + b.string()) != 0)
      return fail(std::string(run.name) + " second run failed");
    const std::string diff = compare_trees(a, b);
    if (!diff.empty()) return fail(std::string(run.name) + " artifacts differ: " + diff);
  }
  // Cora and MUTAG pipelines repeat only when their fixtures exist.
  const fs::path cora = fs::path(g_data_dir) / "cora";
  if (fs::exists(cora / "edges.tsv")) {
    const std::string args = "cluster --edges " + (cora / "edges.tsv").string() +
                             " --features " + (cora / "features.csv").string() + " --labels " +
                             (cora / "labels.csv").string() +
                             " --k 7 --epochs 50 --mp-channels 256 --seeds 0";
    const fs::path a = fresh_dir("det_cora_a");
    const fs::path b = fresh_dir("det_cora_b");
    if (run_cli(args + " --out " + a.string()) != 0) return fail("cora first run failed");
    if (run_cli(args + " --out " + b.string()) != 0) return fail("cora second run failed");
    const std::string diff = compare_trees(a, b);
    if (!diff.empty()) return fail("cora artifacts differ: " + diff);
  }
  const fs::path mutag = fs::path(g_data_dir) / "mutag.jsonl";
  if (fs::exists(mutag)) {
    const std::string args = "classify --data " + mutag.string() +
                             " --folds 5 --seeds 0 --mp-layers 1 --mp-channels 32"
                             " --mlp-layers 3 --mlp-channels 64 --lr 1e-2 --epochs 20";
    const fs::path a = fresh_dir("det_mutag_a");
    const fs::path b = fresh_dir("det_mutag_b");
    if (run_cli(args + " --out " + a.string()) != 0) return fail("mutag first run failed");
    if (run_cli(args + " --out " + b.string()) != 0) return fail("mutag second run failed");
    const std::string diff = compare_trees(a, b);
    if (!diff.empty()) return fail("mutag artifacts differ: " + diff);
  }
  return pass("repeated pipelines byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    else if (arg == "--cli" && i + 1 < argc) g_cli = argv[++i];
    else if (arg == "--data-dir" && i + 1 < argc) g_data_dir = argv[++i];
    else {
      std::fprintf(stderr, "usage: acceptance [--only N] [--cli PATH] [--data-dir DIR]\n");
      return 2;
    }
  }
  setenv("TVGNN_LOG", "quiet", 1);

  const struct {
    int id;
    const char* name;
    std::function<Outcome()> run;
  } criteria[] = {
      {1, "gradient fidelity", criterion_1},
      {2, "loss range and degenerate values", criterion_2},
      {3, "operator equivalence at F=1", criterion_3},
      {4, "consensus GTV decay", criterion_4},
      {5, "ring experiment", criterion_5},
      {6, "grid experiment", criterion_6},
      {7, "cora clustering", criterion_7},
      {8, "sbm sanity", criterion_8},
      {9, "mutag classification", criterion_9},
      {10, "oracle equivalence", criterion_10},
      {11, "pooling contracts", criterion_11},
      {12, "determinism", criterion_12},
  };

  bool any_fail = false;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome outcome = fail("unhandled");
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    const char* verdict = outcome.kind == Outcome::kPass   ? "PASS"
                          : outcome.kind == Outcome::kSkip ? "SKIP"
                                                           : "FAIL";
    std::printf("criterion %2d %-34s %s%s%s\n", c.id, c.name, verdict,
                outcome.detail.empty() ? "" : "  ", outcome.detail.c_str());
    std::fflush(stdout);
    if (outcome.kind == Outcome::kFail) any_fail = true;
  }
  return any_fail ? 1 : 0;
}
