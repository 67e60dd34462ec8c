#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "tvgnn/generators.hpp"
#include "tvgnn/graph.hpp"
#include "tvgnn/layers.hpp"
#include "tvgnn/log.hpp"
#include "tvgnn/losses.hpp"
#include "tvgnn/metrics.hpp"
#include "tvgnn/optim.hpp"

namespace tvgnn {

enum class LossKind { kTvgnn, kMinCut, kDmon };
enum class MpKind { kGtvConv, kGcn };

inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "tvgnn") return LossKind::kTvgnn;
  if (s == "mincut") return LossKind::kMinCut;
  if (s == "dmon") return LossKind::kDmon;
  throw InvalidConfig("unknown loss '" + s + "'");
}

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::kTvgnn: return "tvgnn";
    case LossKind::kMinCut: return "mincut";
    case LossKind::kDmon: return "dmon";
  }
  return "?";
}

// Defaults follow the vertex-clustering configuration; everything is
// overridable from the CLI.
struct TrainConfig {
  std::size_t epochs = 500;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  std::size_t patience = 20;   // classification early stopping
  std::size_t batch_size = 8;  // gradient accumulation (classification)
  LossKind loss_kind = LossKind::kTvgnn;
  TvLossConfig loss{/*rho=*/-1.0, /*alpha1=*/0.785, /*alpha2=*/0.514};
  bool dmon_normalized_degree = false;
  std::size_t mp_layers = 2;
  std::size_t mp_channels = 512;
  Activation mp_activation = Activation::kElu;
  MpKind mp_kind = MpKind::kGtvConv;
  GtvVariant variant = GtvVariant::kSimplified;
  double delta = 0.311;
  double epsilon = 1e-3;
  std::size_t mlp_layers = 1;
  std::size_t mlp_channels = 256;
  Activation mlp_activation = Activation::kRelu;
  std::size_t pool_blocks = 1;  // classification
  std::size_t k_pool = 0;       // 0 -> ceil(mean vertex count / 2)
};

struct ClusterModel {
  std::vector<GtvConvParams> mp_layers;
  MlpParams assign_mlp;
  std::size_t k = 2;
  MpKind mp_kind = MpKind::kGtvConv;

  std::vector<std::pair<std::string, Tensor*>> named_params() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (std::size_t i = 0; i < mp_layers.size(); ++i)
      out.emplace_back("mp" + std::to_string(i) + ".weight", &mp_layers[i].weight);
    for (std::size_t i = 0; i < assign_mlp.weights.size(); ++i) {
      out.emplace_back("mlp.w" + std::to_string(i), &assign_mlp.weights[i]);
      out.emplace_back("mlp.b" + std::to_string(i), &assign_mlp.biases[i]);
    }
    return out;
  }
};

inline ClusterModel make_cluster_model(std::size_t f_in, std::size_t k, const TrainConfig& cfg,
                                       Rng& rng) {
  ClusterModel m;
  m.k = k;
  m.mp_kind = cfg.mp_kind;
  std::size_t w = f_in;
  for (std::size_t l = 0; l < cfg.mp_layers; ++l) {
    GtvConvParams p;
    p.weight = glorot_uniform(w, cfg.mp_channels, rng);
    p.delta = cfg.delta;
    p.epsilon = cfg.epsilon;
    p.activation = cfg.mp_activation;
    p.variant = cfg.variant;
    m.mp_layers.push_back(std::move(p));
    w = cfg.mp_channels;
  }
  m.assign_mlp = make_mlp(w, cfg.mlp_layers, cfg.mlp_channels, k, cfg.mlp_activation, rng);
  return m;
}

inline NodeId cluster_forward(ClusterModel& m, const Graph& g, Tape& tape,
                              ParamMap* pm = nullptr) {
  NodeId x = tape.constant(g.features);
  for (auto& layer : m.mp_layers)
    x = m.mp_kind == MpKind::kGtvConv
            ? gtvconv_forward(g, x, layer, tape, pm)
            : gcn_forward(g, x, layer.weight, layer.activation, tape, pm);
  return mlp_assign(x, m.assign_mlp, tape, pm);
}

inline std::pair<NodeId, LossReport> clustering_loss(const Graph& g, NodeId s,
                                                     const TrainConfig& cfg, Tape& tape) {
  switch (cfg.loss_kind) {
    case LossKind::kTvgnn: return tvgnn_loss(g, s, cfg.loss, tape);
    case LossKind::kMinCut: return mincut_loss(g, s, tape);
    case LossKind::kDmon: return dmon_loss(g, s, tape, cfg.dmon_normalized_degree);
  }
  throw InvalidConfig("bad loss kind");
}

struct EpochStats {
  std::size_t epoch;
  LossReport report;
};

struct ClusterRun {
  ClusterModel model;
  AssignmentMatrix assignment;
  std::vector<EpochStats> history;
};

// Full-graph gradient steps with Adam on the selected unsupervised loss.
inline ClusterRun train_cluster(const Graph& g, std::size_t k, const TrainConfig& cfg) {
  if (k < 2) throw InvalidConfig("clustering needs k >= 2");
  if (k >= g.n_vertices)
    throw InvalidConfig("k = " + std::to_string(k) + " must be smaller than n = " +
                        std::to_string(g.n_vertices));
  if (!is_connected(g)) log_info("warning: graph is disconnected");
  Rng rng(cfg.seed);
  ClusterRun run;
  run.model = make_cluster_model(g.n_features(), k, cfg, rng);
  Adam adam({cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps_adam, cfg.l2});
  run.history.reserve(cfg.epochs);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    try {
      Tape tape;
      ParamMap pm;
      NodeId s = cluster_forward(run.model, g, tape, &pm);
      AssignmentMatrix{tape.value(s)}.validate();  // rows stay on the simplex
      auto [loss, report] = clustering_loss(g, s, cfg, tape);
      auto grads = tape.backward(loss);
      adam.step(pm, grads);
      run.history.push_back({epoch, std::move(report)});
    } catch (const NonFiniteValue& e) {
      throw NonFiniteLoss(epoch, e.what());
    }
    if (epoch % 100 == 0)
      log_debug("epoch " + std::to_string(epoch) + " loss " +
                std::to_string(run.history.back().report.total));
  }
  Tape tape;
  run.assignment.values = tape.value(cluster_forward(run.model, g, tape));
  run.assignment.validate();
  return run;
}

// A_pool = S^T At S (dense, diagonal kept; symmetrized exactly) and
// X_pool = S^T X recorded on the tape.
inline std::pair<Tensor, NodeId> pool(const SparseMatrix& a_tilde, NodeId x, NodeId s,
                                      Tape& tape) {
  const Tensor& sv = tape.value(s);
  if (sv.rows() != a_tilde.n_rows || tape.value(x).rows() != a_tilde.n_rows)
    throw DimensionMismatch("pool: assignment/features rows do not match adjacency");
  const std::size_t k = sv.cols();
  Tensor u = spmm(a_tilde, sv);  // N x K
  Tensor st({k, sv.rows()});
  for (std::size_t i = 0; i < sv.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) st.at(j, i) = sv.at(i, j);
  Tensor a_pool({k, k});
  kernel::matmul(st.data(), k, sv.rows(), u.data(), k, a_pool.data());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double m = 0.5 * (a_pool.at(i, j) + a_pool.at(j, i));
      a_pool.at(i, j) = m;
      a_pool.at(j, i) = m;
    }
  NodeId x_pool = tape.matmul(tape.transpose(s), x);
  return {a_pool, x_pool};
}

// Coarse graph from a pooled adjacency: diagonal removed, zero entries
// dropped, no features (the pooled features live on the tape).
inline Graph coarse_graph(const Tensor& a_pool) {
  const std::size_t k = a_pool.rows();
  std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j && a_pool.at(i, j) > 0.0) trip.emplace_back(i, j, a_pool.at(i, j));
  Graph g;
  g.n_vertices = k;
  g.adjacency = SparseMatrix::from_triplets(k, k, std::move(trip));
  g.features = Tensor::zeros(k, 0);
  return g;
}

struct PoolBlock {
  std::vector<GtvConvParams> mp_layers;
  MlpParams assign_mlp;
  std::size_t k_pool = 2;
};

struct ClassifierModel {
  std::vector<PoolBlock> blocks;
  Tensor head_weight;  // F x C
  Tensor head_bias;    // 1 x C
  MpKind mp_kind = MpKind::kGtvConv;

  std::vector<std::pair<std::string, Tensor*>> named_params() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::string prefix = "block" + std::to_string(b) + ".";
      for (std::size_t i = 0; i < blocks[b].mp_layers.size(); ++i)
        out.emplace_back(prefix + "mp" + std::to_string(i) + ".weight",
                         &blocks[b].mp_layers[i].weight);
      for (std::size_t i = 0; i < blocks[b].assign_mlp.weights.size(); ++i) {
        out.emplace_back(prefix + "mlp.w" + std::to_string(i), &blocks[b].assign_mlp.weights[i]);
        out.emplace_back(prefix + "mlp.b" + std::to_string(i), &blocks[b].assign_mlp.biases[i]);
      }
    }
    out.emplace_back("head.weight", &head_weight);
    out.emplace_back("head.bias", &head_bias);
    return out;
  }
};

inline ClassifierModel make_classifier_model(std::size_t f_in, std::size_t n_classes,
                                             std::size_t k_pool, const TrainConfig& cfg,
                                             Rng& rng) {
  ClassifierModel m;
  m.mp_kind = cfg.mp_kind;
  std::size_t w = f_in;
  std::size_t kp = std::max<std::size_t>(2, k_pool);
  for (std::size_t b = 0; b < std::max<std::size_t>(1, cfg.pool_blocks); ++b) {
    PoolBlock block;
    for (std::size_t l = 0; l < cfg.mp_layers; ++l) {
      GtvConvParams p;
      p.weight = glorot_uniform(w, cfg.mp_channels, rng);
      p.delta = cfg.delta;
      p.epsilon = cfg.epsilon;
      p.activation = cfg.mp_activation;
      p.variant = cfg.variant;
      block.mp_layers.push_back(std::move(p));
      w = cfg.mp_channels;
    }
    block.assign_mlp =
        make_mlp(w, cfg.mlp_layers, cfg.mlp_channels, kp, cfg.mlp_activation, rng);
    block.k_pool = kp;
    m.blocks.push_back(std::move(block));
    kp = std::max<std::size_t>(2, kp / 2);  // halve on deeper blocks
  }
  m.head_weight = glorot_uniform(w, n_classes, rng);
  m.head_bias = Tensor::zeros(1, n_classes);
  return m;
}

struct ClassifyOutputs {
  NodeId logits;
  // The graph each assignment was computed on, for the per-pool losses.
  std::vector<std::pair<Graph, NodeId>> pools;
};

inline ClassifyOutputs classify_forward(ClassifierModel& m, const Graph& g, Tape& tape,
                                        ParamMap* pm = nullptr) {
  ClassifyOutputs out;
  Graph cur = g;
  NodeId x = tape.constant(g.features);
  for (auto& block : m.blocks) {
    for (auto& layer : block.mp_layers)
      x = m.mp_kind == MpKind::kGtvConv
              ? gtvconv_forward(cur, x, layer, tape, pm)
              : gcn_forward(cur, x, layer.weight, layer.activation, tape, pm);
    NodeId s = mlp_assign(x, block.assign_mlp, tape, pm);
    out.pools.emplace_back(cur, s);
    auto [a_pool, x_pool] = pool(sym_norm_adjacency(cur.adjacency), x, s, tape);
    x = x_pool;
    cur = coarse_graph(a_pool);
  }
  const std::size_t k_last = tape.value(x).rows();
  NodeId readout = tape.divide_by_const(tape.reduce_sum_axis(x, 0),
                                        static_cast<double>(k_last));  // mean over pooled vertices
  NodeId w = bind_or_param(tape, m.head_weight, pm);
  NodeId b = bind_or_param(tape, m.head_bias, pm, /*decay=*/false);
  out.logits = tape.add(tape.matmul(readout, w), b);
  return out;
}

// Seeded stratified K-fold: per class, indices are shuffled and dealt
// round-robin, so fold proportions match class proportions within one.
inline std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
stratified_kfold(const std::vector<int>& labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidConfig("need at least 2 folds");
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> fold_of(labels.size(), 0);
  for (int c = 0; c < k; ++c) {
    if (by_class[c].size() < folds)
      throw ClassTooSmall("class " + std::to_string(c) + " has " +
                          std::to_string(by_class[c].size()) + " members for " +
                          std::to_string(folds) + " folds");
    rng.shuffle(by_class[c]);
    for (std::size_t m = 0; m < by_class[c].size(); ++m) fold_of[by_class[c][m]] = m % folds;
  }
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> out(folds);
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t f = 0; f < folds; ++f)
      (fold_of[i] == f ? out[f].second : out[f].first).push_back(i);
  return out;
}

// Stratified holdout of roughly `fraction` of the given ids (at least one
// per class present in them).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(
    const std::vector<std::size_t>& ids, const std::vector<int>& labels, double fraction,
    std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t id : ids) by_class[labels[id]].push_back(id);
  Rng rng(seed);
  std::vector<std::size_t> kept, held;
  for (auto& [c, members] : by_class) {
    rng.shuffle(members);
    std::size_t h = static_cast<std::size_t>(
        std::max(1.0, std::floor(fraction * static_cast<double>(members.size()) + 0.5)));
    h = std::min(h, members.size() > 1 ? members.size() - 1 : members.size());
    for (std::size_t m = 0; m < members.size(); ++m)
      (m < h ? held : kept).push_back(members[m]);
  }
  std::sort(kept.begin(), kept.end());
  std::sort(held.begin(), held.end());
  return {kept, held};
}

struct ClassifierRun {
  ClassifierModel model;
  double test_accuracy = 0.0;
  double best_val_accuracy = 0.0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
};

namespace detail {

inline int predict_class(ClassifierModel& m, const Graph& g) {
  Tape tape;
  const Tensor& logits = tape.value(classify_forward(m, g, tape).logits);
  std::size_t best = 0;
  for (std::size_t j = 1; j < logits.cols(); ++j)
    if (logits.at(0, j) > logits.at(0, best)) best = j;
  return static_cast<int>(best);
}

inline std::pair<double, double> evaluate_classifier(ClassifierModel& m,
                                                     const GraphCollection& data,
                                                     const std::vector<std::size_t>& ids,
                                                     const TrainConfig& cfg) {
  if (ids.empty()) return {0.0, 0.0};
  std::size_t correct = 0;
  double loss_sum = 0.0;
  for (std::size_t id : ids) {
    Tape tape;
    auto out = classify_forward(m, data.graphs[id], tape);
    NodeId total = cross_entropy_loss(out.logits, *data.graphs[id].graph_label, tape);
    for (auto& [graph, s] : out.pools) {
      auto [aux, rep] = clustering_loss(graph, s, cfg, tape);
      total = tape.add(total, aux);
    }
    loss_sum += tape.value(total).scalar_value();
    const Tensor& logits = tape.value(out.logits);
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j)
      if (logits.at(0, j) > logits.at(0, best)) best = j;
    if (static_cast<int>(best) == *data.graphs[id].graph_label) ++correct;
  }
  return {static_cast<double>(correct) / static_cast<double>(ids.size()),
          loss_sum / static_cast<double>(ids.size())};
}

}  // namespace detail

// One train/test split: gradient accumulation over batches, early stopping
// on a stratified 10% validation holdout, best-validation snapshot restored
// before the test evaluation. Per-graph loss is cross-entropy plus the sum
// of the per-pool clustering losses.
inline ClassifierRun train_classifier(const GraphCollection& data, const TrainConfig& cfg,
                                      const std::vector<std::size_t>& train_ids,
                                      const std::vector<std::size_t>& test_ids) {
  if (data.class_count < 2) throw ClassTooSmall("need at least 2 classes");
  const std::size_t f_in = data.graphs.empty() ? 0 : data.graphs.front().n_features();
  for (const Graph& g : data.graphs)
    if (g.n_features() != f_in) throw DimensionMismatch("graphs disagree on feature width");

  const std::vector<int> labels = data.labels();
  auto [fit_ids, val_ids] = stratified_holdout(train_ids, labels, 0.1, cfg.seed ^ 0x9E37);

  Rng rng(cfg.seed);
  ClassifierRun run;
  const std::size_t k_pool =
      cfg.k_pool > 0 ? cfg.k_pool
                     : static_cast<std::size_t>(std::ceil(data.mean_vertex_count() / 2.0));
  run.model = make_classifier_model(f_in, data.class_count, k_pool, cfg, rng);
  Adam adam({cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps_adam, cfg.l2});

  std::vector<Tensor> best_snapshot;
  const auto snapshot = [&] {
    best_snapshot.clear();
    for (auto& [name, t] : run.model.named_params()) best_snapshot.push_back(*t);
  };
  const auto restore = [&] {
    std::size_t i = 0;
    for (auto& [name, t] : run.model.named_params()) *t = best_snapshot[i++];
  };
  snapshot();

  double best_acc = -1.0, best_loss = 0.0;
  std::size_t bad_epochs = 0;
  std::vector<std::size_t> order(fit_ids);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    std::size_t pos = 0;
    while (pos < order.size()) {
      const std::size_t batch = std::min(cfg.batch_size, order.size() - pos);
      std::vector<Tensor> acc;
      std::vector<Tensor*> params;
      std::vector<bool> decay;
      for (std::size_t bi = 0; bi < batch; ++bi) {
        const Graph& g = data.graphs[order[pos + bi]];
        Tape tape;
        ParamMap pm;
        auto out = classify_forward(run.model, g, tape, &pm);
        NodeId total = cross_entropy_loss(out.logits, *g.graph_label, tape);
        for (auto& [graph, s] : out.pools) {
          auto [aux, rep] = clustering_loss(graph, s, cfg, tape);
          total = tape.add(total, aux);
        }
        auto grads = tape.backward(total);
        if (acc.empty()) {
          for (const auto& e : pm.entries) {
            acc.push_back(grads.at(e.node));
            params.push_back(e.tensor);
            decay.push_back(e.weight_decay);
          }
        } else {
          std::size_t slot = 0;
          for (const auto& e : pm.entries) {
            const Tensor& gr = grads.at(e.node);
            for (std::size_t i = 0; i < gr.size(); ++i) acc[slot][i] += gr[i];
            ++slot;
          }
        }
      }
      for (Tensor& g : acc)
        for (std::size_t i = 0; i < g.size(); ++i) g[i] /= static_cast<double>(batch);
      adam.step(params, acc, decay);
      pos += batch;
    }
    run.epochs_run = epoch;
    auto [val_acc, val_loss] = detail::evaluate_classifier(run.model, data, val_ids, cfg);
    const bool improved =
        val_acc > best_acc || (val_acc == best_acc && val_loss < best_loss - 1e-12);
    if (improved) {
      best_acc = val_acc;
      best_loss = val_loss;
      run.best_epoch = epoch;
      snapshot();
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs > cfg.patience) break;
    }
  }
  restore();
  run.best_val_accuracy = best_acc;
  std::size_t correct = 0;
  for (std::size_t id : test_ids)
    if (detail::predict_class(run.model, data.graphs[id]) == *data.graphs[id].graph_label)
      ++correct;
  run.test_accuracy =
      test_ids.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_ids.size());
  return run;
}

}  // namespace tvgnn
