#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tvgnn/graph.hpp"
#include "tvgnn/tape.hpp"

namespace tvgnn {

struct TvLossConfig {
  double rho = -1.0;  // < 0 selects the default K - 1 at call time
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  // Route the gradient of the asymmetric-norm term through the selected
  // quantile entry instead of treating the quantile as a constant.
  bool quantile_gradient = false;
};

struct LossReport {
  double total = 0.0;
  std::map<std::string, double> components;
};

// The (q+1)-st largest entry with q = floor(N / (rho + 1)). Among entries
// equal to the selected value the smallest vertex index is reported, which
// fixes the gradient routing under ties.
inline std::pair<double, std::size_t> quant_rho(const std::vector<double>& s, double rho) {
  if (s.empty()) throw EmptyVector("quantile of an empty vector");
  if (rho < 0.0) throw InvalidConfig("rho must be nonnegative");
  const std::size_t q =
      static_cast<std::size_t>(std::floor(static_cast<double>(s.size()) / (rho + 1.0)));
  const std::size_t pos = std::min(q, s.size() - 1);
  std::vector<std::size_t> idx(s.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::nth_element(idx.begin(), idx.begin() + pos, idx.end(),
                   [&](std::size_t a, std::size_t b) {
                     return s[a] != s[b] ? s[a] > s[b] : a < b;
                   });
  const double value = s[idx[pos]];
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] == value) return {value, i};
  return {value, idx[pos]};
}

// Signed incidence matrix with the edge weight folded in: row e of the
// result has +a_ij at i and -a_ij at j for the e-th undirected edge (i < j).
// B S then gives the per-edge assignment differences scaled by a_ij.
inline SparseMatrix weighted_incidence(const Graph& g) {
  auto edges = g.undirected_edges();
  std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
  trip.reserve(edges.size() * 2);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& [i, j, w] = edges[e];
    trip.emplace_back(e, i, w);
    trip.emplace_back(e, j, -w);
  }
  return SparseMatrix::from_triplets(edges.size(), g.n_vertices, std::move(trip));
}

// L*_GTV = sum_k sum_edges a_ij |s_ik - s_jk|, each undirected edge once.
inline NodeId gtv_loss_raw(const Graph& g, NodeId s, Tape& tape) {
  if (tape.value(s).rows() != g.n_vertices)
    throw DimensionMismatch("assignment rows do not match vertex count");
  auto b = std::make_shared<SparseMatrix>(weighted_incidence(g));
  return tape.reduce_sum(tape.abs(tape.spmm(std::move(b), s)));
}

// L*_AN = sum_k || s_:,k - quant_rho(s_:,k) ||_{1,rho}. The quantile is
// recomputed every forward pass and enters the graph as a constant. The
// selected entry's own residual is identically zero, so it is routed around
// the asymmetric-abs: the value is unchanged and the entry receives no
// gradient from this term.
inline NodeId an_loss_raw(NodeId s, double rho, Tape& tape, bool quantile_gradient = false) {
  const Tensor& sv = tape.value(s);
  if (sv.rows() == 0 || sv.cols() == 0) throw EmptyAssignment("empty assignment matrix");
  if (rho < 1.0) throw InvalidConfig("rho must be >= 1");
  const std::size_t n = sv.rows();
  const std::size_t k = sv.cols();
  NodeId total = tape.constant(Tensor::scalar(0.0));
  for (std::size_t c = 0; c < k; ++c) {
    Tensor ek = Tensor::zeros(k, 1);
    ek.at(c, 0) = 1.0;
    NodeId col = tape.matmul(s, tape.constant(std::move(ek)));
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = tape.value(col).at(i, 0);
    const auto [qv, qi] = quant_rho(vals, rho);
    NodeId contrib;
    if (quantile_gradient) {
      NodeId qnode = tape.row_gather(col, {qi});
      NodeId bcast = tape.matmul(tape.constant(Tensor::ones(n, 1)), qnode);
      contrib = tape.reduce_sum(tape.asym_abs(tape.subtract(col, bcast), rho));
    } else {
      if (n == 1) continue;  // single residual is the quantile itself: zero
      std::vector<std::size_t> keep;
      keep.reserve(n - 1);
      for (std::size_t i = 0; i < n; ++i)
        if (i != qi) keep.push_back(i);
      NodeId rest = tape.row_gather(col, std::move(keep));
      Tensor qconst({n - 1, 1});
      for (std::size_t i = 0; i + 1 < n; ++i) qconst.at(i, 0) = qv;
      NodeId resid = tape.subtract(rest, tape.constant(std::move(qconst)));
      contrib = tape.reduce_sum(tape.asym_abs(resid, rho));
    }
    total = tape.add(total, contrib);
  }
  return total;
}

// beta = N rho when rho = K - 1, otherwise N rho min(1, K / (rho + 1)).
inline double beta(std::size_t n, std::size_t k, double rho) {
  if (n < 1 || k < 2) throw InvalidConfig("beta needs n >= 1 and k >= 2");
  if (rho < 1.0) throw InvalidConfig("beta needs rho >= 1");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  if (rho == kd - 1.0) return nd * rho;
  return nd * rho * std::min(1.0, kd / (rho + 1.0));
}

// L = alpha1 * L*_GTV / (2E) + alpha2 * (beta - L*_AN) / beta.
inline std::pair<NodeId, LossReport> tvgnn_loss(const Graph& g, NodeId s,
                                                const TvLossConfig& cfg, Tape& tape) {
  if (g.n_edges() == 0) throw EmptyGraph("tvgnn loss needs at least one edge");
  const std::size_t k = tape.value(s).cols();
  const double rho = cfg.rho < 0.0 ? static_cast<double>(k) - 1.0 : cfg.rho;
  NodeId l_gtv = tape.divide_by_const(gtv_loss_raw(g, s, tape),
                                      2.0 * static_cast<double>(g.n_edges()));
  const double b = beta(g.n_vertices, k, rho);
  NodeId an = an_loss_raw(s, rho, tape, cfg.quantile_gradient);
  NodeId l_an = tape.subtract(tape.constant(Tensor::scalar(1.0)), tape.divide_by_const(an, b));
  NodeId total = tape.add(tape.scalar_mul(l_gtv, cfg.alpha1), tape.scalar_mul(l_an, cfg.alpha2));
  LossReport report;
  report.total = tape.value(total).scalar_value();
  // Components are the rescaled [0,1] terms; total = alpha1*gtv + alpha2*an.
  report.components["gtv"] = tape.value(l_gtv).scalar_value();
  report.components["an"] = tape.value(l_an).scalar_value();
  return {total, report};
}

// MinCutPool loss: -Tr(S^T At S) / Tr(S^T Dt S) + || S^T S / ||S^T S||_F - I/sqrt(K) ||_F.
inline std::pair<NodeId, LossReport> mincut_loss(const Graph& g, NodeId s, Tape& tape) {
  const std::size_t k = tape.value(s).cols();
  auto atil = std::make_shared<SparseMatrix>(sym_norm_adjacency(g.adjacency));
  std::vector<double> dt = atil->row_sums();
  std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
  for (std::size_t i = 0; i < dt.size(); ++i) trip.emplace_back(i, i, dt[i]);
  auto dtil = std::make_shared<SparseMatrix>(
      SparseMatrix::from_triplets(g.n_vertices, g.n_vertices, std::move(trip)));

  NodeId st = tape.transpose(s);
  NodeId tr_cut = tape.trace(tape.matmul(st, tape.spmm(std::move(atil), s)));
  NodeId tr_deg = tape.trace(tape.matmul(st, tape.spmm(std::move(dtil), s)));
  NodeId l_cut = tape.scalar_mul(tape.divide(tr_cut, tr_deg), -1.0);

  NodeId sts = tape.matmul(st, s);
  NodeId q = tape.divide(sts, tape.frobenius_norm(sts));
  Tensor target = Tensor::identity(k);
  for (auto& v : target.values()) v /= std::sqrt(static_cast<double>(k));
  NodeId l_ortho = tape.frobenius_norm(tape.subtract(q, tape.constant(std::move(target))));

  NodeId total = tape.add(l_cut, l_ortho);
  LossReport report;
  report.total = tape.value(total).scalar_value();
  report.components["mincut_cut"] = tape.value(l_cut).scalar_value();
  report.components["mincut_ortho"] = tape.value(l_ortho).scalar_value();
  return {total, report};
}

// DMoN loss: -Tr(S^T A S - S^T d^T d S) / (2E) + sqrt(K)/N ||sum_i S_i||_F - 1.
// Eq. as printed leaves the degree product unnormalized; `normalized_degree`
// switches to the modularity-style d^T d / (2E).
inline std::pair<NodeId, LossReport> dmon_loss(const Graph& g, NodeId s, Tape& tape,
                                               bool normalized_degree = false) {
  if (g.n_edges() == 0) throw EmptyGraph("dmon loss needs at least one edge");
  const double e2 = 2.0 * static_cast<double>(g.n_edges());
  const std::size_t k = tape.value(s).cols();
  const std::size_t n = g.n_vertices;

  auto adj = std::make_shared<SparseMatrix>(g.adjacency);
  NodeId st = tape.transpose(s);
  NodeId tr_adj = tape.trace(tape.matmul(st, tape.spmm(std::move(adj), s)));

  std::vector<double> deg = g.degrees();
  Tensor drow({1, n});
  for (std::size_t i = 0; i < n; ++i) drow.at(0, i) = deg[i];
  NodeId ds = tape.matmul(tape.constant(std::move(drow)), s);  // 1 x K
  NodeId tr_deg = tape.reduce_sum(tape.multiply(ds, ds));      // Tr(S^T d^T d S)
  if (normalized_degree) tr_deg = tape.divide_by_const(tr_deg, e2);

  NodeId l_mod = tape.scalar_mul(tape.divide_by_const(tape.subtract(tr_adj, tr_deg), e2), -1.0);

  NodeId colsum = tape.reduce_sum_axis(s, 0);
  NodeId l_reg = tape.subtract(
      tape.scalar_mul(tape.frobenius_norm(colsum),
                      std::sqrt(static_cast<double>(k)) / static_cast<double>(n)),
      tape.constant(Tensor::scalar(1.0)));

  NodeId total = tape.add(l_mod, l_reg);
  LossReport report;
  report.total = tape.value(total).scalar_value();
  report.components["dmon_mod"] = tape.value(l_mod).scalar_value();
  report.components["dmon_reg"] = tape.value(l_reg).scalar_value();
  return {total, report};
}

// Fused NLL of the row softmax; logits are 1 x C for a single graph.
inline NodeId cross_entropy_loss(NodeId logits, int label, Tape& tape) {
  return tape.nll_row_softmax(logits, {label});
}

}  // namespace tvgnn
