#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "tvgnn/graph.hpp"
#include "tvgnn/tape.hpp"

namespace tvgnn {

enum class Activation { kIdentity, kRelu, kElu };

inline Activation activation_from_string(const std::string& s) {
  if (s == "identity" || s == "linear" || s == "none") return Activation::kIdentity;
  if (s == "relu") return Activation::kRelu;
  if (s == "elu") return Activation::kElu;
  throw InvalidConfig("unknown activation '" + s + "'");
}

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kElu: return "elu";
  }
  return "?";
}

inline NodeId apply_activation(Tape& tape, NodeId x, Activation a) {
  switch (a) {
    case Activation::kIdentity: return x;
    case Activation::kRelu: return tape.relu(x);
    case Activation::kElu: return tape.elu(x);
  }
  return x;
}

enum class GtvVariant { kSimplified, kDegreeWeighted };

// Trainable tensors registered on a tape for one forward pass. The optimizer
// walks the entries to push gradients back into the model's storage.
struct ParamMap {
  struct Entry {
    NodeId node;
    Tensor* tensor;
    bool weight_decay;  // l2 applies to weight matrices, not biases
  };
  std::vector<Entry> entries;

  NodeId bind(Tape& tape, Tensor& t, bool decay = true) {
    NodeId id = tape.param(t);
    entries.push_back({id, &t, decay});
    return id;
  }
};

inline NodeId bind_or_param(Tape& tape, Tensor& t, ParamMap* pm, bool decay = true) {
  return pm ? pm->bind(tape, t, decay) : tape.param(t);
}

struct GtvConvParams {
  Tensor weight;  // F_in x F_out
  double delta = 1.0;
  double epsilon = 1e-3;
  Activation activation = Activation::kIdentity;
  GtvVariant variant = GtvVariant::kSimplified;
};

struct MlpParams {
  std::vector<Tensor> weights;  // hidden layers then the K-channel output layer
  std::vector<Tensor> biases;   // 1 x width each
  Activation hidden_activation = Activation::kRelu;
};

// Glorot-uniform weight, zero bias.
inline Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return Tensor::uniform(fan_in, fan_out, -limit, limit, rng);
}

inline MlpParams make_mlp(std::size_t f_in, std::size_t hidden_layers, std::size_t hidden_width,
                          std::size_t k_out, Activation hidden_activation, Rng& rng) {
  MlpParams p;
  p.hidden_activation = hidden_activation;
  std::size_t w = f_in;
  for (std::size_t l = 0; l < hidden_layers; ++l) {
    p.weights.push_back(glorot_uniform(w, hidden_width, rng));
    p.biases.push_back(Tensor::zeros(1, hidden_width));
    w = hidden_width;
  }
  p.weights.push_back(glorot_uniform(w, k_out, rng));
  p.biases.push_back(Tensor::zeros(1, k_out));
  return p;
}

// ||X||_GTV = sum_f sum_{(i,j) in E, i<j} a_ij |x_if - x_jf|.
inline double graph_total_variation(const Graph& g, const Tensor& x) {
  if (x.rows() != g.n_vertices) throw DimensionMismatch("feature rows do not match vertices");
  double total = 0.0;
  for (const auto& [i, j, w] : g.undirected_edges())
    for (std::size_t f = 0; f < x.cols(); ++f) total += w * std::abs(x.at(i, f) - x.at(j, f));
  return total;
}

// gamma_ij = a_ij / max(||x_i - x_j||_1, eps) on the sparsity pattern of A.
inline SparseMatrix build_gamma_hat(const Graph& g, const Tensor& x, double eps) {
  if (x.rows() != g.n_vertices)
    throw DimensionMismatch("features have " + std::to_string(x.rows()) + " rows for " +
                            std::to_string(g.n_vertices) + " vertices");
  if (eps <= 0.0) throw InvalidConfig("eps must be positive");
  const SparseMatrix& a = g.adjacency;
  SparseMatrix gamma = a;
  const std::size_t f = x.cols();
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::size_t j = a.col[k];
      double dist = 0.0;
      for (std::size_t c = 0; c < f; ++c) dist += std::abs(x.at(i, c) - x.at(j, c));
      gamma.val[k] = a.val[k] / std::max(dist, eps);
    }
  }
  return gamma;
}

// L_Gamma = diag(Gamma 1) - Gamma.
inline SparseMatrix gtv_laplacian(const SparseMatrix& gamma) {
  if (!gamma.is_symmetric()) throw AsymmetricInput("gamma must be symmetric");
  std::vector<double> d = gamma.row_sums();
  std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
  trip.reserve(gamma.nnz() + gamma.n_rows);
  for (std::size_t i = 0; i < gamma.n_rows; ++i) {
    trip.emplace_back(i, i, d[i]);
    for (std::size_t k = gamma.row_ptr[i]; k < gamma.row_ptr[i + 1]; ++k) {
      if (gamma.col[k] == i) throw Error("gamma must have a zero diagonal");
      trip.emplace_back(i, gamma.col[k], -gamma.val[k]);
    }
  }
  return SparseMatrix::from_triplets(gamma.n_rows, gamma.n_cols, std::move(trip));
}

// I - delta * L; unit row sums by construction.
inline SparseMatrix gtv_propagation(const SparseMatrix& laplacian, double delta) {
  SparseMatrix p = laplacian;
  for (std::size_t i = 0; i < p.n_rows; ++i)
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
      p.val[k] = (p.col[k] == i ? 1.0 : 0.0) - delta * p.val[k];
  return p;
}

// I - delta * D^{-1/2} L D^{-1/2} with D the adjacency degrees.
inline SparseMatrix gtv_propagation_weighted(const SparseMatrix& laplacian,
                                             const std::vector<double>& degrees, double delta) {
  std::vector<double> inv_sqrt(degrees.size());
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (degrees[i] <= 0.0) throw IsolatedVertex(i);
    inv_sqrt[i] = 1.0 / std::sqrt(degrees[i]);
  }
  SparseMatrix p = laplacian;
  for (std::size_t i = 0; i < p.n_rows; ++i)
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
      const std::size_t j = p.col[k];
      p.val[k] = (j == i ? 1.0 : 0.0) - delta * p.val[k] * inv_sqrt[i] * inv_sqrt[j];
    }
  return p;
}

// GTVConv: sigma[(I - delta L_Gamma) X Theta]. Gamma is rebuilt from the
// layer's input features and frozen during differentiation; the gradient
// reaches X only through the propagation product.
inline NodeId gtvconv_forward(const Graph& g, NodeId x, GtvConvParams& p, Tape& tape,
                              ParamMap* pm = nullptr) {
  if (tape.value(x).cols() != p.weight.rows())
    throw DimensionMismatch("gtvconv: input width " + std::to_string(tape.value(x).cols()) +
                            " vs weight rows " + std::to_string(p.weight.rows()));
  SparseMatrix lap = gtv_laplacian(build_gamma_hat(g, tape.value(x), p.epsilon));
  auto prop = std::make_shared<SparseMatrix>(
      p.variant == GtvVariant::kDegreeWeighted
          ? gtv_propagation_weighted(lap, g.degrees(), p.delta)
          : gtv_propagation(lap, p.delta));
  NodeId h = tape.spmm(std::move(prop), x);
  NodeId w = bind_or_param(tape, p.weight, pm);
  return apply_activation(tape, tape.matmul(h, w), p.activation);
}

// Exact per-feature update: an independent Gamma^f per feature column.
// Reference oracle for small graphs (soft limit N <= 1000); never recorded
// on a tape.
inline Tensor gtv_update_per_feature(const Graph& g, const Tensor& x, double delta, double eps) {
  if (x.rows() != g.n_vertices) throw DimensionMismatch("feature rows do not match vertices");
  Tensor out({x.rows(), x.cols()});
  for (std::size_t f = 0; f < x.cols(); ++f) {
    Tensor col({x.rows(), 1});
    for (std::size_t i = 0; i < x.rows(); ++i) col.at(i, 0) = x.at(i, f);
    SparseMatrix prop =
        gtv_propagation(gtv_laplacian(build_gamma_hat(g, col, eps)), delta);
    Tensor upd = spmm(prop, col);
    for (std::size_t i = 0; i < x.rows(); ++i) out.at(i, f) = upd.at(i, 0);
  }
  return out;
}

// GCN baseline: sigma(sym_norm(A + I) X Theta).
inline NodeId gcn_forward(const Graph& g, NodeId x, Tensor& weight, Activation activation,
                          Tape& tape, ParamMap* pm = nullptr) {
  if (tape.value(x).cols() != weight.rows())
    throw DimensionMismatch("gcn: input width vs weight rows");
  auto prop = std::make_shared<SparseMatrix>(sym_norm_with_self_loops(g.adjacency));
  NodeId h = tape.spmm(std::move(prop), x);
  NodeId w = bind_or_param(tape, weight, pm);
  return apply_activation(tape, tape.matmul(h, w), activation);
}

// S = Softmax(MLP(X)); rows land on the simplex.
inline NodeId mlp_assign(NodeId x, MlpParams& p, Tape& tape, ParamMap* pm = nullptr) {
  if (p.weights.empty()) throw InvalidConfig("mlp has no layers");
  const std::size_t n = tape.value(x).rows();
  NodeId ones = tape.constant(Tensor::ones(n, 1));
  NodeId h = x;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    if (tape.value(h).cols() != p.weights[l].rows())
      throw DimensionMismatch("mlp layer " + std::to_string(l) + ": width " +
                              std::to_string(tape.value(h).cols()) + " vs weight rows " +
                              std::to_string(p.weights[l].rows()));
    NodeId w = bind_or_param(tape, p.weights[l], pm);
    NodeId b = bind_or_param(tape, p.biases[l], pm, /*decay=*/false);
    h = tape.add(tape.matmul(h, w), tape.matmul(ones, b));
    if (l + 1 < p.weights.size()) h = apply_activation(tape, h, p.hidden_activation);
  }
  return tape.row_softmax(h);
}

}  // namespace tvgnn
