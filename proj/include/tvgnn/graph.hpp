#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tvgnn/error.hpp"
#include "tvgnn/sparse.hpp"
#include "tvgnn/tensor.hpp"

namespace tvgnn {

// Undirected attributed graph. The adjacency stores both (i,j) and (j,i), so
// the undirected edge count is nnz/2.
struct Graph {
  std::size_t n_vertices = 0;
  SparseMatrix adjacency;          // symmetric, zero diagonal
  Tensor features;                 // N x F
  std::optional<std::vector<int>> vertex_labels;
  std::optional<int> graph_label;

  std::size_t n_edges() const { return adjacency.nnz() / 2; }
  std::size_t n_features() const { return features.cols(); }

  std::vector<double> degrees() const { return adjacency.row_sums(); }

  // Enumerates each undirected edge once as (i, j, w) with i < j.
  std::vector<std::tuple<std::size_t, std::size_t, double>> undirected_edges() const {
    std::vector<std::tuple<std::size_t, std::size_t, double>> out;
    out.reserve(n_edges());
    for (std::size_t i = 0; i < n_vertices; ++i)
      for (std::size_t k = adjacency.row_ptr[i]; k < adjacency.row_ptr[i + 1]; ++k)
        if (i < adjacency.col[k]) out.emplace_back(i, adjacency.col[k], adjacency.val[k]);
    return out;
  }

  void validate() const {
    if (adjacency.n_rows != n_vertices || adjacency.n_cols != n_vertices)
      throw DimensionMismatch("adjacency is not N x N");
    if (features.rows() != n_vertices)
      throw DimensionMismatch("feature row count does not match n_vertices");
    if (vertex_labels && vertex_labels->size() != n_vertices)
      throw DimensionMismatch("label count does not match n_vertices");
    for (std::size_t i = 0; i < n_vertices; ++i) {
      for (std::size_t k = adjacency.row_ptr[i]; k < adjacency.row_ptr[i + 1]; ++k) {
        if (adjacency.col[k] == i) throw Error("self-loop at vertex " + std::to_string(i));
        if (k > adjacency.row_ptr[i] && adjacency.col[k] <= adjacency.col[k - 1])
          throw Error("column indices not strictly increasing in row " + std::to_string(i));
        if (adjacency.val[k] < 0.0) throw Error("negative edge weight");
        if (adjacency.get(adjacency.col[k], i) != adjacency.val[k])
          throw AsymmetricInput("adjacency is not symmetric");
      }
    }
  }
};

// Builds a Graph from a raw edge list: edges are symmetrized by union,
// self-loops dropped, duplicates resolved by max weight.
inline Graph make_graph(std::size_t n,
                        const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
                        Tensor features = {}) {
  std::map<std::pair<std::size_t, std::size_t>, double> uniq;
  for (const auto& [s, d, w] : edges) {
    if (s >= n || d >= n)
      throw DanglingVertexId("edge endpoint " + std::to_string(std::max(s, d)) +
                             " out of range for n=" + std::to_string(n));
    if (s == d) continue;
    auto key = std::minmax(s, d);
    auto it = uniq.find(key);
    if (it == uniq.end())
      uniq.emplace(key, w);
    else
      it->second = std::max(it->second, w);
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
  trip.reserve(uniq.size() * 2);
  for (const auto& [key, w] : uniq) {
    trip.emplace_back(key.first, key.second, w);
    trip.emplace_back(key.second, key.first, w);
  }
  Graph g;
  g.n_vertices = n;
  g.adjacency = SparseMatrix::from_triplets(n, n, std::move(trip));
  g.features = features.size() > 0 ? std::move(features) : Tensor::zeros(n, 0);
  return g;
}

// A tilde = D^{-1/2} A D^{-1/2}, same sparsity as A. The divisor is formed
// as sqrt(d_i d_j) so that perfect-square degree products normalize exactly.
inline SparseMatrix sym_norm_adjacency(const SparseMatrix& a) {
  std::vector<double> deg = a.row_sums();
  for (std::size_t i = 0; i < deg.size(); ++i)
    if (deg[i] <= 0.0) throw IsolatedVertex(i);
  SparseMatrix out = a;
  for (std::size_t i = 0; i < a.n_rows; ++i)
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      out.val[k] = a.val[k] / std::sqrt(deg[i] * deg[a.col[k]]);
  return out;
}

inline SparseMatrix sym_norm_adjacency(const Graph& g) { return sym_norm_adjacency(g.adjacency); }

// Sym-normalized A + I, the GCN propagation matrix.
inline SparseMatrix sym_norm_with_self_loops(const SparseMatrix& a) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
  trip.reserve(a.nnz() + a.n_rows);
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    trip.emplace_back(i, i, 1.0);
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      trip.emplace_back(i, a.col[k], a.val[k]);
  }
  return sym_norm_adjacency(SparseMatrix::from_triplets(a.n_rows, a.n_cols, std::move(trip)));
}

inline bool is_connected(const Graph& g) {
  if (g.n_vertices == 0) return true;
  std::vector<char> seen(g.n_vertices, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t k = g.adjacency.row_ptr[u]; k < g.adjacency.row_ptr[u + 1]; ++k) {
      const std::size_t v = g.adjacency.col[k];
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == g.n_vertices;
}

// Ordered list of labeled graphs for classification tasks.
struct GraphCollection {
  std::vector<Graph> graphs;
  int class_count = 0;

  std::vector<int> labels() const {
    std::vector<int> y;
    y.reserve(graphs.size());
    for (const auto& g : graphs) y.push_back(*g.graph_label);
    return y;
  }

  double mean_vertex_count() const {
    double s = 0.0;
    for (const auto& g : graphs) s += static_cast<double>(g.n_vertices);
    return graphs.empty() ? 0.0 : s / static_cast<double>(graphs.size());
  }
};

}  // namespace tvgnn
