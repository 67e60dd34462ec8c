#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "tvgnn/graph.hpp"
#include "tvgnn/tensor.hpp"

namespace tvgnn {

// Discrete cluster assignment, values in [0, K).
using Partition = std::vector<int>;

// Row-stochastic soft assignments.
struct AssignmentMatrix {
  Tensor values;  // N x K

  void validate(double tol = 1e-9) const {
    for (std::size_t i = 0; i < values.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < values.cols(); ++j) {
        const double v = values.at(i, j);
        if (v < -tol || v > 1.0 + tol) throw Error("assignment entry outside [0,1]");
        s += v;
      }
      if (std::abs(s - 1.0) > tol) throw Error("assignment row does not sum to 1");
    }
  }
};

// argmax per row, ties to the lowest cluster index.
inline Partition argmax_partition(const Tensor& s) {
  Partition p(s.rows());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < s.cols(); ++j)
      if (s.at(i, j) > s.at(i, best)) best = j;
    p[i] = static_cast<int>(best);
  }
  return p;
}

inline Partition argmax_partition(const AssignmentMatrix& s) { return argmax_partition(s.values); }

namespace detail {

inline int partition_width(const Partition& p) {
  int k = 0;
  for (int v : p) k = std::max(k, v + 1);
  return k;
}

inline double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  return h;
}

}  // namespace detail

// NMI with arithmetic-mean normalization: I(a;b) / ((H(a)+H(b))/2).
// Zero by convention when either partition is constant.
inline double nmi(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw LengthMismatch("partitions have different lengths");
  if (a.empty()) return 0.0;
  const int ka = detail::partition_width(a);
  const int kb = detail::partition_width(b);
  const double n = static_cast<double>(a.size());
  std::vector<double> joint(static_cast<std::size_t>(ka) * kb, 0.0);
  std::vector<double> ca(ka, 0.0), cb(kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[static_cast<std::size_t>(a[i]) * kb + b[i]] += 1.0;
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
  }
  const double ha = detail::entropy(ca, n);
  const double hb = detail::entropy(cb, n);
  if (ha == 0.0 || hb == 0.0) return 0.0;
  double mi = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      const double nij = joint[static_cast<std::size_t>(i) * kb + j];
      if (nij > 0.0) mi += (nij / n) * std::log(n * nij / (ca[i] * cb[j]));
    }
  return mi / (0.5 * (ha + hb));
}

namespace detail {

// O(K^3) min-cost assignment via potentials; returns row -> column.
inline std::vector<int> hungarian_min(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

inline double assignment_mass(const std::vector<std::vector<double>>& m,
                              const std::vector<int>& perm) {
  double s = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) s += m[i][perm[i]];
  return s;
}

// Best matched mass over permutations of the rows/columns still available.
inline double best_mass(const std::vector<std::vector<double>>& m,
                        const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.empty()) return 0.0;
  std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
  double top = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) top = std::max(top, m[rows[i]][cols[j]]);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) cost[i][j] = top - m[rows[i]][cols[j]];
  const auto perm = hungarian_min(cost);
  double s = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) s += m[rows[i]][cols[perm[i]]];
  return s;
}

}  // namespace detail

// Mass-maximizing row -> column permutation of a square nonnegative matrix.
// Among optimal permutations the lexicographically smallest is returned.
inline std::vector<int> kuhn_munkres(const std::vector<std::vector<double>>& confusion) {
  const std::size_t k = confusion.size();
  for (const auto& row : confusion)
    if (row.size() != k) throw NonSquare("confusion matrix is not square");
  if (k == 0) return {};
  std::vector<int> all(k);
  std::iota(all.begin(), all.end(), 0);
  const double best = detail::best_mass(confusion, all, all);
  const double tol = 1e-9 * std::max(1.0, std::abs(best));

  std::vector<int> perm(k, -1);
  std::vector<int> free_cols(all);
  double fixed_mass = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    std::vector<int> rest_rows(all.begin() + r + 1, all.end());
    for (std::size_t ci = 0; ci < free_cols.size(); ++ci) {
      const int c = free_cols[ci];
      std::vector<int> rest_cols;
      for (int cc : free_cols)
        if (cc != c) rest_cols.push_back(cc);
      const double achievable =
          fixed_mass + confusion[r][c] + detail::best_mass(confusion, rest_rows, rest_cols);
      if (achievable >= best - tol) {
        perm[r] = c;
        fixed_mass += confusion[r][c];
        free_cols.erase(free_cols.begin() + ci);
        break;
      }
    }
  }
  return perm;
}

// Matched mass under the optimal cluster-to-class permutation, divided by N.
inline double accuracy(const Partition& labels, const Partition& clusters) {
  if (labels.size() != clusters.size()) throw LengthMismatch("partition lengths differ");
  if (labels.empty()) return 0.0;
  const int k = std::max(detail::partition_width(labels), detail::partition_width(clusters));
  std::vector<std::vector<double>> confusion(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i) confusion[clusters[i]][labels[i]] += 1.0;
  const auto perm = kuhn_munkres(confusion);
  double matched = 0.0;
  for (int r = 0; r < k; ++r) matched += confusion[r][perm[r]];
  return matched / static_cast<double>(labels.size());
}

struct CutReport {
  std::vector<double> cuts;  // per-cluster boundary weight
  double ratio = 0.0;        // Asymmetric Cheeger ratio; +inf if any balance term is zero
  bool infinite = false;
};

// cut(C_k, complement) summed over clusters, each divided by
// min{(K-1)|C_k|, |complement|}.
inline CutReport cut_value(const Graph& g, const Partition& p, int k = 0) {
  if (p.size() != g.n_vertices) throw LengthMismatch("partition does not cover the graph");
  if (k <= 0) k = detail::partition_width(p);
  CutReport report;
  report.cuts.assign(k, 0.0);
  std::vector<std::size_t> sizes(k, 0);
  for (int c : p) sizes[c]++;
  const SparseMatrix& a = g.adjacency;
  for (std::size_t i = 0; i < g.n_vertices; ++i)
    for (std::size_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e)
      if (p[a.col[e]] != p[i]) report.cuts[p[i]] += a.val[e];
  const double n = static_cast<double>(g.n_vertices);
  for (int c = 0; c < k; ++c) {
    const double sz = static_cast<double>(sizes[c]);
    const double balance = std::min(static_cast<double>(k - 1) * sz, n - sz);
    if (balance <= 0.0) {
      report.infinite = true;
      report.ratio = std::numeric_limits<double>::infinity();
      return report;
    }
    report.ratio += report.cuts[c] / balance;
  }
  return report;
}

// Stable ordering of vertices by (key, index); used to sort S before SS^T.
inline std::vector<std::size_t> argsort_partition(const Partition& order) {
  std::vector<std::size_t> idx(order.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return order[a] < order[b]; });
  return idx;
}

inline constexpr double kSharpnessLogFloor = 1e-12;

// log(max(SS^T, 1e-12)) with rows and columns sorted by the given partition;
// block diagonal when assignments are sharp and label aligned.
inline Tensor sharpness_matrix(const Tensor& s, const Partition& order) {
  if (order.size() != s.rows()) throw LengthMismatch("order length does not match rows");
  const auto idx = argsort_partition(order);
  const std::size_t n = s.rows();
  const std::size_t k = s.cols();
  Tensor m({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < k; ++c) dot += s.at(idx[i], c) * s.at(idx[j], c);
      m.at(i, j) = std::log(std::max(dot, kSharpnessLogFloor));
    }
  return m;
}

enum class ProfileOrder { kVertex, kAscending };

// Largest soft assignment per vertex; in [1/K, 1] for row-stochastic S.
// kVertex keeps vertex order (ring walks), kAscending sorts low to high
// (grid summaries).
inline std::vector<double> max_assignment_profile(const Tensor& s,
                                                  ProfileOrder order = ProfileOrder::kVertex) {
  std::vector<double> prof(s.rows());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    double m = s.cols() > 0 ? s.at(i, 0) : 0.0;
    for (std::size_t j = 1; j < s.cols(); ++j) m = std::max(m, s.at(i, j));
    prof[i] = m;
  }
  if (order == ProfileOrder::kAscending) std::sort(prof.begin(), prof.end());
  return prof;
}

struct BalanceReport {
  std::vector<std::size_t> sizes;
  double entropy = 0.0;  // normalized by log K; 1 for perfectly balanced
};

inline BalanceReport cluster_balance(const Partition& p, int k) {
  BalanceReport report;
  report.sizes.assign(std::max(k, 1), 0);
  for (int c : p) report.sizes[c]++;
  if (k <= 1 || p.empty()) {
    report.entropy = 1.0;
    return report;
  }
  const double n = static_cast<double>(p.size());
  double h = 0.0;
  for (std::size_t c : report.sizes)
    if (c > 0) {
      const double f = static_cast<double>(c) / n;
      h -= f * std::log(f);
    }
  report.entropy = h / std::log(static_cast<double>(k));
  return report;
}

// 8-bit grayscale PGM, linear map from [lo, hi] clamped to [0, 255].
inline void write_pgm(const Tensor& m, const std::string& path,
                      double lo = std::log(kSharpnessLogFloor), double hi = 0.0) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << "P5\n" << m.cols() << " " << m.rows() << "\n255\n";
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double t = (m.at(i, j) - lo) / (hi - lo);
      t = std::min(1.0, std::max(0.0, t));
      f.put(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
    }
}

}  // namespace tvgnn
