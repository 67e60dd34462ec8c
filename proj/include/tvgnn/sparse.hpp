#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <tuple>
#include <vector>

#include "tvgnn/error.hpp"
#include "tvgnn/tensor.hpp"

namespace tvgnn {

// CSR matrix. Column indices are strictly increasing within each row.
struct SparseMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_ptr;  // size n_rows + 1
  std::vector<std::size_t> col;
  std::vector<double> val;

  SparseMatrix() : row_ptr(1, 0) {}
  SparseMatrix(std::size_t r, std::size_t c) : n_rows(r), n_cols(c), row_ptr(r + 1, 0) {}

  std::size_t nnz() const { return col.size(); }

  // Entries must be unique; rows need not arrive in order.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<std::tuple<std::size_t, std::size_t, double>> t) {
    std::sort(t.begin(), t.end());
    SparseMatrix m(rows, cols);
    m.col.reserve(t.size());
    m.val.reserve(t.size());
    for (const auto& [r, c, v] : t) {
      m.row_ptr[r + 1]++;
      m.col.push_back(c);
      m.val.push_back(v);
    }
    for (std::size_t i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
  }

  double get(std::size_t r, std::size_t c) const {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      if (col[k] == c) return val[k];
    return 0.0;
  }

  std::vector<double> row_sums() const {
    std::vector<double> s(n_rows, 0.0);
    for (std::size_t i = 0; i < n_rows; ++i)
      for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s[i] += val[k];
    return s;
  }

  bool is_symmetric(double tol = 0.0) const {
    if (n_rows != n_cols) return false;
    for (std::size_t i = 0; i < n_rows; ++i)
      for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        if (std::abs(get(col[k], i) - val[k]) > tol) return false;
    return true;
  }

  Tensor to_dense() const {
    Tensor d = Tensor::zeros(n_rows, n_cols);
    for (std::size_t i = 0; i < n_rows; ++i)
      for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) d.at(i, col[k]) = val[k];
    return d;
  }
};

namespace kernel {

// C = A * B for dense row-major blocks. ikj order streams over B rows; each
// output element is accumulated by a single thread in a fixed order, so the
// result is identical for any thread count.
inline void matmul(const double* a, std::size_t n, std::size_t k, const double* b,
                   std::size_t m, double* c) {
  std::fill(c, c + n * m, 0.0);
#pragma omp parallel for schedule(static)
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double* crow = c + i * m;
    const double* arow = a + i * k;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = b + kk * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// Y = S * X with S sparse (n_rows x n_cols) and X dense (n_cols x f).
inline void spmm(const SparseMatrix& s, const double* x, std::size_t f, double* y) {
#pragma omp parallel for schedule(static)
  for (long long ii = 0; ii < static_cast<long long>(s.n_rows); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double* yrow = y + i * f;
    std::fill(yrow, yrow + f, 0.0);
    for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
      const double v = s.val[k];
      const double* xrow = x + s.col[k] * f;
      for (std::size_t j = 0; j < f; ++j) yrow[j] += v * xrow[j];
    }
  }
}

// Y = S^T * X. Serial scatter keeps the accumulation order fixed.
inline void spmm_transposed(const SparseMatrix& s, const double* x, std::size_t f, double* y) {
  std::fill(y, y + s.n_cols * f, 0.0);
  for (std::size_t i = 0; i < s.n_rows; ++i) {
    const double* xrow = x + i * f;
    for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
      double* yrow = y + s.col[k] * f;
      const double v = s.val[k];
      for (std::size_t j = 0; j < f; ++j) yrow[j] += v * xrow[j];
    }
  }
}

}  // namespace kernel

inline Tensor spmm(const SparseMatrix& s, const Tensor& x) {
  if (x.rows() != s.n_cols)
    throw ShapeMismatch("spmm: sparse " + std::to_string(s.n_rows) + "x" +
                        std::to_string(s.n_cols) + " vs dense rows " +
                        std::to_string(x.rows()));
  Tensor y({s.n_rows, x.cols()});
  kernel::spmm(s, x.data(), x.cols(), y.data());
  return y;
}

}  // namespace tvgnn
