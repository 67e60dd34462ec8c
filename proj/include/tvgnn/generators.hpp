#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "tvgnn/graph.hpp"
#include "tvgnn/rng.hpp"

namespace tvgnn {

// Cycle of n vertices, features are positions on the unit circle.
inline Graph gen_ring(std::size_t n) {
  if (n < 3) throw InvalidSize("ring needs n >= 3, got " + std::to_string(n));
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n, 1.0);
  Tensor x({n, 2});
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    x.at(i, 0) = std::cos(t);
    x.at(i, 1) = std::sin(t);
  }
  return make_graph(n, edges, std::move(x));
}

// 4-neighbor lattice, features are (row, col) coordinates.
inline Graph gen_grid(std::size_t rows, std::size_t cols) {
  if (rows < 2 || cols < 2) throw InvalidSize("grid needs rows >= 2 and cols >= 2");
  const auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  edges.reserve(rows * (cols - 1) + cols * (rows - 1));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1), 1.0);
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c), 1.0);
    }
  Tensor x({rows * cols, 2});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      x.at(id(r, c), 0) = static_cast<double>(r);
      x.at(id(r, c), 1) = static_cast<double>(c);
    }
  return make_graph(rows * cols, edges, std::move(x));
}

// Per-coordinate flip probability for SBM block indicators, plus the number
// of appended uniform-noise feature columns. Fixed so that runs are
// comparable across seeds.
inline constexpr double kSbmFlipProbability = 0.1;
inline constexpr std::size_t kSbmNoiseColumns = 4;

// Stochastic block model. Draw order is fixed: one uniform per vertex pair
// (i < j), then per-vertex feature flips, then noise columns, all from a
// single SplitMix64 stream seeded with `seed`. Features are the block
// one-hot with coordinates flipped at kSbmFlipProbability plus
// kSbmNoiseColumns uniform columns; vertex labels are block ids.
inline Graph gen_sbm(const std::vector<std::size_t>& sizes, double p_in, double p_out,
                     std::uint64_t seed) {
  if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0)
    throw InvalidProbability("p_in and p_out must lie in [0,1]");
  std::size_t n = 0;
  for (std::size_t s : sizes) {
    if (s < 1) throw InvalidSize("every block size must be >= 1");
    n += s;
  }
  std::vector<int> block(n);
  {
    std::size_t v = 0;
    for (std::size_t b = 0; b < sizes.size(); ++b)
      for (std::size_t k = 0; k < sizes[b]; ++k) block[v++] = static_cast<int>(b);
  }
  Rng rng(seed);
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = block[i] == block[j] ? p_in : p_out;
      if (rng.next_double() < p) edges.emplace_back(i, j, 1.0);
    }
  const std::size_t f = sizes.size() + kSbmNoiseColumns;
  Tensor x({n, f});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      double v = block[i] == static_cast<int>(c) ? 1.0 : 0.0;
      if (rng.bernoulli(kSbmFlipProbability)) v = 1.0 - v;
      x.at(i, c) = v;
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < kSbmNoiseColumns; ++c)
      x.at(i, sizes.size() + c) = rng.next_double();
  Graph g = make_graph(n, edges, std::move(x));
  g.vertex_labels = std::vector<int>(block.begin(), block.end());
  return g;
}

}  // namespace tvgnn
