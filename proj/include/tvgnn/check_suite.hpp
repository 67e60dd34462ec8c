#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "tvgnn/generators.hpp"
#include "tvgnn/gradcheck.hpp"
#include "tvgnn/losses.hpp"

namespace tvgnn {

struct OpCheck {
  std::string name;
  double max_error = 0.0;
  int points = 0;
};

namespace checks {

// Sampling helpers. Kinked primitives get inputs bounded away from the kink
// so the guard in grad_check stays satisfied.
inline Tensor sample(std::size_t r, std::size_t c, Rng& rng) {
  return Tensor::uniform(r, c, -2.0, 2.0, rng);
}

inline Tensor sample_away_from_zero(std::size_t r, std::size_t c, double margin, Rng& rng) {
  Tensor t({r, c});
  for (auto& v : t.values()) {
    const double mag = rng.uniform(margin, 2.0);
    v = rng.bernoulli(0.5) ? mag : -mag;
  }
  return t;
}

inline Tensor sample_positive(std::size_t r, std::size_t c, Rng& rng) {
  return Tensor::uniform(r, c, 0.2, 3.0, rng);
}

// sum(out * out): a smooth quadratic wrap that makes the finite differences
// sensitive to every entry of the checked op's output.
inline NodeId quad(Tape& t, NodeId out) { return t.reduce_sum(t.multiply(out, out)); }

inline Graph random_connected_graph(std::size_t n, double p, Rng& rng) {
  while (true) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.next_double() < p) edges.emplace_back(i, j, 1.0);
    Graph g = make_graph(n, edges, Tensor::zeros(n, 1));
    if (is_connected(g) && g.n_edges() > 0) return g;
  }
}

inline Tensor softmax_rows(const Tensor& z) {
  Tensor s(z.shape());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double m = z.at(i, 0);
    for (std::size_t j = 1; j < z.cols(); ++j) m = std::max(m, z.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) sum += std::exp(z.at(i, j) - m);
    for (std::size_t j = 0; j < z.cols(); ++j) s.at(i, j) = std::exp(z.at(i, j) - m) / sum;
  }
  return s;
}

inline bool loss_margins_ok(const Graph& g, const Tensor& s, double rho, double margin) {
  for (const auto& [i, j, w] : g.undirected_edges())
    for (std::size_t k = 0; k < s.cols(); ++k)
      if (std::abs(s.at(i, k) - s.at(j, k)) < margin) return false;
  for (std::size_t k = 0; k < s.cols(); ++k) {
    std::vector<double> col(s.rows());
    for (std::size_t i = 0; i < s.rows(); ++i) col[i] = s.at(i, k);
    const auto [qv, qi] = quant_rho(col, rho);
    for (std::size_t i = 0; i < s.rows(); ++i)
      if (i != qi && std::abs(col[i] - qv) < margin) return false;
  }
  return true;
}

}  // namespace checks

// Central-difference check of every differentiable primitive and every loss
// at `points` seeded evaluation points per op, respecting the kink guard.
inline std::vector<OpCheck> run_gradient_suite(double h = 1e-5, std::uint64_t seed = 91823,
                                               int points = 100) {
  std::vector<OpCheck> report;
  const auto run = [&](const std::string& name, auto&& once) {
    Rng rng(seed ^ std::hash<std::string>{}(name));
    OpCheck check{name, 0.0, points};
    for (int i = 0; i < points; ++i) check.max_error = std::max(check.max_error, once(rng));
    report.push_back(std::move(check));
  };
  using P = std::vector<NodeId>;

  run("matmul", [&](Rng& rng) {
    return grad_check(
        [](Tape& t, const P& p) { return checks::quad(t, t.matmul(p[0], p[1])); },
        {checks::sample(3, 4, rng), checks::sample(4, 2, rng)}, h);
  });
  run("add", [&](Rng& rng) {
    return grad_check([](Tape& t, const P& p) { return checks::quad(t, t.add(p[0], p[1])); },
                      {checks::sample(3, 3, rng), checks::sample(3, 3, rng)}, h);
  });
  run("subtract", [&](Rng& rng) {
    return grad_check(
        [](Tape& t, const P& p) { return checks::quad(t, t.subtract(p[0], p[1])); },
        {checks::sample(3, 3, rng), checks::sample(3, 3, rng)}, h);
  });
  run("elementwise-multiply", [&](Rng& rng) {
    return grad_check(
        [](Tape& t, const P& p) { return t.reduce_sum(t.multiply(p[0], p[1])); },
        {checks::sample(3, 3, rng), checks::sample(3, 3, rng)}, h);
  });
  run("scalar-multiply", [&](Rng& rng) {
    const double c = rng.uniform(-3.0, 3.0);
    return grad_check(
        [c](Tape& t, const P& p) { return checks::quad(t, t.scalar_mul(p[0], c)); },
        {checks::sample(3, 3, rng)}, h);
  });
  run("transpose", [&](Rng& rng) {
    return grad_check(
        [](Tape& t, const P& p) { return checks::quad(t, t.matmul(t.transpose(p[0]), p[1])); },
        {checks::sample(3, 4, rng), checks::sample(3, 2, rng)}, h);
  });
  run("abs", [&](Rng& rng) {
    return grad_check([](Tape& t, const P& p) { return checks::quad(t, t.abs(p[0])); },
                      {checks::sample_away_from_zero(3, 4, 0.05, rng)}, h);
  });
  run("relu", [&](Rng& rng) {
    return grad_check([](Tape& t, const P& p) { return checks::quad(t, t.relu(p[0])); },
                      {checks::sample_away_from_zero(3, 4, 0.05, rng)}, h);
  });
  run("elu", [&](Rng& rng) {
    return grad_check([](Tape& t, const P& p) { return checks::quad(t, t.elu(p[0])); },
                      {checks::sample(3, 4, rng)}, h);
  });
  run("row-softmax", [&](Rng& rng) {
    return grad_check(
        [](Tape& t, const P& p) { return checks::quad(t, t.row_softmax(p[0])); },
        {checks::sample(4, 5, rng)}, h);
  });
  run("reduce-sum", [&](Rng& rng) {
    return grad_check(
        [](Tape& t, const P& p) {
          NodeId s = t.reduce_sum(t.multiply(p[0], p[0]));
          return t.multiply(s, s);
        },
        {checks::sample(3, 4, rng)}, h);
  });
  run("reduce-sum-axis", [&](Rng& rng) {
    return grad_check(
        [](Tape& t, const P& p) {
          return t.add(checks::quad(t, t.reduce_sum_axis(p[0], 0)),
                       checks::quad(t, t.reduce_sum_axis(p[0], 1)));
        },
        {checks::sample(3, 4, rng)}, h);
  });
  run("trace", [&](Rng& rng) {
    return grad_check(
        [](Tape& t, const P& p) {
          NodeId tr = t.trace(t.matmul(p[0], p[0]));
          return t.multiply(tr, tr);
        },
        {checks::sample(3, 3, rng)}, h);
  });
  run("frobenius-norm", [&](Rng& rng) {
    return grad_check([](Tape& t, const P& p) { return t.frobenius_norm(p[0]); },
                      {checks::sample_away_from_zero(3, 4, 0.1, rng)}, h);
  });
  run("sparse-dense-matmul", [&](Rng& rng) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        if (rng.bernoulli(0.4)) trip.emplace_back(i, j, rng.uniform(-2.0, 2.0));
    auto sp = std::make_shared<SparseMatrix>(SparseMatrix::from_triplets(4, 5, std::move(trip)));
    return grad_check(
        [sp](Tape& t, const P& p) { return checks::quad(t, t.spmm(sp, p[0])); },
        {checks::sample(5, 3, rng)}, h);
  });
  run("row-gather", [&](Rng& rng) {
    std::vector<std::size_t> idx{3, 0, 2, 0};
    return grad_check(
        [idx](Tape& t, const P& p) { return checks::quad(t, t.row_gather(p[0], idx)); },
        {checks::sample(4, 3, rng)}, h);
  });
  run("asymmetric-abs", [&](Rng& rng) {
    const double rho = 1.0 + rng.uniform(0.0, 3.0);
    return grad_check(
        [rho](Tape& t, const P& p) { return checks::quad(t, t.asym_abs(p[0], rho)); },
        {checks::sample_away_from_zero(3, 4, 0.05, rng)}, h);
  });
  run("log", [&](Rng& rng) {
    return grad_check([](Tape& t, const P& p) { return checks::quad(t, t.log(p[0])); },
                      {checks::sample_positive(3, 4, rng)}, h);
  });
  run("divide-by-constant", [&](Rng& rng) {
    const double c = rng.bernoulli(0.5) ? rng.uniform(0.5, 3.0) : -rng.uniform(0.5, 3.0);
    return grad_check(
        [c](Tape& t, const P& p) { return checks::quad(t, t.divide_by_const(p[0], c)); },
        {checks::sample(3, 4, rng)}, h);
  });
  run("divide", [&](Rng& rng) {
    return grad_check(
        [](Tape& t, const P& p) { return checks::quad(t, t.divide(p[0], p[1])); },
        {checks::sample(3, 3, rng), checks::sample_away_from_zero(3, 3, 0.3, rng)}, h);
  });
  run("nll-row-softmax", [&](Rng& rng) {
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) labels.push_back(static_cast<int>(rng.next_below(5)));
    return grad_check(
        [labels](Tape& t, const P& p) { return t.nll_row_softmax(p[0], labels); },
        {checks::sample(4, 5, rng)}, h);
  });

  // Losses, through the softmax parametrization used in training. Points
  // with kink margins below 10h are resampled.
  const auto loss_point = [&](Rng& rng, double rho) {
    while (true) {
      Graph g = checks::random_connected_graph(6, 0.6, rng);
      Tensor z = checks::sample(6, 3, rng);
      if (checks::loss_margins_ok(g, checks::softmax_rows(z), rho, 20.0 * h))
        return std::make_pair(std::move(g), std::move(z));
    }
  };
  run("loss-tvgnn", [&](Rng& rng) {
    const auto [g, z] = loss_point(rng, 2.0);
    const Graph& gr = g;
    return grad_check(
        [&gr](Tape& t, const P& p) {
          return tvgnn_loss(gr, t.row_softmax(p[0]), TvLossConfig{}, t).first;
        },
        {z}, h);
  });
  run("loss-mincut", [&](Rng& rng) {
    const auto [g, z] = loss_point(rng, 2.0);
    const Graph& gr = g;
    return grad_check(
        [&gr](Tape& t, const P& p) { return mincut_loss(gr, t.row_softmax(p[0]), t).first; },
        {z}, h);
  });
  run("loss-dmon", [&](Rng& rng) {
    const auto [g, z] = loss_point(rng, 2.0);
    const Graph& gr = g;
    return grad_check(
        [&gr](Tape& t, const P& p) { return dmon_loss(gr, t.row_softmax(p[0]), t).first; },
        {z}, h);
  });
  run("loss-cross-entropy", [&](Rng& rng) {
    const int label = static_cast<int>(rng.next_below(4));
    return grad_check(
        [label](Tape& t, const P& p) {
          return cross_entropy_loss(t.row_gather(p[0], {0}), label, t);
        },
        {checks::sample(1, 4, rng)}, h);
  });

  return report;
}

inline bool gradient_suite_passed(const std::vector<OpCheck>& report, double tol = 1e-4) {
  for (const auto& c : report)
    if (!(c.max_error <= tol)) return false;
  return true;
}

}  // namespace tvgnn
