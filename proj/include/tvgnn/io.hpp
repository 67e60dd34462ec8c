#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tvgnn/graph.hpp"

namespace tvgnn {

// Shortest decimal form that round-trips a double exactly; used by every
// text artifact so that load-then-save is byte identical.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::ifstream open_or_throw(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return f;
}

}  // namespace detail

// Edge list: one edge per line, "src<TAB>dst[<TAB>weight]", '#' comments.
// Whitespace-separated fields are accepted on input; output always uses tabs
// and an explicit weight.
inline std::vector<std::tuple<std::size_t, std::size_t, double>> load_edge_list(
    const std::string& path) {
  auto f = detail::open_or_throw(path);
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::string s = detail::strip(line);
    if (s.empty() || s[0] == '#') continue;
    std::istringstream iss(s);
    long long src, dst;
    double w = 1.0;
    if (!(iss >> src >> dst)) throw ParseError("bad edge record '" + s + "'", lineno);
    iss >> w;
    if (src < 0 || dst < 0) throw ParseError("negative vertex id", lineno);
    edges.emplace_back(static_cast<std::size_t>(src), static_cast<std::size_t>(dst), w);
  }
  return edges;
}

// Features: CSV, row i = vertex i, no header.
inline Tensor load_feature_csv(const std::string& path) {
  auto f = detail::open_or_throw(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::string s = detail::strip(line);
    if (s.empty()) continue;
    std::vector<double> row;
    for (const std::string& cell : detail::split(s, ',')) {
      try {
        row.push_back(std::stod(detail::strip(cell)));
      } catch (const std::exception&) {
        throw ParseError("bad numeric cell '" + cell + "'", lineno);
      }
    }
    if (rows.empty())
      width = row.size();
    else if (row.size() != width)
      throw ParseError("ragged feature row", lineno);
    rows.push_back(std::move(row));
  }
  Tensor x({rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) x.at(i, j) = rows[i][j];
  return x;
}

// Labels: one integer per line.
inline std::vector<int> load_label_csv(const std::string& path) {
  auto f = detail::open_or_throw(path);
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::string s = detail::strip(line);
    if (s.empty()) continue;
    try {
      labels.push_back(std::stoi(s));
    } catch (const std::exception&) {
      throw ParseError("bad label '" + s + "'", lineno);
    }
  }
  return labels;
}

// Assembles a vertex-clustering dataset from the three text files. Vertex
// count comes from the feature file; edges are symmetrized by union.
inline Graph load_vertex_dataset(const std::string& edge_path, const std::string& feature_path,
                                 const std::optional<std::string>& label_path = {}) {
  Tensor x = load_feature_csv(feature_path);
  const std::size_t n = x.rows();
  auto edges = load_edge_list(edge_path);
  for (const auto& [s, d, w] : edges)
    if (s >= n || d >= n)
      throw DanglingVertexId("edge id " + std::to_string(std::max(s, d)) +
                             " exceeds feature rows " + std::to_string(n));
  Graph g = make_graph(n, edges, std::move(x));
  if (label_path) {
    auto labels = load_label_csv(*label_path);
    if (labels.size() != n)
      throw DimensionMismatch("label count " + std::to_string(labels.size()) +
                              " does not match vertex count " + std::to_string(n));
    g.vertex_labels = std::move(labels);
  }
  return g;
}

inline void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  for (const auto& [i, j, w] : g.undirected_edges())
    f << i << '\t' << j << '\t' << format_double(w) << '\n';
}

inline void save_feature_csv(const Tensor& x, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (j) f << ',';
      f << format_double(x.at(i, j));
    }
    f << '\n';
  }
}

inline void save_label_csv(const std::vector<int>& labels, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  for (int v : labels) f << v << '\n';
}

// Graph collection: JSON lines with "edges", "features" (or
// "degrees_as_features": true) and "label". Labels are remapped to a
// contiguous [0, K) preserving numeric order.
inline GraphCollection load_graph_collection(const std::string& path) {
  auto f = detail::open_or_throw(path);
  struct Record {
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    std::vector<std::vector<double>> features;
    bool degrees_as_features = false;
    int label = 0;
    std::size_t n = 0;
  };
  std::vector<Record> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::string s = detail::strip(line);
    if (s.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(s);
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad json record: ") + e.what(), lineno);
    }
    Record rec;
    if (!j.contains("edges") || !j.contains("label"))
      throw ParseError("record needs 'edges' and 'label'", lineno);
    for (const auto& e : j["edges"]) {
      if (!e.is_array() || e.size() != 2) throw ParseError("edge is not a [src,dst] pair", lineno);
      rec.edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>(), 1.0);
    }
    rec.label = j["label"].get<int>();
    if (j.value("degrees_as_features", false)) {
      rec.degrees_as_features = true;
    } else if (j.contains("features")) {
      for (const auto& row : j["features"])
        rec.features.push_back(row.get<std::vector<double>>());
    } else {
      throw ParseError("record needs 'features' or 'degrees_as_features'", lineno);
    }
    rec.n = rec.features.size();
    for (const auto& [a, b, w] : rec.edges) rec.n = std::max({rec.n, a + 1, b + 1});
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw EmptyCollection("no graphs in " + path);

  // Remap labels to [0, K).
  std::vector<int> distinct;
  for (const auto& r : records) distinct.push_back(r.label);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const auto remap = [&](int y) {
    return static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), y) -
                            distinct.begin());
  };

  // Shared degree one-hot width across the collection.
  std::size_t max_degree = 0;
  std::vector<std::vector<std::size_t>> degree_cache(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (!records[r].degrees_as_features) continue;
    std::vector<std::size_t> deg(records[r].n, 0);
    for (const auto& [a, b, w] : records[r].edges)
      if (a != b) {
        deg[a]++;
        deg[b]++;
      }
    for (std::size_t d : deg) max_degree = std::max(max_degree, d);
    degree_cache[r] = std::move(deg);
  }

  GraphCollection coll;
  coll.class_count = static_cast<int>(distinct.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const Record& rec = records[r];
    Tensor x;
    if (rec.degrees_as_features) {
      x = Tensor::zeros(rec.n, max_degree + 1);
      for (std::size_t i = 0; i < rec.n; ++i) x.at(i, degree_cache[r][i]) = 1.0;
    } else {
      if (rec.features.size() != rec.n)
        throw ParseError("feature rows do not cover all vertices", r + 1);
      const std::size_t width = rec.features.empty() ? 0 : rec.features[0].size();
      x = Tensor::zeros(rec.n, width);
      for (std::size_t i = 0; i < rec.n; ++i) {
        if (rec.features[i].size() != width) throw ParseError("ragged feature rows", r + 1);
        for (std::size_t j = 0; j < width; ++j) x.at(i, j) = rec.features[i][j];
      }
    }
    Graph g = make_graph(rec.n, rec.edges, std::move(x));
    g.graph_label = remap(rec.label);
    coll.graphs.push_back(std::move(g));
  }
  return coll;
}

}  // namespace tvgnn
