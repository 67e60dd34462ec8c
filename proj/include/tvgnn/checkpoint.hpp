#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tvgnn/models.hpp"

namespace tvgnn {

namespace detail {

inline constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
    if (i + 1 < len) v |= static_cast<std::uint32_t>(data[i + 1]) << 8;
    if (i + 2 < len) v |= static_cast<std::uint32_t>(data[i + 2]);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(i + 1 < len ? kB64Alphabet[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < len ? kB64Alphabet[v & 63] : '=');
  }
  return out;
}

inline std::vector<unsigned char> base64_decode(const std::string& s) {
  std::vector<int> lut(256, -1);
  for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kB64Alphabet[i])] = i;
  std::vector<unsigned char> out;
  out.reserve(s.size() / 4 * 3);
  std::uint32_t v = 0;
  int bits = 0;
  for (char c : s) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int d = lut[static_cast<unsigned char>(c)];
    if (d < 0) throw Error("invalid base64 character");
    v = (v << 6) | static_cast<std::uint32_t>(d);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((v >> bits) & 0xFF));
    }
  }
  return out;
}

// Little-endian f64 buffer <-> base64. x86-64 memory layout is already LE;
// byte order is fixed here by construction for portability.
inline std::string tensor_payload(const Tensor& t) {
  std::vector<unsigned char> bytes(t.size() * 8);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::uint64_t u;
    const double d = t[i];
    std::memcpy(&u, &d, 8);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>((u >> (8 * b)) & 0xFF);
  }
  return base64_encode(bytes.data(), bytes.size());
}

inline void fill_tensor(Tensor& t, const std::string& payload) {
  const auto bytes = base64_decode(payload);
  if (bytes.size() != t.size() * 8) throw Error("checkpoint payload size mismatch");
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    double d;
    std::memcpy(&d, &u, 8);
    t[i] = d;
  }
}

}  // namespace detail

inline nlohmann::ordered_json train_config_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["epochs"] = cfg.epochs;
  j["learning_rate"] = cfg.learning_rate;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["eps_adam"] = cfg.eps_adam;
  j["l2"] = cfg.l2;
  j["seed"] = cfg.seed;
  j["patience"] = cfg.patience;
  j["batch_size"] = cfg.batch_size;
  j["loss"] = to_string(cfg.loss_kind);
  j["rho"] = cfg.loss.rho;
  j["alpha1"] = cfg.loss.alpha1;
  j["alpha2"] = cfg.loss.alpha2;
  j["quantile_gradient"] = cfg.loss.quantile_gradient;
  j["dmon_normalized_degree"] = cfg.dmon_normalized_degree;
  j["mp_layers"] = cfg.mp_layers;
  j["mp_channels"] = cfg.mp_channels;
  j["mp_activation"] = to_string(cfg.mp_activation);
  j["mp_kind"] = cfg.mp_kind == MpKind::kGtvConv ? "gtvconv" : "gcn";
  j["variant"] = cfg.variant == GtvVariant::kSimplified ? "simplified" : "degree-weighted";
  j["delta"] = cfg.delta;
  j["epsilon"] = cfg.epsilon;
  j["mlp_layers"] = cfg.mlp_layers;
  j["mlp_channels"] = cfg.mlp_channels;
  j["mlp_activation"] = to_string(cfg.mlp_activation);
  j["pool_blocks"] = cfg.pool_blocks;
  j["k_pool"] = cfg.k_pool;
  return j;
}

// Single JSON document: shapes plus base64 little-endian f64 buffers per
// named parameter, with the TrainConfig used. Round-trips bit exactly.
inline void save_checkpoint(const std::string& path,
                            const std::vector<std::pair<std::string, Tensor*>>& params,
                            const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["format"] = "tvgnn-checkpoint-v1";
  j["config"] = train_config_json(cfg);
  nlohmann::ordered_json ps;
  for (const auto& [name, t] : params) {
    nlohmann::ordered_json p;
    p["shape"] = t->shape();
    p["data"] = detail::tensor_payload(*t);
    ps[name] = std::move(p);
  }
  j["params"] = std::move(ps);
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << j.dump(2) << "\n";
}

// Loads parameters by name into an existing model; shapes must match.
inline nlohmann::json load_checkpoint(const std::string& path,
                                      const std::vector<std::pair<std::string, Tensor*>>& params) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  const auto& ps = j.at("params");
  for (const auto& [name, t] : params) {
    if (!ps.contains(name)) throw Error("checkpoint is missing parameter '" + name + "'");
    const auto& p = ps.at(name);
    const auto shape = p.at("shape").get<std::vector<std::size_t>>();
    if (shape != t->shape()) throw ShapeMismatch("checkpoint shape mismatch for '" + name + "'");
    detail::fill_tensor(*t, p.at("data").get<std::string>());
  }
  return j.value("config", nlohmann::json::object());
}

}  // namespace tvgnn
