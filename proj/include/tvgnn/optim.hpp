#pragma once

#include <cmath>
#include <vector>

#include "tvgnn/layers.hpp"
#include "tvgnn/tensor.hpp"

namespace tvgnn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double l2 = 0.0;
};

// Adam with bias correction. Moment slots are keyed by position in the
// parameter list, which must stay stable across steps.
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  void step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
            const std::vector<bool>& decay) {
    if (m_.empty()) {
      for (const Tensor* p : params) {
        m_.emplace_back(p->shape());
        v_.emplace_back(p->shape());
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t p = 0; p < params.size(); ++p) {
      Tensor& theta = *params[p];
      for (std::size_t i = 0; i < theta.size(); ++i) {
        double g = grads[p][i];
        if (decay[p]) g += cfg_.l2 * theta[i];
        m_[p][i] = cfg_.beta1 * m_[p][i] + (1.0 - cfg_.beta1) * g;
        v_[p][i] = cfg_.beta2 * v_[p][i] + (1.0 - cfg_.beta2) * g * g;
        const double m_hat = m_[p][i] / bc1;
        const double v_hat = v_[p][i] / bc2;
        theta[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.eps);
      }
    }
  }

  // Convenience for a ParamMap recorded this step.
  void step(const ParamMap& pm, const std::map<NodeId, Tensor>& grads) {
    std::vector<Tensor*> params;
    std::vector<bool> decay;
    std::vector<Tensor> gvals;
    for (const auto& e : pm.entries) {
      params.push_back(e.tensor);
      gvals.push_back(grads.at(e.node));
      decay.push_back(e.weight_decay);
    }
    step(params, gvals, decay);
  }

  std::size_t steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace tvgnn
