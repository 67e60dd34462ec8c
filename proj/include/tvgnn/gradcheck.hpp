#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tvgnn/tape.hpp"

namespace tvgnn {

// Builds a scalar function on a fresh tape from the given parameter leaves.
using ScalarFn = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;

// Central-difference check of the recorded function. The tape is recorded
// once at the base point and replayed for each perturbed evaluation, so every
// selection made during recording (quantile indices, gather lists, sparse
// operands) stays frozen; the check therefore validates each backward rule
// against the differences of its own forward composition.
//
// Evaluation points must keep every abs / asymmetric-abs input at magnitude
// > 10 h, otherwise KinkProximity is thrown.
inline double grad_check(const ScalarFn& f, const std::vector<Tensor>& params, double h) {
  if (h < 1e-6 || h > 1e-3) throw InvalidConfig("grad_check step must lie in [1e-6, 1e-3]");
  Tape tape;
  std::vector<NodeId> ids;
  ids.reserve(params.size());
  for (const Tensor& p : params) ids.push_back(tape.param(p));
  const NodeId loss = f(tape, ids);
  if (!tape.value(loss).is_scalar())
    throw NonScalarLoss("grad_check function returned shape " + tape.value(loss).shape_str());

  for (const auto& n : tape.nodes()) {
    if (n.op != Op::kAbs && n.op != Op::kAsymAbs) continue;
    const Tensor& in = tape.value(n.inputs[0]);
    for (std::size_t i = 0; i < in.size(); ++i)
      if (std::abs(in[i]) <= 10.0 * h)
        throw KinkProximity(std::string(op_name(n.op)) + " input " + std::to_string(in[i]) +
                            " within 10h of a kink");
  }

  const auto analytic = tape.backward(loss);

  double max_err = 0.0;
  for (std::size_t p = 0; p < ids.size(); ++p) {
    const NodeId id = ids[p];
    const Tensor& grad = analytic.at(id);
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      Tensor probe = params[p];
      probe[i] += h;
      tape.set_leaf_value(id, probe);
      tape.replay();
      const double f_plus = tape.value(loss).scalar_value();
      probe[i] -= 2.0 * h;
      tape.set_leaf_value(id, probe);
      tape.replay();
      const double f_minus = tape.value(loss).scalar_value();
      tape.set_leaf_value(id, params[p]);
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double err = std::abs(grad[i] - numeric) / std::max(1.0, std::abs(numeric));
      max_err = std::max(max_err, err);
    }
  }
  tape.replay();
  return max_err;
}

}  // namespace tvgnn
