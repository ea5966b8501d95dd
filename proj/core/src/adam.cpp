#include "uniseq/adam.hpp"

#include <cmath>

#include "uniseq/errors.hpp"

namespace uniseq {

AdamState AdamState::init(const NamedTensors& params, AdamConfig hyper) {
  AdamState s;
  s.hyper = hyper;
  for (const auto& [name, t] : params) {
    s.m[name] = Tensor::zeros(t.shape);
    s.v[name] = Tensor::zeros(t.shape);
  }
  return s;
}

void adam_step(NamedTensors& params, const NamedTensors& grads, AdamState& state) {
  const AdamConfig& h = state.hyper;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(h.beta1, t);
  const double bc2 = 1.0 - std::pow(h.beta2, t);
  for (auto& [name, p] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) throw ShapeError("adam_step: missing gradient for " + name);
    const Tensor& g = git->second;
    if (!g.same_shape(p))
      throw ShapeError("adam_step: gradient shape " + g.shape_str() + " != parameter shape " +
                       p.shape_str() + " for " + name);
    Tensor& m = state.m.at(name);
    Tensor& v = state.v.at(name);
    for (std::size_t i = 0; i < p.numel(); ++i) {
      m.data[i] = h.beta1 * m.data[i] + (1.0 - h.beta1) * g.data[i];
      v.data[i] = h.beta2 * v.data[i] + (1.0 - h.beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      p.data[i] -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
    }
    if (!p.all_finite()) throw NumericFault("adam_step: non-finite parameter " + name);
  }
}

}  // namespace uniseq
