#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "uniseq/tensor.hpp"

namespace uniseq {

using NamedTensors = std::map<std::string, Tensor>;

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-3;
};

/// Optimizer state. m and v mirror the parameter map shapes; step counts
/// completed updates (bias correction uses step + 1 internally).
struct AdamState {
  std::uint64_t step = 0;
  AdamConfig hyper;
  NamedTensors m;
  NamedTensors v;

  static AdamState init(const NamedTensors& params, AdamConfig hyper = {});
};

/// One bias-corrected Adam update, in place. Deterministic: iterates the
/// maps in key order.
void adam_step(NamedTensors& params, const NamedTensors& grads, AdamState& state);

}  // namespace uniseq
