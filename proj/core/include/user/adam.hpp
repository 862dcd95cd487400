#pragma once

#include <vector>

#include "user/tensor.hpp"

namespace user::nd {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment accumulators plus step counter. Moment shapes are
/// fixed by the first adam_step call and must match on every later call.
class AdamState {
 public:
  explicit AdamState(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  long step_count() const { return step_; }

 private:
  friend void adam_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads,
                        AdamState& state);
  AdamConfig config_;
  long step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

/// One bias-corrected Adam update, in place.
void adam_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads,
               AdamState& state);

}  // namespace user::nd
