#pragma once

#include "thyrofna/nn/tensor.hpp"

#include <vector>

namespace thyrofna::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // L2 penalty folded into the gradient before the moment updates.
  double weight_decay = 0.0;
};

class Adam {
public:
  Adam(std::vector<Parameter *> params, AdamConfig config);

  // Applies one update using the accumulated gradients, scaled by grad_scale.
  void step(double grad_scale = 1.0);
  void zero_grad();
  const AdamConfig &config() const { return config_; }
  long steps() const { return t_; }

private:
  std::vector<Parameter *> params_;
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

} // namespace thyrofna::nn
