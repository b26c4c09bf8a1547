#include "thyrofna/nn/adam.hpp"

#include <cmath>

namespace thyrofna::nn {

Adam::Adam(std::vector<Parameter *> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (const auto *p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(double grad_scale) {
  ++t_;
  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const double step_size = config_.learning_rate / bias1;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto &p = *params_[i];
    Matrix g = p.grad * grad_scale;
    if (config_.weight_decay != 0.0) {
      g += config_.weight_decay * p.value;
    }
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
    p.value.array() -=
        step_size * m_[i].array() / ((v_[i].array() / bias2).sqrt() + config_.epsilon);
  }
}

void Adam::zero_grad() { zero_grads(params_); }

} // namespace thyrofna::nn
