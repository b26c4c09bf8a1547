#pragma once

#include "thyrofna/nn/tensor.hpp"

#include <memory>
#include <string>
#include <vector>

namespace thyrofna::nn {

// A differentiable stage. forward() caches what backward() needs, so one
// instance serves one sample at a time.
class Layer {
public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual FeatureMap forward(const FeatureMap &input, const ForwardContext &ctx) = 0;
  // Accumulates parameter gradients and returns d(loss)/d(input).
  virtual FeatureMap backward(const FeatureMap &grad_output) = 0;
  virtual std::vector<Parameter *> parameters() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

// Stride-1 convolution with zero padding, via im2col and a single GEMM.
class Conv2d final : public Layer {
public:
  Conv2d(int in_channels, int out_channels, int kernel, int padding, Rng &rng);
  std::string kind() const override { return "conv2d"; }
  FeatureMap forward(const FeatureMap &input, const ForwardContext &ctx) override;
  FeatureMap backward(const FeatureMap &grad_output) override;
  std::vector<Parameter *> parameters() override { return {&weight_, &bias_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

private:
  int in_channels_;
  int out_channels_;
  int kernel_;
  int padding_;
  Parameter weight_; // out x (in*k*k)
  Parameter bias_;   // out x 1
  Matrix columns_;
  int in_h_ = 0, in_w_ = 0, out_h_ = 0, out_w_ = 0;
};

class Relu final : public Layer {
public:
  std::string kind() const override { return "relu"; }
  FeatureMap forward(const FeatureMap &input, const ForwardContext &ctx) override;
  FeatureMap backward(const FeatureMap &grad_output) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }

private:
  Matrix mask_;
};

class MaxPool2d final : public Layer {
public:
  explicit MaxPool2d(int window) : window_(window) {}
  std::string kind() const override { return "maxpool2d"; }
  FeatureMap forward(const FeatureMap &input, const ForwardContext &ctx) override;
  FeatureMap backward(const FeatureMap &grad_output) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool2d>(*this); }

private:
  int window_;
  int in_h_ = 0, in_w_ = 0;
  std::vector<int> argmax_;
};

class AvgPool2d final : public Layer {
public:
  explicit AvgPool2d(int window) : window_(window) {}
  std::string kind() const override { return "avgpool2d"; }
  FeatureMap forward(const FeatureMap &input, const ForwardContext &ctx) override;
  FeatureMap backward(const FeatureMap &grad_output) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<AvgPool2d>(*this); }

private:
  int window_;
  int in_h_ = 0, in_w_ = 0;
};

class GlobalAvgPool final : public Layer {
public:
  std::string kind() const override { return "global_avg_pool"; }
  FeatureMap forward(const FeatureMap &input, const ForwardContext &ctx) override;
  FeatureMap backward(const FeatureMap &grad_output) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<GlobalAvgPool>(*this); }

private:
  int in_h_ = 0, in_w_ = 0;
};

class Dense final : public Layer {
public:
  Dense(int in_features, int out_features, Rng &rng);
  std::string kind() const override { return "dense"; }
  FeatureMap forward(const FeatureMap &input, const ForwardContext &ctx) override;
  FeatureMap backward(const FeatureMap &grad_output) override;
  std::vector<Parameter *> parameters() override { return {&weight_, &bias_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

private:
  Parameter weight_; // out x in
  Parameter bias_;   // out x 1
  Vector input_;
};

// Inverted dropout; identity outside training.
class Dropout final : public Layer {
public:
  explicit Dropout(double rate) : rate_(rate) {}
  std::string kind() const override { return "dropout"; }
  FeatureMap forward(const FeatureMap &input, const ForwardContext &ctx) override;
  FeatureMap backward(const FeatureMap &grad_output) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }
  void set_rate(double rate) { rate_ = rate; }

private:
  double rate_;
  Matrix mask_;
  bool active_ = false;
};

class Sequential {
public:
  Sequential() = default;
  Sequential(const Sequential &other);
  Sequential &operator=(const Sequential &other);
  Sequential(Sequential &&) noexcept = default;
  Sequential &operator=(Sequential &&) noexcept = default;

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  std::size_t size() const { return layers_.size(); }
  Layer &layer(std::size_t i) { return *layers_[i]; }

  // When `tap` is set, the output of layer `tap` is kept for later inspection.
  FeatureMap forward(const FeatureMap &input, const ForwardContext &ctx, int tap = -1);
  FeatureMap backward(const FeatureMap &grad_output);
  // Backpropagates only through layers after `index`; returns the gradient at
  // the output of layer `index`.
  FeatureMap backward_to(const FeatureMap &grad_output, std::size_t index);

  const FeatureMap &tapped() const { return tapped_; }
  std::vector<Parameter *> parameters();
  // Renames every parameter to "<prefix>.<layer index>.<name>".
  void name_parameters(const std::string &prefix);

private:
  std::vector<std::unique_ptr<Layer>> layers_;
  FeatureMap tapped_;
};

} // namespace thyrofna::nn
