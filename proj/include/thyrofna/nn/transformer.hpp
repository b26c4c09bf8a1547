#pragma once

#include "thyrofna/nn/tensor.hpp"

#include <string>
#include <vector>

namespace thyrofna::nn {

// Token-wise blocks operate on (tokens x features) matrices.

class Linear {
public:
  Linear() = default;
  Linear(int in_features, int out_features, Rng &rng, const std::string &name);
  Matrix forward(const Matrix &x);
  Matrix backward(const Matrix &grad_y);
  std::vector<Parameter *> parameters() { return {&weight_, &bias_}; }
  Parameter &weight() { return weight_; } // in x out
  Parameter &bias() { return bias_; }     // 1 x out
  int in_features() const { return static_cast<int>(weight_.value.rows()); }
  int out_features() const { return static_cast<int>(weight_.value.cols()); }

private:
  Parameter weight_;
  Parameter bias_;
  Matrix input_;
};

class LayerNorm {
public:
  LayerNorm() = default;
  LayerNorm(int features, const std::string &name, double eps = 1e-5);
  Matrix forward(const Matrix &x);
  Matrix backward(const Matrix &grad_y);
  std::vector<Parameter *> parameters() { return {&gamma_, &beta_}; }

private:
  Parameter gamma_;
  Parameter beta_;
  double eps_ = 1e-5;
  Matrix normalized_;
  Vector inv_std_;
};

class Gelu {
public:
  Matrix forward(const Matrix &x);
  Matrix backward(const Matrix &grad_y) const;

private:
  Matrix input_;
};

class TokenDropout {
public:
  explicit TokenDropout(double rate = 0.0) : rate_(rate) {}
  Matrix forward(const Matrix &x, const ForwardContext &ctx);
  Matrix backward(const Matrix &grad_y) const;

private:
  double rate_;
  bool active_ = false;
  Matrix mask_;
};

class MultiHeadSelfAttention {
public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(int d_model, int num_heads, Rng &rng, const std::string &name);
  Matrix forward(const Matrix &x);
  Matrix backward(const Matrix &grad_y);
  std::vector<Parameter *> parameters();
  // Attention weights of the last forward pass, one (tokens x tokens) matrix per head.
  const std::vector<Matrix> &attention() const { return attention_; }

private:
  int d_model_ = 0;
  int num_heads_ = 0;
  Linear query_;
  Linear key_;
  Linear value_;
  Linear output_;
  Matrix q_, k_, v_;
  std::vector<Matrix> attention_;
};

// Pre-norm encoder block: x + Attn(LN(x)), then x + FFN(LN(x)).
class EncoderLayer {
public:
  EncoderLayer() = default;
  EncoderLayer(int d_model, int num_heads, int ff_dim, double dropout, Rng &rng, const std::string &name);
  Matrix forward(const Matrix &x, const ForwardContext &ctx);
  Matrix backward(const Matrix &grad_y);
  std::vector<Parameter *> parameters();

private:
  LayerNorm norm1_;
  MultiHeadSelfAttention attention_;
  TokenDropout drop1_;
  LayerNorm norm2_;
  Linear ff1_;
  Gelu gelu_;
  Linear ff2_;
  TokenDropout drop2_;
};

} // namespace thyrofna::nn
