#include "thyrofna/nn/transformer.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/rng.hpp"

#include <cmath>

namespace thyrofna::nn {

Linear::Linear(int in_features, int out_features, Rng &rng, const std::string &name) {
  Matrix w(in_features, out_features);
  init_uniform(w, std::sqrt(1.0 / in_features), rng);
  weight_ = Parameter(name + ".weight", std::move(w));
  bias_ = Parameter(name + ".bias", Matrix::Zero(1, out_features));
}

Matrix Linear::forward(const Matrix &x) {
  if (x.cols() != weight_.value.rows()) {
    fail(ErrorCode::DimensionMismatch, weight_.name + ": input width " + std::to_string(x.cols()) +
                                           " != " + std::to_string(weight_.value.rows()));
  }
  input_ = x;
  Matrix y = x * weight_.value;
  y.rowwise() += bias_.value.row(0);
  return y;
}

Matrix Linear::backward(const Matrix &grad_y) {
  weight_.grad.noalias() += input_.transpose() * grad_y;
  bias_.grad.row(0) += grad_y.colwise().sum();
  return grad_y * weight_.value.transpose();
}

LayerNorm::LayerNorm(int features, const std::string &name, double eps) : eps_(eps) {
  gamma_ = Parameter(name + ".gamma", Matrix::Ones(1, features));
  beta_ = Parameter(name + ".beta", Matrix::Zero(1, features));
}

Matrix LayerNorm::forward(const Matrix &x) {
  const Eigen::Index n = x.cols();
  normalized_.resize(x.rows(), n);
  inv_std_.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / static_cast<double>(n);
    inv_std_(r) = 1.0 / std::sqrt(var + eps_);
    normalized_.row(r) = (x.row(r).array() - mean) * inv_std_(r);
  }
  Matrix y = normalized_.array().rowwise() * gamma_.value.row(0).array();
  y.rowwise() += beta_.value.row(0);
  return y;
}

Matrix LayerNorm::backward(const Matrix &grad_y) {
  gamma_.grad.row(0) += grad_y.cwiseProduct(normalized_).colwise().sum();
  beta_.grad.row(0) += grad_y.colwise().sum();
  const Matrix grad_norm = grad_y.array().rowwise() * gamma_.value.row(0).array();
  Matrix grad_x(grad_y.rows(), grad_y.cols());
  for (Eigen::Index r = 0; r < grad_y.rows(); ++r) {
    const double mean_g = grad_norm.row(r).mean();
    const double mean_gx = grad_norm.row(r).cwiseProduct(normalized_.row(r)).mean();
    grad_x.row(r) = inv_std_(r) * (grad_norm.row(r).array() - mean_g -
                                   normalized_.row(r).array() * mean_gx);
  }
  return grad_x;
}

Matrix Gelu::forward(const Matrix &x) {
  input_ = x;
  return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); });
}

Matrix Gelu::backward(const Matrix &grad_y) const {
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  const Matrix slope = input_.unaryExpr([](double v) {
    return 0.5 * (1.0 + std::erf(v / std::sqrt(2.0))) + v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
  });
  return grad_y.cwiseProduct(slope);
}

Matrix TokenDropout::forward(const Matrix &x, const ForwardContext &ctx) {
  active_ = ctx.training && rate_ > 0.0;
  if (!active_) {
    return x;
  }
  if (ctx.rng == nullptr) {
    fail(ErrorCode::InvalidArgument, "dropout needs an rng in training mode");
  }
  const double keep = 1.0 - rate_;
  mask_.resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask_.size(); ++i) {
    mask_.data()[i] = ctx.rng->bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  return x.cwiseProduct(mask_);
}

Matrix TokenDropout::backward(const Matrix &grad_y) const {
  return active_ ? Matrix(grad_y.cwiseProduct(mask_)) : grad_y;
}

MultiHeadSelfAttention::MultiHeadSelfAttention(int d_model, int num_heads, Rng &rng,
                                               const std::string &name)
    : d_model_(d_model), num_heads_(num_heads), query_(d_model, d_model, rng, name + ".query"),
      key_(d_model, d_model, rng, name + ".key"), value_(d_model, d_model, rng, name + ".value"),
      output_(d_model, d_model, rng, name + ".output") {
  if (num_heads <= 0 || d_model % num_heads != 0) {
    fail(ErrorCode::ConfigError, "d_model must be divisible by num_heads");
  }
}

Matrix MultiHeadSelfAttention::forward(const Matrix &x) {
  q_ = query_.forward(x);
  k_ = key_.forward(x);
  v_ = value_.forward(x);
  const int head_dim = d_model_ / num_heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const Eigen::Index tokens = x.rows();
  Matrix concat(tokens, d_model_);
  attention_.resize(static_cast<std::size_t>(num_heads_));
  for (int h = 0; h < num_heads_; ++h) {
    const auto qh = q_.middleCols(h * head_dim, head_dim);
    const auto kh = k_.middleCols(h * head_dim, head_dim);
    const auto vh = v_.middleCols(h * head_dim, head_dim);
    Matrix scores = (qh * kh.transpose()) * scale;
    for (Eigen::Index r = 0; r < tokens; ++r) {
      const double max_score = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - max_score).exp();
      scores.row(r) /= scores.row(r).sum();
    }
    concat.middleCols(h * head_dim, head_dim) = scores * vh;
    attention_[static_cast<std::size_t>(h)] = std::move(scores);
  }
  return output_.forward(concat);
}

Matrix MultiHeadSelfAttention::backward(const Matrix &grad_y) {
  const Matrix grad_concat = output_.backward(grad_y);
  const int head_dim = d_model_ / num_heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Matrix grad_q(q_.rows(), q_.cols());
  Matrix grad_k(k_.rows(), k_.cols());
  Matrix grad_v(v_.rows(), v_.cols());
  for (int h = 0; h < num_heads_; ++h) {
    const Matrix &attn = attention_[static_cast<std::size_t>(h)];
    const auto qh = q_.middleCols(h * head_dim, head_dim);
    const auto kh = k_.middleCols(h * head_dim, head_dim);
    const auto vh = v_.middleCols(h * head_dim, head_dim);
    const auto grad_out = grad_concat.middleCols(h * head_dim, head_dim);
    const Matrix grad_attn = grad_out * vh.transpose();
    grad_v.middleCols(h * head_dim, head_dim) = attn.transpose() * grad_out;
    Matrix grad_scores(attn.rows(), attn.cols());
    for (Eigen::Index r = 0; r < attn.rows(); ++r) {
      const double dot = grad_attn.row(r).dot(attn.row(r));
      grad_scores.row(r) = attn.row(r).array() * (grad_attn.row(r).array() - dot);
    }
    grad_q.middleCols(h * head_dim, head_dim) = grad_scores * kh * scale;
    grad_k.middleCols(h * head_dim, head_dim) = grad_scores.transpose() * qh * scale;
  }
  Matrix grad_x = query_.backward(grad_q);
  grad_x += key_.backward(grad_k);
  grad_x += value_.backward(grad_v);
  return grad_x;
}

std::vector<Parameter *> MultiHeadSelfAttention::parameters() {
  std::vector<Parameter *> params;
  for (auto *layer : {&query_, &key_, &value_, &output_}) {
    for (auto *p : layer->parameters()) {
      params.push_back(p);
    }
  }
  return params;
}

EncoderLayer::EncoderLayer(int d_model, int num_heads, int ff_dim, double dropout, Rng &rng,
                           const std::string &name)
    : norm1_(d_model, name + ".norm1"), attention_(d_model, num_heads, rng, name + ".attention"),
      drop1_(dropout), norm2_(d_model, name + ".norm2"), ff1_(d_model, ff_dim, rng, name + ".ff1"),
      ff2_(ff_dim, d_model, rng, name + ".ff2"), drop2_(dropout) {}

Matrix EncoderLayer::forward(const Matrix &x, const ForwardContext &ctx) {
  Matrix x1 = x + drop1_.forward(attention_.forward(norm1_.forward(x)), ctx);
  Matrix ff = ff2_.forward(gelu_.forward(ff1_.forward(norm2_.forward(x1))));
  return x1 + drop2_.forward(ff, ctx);
}

Matrix EncoderLayer::backward(const Matrix &grad_y) {
  Matrix grad_x1 = grad_y;
  grad_x1 += norm2_.backward(ff1_.backward(gelu_.backward(ff2_.backward(drop2_.backward(grad_y)))));
  Matrix grad_x = grad_x1;
  grad_x += norm1_.backward(attention_.backward(drop1_.backward(grad_x1)));
  return grad_x;
}

std::vector<Parameter *> EncoderLayer::parameters() {
  std::vector<Parameter *> params;
  auto append = [&params](std::vector<Parameter *> more) {
    params.insert(params.end(), more.begin(), more.end());
  };
  append(norm1_.parameters());
  append(attention_.parameters());
  append(norm2_.parameters());
  append(ff1_.parameters());
  append(ff2_.parameters());
  return params;
}

} // namespace thyrofna::nn
