#include "thyrofna/nn/layers.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/rng.hpp"

#include <cmath>
#include <limits>

namespace thyrofna::nn {

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int padding, Rng &rng)
    : in_channels_(in_channels), out_channels_(out_channels), kernel_(kernel), padding_(padding) {
  Matrix w(out_channels, in_channels * kernel * kernel);
  init_uniform(w, std::sqrt(6.0 / (in_channels * kernel * kernel)), rng);
  weight_ = Parameter("weight", std::move(w));
  bias_ = Parameter("bias", Matrix::Zero(out_channels, 1));
}

FeatureMap Conv2d::forward(const FeatureMap &input, const ForwardContext &) {
  if (input.channels != in_channels_) {
    fail(ErrorCode::ShapeMismatch, "conv2d expects " + std::to_string(in_channels_) + " channels");
  }
  in_h_ = input.height;
  in_w_ = input.width;
  out_h_ = in_h_ + 2 * padding_ - kernel_ + 1;
  out_w_ = in_w_ + 2 * padding_ - kernel_ + 1;
  const int k = kernel_;
  columns_.resize(static_cast<Eigen::Index>(in_channels_) * k * k, out_h_ * out_w_);
  for (int c = 0; c < in_channels_; ++c) {
    const double *src = input.data.row(c).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double *dst = columns_.row((c * k + ky) * k + kx).data();
        for (int oy = 0; oy < out_h_; ++oy) {
          const int iy = oy + ky - padding_;
          double *row = dst + oy * out_w_;
          if (iy < 0 || iy >= in_h_) {
            std::fill(row, row + out_w_, 0.0);
            continue;
          }
          const double *src_row = src + iy * in_w_;
          for (int ox = 0; ox < out_w_; ++ox) {
            const int ix = ox + kx - padding_;
            row[ox] = (ix >= 0 && ix < in_w_) ? src_row[ix] : 0.0;
          }
        }
      }
    }
  }
  FeatureMap out;
  out.channels = out_channels_;
  out.height = out_h_;
  out.width = out_w_;
  out.data.noalias() = weight_.value * columns_;
  out.data.colwise() += bias_.value.col(0);
  return out;
}

FeatureMap Conv2d::backward(const FeatureMap &grad_output) {
  weight_.grad.noalias() += grad_output.data * columns_.transpose();
  bias_.grad.col(0) += grad_output.data.rowwise().sum();
  const Matrix grad_columns = weight_.value.transpose() * grad_output.data;
  FeatureMap grad_input(in_channels_, in_h_, in_w_);
  const int k = kernel_;
  for (int c = 0; c < in_channels_; ++c) {
    double *dst = grad_input.data.row(c).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double *src = grad_columns.row((c * k + ky) * k + kx).data();
        for (int oy = 0; oy < out_h_; ++oy) {
          const int iy = oy + ky - padding_;
          if (iy < 0 || iy >= in_h_) {
            continue;
          }
          double *dst_row = dst + iy * in_w_;
          const double *src_row = src + oy * out_w_;
          for (int ox = 0; ox < out_w_; ++ox) {
            const int ix = ox + kx - padding_;
            if (ix >= 0 && ix < in_w_) {
              dst_row[ix] += src_row[ox];
            }
          }
        }
      }
    }
  }
  return grad_input;
}

FeatureMap Relu::forward(const FeatureMap &input, const ForwardContext &) {
  mask_ = (input.data.array() > 0.0).cast<double>().matrix();
  FeatureMap out = input;
  out.data = input.data.cwiseMax(0.0);
  return out;
}

FeatureMap Relu::backward(const FeatureMap &grad_output) {
  FeatureMap grad = grad_output;
  grad.data = grad_output.data.cwiseProduct(mask_);
  return grad;
}

FeatureMap MaxPool2d::forward(const FeatureMap &input, const ForwardContext &) {
  in_h_ = input.height;
  in_w_ = input.width;
  FeatureMap out(input.channels, in_h_ / window_, in_w_ / window_);
  argmax_.assign(static_cast<std::size_t>(out.data.size()), 0);
  for (int c = 0; c < input.channels; ++c) {
    const double *src = input.data.row(c).data();
    double *dst = out.data.row(c).data();
    int *arg = argmax_.data() + static_cast<std::ptrdiff_t>(c) * out.spatial();
    for (int oy = 0; oy < out.height; ++oy) {
      for (int ox = 0; ox < out.width; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        int best_index = 0;
        for (int dy = 0; dy < window_; ++dy) {
          for (int dx = 0; dx < window_; ++dx) {
            const int idx = (oy * window_ + dy) * in_w_ + ox * window_ + dx;
            if (src[idx] > best) {
              best = src[idx];
              best_index = idx;
            }
          }
        }
        dst[oy * out.width + ox] = best;
        arg[oy * out.width + ox] = best_index;
      }
    }
  }
  return out;
}

FeatureMap MaxPool2d::backward(const FeatureMap &grad_output) {
  FeatureMap grad(grad_output.channels, in_h_, in_w_);
  for (int c = 0; c < grad_output.channels; ++c) {
    const double *src = grad_output.data.row(c).data();
    double *dst = grad.data.row(c).data();
    const int *arg = argmax_.data() + static_cast<std::ptrdiff_t>(c) * grad_output.spatial();
    for (int i = 0; i < grad_output.spatial(); ++i) {
      dst[arg[i]] += src[i];
    }
  }
  return grad;
}

FeatureMap AvgPool2d::forward(const FeatureMap &input, const ForwardContext &) {
  in_h_ = input.height;
  in_w_ = input.width;
  FeatureMap out(input.channels, in_h_ / window_, in_w_ / window_);
  const double scale = 1.0 / (window_ * window_);
  for (int c = 0; c < input.channels; ++c) {
    const double *src = input.data.row(c).data();
    double *dst = out.data.row(c).data();
    for (int iy = 0; iy < out.height * window_; ++iy) {
      const double *src_row = src + iy * in_w_;
      double *dst_row = dst + (iy / window_) * out.width;
      for (int ix = 0; ix < out.width * window_; ++ix) {
        dst_row[ix / window_] += src_row[ix];
      }
    }
    out.data.row(c) *= scale;
  }
  return out;
}

FeatureMap AvgPool2d::backward(const FeatureMap &grad_output) {
  FeatureMap grad(grad_output.channels, in_h_, in_w_);
  const double scale = 1.0 / (window_ * window_);
  for (int c = 0; c < grad_output.channels; ++c) {
    const double *src = grad_output.data.row(c).data();
    double *dst = grad.data.row(c).data();
    for (int iy = 0; iy < grad_output.height * window_; ++iy) {
      const double *src_row = src + (iy / window_) * grad_output.width;
      double *dst_row = dst + iy * in_w_;
      for (int ix = 0; ix < grad_output.width * window_; ++ix) {
        dst_row[ix] = src_row[ix / window_] * scale;
      }
    }
  }
  return grad;
}

FeatureMap GlobalAvgPool::forward(const FeatureMap &input, const ForwardContext &) {
  in_h_ = input.height;
  in_w_ = input.width;
  FeatureMap out(input.channels, 1, 1);
  out.data.col(0) = input.data.rowwise().mean();
  return out;
}

FeatureMap GlobalAvgPool::backward(const FeatureMap &grad_output) {
  FeatureMap grad(grad_output.channels, in_h_, in_w_);
  const double scale = 1.0 / (in_h_ * in_w_);
  for (int c = 0; c < grad_output.channels; ++c) {
    grad.data.row(c).setConstant(grad_output.data(c, 0) * scale);
  }
  return grad;
}

Dense::Dense(int in_features, int out_features, Rng &rng) {
  Matrix w(out_features, in_features);
  init_uniform(w, std::sqrt(1.0 / in_features), rng);
  weight_ = Parameter("weight", std::move(w));
  bias_ = Parameter("bias", Matrix::Zero(out_features, 1));
}

FeatureMap Dense::forward(const FeatureMap &input, const ForwardContext &) {
  input_ = input.as_vector();
  if (input_.size() != weight_.value.cols()) {
    fail(ErrorCode::ShapeMismatch, "dense layer input size mismatch");
  }
  Vector y = weight_.value * input_ + bias_.value.col(0);
  return FeatureMap::from_vector(y);
}

FeatureMap Dense::backward(const FeatureMap &grad_output) {
  const Vector g = grad_output.as_vector();
  weight_.grad.noalias() += g * input_.transpose();
  bias_.grad.col(0) += g;
  return FeatureMap::from_vector(weight_.value.transpose() * g);
}

FeatureMap Dropout::forward(const FeatureMap &input, const ForwardContext &ctx) {
  active_ = ctx.training && rate_ > 0.0;
  if (!active_) {
    return input;
  }
  if (ctx.rng == nullptr) {
    fail(ErrorCode::InvalidArgument, "dropout needs an rng in training mode");
  }
  const double keep = 1.0 - rate_;
  mask_.resize(input.data.rows(), input.data.cols());
  for (Eigen::Index i = 0; i < mask_.size(); ++i) {
    mask_.data()[i] = ctx.rng->bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  FeatureMap out = input;
  out.data = input.data.cwiseProduct(mask_);
  return out;
}

FeatureMap Dropout::backward(const FeatureMap &grad_output) {
  if (!active_) {
    return grad_output;
  }
  FeatureMap grad = grad_output;
  grad.data = grad_output.data.cwiseProduct(mask_);
  return grad;
}

Sequential::Sequential(const Sequential &other) : tapped_(other.tapped_) {
  layers_.reserve(other.layers_.size());
  for (const auto &layer : other.layers_) {
    layers_.push_back(layer->clone());
  }
}

Sequential &Sequential::operator=(const Sequential &other) {
  if (this != &other) {
    Sequential copy(other);
    *this = std::move(copy);
  }
  return *this;
}

FeatureMap Sequential::forward(const FeatureMap &input, const ForwardContext &ctx, int tap) {
  FeatureMap x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->forward(x, ctx);
    if (static_cast<int>(i) == tap) {
      tapped_ = x;
    }
  }
  return x;
}

FeatureMap Sequential::backward(const FeatureMap &grad_output) {
  FeatureMap g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(g);
  }
  return g;
}

FeatureMap Sequential::backward_to(const FeatureMap &grad_output, std::size_t index) {
  FeatureMap g = grad_output;
  for (std::size_t i = layers_.size(); i-- > index + 1;) {
    g = layers_[i]->backward(g);
  }
  return g;
}

std::vector<Parameter *> Sequential::parameters() {
  std::vector<Parameter *> params;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto *p : layers_[i]->parameters()) {
      params.push_back(p);
    }
  }
  return params;
}

void Sequential::name_parameters(const std::string &prefix) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto *p : layers_[i]->parameters()) {
      const auto dot = p->name.rfind('.');
      const std::string leaf = dot == std::string::npos ? p->name : p->name.substr(dot + 1);
      p->name = prefix + "." + std::to_string(i) + "." + leaf;
    }
  }
}

} // namespace thyrofna::nn
