#pragma once

#include "thyrofna/core_types.hpp"
#include "thyrofna/nn/layers.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

namespace thyrofna {

struct BackboneOutput {
  nn::Vector logits;    // size 3
  nn::Vector embedding; // penultimate features, size embedding_dim()
};

// A classifier over 224x224x3 inputs exposing 3 logits, a penultimate
// embedding, and the last convolutional activation for saliency maps.
class Backbone {
public:
  virtual ~Backbone() = default;

  virtual std::string name() const = 0;
  virtual int embedding_dim() const = 0;
  // Options needed to rebuild the same architecture (stored in checkpoints).
  virtual nlohmann::json architecture() const = 0;

  virtual BackboneOutput forward(const nn::FeatureMap &input, const nn::ForwardContext &ctx) = 0;
  // Backpropagates from the last forward pass; accumulates parameter
  // gradients and returns d(loss)/d(input).
  virtual nn::FeatureMap backward(const nn::Vector &grad_logits,
                                  const nn::Vector *grad_embedding = nullptr) = 0;

  // Activation of the saliency target layer from the last forward pass.
  virtual const nn::FeatureMap &saliency_activation() const = 0;
  // d(sum grad_logits . logits)/d(activation), without touching layers below.
  virtual nn::FeatureMap saliency_gradient(const nn::Vector &grad_logits) = 0;

  virtual std::vector<nn::Parameter *> parameters() = 0;
  virtual std::unique_ptr<Backbone> clone() const = 0;
  virtual void set_dropout(double rate) = 0;

  std::size_t parameter_count() { return nn::count_parameters(parameters()); }
  bool trained() const { return trained_; }
  void mark_trained(bool trained = true) { trained_ = trained; }

  // Eval-mode probabilities for an arbitrary view (resized to 224x224).
  PredictionVector predict(const cv::Mat &view);
  BackboneOutput infer(const cv::Mat &view);

private:
  bool trained_ = false;
};

// 224x224 BGR uint8 -> 3 x 50176 doubles in [0,1].
nn::FeatureMap to_model_input(const cv::Mat &model_input);

struct ReferenceCnnOptions {
  std::vector<int> channels = {16, 32, 64};
  int kernel = 3;
  // Average-pooling factor applied to the 224x224 input before the first conv.
  int stem_pool = 4;
  double dropout = 0.2;

  nlohmann::json to_json() const;
  static ReferenceCnnOptions from_json(const nlohmann::json &j);
};

// Small conv net: [avgpool] -> (conv-relu-maxpool)* -> conv-relu -> GAP ->
// dropout -> dense(3). The embedding is the GAP output.
class ReferenceCnn final : public Backbone {
public:
  ReferenceCnn(std::string name, ReferenceCnnOptions options, std::uint64_t seed);

  std::string name() const override { return name_; }
  int embedding_dim() const override { return options_.channels.back(); }
  nlohmann::json architecture() const override { return options_.to_json(); }
  BackboneOutput forward(const nn::FeatureMap &input, const nn::ForwardContext &ctx) override;
  nn::FeatureMap backward(const nn::Vector &grad_logits, const nn::Vector *grad_embedding) override;
  const nn::FeatureMap &saliency_activation() const override { return features_.tapped(); }
  nn::FeatureMap saliency_gradient(const nn::Vector &grad_logits) override;
  std::vector<nn::Parameter *> parameters() override;
  std::unique_ptr<Backbone> clone() const override { return std::make_unique<ReferenceCnn>(*this); }
  void set_dropout(double rate) override;

private:
  std::string name_;
  ReferenceCnnOptions options_;
  nn::Sequential features_; // through global average pooling
  nn::Sequential head_;     // dropout + dense
  int target_index_ = -1;   // last ReLU in features_
};

using BackboneFactory =
    std::function<std::unique_ptr<Backbone>(const nlohmann::json &options, std::uint64_t seed)>;

struct BackboneSpec {
  std::string name;
  std::string description;
  BackboneFactory factory;
};

class BackboneRegistry {
public:
  static BackboneRegistry &instance();

  void add(BackboneSpec spec);
  bool contains(const std::string &name) const;
  const BackboneSpec &get(const std::string &name) const; // UnknownBackbone
  std::vector<std::string> names() const;

private:
  BackboneRegistry();
  std::map<std::string, BackboneSpec> specs_;
};

std::unique_ptr<Backbone> make_backbone(const std::string &name, const nlohmann::json &options,
                                        std::uint64_t seed);

// Runs a 224x224x3 probe and checks the 3-logit and embedding contracts.
void check_backbone_contract(Backbone &backbone);

} // namespace thyrofna
