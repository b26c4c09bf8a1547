#include "thyrofna/backbone.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/image.hpp"
#include "thyrofna/rng.hpp"

namespace thyrofna {

PredictionVector Backbone::predict(const cv::Mat &view) {
  const auto out = infer(view);
  return PredictionVector::from_logits(std::span<const double>(out.logits.data(), 3));
}

BackboneOutput Backbone::infer(const cv::Mat &view) {
  const auto input = model_input_resize(view).image;
  return forward(to_model_input(input), nn::ForwardContext{});
}

nn::FeatureMap to_model_input(const cv::Mat &model_input) {
  if (model_input.cols != kModelInputSize || model_input.rows != kModelInputSize ||
      model_input.type() != CV_8UC3) {
    fail(ErrorCode::DimensionMismatch, "model input must be 224x224x3");
  }
  nn::FeatureMap fm(3, kModelInputSize, kModelInputSize);
  constexpr double kScale = 1.0 / 255.0;
  for (int y = 0; y < kModelInputSize; ++y) {
    const auto *row = model_input.ptr<cv::Vec3b>(y);
    for (int x = 0; x < kModelInputSize; ++x) {
      const int idx = y * kModelInputSize + x;
      for (int c = 0; c < 3; ++c) {
        fm.data(c, idx) = row[x][c] * kScale;
      }
    }
  }
  return fm;
}

nlohmann::json ReferenceCnnOptions::to_json() const {
  return {{"channels", channels}, {"kernel", kernel}, {"stem_pool", stem_pool}, {"dropout", dropout}};
}

ReferenceCnnOptions ReferenceCnnOptions::from_json(const nlohmann::json &j) {
  ReferenceCnnOptions o;
  if (j.is_null()) {
    return o;
  }
  if (!j.is_object()) {
    fail(ErrorCode::ConfigError, "backbone options must be an object");
  }
  for (const auto &[key, value] : j.items()) {
    if (key == "channels") {
      o.channels = value.get<std::vector<int>>();
    } else if (key == "kernel") {
      o.kernel = value.get<int>();
    } else if (key == "stem_pool") {
      o.stem_pool = value.get<int>();
    } else if (key == "dropout") {
      o.dropout = value.get<double>();
    } else {
      fail(ErrorCode::ConfigError, "unknown backbone option '" + key + "'");
    }
  }
  if (o.channels.empty() || o.kernel < 1 || o.kernel % 2 == 0 || o.stem_pool < 1 ||
      o.dropout < 0.0 || o.dropout >= 1.0) {
    fail(ErrorCode::ConfigError, "invalid reference CNN options");
  }
  return o;
}

ReferenceCnn::ReferenceCnn(std::string name, ReferenceCnnOptions options, std::uint64_t seed)
    : name_(std::move(name)), options_(std::move(options)) {
  Rng rng(seed);
  if (options_.stem_pool > 1) {
    features_.add(std::make_unique<nn::AvgPool2d>(options_.stem_pool));
  }
  int in_channels = 3;
  for (std::size_t i = 0; i < options_.channels.size(); ++i) {
    const int out_channels = options_.channels[i];
    features_.add(std::make_unique<nn::Conv2d>(in_channels, out_channels, options_.kernel,
                                               options_.kernel / 2, rng));
    features_.add(std::make_unique<nn::Relu>());
    if (i + 1 < options_.channels.size()) {
      features_.add(std::make_unique<nn::MaxPool2d>(2));
    } else {
      target_index_ = static_cast<int>(features_.size()) - 1;
    }
    in_channels = out_channels;
  }
  features_.add(std::make_unique<nn::GlobalAvgPool>());
  head_.add(std::make_unique<nn::Dropout>(options_.dropout));
  head_.add(std::make_unique<nn::Dense>(in_channels, kNumClasses, rng));
  features_.name_parameters("features");
  head_.name_parameters("head");
}

BackboneOutput ReferenceCnn::forward(const nn::FeatureMap &input, const nn::ForwardContext &ctx) {
  const nn::FeatureMap embedding = features_.forward(input, ctx, target_index_);
  const nn::FeatureMap logits = head_.forward(embedding, ctx);
  return {logits.as_vector(), embedding.as_vector()};
}

nn::FeatureMap ReferenceCnn::backward(const nn::Vector &grad_logits, const nn::Vector *grad_embedding) {
  nn::FeatureMap g = head_.backward(nn::FeatureMap::from_vector(grad_logits));
  if (grad_embedding != nullptr) {
    g.data.col(0) += *grad_embedding;
  }
  return features_.backward(g);
}

nn::FeatureMap ReferenceCnn::saliency_gradient(const nn::Vector &grad_logits) {
  const nn::FeatureMap g = head_.backward(nn::FeatureMap::from_vector(grad_logits));
  return features_.backward_to(g, static_cast<std::size_t>(target_index_));
}

std::vector<nn::Parameter *> ReferenceCnn::parameters() {
  auto params = features_.parameters();
  for (auto *p : head_.parameters()) {
    params.push_back(p);
  }
  return params;
}

void ReferenceCnn::set_dropout(double rate) {
  options_.dropout = rate;
  static_cast<nn::Dropout &>(head_.layer(0)).set_rate(rate);
}

BackboneRegistry &BackboneRegistry::instance() {
  static BackboneRegistry registry;
  return registry;
}

BackboneRegistry::BackboneRegistry() {
  auto reference = [](std::string name, std::vector<int> channels) {
    return [name, channels](const nlohmann::json &options, std::uint64_t seed) {
      nlohmann::json merged = {{"channels", channels}};
      if (options.is_object()) {
        merged.update(options);
      }
      return std::unique_ptr<Backbone>(
          std::make_unique<ReferenceCnn>(name, ReferenceCnnOptions::from_json(merged), seed));
    };
  };
  add({"reference_cnn", "bundled small CNN (16-32-64 channels), desk-scale default",
       reference("reference_cnn", {16, 32, 64})});
  add({"reference_cnn_wide", "bundled CNN with 32-64-128-256 channels",
       reference("reference_cnn_wide", {32, 64, 128, 256})});
}

void BackboneRegistry::add(BackboneSpec spec) {
  const std::string key = spec.name;
  specs_[key] = std::move(spec);
}

bool BackboneRegistry::contains(const std::string &name) const { return specs_.count(name) > 0; }

const BackboneSpec &BackboneRegistry::get(const std::string &name) const {
  const auto it = specs_.find(name);
  if (it == specs_.end()) {
    fail(ErrorCode::UnknownBackbone, "no backbone registered as '" + name + "'");
  }
  return it->second;
}

std::vector<std::string> BackboneRegistry::names() const {
  std::vector<std::string> out;
  for (const auto &[name, spec] : specs_) {
    out.push_back(name);
  }
  return out;
}

std::unique_ptr<Backbone> make_backbone(const std::string &name, const nlohmann::json &options,
                                        std::uint64_t seed) {
  return BackboneRegistry::instance().get(name).factory(options, seed);
}

void check_backbone_contract(Backbone &backbone) {
  const cv::Mat probe(kModelInputSize, kModelInputSize, CV_8UC3, cv::Scalar(128, 96, 160));
  const auto out = backbone.forward(to_model_input(probe), nn::ForwardContext{});
  if (out.logits.size() != kNumClasses) {
    fail(ErrorCode::DimensionMismatch, backbone.name() + ": expected 3 logits");
  }
  if (out.embedding.size() != backbone.embedding_dim()) {
    fail(ErrorCode::DimensionMismatch, backbone.name() + ": embedding size differs from declared");
  }
}

} // namespace thyrofna
