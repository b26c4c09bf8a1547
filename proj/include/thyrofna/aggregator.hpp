#pragma once

#include "thyrofna/backbone.hpp"
#include "thyrofna/loss.hpp"
#include "thyrofna/nn/transformer.hpp"
#include "thyrofna/trainer.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

namespace thyrofna {

inline constexpr int kNumRegionTokens = 12;
inline constexpr int kNumTokens = 1 + kNumRegionTokens;

enum class TokenSource { EMBEDDING, LOGITS };
// MLP: feed-forward head on the class token. SOFTMAX_ONLY: the class token
// itself is used as the logit vector (requires d_model == 3).
enum class HeadKind { MLP, SOFTMAX_ONLY };

std::string_view token_source_name(TokenSource source);
std::string_view head_kind_name(HeadKind kind);

struct AggregatorConfig {
  int d_model = 256;
  int num_encoder_layers = 5;
  int num_heads = 4;
  int ff_dim = 512;
  std::vector<int> head_hidden_dims = {128};
  double dropout = 0.2;
  TokenSource token_source = TokenSource::EMBEDDING;
  HeadKind head = HeadKind::MLP;
  bool positional_encoding = true;
  bool fine_tune_backbone = false;

  // Trainable configurations need 2..5 encoder layers; inference accepts 0..5
  // so that the degenerate reduction configuration can be evaluated.
  void validate(bool for_training = true) const;
  nlohmann::json to_json() const;
  static AggregatorConfig from_json(const nlohmann::json &j, const std::string &path = "aggregator");
};

// The full canonical frame plus its 12 grid tiles (same rects as Sets D/E).
struct AggregatorViews {
  cv::Mat full;
  std::array<cv::Mat, kNumRegionTokens> tiles;

  const cv::Mat &view(int token) const { return token == 0 ? full : tiles[static_cast<std::size_t>(token - 1)]; }
};

AggregatorViews decompose(const cv::Mat &canonical);

// Backbone outputs for the 13 views: row 0 = full image, rows 1..12 = tiles.
nn::Matrix backbone_token_features(const AggregatorViews &views, Backbone &backbone, TokenSource source);

struct TokenSequence {
  nn::Matrix tokens; // 13 x d_model, row 0 is the class token
  std::string source_id;

  int d_model() const { return static_cast<int>(tokens.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(tokens.rows()); }
  nn::Vector class_token() const { return tokens.row(0).transpose(); }
  nn::Vector region_token(int i) const { return tokens.row(1 + i).transpose(); }
};

// Expansion map, positional encodings, encoder stack, and head.
class AggregatorModel {
public:
  AggregatorModel(AggregatorConfig config, int source_dim, std::uint64_t seed);

  const AggregatorConfig &config() const { return config_; }
  int source_dim() const { return source_dim_; }

  // Shared linear map source_dim -> d_model for all 13 rows, plus the
  // positional encoding of each row when enabled.
  TokenSequence tokenize_features(const nn::Matrix &features, std::string source_id = {});
  // Logits from the refined class token.
  nn::Vector forward(const TokenSequence &tokens, const nn::ForwardContext &ctx);
  // Backpropagates the last forward(); returns d(loss)/d(tokens).
  nn::Matrix backward(const nn::Vector &grad_logits);
  // Backpropagates the last tokenize_features(); returns d(loss)/d(features).
  nn::Matrix backward_tokenize(const nn::Matrix &grad_tokens);

  // W = I, b = 0 (requires source_dim == d_model).
  void set_identity_expansion();

  std::vector<nn::Parameter *> parameters();
  bool ready() const { return ready_; }
  void mark_ready(bool ready = true) { ready_ = ready; }

private:
  AggregatorConfig config_;
  int source_dim_;
  nn::Linear expansion_;
  nn::Parameter positions_; // 13 x d_model
  std::vector<nn::EncoderLayer> encoders_;
  nn::LayerNorm final_norm_;
  std::vector<nn::Linear> head_;
  std::vector<nn::Matrix> head_relu_masks_;
  std::vector<nn::TokenDropout> head_dropouts_;
  bool ready_ = false;
};

TokenSequence tokenize(const AggregatorViews &views, Backbone &backbone, AggregatorModel &model,
                       std::string source_id = {});

// Eval-mode prediction; UnloadedParameters unless the model was trained,
// loaded, or explicitly marked ready.
PredictionVector aggregate_predict(const TokenSequence &tokens, AggregatorModel &model);

struct PremiumModel {
  std::unique_ptr<Backbone> backbone;
  std::unique_ptr<AggregatorModel> aggregator;

  PredictionVector predict(const AggregatorViews &views);
  PredictionVector predict_canonical(const cv::Mat &canonical) { return predict(decompose(canonical)); }
};

// 13 model inputs (224x224) per labeled image.
struct ViewSet {
  std::vector<std::string> ids;
  std::vector<ClassLabel> labels;
  std::vector<AggregatorViews> views;

  std::size_t size() const { return views.size(); }
  bool empty() const { return views.empty(); }
};

ViewSet build_view_set(std::span<const ImageRecord> records);

struct PremiumTrainResult {
  TrainingReport report;
  PremiumModel model;
};

// Trains encoder + head on full images (no augmentation) on top of a Basic
// checkpoint; the backbone stays frozen unless config.fine_tune_backbone.
PremiumTrainResult train_premium(const std::filesystem::path &base_checkpoint,
                                 const AggregatorConfig &config, const TrainConfig &train_config,
                                 const ViewSet &train_set, const ViewSet &val_set,
                                 const ClassWeights &weights, const TrainOptions &options = {});

std::vector<PredictionVector> predict_all(PremiumModel &model, const ViewSet &set);

// Premium layout: the trainer files plus aggregator_config.json and
// backbone.bin (a copy of the Basic weights used for tokenization).
void save_premium_checkpoint(const std::filesystem::path &dir, PremiumModel &model,
                             const TrainConfig &train_config, const TrainingReport &report);
PremiumModel load_premium_checkpoint(const std::filesystem::path &dir);
bool is_premium_checkpoint(const std::filesystem::path &dir);

} // namespace thyrofna
