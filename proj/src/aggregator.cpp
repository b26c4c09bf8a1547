#include "thyrofna/aggregator.hpp"

#include "thyrofna/augmentation.hpp"
#include "thyrofna/config_reader.hpp"
#include "thyrofna/dataset.hpp"
#include "thyrofna/error.hpp"
#include "thyrofna/evaluation.hpp"
#include "thyrofna/image.hpp"
#include "thyrofna/nn/adam.hpp"
#include "thyrofna/rng.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace thyrofna {

namespace {

constexpr const char *kAggregatorConfigFile = "aggregator_config.json";
constexpr const char *kBackboneWeightsFile = "backbone.bin";

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    fail(ErrorCode::IoFailure, "cannot write " + path.string());
  }
}

nlohmann::json read_json(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::MissingFile, "cannot read " + path.string());
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorCode::CheckpointMismatch, path.string() + ": " + e.what());
  }
}

void write_parameters(const std::filesystem::path &path, const std::vector<nn::Parameter *> &params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write " + path.string());
  }
  nn::save_parameters(out, params);
}

void read_parameters(const std::filesystem::path &path, const std::vector<nn::Parameter *> &params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::MissingFile, "cannot read " + path.string());
  }
  nn::load_parameters(in, params);
}

nn::Vector source_row(const BackboneOutput &out, TokenSource source) {
  return source == TokenSource::EMBEDDING ? out.embedding : out.logits;
}

} // namespace

std::string_view token_source_name(TokenSource source) {
  return source == TokenSource::EMBEDDING ? "embedding" : "logits";
}

std::string_view head_kind_name(HeadKind kind) {
  return kind == HeadKind::MLP ? "mlp" : "softmax_only";
}

void AggregatorConfig::validate(bool for_training) const {
  auto bad = [](const std::string &key, const std::string &why) {
    fail(ErrorCode::ConfigError, "aggregator." + key + ": " + why);
  };
  const int min_layers = for_training ? 2 : 0;
  if (num_encoder_layers < min_layers || num_encoder_layers > 5) {
    bad("num_encoder_layers", "must be in [" + std::to_string(min_layers) + ", 5], got " +
                                  std::to_string(num_encoder_layers));
  }
  if (d_model < 1) {
    bad("d_model", "must be >= 1");
  }
  if (num_heads < 1 || d_model % num_heads != 0) {
    bad("num_heads", "d_model must be divisible by num_heads");
  }
  if (ff_dim < 1) {
    bad("ff_dim", "must be >= 1");
  }
  for (const int h : head_hidden_dims) {
    if (h < 1) {
      bad("head_hidden_dims", "entries must be >= 1");
    }
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    bad("dropout", "must be in [0, 1)");
  }
  if (head == HeadKind::SOFTMAX_ONLY && d_model != kNumClasses) {
    bad("head", "softmax_only requires d_model == 3");
  }
}

nlohmann::json AggregatorConfig::to_json() const {
  return {{"d_model", d_model},
          {"num_encoder_layers", num_encoder_layers},
          {"num_heads", num_heads},
          {"ff_dim", ff_dim},
          {"head_hidden_dims", head_hidden_dims},
          {"dropout", dropout},
          {"token_source", token_source_name(token_source)},
          {"head", head_kind_name(head)},
          {"positional_encoding", positional_encoding},
          {"fine_tune_backbone", fine_tune_backbone}};
}

AggregatorConfig AggregatorConfig::from_json(const nlohmann::json &j, const std::string &path) {
  ConfigReader r(j, path);
  AggregatorConfig c;
  c.d_model = static_cast<int>(r.integer("d_model", c.d_model));
  c.num_encoder_layers = static_cast<int>(r.integer("num_encoder_layers", c.num_encoder_layers));
  c.num_heads = static_cast<int>(r.integer("num_heads", c.num_heads));
  c.ff_dim = static_cast<int>(r.integer("ff_dim", c.ff_dim));
  c.head_hidden_dims = r.int_list("head_hidden_dims", c.head_hidden_dims);
  c.dropout = r.number("dropout", c.dropout);
  const auto source = r.string("token_source", std::string(token_source_name(c.token_source)));
  if (source == "embedding") {
    c.token_source = TokenSource::EMBEDDING;
  } else if (source == "logits") {
    c.token_source = TokenSource::LOGITS;
  } else {
    r.reject("token_source", "expected \"embedding\" or \"logits\"");
  }
  const auto head = r.string("head", std::string(head_kind_name(c.head)));
  if (head == "mlp") {
    c.head = HeadKind::MLP;
  } else if (head == "softmax_only") {
    c.head = HeadKind::SOFTMAX_ONLY;
  } else {
    r.reject("head", "expected \"mlp\" or \"softmax_only\"");
  }
  c.positional_encoding = r.boolean("positional_encoding", c.positional_encoding);
  c.fine_tune_backbone = r.boolean("fine_tune_backbone", c.fine_tune_backbone);
  r.finish();
  return c;
}

AggregatorViews decompose(const cv::Mat &canonical) {
  require_canonical(canonical, "decompose");
  AggregatorViews views;
  views.full = canonical;
  const auto rects = grid_rects();
  for (std::size_t i = 0; i < rects.size(); ++i) {
    views.tiles[i] = canonical(rects[i]);
  }
  return views;
}

nn::Matrix backbone_token_features(const AggregatorViews &views, Backbone &backbone, TokenSource source) {
  const int dim = source == TokenSource::EMBEDDING ? backbone.embedding_dim() : kNumClasses;
  nn::Matrix features(kNumTokens, dim);
  for (int t = 0; t < kNumTokens; ++t) {
    const nn::Vector row = source_row(backbone.infer(views.view(t)), source);
    if (row.size() != dim) {
      fail(ErrorCode::DimensionMismatch, backbone.name() + ": token source has size " +
                                             std::to_string(row.size()) + ", expected " +
                                             std::to_string(dim));
    }
    features.row(t) = row.transpose();
  }
  return features;
}

AggregatorModel::AggregatorModel(AggregatorConfig config, int source_dim, std::uint64_t seed)
    : config_(std::move(config)), source_dim_(source_dim) {
  config_.validate(false);
  if (source_dim_ < 1) {
    fail(ErrorCode::DimensionMismatch, "aggregator source dimension must be positive");
  }
  Rng rng(seed);
  const int d = config_.d_model;
  expansion_ = nn::Linear(source_dim_, d, rng, "agg.expansion");
  if (config_.positional_encoding) {
    nn::Matrix pos(kNumTokens, d);
    for (Eigen::Index i = 0; i < pos.size(); ++i) {
      pos.data()[i] = 0.02 * rng.normal();
    }
    positions_ = nn::Parameter("agg.positions", std::move(pos));
  }
  for (int l = 0; l < config_.num_encoder_layers; ++l) {
    encoders_.emplace_back(d, config_.num_heads, config_.ff_dim, config_.dropout, rng,
                           "agg.encoder" + std::to_string(l));
  }
  if (config_.num_encoder_layers > 0) {
    final_norm_ = nn::LayerNorm(d, "agg.final_norm");
  }
  if (config_.head == HeadKind::MLP) {
    int in = d;
    for (std::size_t i = 0; i < config_.head_hidden_dims.size(); ++i) {
      head_.emplace_back(in, config_.head_hidden_dims[i], rng, "agg.head" + std::to_string(i));
      head_dropouts_.emplace_back(config_.dropout);
      in = config_.head_hidden_dims[i];
    }
    head_.emplace_back(in, kNumClasses, rng, "agg.head" + std::to_string(config_.head_hidden_dims.size()));
    head_relu_masks_.resize(config_.head_hidden_dims.size());
  }
}

TokenSequence AggregatorModel::tokenize_features(const nn::Matrix &features, std::string source_id) {
  if (features.rows() != kNumTokens || features.cols() != source_dim_) {
    fail(ErrorCode::DimensionMismatch, "token features must be 13 x " + std::to_string(source_dim_) +
                                           ", got " + std::to_string(features.rows()) + " x " +
                                           std::to_string(features.cols()));
  }
  TokenSequence seq;
  seq.source_id = std::move(source_id);
  seq.tokens = expansion_.forward(features);
  if (config_.positional_encoding) {
    seq.tokens += positions_.value;
  }
  return seq;
}

nn::Vector AggregatorModel::forward(const TokenSequence &tokens, const nn::ForwardContext &ctx) {
  if (tokens.tokens.rows() != kNumTokens || tokens.d_model() != config_.d_model) {
    fail(ErrorCode::DimensionMismatch, "token sequence must be 13 x d_model");
  }
  nn::Matrix x = tokens.tokens;
  for (auto &encoder : encoders_) {
    x = encoder.forward(x, ctx);
  }
  if (!encoders_.empty()) {
    x = final_norm_.forward(x);
  }
  nn::Matrix h = x.row(0);
  if (config_.head == HeadKind::MLP) {
    for (std::size_t i = 0; i + 1 < head_.size(); ++i) {
      h = head_[i].forward(h);
      head_relu_masks_[i] = (h.array() > 0.0).cast<double>().matrix();
      h = h.cwiseProduct(head_relu_masks_[i]);
      h = head_dropouts_[i].forward(h, ctx);
    }
    h = head_.back().forward(h);
  }
  return h.row(0).transpose();
}

nn::Matrix AggregatorModel::backward(const nn::Vector &grad_logits) {
  nn::Matrix g = grad_logits.transpose();
  if (config_.head == HeadKind::MLP) {
    g = head_.back().backward(g);
    for (std::size_t i = head_.size() - 1; i-- > 0;) {
      g = head_dropouts_[i].backward(g);
      g = g.cwiseProduct(head_relu_masks_[i]);
      g = head_[i].backward(g);
    }
  }
  nn::Matrix grad = nn::Matrix::Zero(kNumTokens, config_.d_model);
  grad.row(0) = g.row(0);
  if (!encoders_.empty()) {
    grad = final_norm_.backward(grad);
  }
  for (auto it = encoders_.rbegin(); it != encoders_.rend(); ++it) {
    grad = it->backward(grad);
  }
  return grad;
}

nn::Matrix AggregatorModel::backward_tokenize(const nn::Matrix &grad_tokens) {
  if (config_.positional_encoding) {
    positions_.grad += grad_tokens;
  }
  return expansion_.backward(grad_tokens);
}

void AggregatorModel::set_identity_expansion() {
  if (source_dim_ != config_.d_model) {
    fail(ErrorCode::DimensionMismatch, "identity expansion needs source_dim == d_model");
  }
  expansion_.weight().value.setIdentity();
  expansion_.bias().value.setZero();
}

std::vector<nn::Parameter *> AggregatorModel::parameters() {
  std::vector<nn::Parameter *> params = expansion_.parameters();
  if (config_.positional_encoding) {
    params.push_back(&positions_);
  }
  for (auto &encoder : encoders_) {
    for (auto *p : encoder.parameters()) {
      params.push_back(p);
    }
  }
  if (!encoders_.empty()) {
    for (auto *p : final_norm_.parameters()) {
      params.push_back(p);
    }
  }
  for (auto &layer : head_) {
    for (auto *p : layer.parameters()) {
      params.push_back(p);
    }
  }
  return params;
}

TokenSequence tokenize(const AggregatorViews &views, Backbone &backbone, AggregatorModel &model,
                       std::string source_id) {
  return model.tokenize_features(backbone_token_features(views, backbone, model.config().token_source),
                                 std::move(source_id));
}

PredictionVector aggregate_predict(const TokenSequence &tokens, AggregatorModel &model) {
  if (!model.ready()) {
    fail(ErrorCode::UnloadedParameters, "aggregator parameters are neither trained nor loaded");
  }
  const nn::Vector logits = model.forward(tokens, nn::ForwardContext{});
  return PredictionVector(softmax3(std::span<const double>(logits.data(), kNumClasses)));
}

PredictionVector PremiumModel::predict(const AggregatorViews &views) {
  return aggregate_predict(tokenize(views, *backbone, *aggregator), *aggregator);
}

std::vector<PredictionVector> predict_all(PremiumModel &model, const ViewSet &set) {
  std::vector<PredictionVector> out;
  out.reserve(set.size());
  for (const auto &views : set.views) {
    out.push_back(model.predict(views));
  }
  return out;
}

ViewSet build_view_set(std::span<const ImageRecord> records) {
  ViewSet set;
  for (const auto &record : records) {
    if (!record.label) {
      fail(ErrorCode::UnlabeledRecord, "record '" + record.id + "' has no label");
    }
    const AggregatorViews raw = decompose(load_canonical(record));
    AggregatorViews views;
    views.full = model_input_resize(raw.full).image;
    for (std::size_t i = 0; i < raw.tiles.size(); ++i) {
      views.tiles[i] = model_input_resize(raw.tiles[i]).image;
    }
    set.ids.push_back(record.id);
    set.labels.push_back(*record.label);
    set.views.push_back(std::move(views));
  }
  return set;
}

PremiumTrainResult train_premium(const std::filesystem::path &base_checkpoint,
                                 const AggregatorConfig &config, const TrainConfig &train_config,
                                 const ViewSet &train_set, const ViewSet &val_set,
                                 const ClassWeights &weights, const TrainOptions &options) {
  if (base_checkpoint.empty() || !std::filesystem::exists(base_checkpoint / "config.json") ||
      !std::filesystem::exists(base_checkpoint / "weights.bin")) {
    fail(ErrorCode::MissingBaseCheckpoint,
         "no Basic checkpoint at '" + base_checkpoint.string() + "'");
  }
  config.validate(true);
  train_config.validate();
  if (train_set.empty()) {
    fail(ErrorCode::EmptySplit, "TRAIN split is empty");
  }
  if (val_set.empty()) {
    fail(ErrorCode::EmptySplit, "VAL split is empty");
  }
  const auto started = std::chrono::steady_clock::now();

  PremiumModel model;
  model.backbone = load_backbone_checkpoint(base_checkpoint);
  Backbone &backbone = *model.backbone;
  const int source_dim =
      config.token_source == TokenSource::EMBEDDING ? backbone.embedding_dim() : kNumClasses;
  model.aggregator = std::make_unique<AggregatorModel>(config, source_dim,
                                                       derive_seed(train_config.seed, "aggregator"));
  AggregatorModel &aggregator = *model.aggregator;
  const bool fine_tune = config.fine_tune_backbone;

  auto params = aggregator.parameters();
  if (fine_tune) {
    for (auto *p : backbone.parameters()) {
      params.push_back(p);
    }
  }
  nn::AdamConfig adam_config;
  adam_config.learning_rate = train_config.learning_rate;
  adam_config.weight_decay = train_config.weight_decay;
  nn::Adam optimizer(params, adam_config);
  Rng dropout_rng(derive_seed(train_config.seed, "aggregator-dropout"));

  std::vector<nn::Matrix> train_features;
  if (!fine_tune) {
    for (const auto &views : train_set.views) {
      train_features.push_back(backbone_token_features(views, backbone, config.token_source));
    }
  }
  std::vector<nn::Matrix> val_features;
  auto refresh_val_features = [&] {
    val_features.clear();
    for (const auto &views : val_set.views) {
      val_features.push_back(backbone_token_features(views, backbone, config.token_source));
    }
  };
  refresh_val_features();

  AggregatorModel best_aggregator = aggregator;
  std::unique_ptr<Backbone> best_backbone = fine_tune ? backbone.clone() : nullptr;
  const std::uint64_t order_seed = derive_seed(train_config.seed, "premium-order");

  auto run_epoch = [&](int epoch) {
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng order_rng(derive_seed(order_seed, static_cast<std::uint64_t>(epoch)));
    order_rng.shuffle(std::span<std::size_t>(order));
    const nn::ForwardContext ctx{true, &dropout_rng};
    const std::size_t batch_size = static_cast<std::size_t>(train_config.batch_size);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      const double n = static_cast<double>(end - start);
      optimizer.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        const ClassLabel label = train_set.labels[idx];
        const nn::Matrix features =
            fine_tune ? backbone_token_features(train_set.views[idx], backbone, config.token_source)
                      : train_features[idx];
        const auto tokens = aggregator.tokenize_features(features, train_set.ids[idx]);
        const nn::Vector logits = aggregator.forward(tokens, ctx);
        const auto probs = softmax3(std::span<const double>(logits.data(), kNumClasses));
        const double term = weighted_nll(probs, label, weights);
        if (!std::isfinite(term)) {
          fail(ErrorCode::DivergedLoss, "non-finite aggregator loss at epoch " + std::to_string(epoch) +
                                            " on '" + train_set.ids[idx] + "'");
        }
        loss_sum += term;
        const nn::Matrix grad_tokens =
            aggregator.backward(weighted_ce_logit_gradient(probs, label, weights, n));
        const nn::Matrix grad_features = aggregator.backward_tokenize(grad_tokens);
        if (fine_tune) {
          // Backbone layers cache one forward at a time, so each view is
          // re-run just before its backward pass.
          for (int t = 0; t < kNumTokens; ++t) {
            const auto input = to_model_input(model_input_resize(train_set.views[idx].view(t)).image);
            backbone.forward(input, nn::ForwardContext{});
            const nn::Vector g = grad_features.row(t).transpose();
            if (config.token_source == TokenSource::EMBEDDING) {
              backbone.backward(nn::Vector::Zero(kNumClasses), &g);
            } else {
              backbone.backward(g, nullptr);
            }
          }
        }
      }
      optimizer.step();
    }
    if (fine_tune) {
      refresh_val_features();
    }
    std::vector<PredictionVector> probs;
    std::vector<ClassLabel> decisions;
    for (std::size_t i = 0; i < val_set.size(); ++i) {
      const auto tokens = aggregator.tokenize_features(val_features[i], val_set.ids[i]);
      const nn::Vector logits = aggregator.forward(tokens, nn::ForwardContext{});
      if (!logits.allFinite()) {
        fail(ErrorCode::DivergedLoss, "non-finite aggregator validation logits at epoch " + std::to_string(epoch));
      }
      probs.emplace_back(softmax3(std::span<const double>(logits.data(), kNumClasses)));
      decisions.push_back(probs.back().decision());
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    record.val_loss = weighted_cross_entropy(probs, val_set.labels, weights);
    if (!std::isfinite(record.val_loss)) {
      fail(ErrorCode::DivergedLoss, "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    const auto matrix = confusion_from_predictions(val_set.labels, decisions);
    record.val_macro_f1 = f1_scores(matrix).macro;
    record.val_accuracy = static_cast<double>(matrix.trace()) / static_cast<double>(matrix.total());
    record.samples_seen = order.size();
    if (options.on_epoch) {
      options.on_epoch(record);
    }
    return record;
  };

  const auto outcome =
      run_training_loop(train_config.max_epochs, train_config.patience, run_epoch, [&](const EpochRecord &) {
        nn::copy_parameters(aggregator.parameters(), best_aggregator.parameters());
        if (fine_tune) {
          nn::copy_parameters(backbone.parameters(), best_backbone->parameters());
        }
      });

  PremiumTrainResult result;
  result.report.backbone = "premium:" + backbone.name();
  result.report.epochs = outcome.epochs;
  result.report.best_epoch = outcome.best_epoch;
  result.report.best_val_macro_f1 = outcome.best_val_macro_f1;
  result.report.stop_reason = outcome.stop_reason;
  result.report.samples_per_epoch = train_set.size();
  nn::copy_parameters(best_aggregator.parameters(), aggregator.parameters());
  if (fine_tune) {
    nn::copy_parameters(best_backbone->parameters(), backbone.parameters());
  }
  aggregator.mark_ready();
  result.model = std::move(model);
  result.report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!options.checkpoint_dir.empty()) {
    result.report.checkpoint = options.checkpoint_dir.string();
    save_premium_checkpoint(options.checkpoint_dir, result.model, train_config, result.report);
  }
  return result;
}

bool is_premium_checkpoint(const std::filesystem::path &dir) {
  return std::filesystem::exists(dir / kAggregatorConfigFile);
}

void save_premium_checkpoint(const std::filesystem::path &dir, PremiumModel &model,
                             const TrainConfig &train_config, const TrainingReport &report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    fail(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  }
  nlohmann::json cfg = {{"kind", "premium"},
                        {"train", train_config.to_json()},
                        {"backbone_name", model.backbone->name()},
                        {"architecture", model.backbone->architecture()}};
  write_text(dir / "config.json", cfg.dump(2) + "\n");
  const nlohmann::json agg = {{"config", model.aggregator->config().to_json()},
                              {"source_dim", model.aggregator->source_dim()}};
  write_text(dir / kAggregatorConfigFile, agg.dump(2) + "\n");
  write_parameters(dir / "weights.bin", model.aggregator->parameters());
  write_parameters(dir / kBackboneWeightsFile, model.backbone->parameters());
  write_text(dir / "report.json", report.to_json().dump(2) + "\n");
  write_text(dir / "epochs.csv", epochs_to_csv(report.epochs));
}

PremiumModel load_premium_checkpoint(const std::filesystem::path &dir) {
  if (!std::filesystem::exists(dir / "config.json")) {
    fail(ErrorCode::MissingFile, "no checkpoint at " + dir.string());
  }
  if (!is_premium_checkpoint(dir)) {
    fail(ErrorCode::CheckpointMismatch, dir.string() + " holds a basic checkpoint, not a premium one");
  }
  const auto cfg = read_json(dir / "config.json");
  const auto agg = read_json(dir / kAggregatorConfigFile);
  PremiumModel model;
  try {
    model.backbone = make_backbone(cfg.at("backbone_name").get<std::string>(), cfg.at("architecture"), 0);
    const auto config = AggregatorConfig::from_json(agg.at("config"));
    model.aggregator = std::make_unique<AggregatorModel>(config, agg.at("source_dim").get<int>(), 0);
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorCode::CheckpointMismatch, dir.string() + ": " + e.what());
  }
  read_parameters(dir / kBackboneWeightsFile, model.backbone->parameters());
  read_parameters(dir / "weights.bin", model.aggregator->parameters());
  model.backbone->mark_trained();
  model.aggregator->mark_ready();
  return model;
}

} // namespace thyrofna
