#include "thyrofna/trainer.hpp"

#include "thyrofna/config_reader.hpp"
#include "thyrofna/curriculum.hpp"
#include "thyrofna/error.hpp"
#include "thyrofna/nn/adam.hpp"
#include "thyrofna/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace thyrofna {

namespace {

constexpr const char *kWeightsFile = "weights.bin";
constexpr const char *kConfigFile = "config.json";
constexpr const char *kReportFile = "report.json";
constexpr const char *kEpochsFile = "epochs.csv";

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write " + path.string());
  }
  out << text;
  if (!out) {
    fail(ErrorCode::IoFailure, "failed writing " + path.string());
  }
}

nlohmann::json read_json(const std::filesystem::path &path, ErrorCode missing) {
  std::ifstream in(path);
  if (!in) {
    fail(missing, "cannot read " + path.string());
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorCode::CheckpointMismatch, path.string() + ": " + e.what());
  }
}

struct ValidationResult {
  double loss = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
};

ValidationResult validate_model(Backbone &model, const EvalSet &set, const ClassWeights &weights, int epoch) {
  std::vector<PredictionVector> probs;
  probs.reserve(set.size());
  for (const auto &input : set.inputs) {
    const auto out = model.forward(to_model_input(input), nn::ForwardContext{});
    if (!out.logits.allFinite()) {
      fail(ErrorCode::DivergedLoss, "non-finite validation logits at epoch " + std::to_string(epoch));
    }
    probs.push_back(PredictionVector::from_logits(std::span<const double>(out.logits.data(), 3)));
  }
  ValidationResult r;
  r.loss = weighted_cross_entropy(probs, set.labels, weights);
  std::vector<ClassLabel> decisions;
  decisions.reserve(probs.size());
  for (const auto &p : probs) {
    decisions.push_back(p.decision());
  }
  const auto matrix = confusion_from_predictions(set.labels, decisions);
  r.macro_f1 = f1_scores(matrix).macro;
  r.accuracy = static_cast<double>(matrix.trace()) / static_cast<double>(matrix.total());
  return r;
}

} // namespace

std::string epochs_to_csv(const std::vector<EpochRecord> &epochs) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,val_macro_f1,val_accuracy,samples_seen\n";
  out << std::setprecision(10);
  for (const auto &e : epochs) {
    out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_macro_f1 << ','
        << e.val_accuracy << ',' << e.samples_seen << '\n';
  }
  return out.str();
}

void TrainConfig::validate() const {
  auto bad = [](const std::string &key, const std::string &why) {
    fail(ErrorCode::ConfigError, "train." + key + ": " + why);
  };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    bad("learning_rate", "must be positive");
  }
  if (batch_size < 1) {
    bad("batch_size", "must be >= 1");
  }
  if (weight_decay < 0.0 || !std::isfinite(weight_decay)) {
    bad("weight_decay", "must be >= 0");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    bad("dropout_rate", "must be in [0, 1)");
  }
  if (max_epochs < 1) {
    bad("max_epochs", "must be >= 1");
  }
  if (patience < 1) {
    bad("patience", "must be >= 1");
  }
  if (backbone_name.empty()) {
    bad("backbone_name", "must not be empty");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"batch_size", batch_size},
          {"weight_decay", weight_decay},   {"dropout_rate", dropout_rate},
          {"max_epochs", max_epochs},       {"patience", patience},
          {"seed", seed},                   {"backbone_name", backbone_name},
          {"backbone_options", backbone_options}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json &j, const std::string &path) {
  ConfigReader r(j, path);
  TrainConfig c;
  c.learning_rate = r.number("learning_rate", c.learning_rate);
  c.batch_size = static_cast<int>(r.integer("batch_size", c.batch_size));
  c.weight_decay = r.number("weight_decay", c.weight_decay);
  c.dropout_rate = r.number("dropout_rate", c.dropout_rate);
  c.max_epochs = static_cast<int>(r.integer("max_epochs", c.max_epochs));
  c.patience = static_cast<int>(r.integer("patience", c.patience));
  c.seed = r.unsigned_integer("seed", c.seed);
  c.backbone_name = r.string("backbone_name", c.backbone_name);
  c.backbone_options = r.raw("backbone_options", c.backbone_options);
  if (!c.backbone_options.is_object()) {
    r.reject("backbone_options", "expected an object");
  }
  r.finish();
  c.validate();
  return c;
}

std::string_view stop_reason_name(StopReason reason) {
  return reason == StopReason::EarlyStopping ? "early_stopping" : "max_epochs";
}

nlohmann::json TrainingReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &e : epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"val_loss", e.val_loss},
                    {"val_macro_f1", e.val_macro_f1},
                    {"val_accuracy", e.val_accuracy},
                    {"samples_seen", e.samples_seen}});
  }
  return {{"backbone", backbone},
          {"epochs", rows},
          {"best_epoch", best_epoch},
          {"best_val_macro_f1", best_val_macro_f1},
          {"stop_reason", stop_reason_name(stop_reason)},
          {"checkpoint", checkpoint},
          {"wall_time_seconds", wall_time_seconds},
          {"samples_per_epoch", samples_per_epoch}};
}

bool EarlyStopper::observe(double val_loss) {
  if (val_loss < best_) {
    best_ = val_loss;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return stale_ >= patience_;
}

LoopOutcome run_training_loop(int max_epochs, int patience,
                              const std::function<EpochRecord(int epoch)> &run_epoch,
                              const std::function<void(const EpochRecord &)> &on_new_best) {
  LoopOutcome outcome;
  EarlyStopper stopper(patience);
  double best_loss = std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    EpochRecord record = run_epoch(epoch);
    record.epoch = epoch;
    outcome.epochs.push_back(record);
    outcome.epochs_run = epoch;
    // Max macro-F1; among equal macro-F1, the lower validation loss.
    const bool better = record.val_macro_f1 > outcome.best_val_macro_f1 ||
                        (record.val_macro_f1 == outcome.best_val_macro_f1 && record.val_loss < best_loss);
    if (better) {
      outcome.best_val_macro_f1 = record.val_macro_f1;
      best_loss = record.val_loss;
      outcome.best_epoch = epoch;
      if (on_new_best) {
        on_new_best(record);
      }
    }
    if (stopper.observe(record.val_loss)) {
      outcome.stop_reason = StopReason::EarlyStopping;
      break;
    }
  }
  return outcome;
}

std::vector<PredictionVector> predict_all(Backbone &model, const EvalSet &set) {
  std::vector<PredictionVector> out;
  out.reserve(set.size());
  for (const auto &input : set.inputs) {
    const auto result = model.forward(to_model_input(input), nn::ForwardContext{});
    out.push_back(PredictionVector::from_logits(std::span<const double>(result.logits.data(), 3)));
  }
  return out;
}

TrainResult train(const TrainConfig &config, const SampleSet &train_set, const EvalSet &val_set,
                  const ClassWeights &weights, const TrainOptions &options) {
  config.validate();
  if (train_set.empty()) {
    fail(ErrorCode::EmptySplit, "TRAIN split is empty");
  }
  if (val_set.empty()) {
    fail(ErrorCode::EmptySplit, "VAL split is empty");
  }
  const auto started = std::chrono::steady_clock::now();

  auto model = make_backbone(config.backbone_name, config.backbone_options, config.seed);
  model->set_dropout(config.dropout_rate);
  nn::AdamConfig adam_config;
  adam_config.learning_rate = config.learning_rate;
  adam_config.weight_decay = config.weight_decay;
  nn::Adam optimizer(model->parameters(), adam_config);
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  std::unique_ptr<Backbone> best = model->clone();

  auto run_epoch = [&](int epoch) {
    const auto schedule = options.schedule == ScheduleKind::Curriculum
                              ? build_epoch(train_set.samples(), epoch - 1, config.seed)
                              : build_shuffled_epoch(train_set.samples(), epoch - 1, config.seed);
    const BatchIterator batches(schedule, static_cast<std::size_t>(config.batch_size));
    const nn::ForwardContext ctx{true, &dropout_rng};
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.num_batches(); ++b) {
      const auto batch = batches.batch(b);
      const double n = static_cast<double>(batch.size());
      optimizer.zero_grad();
      double batch_loss = 0.0;
      for (const std::size_t idx : batch) {
        const ClassLabel label = train_set.sample(idx).label;
        const auto out = model->forward(to_model_input(train_set.input(idx)), ctx);
        const auto probs = softmax3(std::span<const double>(out.logits.data(), 3));
        const double term = weighted_nll(probs, label, weights);
        if (!std::isfinite(term)) {
          fail(ErrorCode::DivergedLoss, "non-finite loss at epoch " + std::to_string(epoch) +
                                            ", batch " + std::to_string(b) + ", sample '" +
                                            train_set.sample(idx).source_id + "'");
        }
        batch_loss += term;
        model->backward(weighted_ce_logit_gradient(probs, label, weights, n));
      }
      optimizer.step();
      loss_sum += batch_loss;
    }
    const auto val = validate_model(*model, val_set, weights, epoch);
    if (!std::isfinite(val.loss)) {
      fail(ErrorCode::DivergedLoss, "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(schedule.size());
    record.val_loss = val.loss;
    record.val_macro_f1 = val.macro_f1;
    record.val_accuracy = val.accuracy;
    record.samples_seen = schedule.size();
    if (options.on_epoch) {
      options.on_epoch(record);
    }
    return record;
  };

  const auto outcome = run_training_loop(config.max_epochs, config.patience, run_epoch,
                                         [&](const EpochRecord &) {
                                           nn::copy_parameters(model->parameters(), best->parameters());
                                         });

  TrainResult result;
  result.report.backbone = config.backbone_name;
  result.report.epochs = outcome.epochs;
  result.report.best_epoch = outcome.best_epoch;
  result.report.best_val_macro_f1 = outcome.best_val_macro_f1;
  result.report.stop_reason = outcome.stop_reason;
  result.report.samples_per_epoch = train_set.size();
  best->mark_trained();
  result.model = std::move(best);
  result.report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!options.checkpoint_dir.empty()) {
    result.report.checkpoint = options.checkpoint_dir.string();
    save_checkpoint(options.checkpoint_dir, *result.model, config, result.report);
  }
  return result;
}

void save_backbone_weights(const std::filesystem::path &path, Backbone &model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write " + path.string());
  }
  nn::save_parameters(out, model.parameters());
}

void save_checkpoint(const std::filesystem::path &dir, Backbone &model, const TrainConfig &config,
                     const TrainingReport &report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    fail(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  }
  nlohmann::json cfg = config.to_json();
  cfg["kind"] = "basic";
  cfg["architecture"] = model.architecture();
  cfg["optimizer"] = {{"name", "adam"}, {"beta1", 0.9}, {"beta2", 0.999}, {"epsilon", 1e-8}};
  write_text(dir / kConfigFile, cfg.dump(2) + "\n");
  save_backbone_weights(dir / kWeightsFile, model);
  write_text(dir / kReportFile, report.to_json().dump(2) + "\n");
  write_text(dir / kEpochsFile, epochs_to_csv(report.epochs));
}

std::unique_ptr<Backbone> load_backbone_checkpoint(const std::filesystem::path &dir) {
  const auto cfg = read_json(dir / kConfigFile, ErrorCode::MissingFile);
  if (cfg.value("kind", std::string("basic")) != "basic") {
    fail(ErrorCode::CheckpointMismatch,
         dir.string() + " holds a " + cfg.value("kind", std::string()) + " checkpoint, not a basic one");
  }
  if (!cfg.contains("backbone_name") || !cfg.contains("architecture")) {
    fail(ErrorCode::CheckpointMismatch, dir.string() + " is not a backbone checkpoint");
  }
  auto model = make_backbone(cfg.at("backbone_name").get<std::string>(), cfg.at("architecture"),
                             cfg.value("seed", std::uint64_t{42}));
  std::ifstream in(dir / kWeightsFile, std::ios::binary);
  if (!in) {
    fail(ErrorCode::MissingFile, "cannot read " + (dir / kWeightsFile).string());
  }
  nn::load_parameters(in, model->parameters());
  model->mark_trained();
  return model;
}

std::vector<ComparisonRow> run_model_comparison(const std::vector<TrainConfig> &configs,
                                                bool with_and_without_augmentation,
                                                const ComparisonData &data) {
  if (configs.empty()) {
    fail(ErrorCode::InvalidArgument, "model comparison needs at least one config");
  }
  if (data.augmented == nullptr || data.val == nullptr || data.test == nullptr ||
      (with_and_without_augmentation && data.plain == nullptr)) {
    fail(ErrorCode::InvalidArgument, "model comparison is missing a data set");
  }
  auto test_f1 = [&](Backbone &model) {
    const auto probs = predict_all(model, *data.test);
    std::vector<ClassLabel> decisions;
    for (const auto &p : probs) {
      decisions.push_back(p.decision());
    }
    return f1_scores(confusion_from_predictions(data.test->labels, decisions)).macro;
  };
  std::vector<ComparisonRow> rows;
  for (const auto &config : configs) {
    ComparisonRow row;
    row.backbone = config.backbone_name;
    if (with_and_without_augmentation) {
      TrainOptions plain_options;
      plain_options.schedule = ScheduleKind::Shuffled;
      auto plain = train(config, *data.plain, *data.val, data.weights, plain_options);
      row.f1_no_aug = test_f1(*plain.model);
      row.samples_per_epoch_no_aug = data.plain->size();
    }
    auto aug = train(config, *data.augmented, *data.val, data.weights, TrainOptions{});
    row.f1_aug = test_f1(*aug.model);
    row.samples_per_epoch_aug = data.augmented->size();
    row.delta = row.f1_aug - row.f1_no_aug;
    rows.push_back(row);
  }
  return rows;
}

std::string format_comparison_table(const std::vector<ComparisonRow> &rows) {
  std::ostringstream out;
  out << std::left << std::setw(24) << "model" << std::right << std::setw(10) << "no_aug"
      << std::setw(10) << "aug" << std::setw(10) << "delta" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto &row : rows) {
    out << std::left << std::setw(24) << row.backbone << std::right << std::setw(10) << row.f1_no_aug
        << std::setw(10) << row.f1_aug << std::setw(10) << row.delta << '\n';
  }
  return out.str();
}

} // namespace thyrofna
