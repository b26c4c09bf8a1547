#pragma once

#include "thyrofna/backbone.hpp"
#include "thyrofna/dataset.hpp"
#include "thyrofna/evaluation.hpp"
#include "thyrofna/loss.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace thyrofna {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 120;
  double weight_decay = 1e-3;
  double dropout_rate = 0.2;
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 42;
  std::string backbone_name = "reference_cnn";
  nlohmann::json backbone_options = nlohmann::json::object();

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json &j, const std::string &path = "train");
};

struct EpochRecord {
  int epoch = 0; // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_macro_f1 = 0.0;
  double val_accuracy = 0.0;
  std::size_t samples_seen = 0;
};

enum class StopReason { MaxEpochs, EarlyStopping };
std::string_view stop_reason_name(StopReason reason);

struct TrainingReport {
  std::string backbone;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_macro_f1 = 0.0;
  StopReason stop_reason = StopReason::MaxEpochs;
  std::string checkpoint;
  double wall_time_seconds = 0.0;
  std::size_t samples_per_epoch = 0;

  nlohmann::json to_json() const;
};

// Patience counter on validation loss: improvement means strictly below the
// best loss seen so far.
class EarlyStopper {
public:
  explicit EarlyStopper(int patience) : patience_(patience) {}
  // Returns true once `patience` consecutive epochs fail to improve.
  bool observe(double val_loss);
  int epochs_without_improvement() const { return stale_; }
  double best_loss() const { return best_; }

private:
  int patience_;
  int stale_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct LoopOutcome {
  int epochs_run = 0;
  StopReason stop_reason = StopReason::MaxEpochs;
  int best_epoch = 0;
  double best_val_macro_f1 = -1.0;
  std::vector<EpochRecord> epochs;
};

// Generic epoch driver shared by every trainer: runs `run_epoch(epoch)` until
// max_epochs or early stopping on val loss, and calls `on_new_best` whenever
// validation macro-F1 strictly improves, or ties with a strictly lower val loss.
LoopOutcome run_training_loop(int max_epochs, int patience,
                              const std::function<EpochRecord(int epoch)> &run_epoch,
                              const std::function<void(const EpochRecord &)> &on_new_best = {});

enum class ScheduleKind { Curriculum, Shuffled };

struct TrainOptions {
  ScheduleKind schedule = ScheduleKind::Curriculum;
  std::filesystem::path checkpoint_dir; // empty: keep the model in memory only
  std::function<void(const EpochRecord &)> on_epoch;
};

struct TrainResult {
  TrainingReport report;
  std::unique_ptr<Backbone> model; // parameters of the best macro-F1 epoch
};

std::vector<PredictionVector> predict_all(Backbone &model, const EvalSet &set);

// Adam + weighted cross-entropy over scheduled samples; validation on the
// unaugmented VAL images after every epoch.
TrainResult train(const TrainConfig &config, const SampleSet &train_set, const EvalSet &val_set,
                  const ClassWeights &weights, const TrainOptions &options = {});

// Checkpoint layout: config.json, weights.bin, report.json, epochs.csv.
void save_checkpoint(const std::filesystem::path &dir, Backbone &model, const TrainConfig &config,
                     const TrainingReport &report);
std::unique_ptr<Backbone> load_backbone_checkpoint(const std::filesystem::path &dir);
std::string epochs_to_csv(const std::vector<EpochRecord> &epochs);
void save_backbone_weights(const std::filesystem::path &path, Backbone &model);

struct ComparisonRow {
  std::string backbone;
  double f1_no_aug = std::numeric_limits<double>::quiet_NaN();
  double f1_aug = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  std::size_t samples_per_epoch_no_aug = 0;
  std::size_t samples_per_epoch_aug = 0;
};

struct ComparisonData {
  const SampleSet *augmented = nullptr; // full 34-sample expansion, curriculum order
  const SampleSet *plain = nullptr;     // Set A only, shuffled order
  const EvalSet *val = nullptr;
  const EvalSet *test = nullptr;
  ClassWeights weights;
};

// Trains each config with and (optionally) without augmentation and reports
// test macro-F1 plus the aug - no_aug delta.
std::vector<ComparisonRow> run_model_comparison(const std::vector<TrainConfig> &configs,
                                                bool with_and_without_augmentation,
                                                const ComparisonData &data);

std::string format_comparison_table(const std::vector<ComparisonRow> &rows);

} // namespace thyrofna
