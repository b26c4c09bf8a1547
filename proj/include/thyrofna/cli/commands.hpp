#pragma once

#include "thyrofna/aggregator.hpp"
#include "thyrofna/cli/verify_tables.hpp"
#include "thyrofna/evaluation.hpp"
#include "thyrofna/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace thyrofna::cli {

enum class CorpusKind { CLUSTERS, BLOBS };

struct SynthOptions {
  int n_per_class = 30;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;
  CorpusKind kind = CorpusKind::CLUSTERS;
};

struct SynthResult {
  std::filesystem::path manifest;
  std::size_t images = 0;
};

SynthResult cmd_synth_corpus(const SynthOptions &options);

struct SplitOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_manifest;
  SplitSpec spec;
};

std::vector<ImageRecord> cmd_split(const SplitOptions &options);

struct AugmentPreviewOptions {
  std::filesystem::path manifest; // split manifest; TRAIN records are expanded
  std::filesystem::path out_dir;
  std::filesystem::path config;   // optional: proposer and augmentation sections
  std::uint64_t seed = 42;
  int limit = 2;
};

std::size_t cmd_augment_preview(const AugmentPreviewOptions &options);

enum class Mode { BASIC, PREMIUM };
std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view text);

struct TrainCommandOptions {
  std::filesystem::path config;
  Mode mode = Mode::BASIC;
  std::optional<std::uint64_t> seed;    // overrides every seed in the config
  std::filesystem::path base_checkpoint; // premium: reuse this Basic checkpoint
  std::filesystem::path run_dir;         // default: runs_root()/<run_id>
  std::ostream *log = nullptr;
};

struct TrainOutcome {
  std::filesystem::path run_dir;
  std::filesystem::path basic_checkpoint;
  std::filesystem::path premium_checkpoint;
  std::optional<TrainingReport> basic_report;
  std::optional<EvalReport> basic_test;
  std::optional<TrainingReport> premium_report;
  std::optional<EvalReport> premium_test;
};

TrainOutcome cmd_train(const TrainCommandOptions &options);

struct InferOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  Mode mode = Mode::BASIC;
  bool explain = false;
  bool bench = false;
  int workers = 1;
  std::filesystem::path config; // optional: explain section
};

struct InferOutcome {
  std::filesystem::path predictions;
  std::vector<std::string> ids;
  std::vector<PredictionVector> probabilities;
  std::vector<std::filesystem::path> composites;
  std::optional<double> images_per_second;
  std::filesystem::path run_manifest;
};

InferOutcome cmd_infer(const InferOptions &options);

struct VerifyOutcome {
  std::vector<TableCheck> checks;
  bool all_passed = false;
};

VerifyOutcome cmd_verify_tables(std::ostream &out, const std::filesystem::path &out_dir = {});

// CSV `id,p_benign,p_indet,p_malignant,decision`, 8 decimals.
void write_predictions(const std::filesystem::path &path, const std::vector<std::string> &ids,
                       const std::vector<PredictionVector> &probabilities);

// Parses argv and dispatches; returns the process exit code (0, 1, or 2).
int run_cli(int argc, char **argv, std::ostream &out, std::ostream &err);

} // namespace thyrofna::cli
