#pragma once

#include "thyrofna/aggregator.hpp"
#include "thyrofna/core_types.hpp"
#include "thyrofna/explainability.hpp"
#include "thyrofna/region_proposal.hpp"
#include "thyrofna/trainer.hpp"

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace thyrofna::cli {

struct DataConfig {
  std::filesystem::path manifest; // resolved against the config file's directory
  SplitSpec split;
};

struct AugmentationConfig {
  bool enabled = true;
  std::uint64_t seed = 42;
};

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::Curriculum;
};

// One JSON document with sections {data, proposer, augmentation, schedule,
// train, aggregator, explain}. `aggregator.training` overrides `train` for
// the Premium stage.
struct PipelineConfig {
  std::string run_id;
  DataConfig data;
  ProposerConfig proposer;
  AugmentationConfig augmentation;
  ScheduleConfig schedule;
  TrainConfig train;
  AggregatorConfig aggregator;
  TrainConfig aggregator_train;
  ExplainConfig explain;
  nlohmann::json snapshot; // the document as loaded, for run manifests
};

PipelineConfig parse_pipeline_config(const nlohmann::json &document, const std::filesystem::path &base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path &path);

ProposerConfig parse_proposer_config(const nlohmann::json &section, const std::filesystem::path &base_dir);

} // namespace thyrofna::cli
