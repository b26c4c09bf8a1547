#include "thyrofna/cli/config.hpp"

#include "thyrofna/config_reader.hpp"
#include "thyrofna/error.hpp"

#include <fstream>

namespace thyrofna::cli {

namespace {

const nlohmann::json kEmpty = nlohmann::json::object();

std::filesystem::path resolve(const std::filesystem::path &base_dir, const std::string &value) {
  const std::filesystem::path p(value);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

} // namespace

ProposerConfig parse_proposer_config(const nlohmann::json &json, const std::filesystem::path &base_dir) {
  ConfigReader r(json, "proposer");
  ProposerConfig c;
  const auto backend = r.string("backend", "density");
  if (backend == "density") {
    c.backend = ProposerBackend::DENSITY_DEFAULT;
  } else if (backend == "external_file") {
    c.backend = ProposerBackend::EXTERNAL_FILE;
  } else {
    r.reject("backend", "expected \"density\" or \"external_file\"");
  }
  c.blur_kernel = static_cast<int>(r.integer("blur_kernel", c.blur_kernel));
  c.threshold_offset = r.number("threshold_offset", c.threshold_offset);
  c.min_cluster_area = static_cast<int>(r.integer("min_cluster_area", c.min_cluster_area));
  c.margin = static_cast<int>(r.integer("margin", c.margin));
  const auto file = r.string("external_file", "");
  if (!file.empty()) {
    c.external_file = resolve(base_dir, file);
  }
  r.finish();
  try {
    c.validate();
  } catch (const Error &e) {
    fail(ErrorCode::ConfigError, std::string("proposer: ") + e.what());
  }
  return c;
}

PipelineConfig parse_pipeline_config(const nlohmann::json &document, const std::filesystem::path &base_dir) {
  if (!document.is_object()) {
    fail(ErrorCode::ConfigError, "config: expected a JSON object at the top level");
  }
  ConfigReader top(document, "");
  PipelineConfig c;
  c.snapshot = document;
  top.string("$schema", "");
  c.run_id = top.string("run_id", "");

  {
    const nlohmann::json data = top.raw("data", kEmpty);
    ConfigReader r(data, "data");
    const auto manifest = r.string("manifest", "");
    if (manifest.empty()) {
      r.reject("manifest", "required");
    }
    c.data.manifest = resolve(base_dir, manifest);
    const nlohmann::json split_json = r.raw("split", kEmpty);
    ConfigReader split(split_json, "data.split");
    c.data.split.seed = split.unsigned_integer("seed", c.data.split.seed);
    const auto ratios = split.number_list("ratios", {c.data.split.ratios.begin(), c.data.split.ratios.end()});
    if (ratios.size() != 3) {
      split.reject("ratios", "expected three numbers (train, val, test)");
    }
    c.data.split.ratios = {ratios[0], ratios[1], ratios[2]};
    split.finish();
    r.finish();
    try {
      c.data.split.validate();
    } catch (const Error &e) {
      fail(ErrorCode::ConfigError, std::string("data.split.ratios: ") + e.what());
    }
  }

  c.proposer = parse_proposer_config(top.raw("proposer", kEmpty), base_dir);

  {
    const nlohmann::json json = top.raw("augmentation", kEmpty);
    ConfigReader r(json, "augmentation");
    c.augmentation.enabled = r.boolean("enabled", c.augmentation.enabled);
    c.augmentation.seed = r.unsigned_integer("seed", c.augmentation.seed);
    r.finish();
  }
  {
    const nlohmann::json json = top.raw("schedule", kEmpty);
    ConfigReader r(json, "schedule");
    const auto kind = r.string("kind", "curriculum");
    if (kind == "curriculum") {
      c.schedule.kind = ScheduleKind::Curriculum;
    } else if (kind == "shuffled") {
      c.schedule.kind = ScheduleKind::Shuffled;
    } else {
      r.reject("kind", "expected \"curriculum\" or \"shuffled\"");
    }
    r.finish();
  }

  const nlohmann::json train = top.raw("train", kEmpty);
  c.train = TrainConfig::from_json(train, "train");

  nlohmann::json aggregator = top.raw("aggregator", kEmpty);
  nlohmann::json overrides = kEmpty;
  if (aggregator.is_object() && aggregator.contains("training")) {
    overrides = aggregator.at("training");
    aggregator.erase("training");
  }
  c.aggregator = AggregatorConfig::from_json(aggregator, "aggregator");
  c.aggregator.validate(true);
  if (!overrides.is_object()) {
    fail(ErrorCode::ConfigError, "aggregator.training: expected an object");
  }
  nlohmann::json merged = train.is_object() ? train : kEmpty;
  merged.update(overrides);
  c.aggregator_train = TrainConfig::from_json(merged, "aggregator.training");

  c.explain = ExplainConfig::from_json(top.raw("explain", kEmpty), "explain");
  top.finish();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::MissingFile, "cannot read config " + path.string());
  }
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return parse_pipeline_config(document, path.parent_path());
}

} // namespace thyrofna::cli
