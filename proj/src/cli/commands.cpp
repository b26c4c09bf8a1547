#include "thyrofna/cli/commands.hpp"

#include "thyrofna/augmentation.hpp"
#include "thyrofna/cli/config.hpp"
#include "thyrofna/cli/run_manifest.hpp"
#include "thyrofna/curriculum.hpp"
#include "thyrofna/dataset.hpp"
#include "thyrofna/error.hpp"
#include "thyrofna/explainability.hpp"
#include "thyrofna/image.hpp"
#include "thyrofna/manifest.hpp"
#include "thyrofna/split.hpp"
#include "thyrofna/synth.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

namespace thyrofna::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void ensure_directory(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    fail(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  }
}

void write_json(const std::filesystem::path &path, const nlohmann::json &j) {
  std::ofstream out(path);
  if (!out || !(out << j.dump(2) << '\n')) {
    fail(ErrorCode::IoFailure, "cannot write " + path.string());
  }
}

// report.json carries wall-clock time; digest it without that field so that
// reruns compare equal.
std::string report_digest(const TrainingReport &report) {
  nlohmann::json j = report.to_json();
  j.erase("wall_time_seconds");
  return bytes_digest(j.dump());
}

void log_line(std::ostream *log, const std::string &line) {
  if (log != nullptr) {
    *log << line << std::endl;
  }
}

std::string format_epoch(const std::string &stage, const EpochRecord &e) {
  std::ostringstream s;
  s << stage << " epoch " << e.epoch << ": train_loss=" << std::fixed << std::setprecision(4) << e.train_loss
    << " val_loss=" << e.val_loss << " val_macro_f1=" << e.val_macro_f1 << " val_acc=" << e.val_accuracy;
  return s.str();
}

std::vector<ImageRecord> ensure_split(std::vector<ImageRecord> records, const SplitSpec &spec) {
  const bool any_unsplit = std::any_of(records.begin(), records.end(),
                                       [](const ImageRecord &r) { return r.split == SplitTag::UNSPLIT; });
  return any_unsplit ? split_dataset(std::move(records), spec) : records;
}

void write_eval_outputs(const std::filesystem::path &dir, const std::vector<std::string> &ids,
                        const std::vector<ClassLabel> &labels, const std::vector<PredictionVector> &probs,
                        RunManifest &manifest) {
  write_eval_report(dir / "eval.json", evaluate(labels, probs));
  write_predictions(dir / "predictions_test.csv", ids, probs);
  std::vector<std::optional<ClassLabel>> truths(labels.begin(), labels.end());
  export_latent(dir / "latent_test.csv", ids, probs, truths, probs.size() >= 3);
  manifest.add_output(dir / "eval.json");
  manifest.add_output(dir / "predictions_test.csv");
  manifest.add_output(dir / "latent_test.csv");
}

} // namespace

std::string_view mode_name(Mode mode) { return mode == Mode::BASIC ? "basic" : "premium"; }

Mode parse_mode(std::string_view text) {
  if (text == "basic") {
    return Mode::BASIC;
  }
  if (text == "premium") {
    return Mode::PREMIUM;
  }
  fail(ErrorCode::InvalidArgument, "--mode must be basic or premium, got '" + std::string(text) + "'");
}

void write_predictions(const std::filesystem::path &path, const std::vector<std::string> &ids,
                       const std::vector<PredictionVector> &probabilities) {
  if (ids.size() != probabilities.size()) {
    fail(ErrorCode::LengthMismatch, "ids and predictions differ in length");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write " + path.string());
  }
  out << "id,p_benign,p_indet,p_malignant,decision\n" << std::fixed << std::setprecision(8);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto &p = probabilities[i];
    out << ids[i] << ',' << p.p_benign() << ',' << p.p_indet() << ',' << p.p_malignant() << ','
        << label_name(p.decision()) << '\n';
  }
  if (!out) {
    fail(ErrorCode::IoFailure, "failed writing " + path.string());
  }
}

SynthResult cmd_synth_corpus(const SynthOptions &options) {
  if (options.out_dir.empty()) {
    fail(ErrorCode::InvalidArgument, "synth-corpus needs an output directory");
  }
  const auto start = Clock::now();
  RunManifest manifest("synth-corpus");
  manifest.set_config({{"n_per_class", options.n_per_class},
                       {"seed", options.seed},
                       {"kind", options.kind == CorpusKind::BLOBS ? "blobs" : "clusters"}});
  SynthResult result;
  std::vector<ImageRecord> records;
  if (options.kind == CorpusKind::BLOBS) {
    for (auto &b : synth_blob_corpus(options.out_dir, options.n_per_class, options.seed)) {
      records.push_back(std::move(b.record));
    }
    manifest.add_output(options.out_dir / "blobs.csv");
  } else {
    records = synth_corpus(options.out_dir, options.n_per_class, options.seed);
  }
  result.manifest = options.out_dir / "manifest.csv";
  result.images = records.size();
  manifest.add_output(result.manifest);
  for (const auto &r : records) {
    manifest.add_output(r.path);
  }
  manifest.add_timing("total", seconds_since(start));
  manifest.write(options.out_dir);
  return result;
}

std::vector<ImageRecord> cmd_split(const SplitOptions &options) {
  const auto start = Clock::now();
  options.spec.validate();
  auto records = split_dataset(load_manifest(options.manifest), options.spec);
  const auto dir = options.out_manifest.parent_path().empty() ? std::filesystem::path(".")
                                                              : options.out_manifest.parent_path();
  ensure_directory(dir);
  write_manifest(options.out_manifest, records);
  RunManifest manifest("split");
  manifest.set_config({{"seed", options.spec.seed}, {"ratios", options.spec.ratios}});
  manifest.add_input(options.manifest);
  manifest.add_output(options.out_manifest);
  nlohmann::json counts = nlohmann::json::object();
  for (const SplitTag tag : {SplitTag::TRAIN, SplitTag::VAL, SplitTag::TEST, SplitTag::EXTERNAL}) {
    counts[std::string(split_name(tag))] = records_in_split(records, tag).size();
  }
  manifest.set("split_counts", counts);
  manifest.add_timing("total", seconds_since(start));
  manifest.write(dir, options.out_manifest.stem().string() + ".run_manifest.json");
  return records;
}

std::size_t cmd_augment_preview(const AugmentPreviewOptions &options) {
  const auto start = Clock::now();
  ProposerConfig proposer_config;
  std::uint64_t seed = options.seed;
  RunManifest manifest("augment-preview");
  if (!options.config.empty()) {
    const auto cfg = load_pipeline_config(options.config);
    proposer_config = cfg.proposer;
    seed = cfg.augmentation.seed;
    manifest.set_config(cfg.snapshot);
    manifest.add_input(options.config);
  }
  const auto records = load_manifest(options.manifest);
  manifest.add_input(options.manifest);
  auto train_records = records_in_split(records, SplitTag::TRAIN);
  if (train_records.empty()) {
    fail(ErrorCode::SplitViolation, "augment-preview expands TRAIN records only; run `split` first");
  }
  if (options.limit > 0 && train_records.size() > static_cast<std::size_t>(options.limit)) {
    train_records.resize(static_cast<std::size_t>(options.limit));
  }
  const auto proposer = make_proposer(proposer_config);
  ensure_directory(options.out_dir);
  ProposalMap proposals;
  std::size_t exported = 0;
  for (auto record : train_records) {
    const cv::Mat canonical = load_canonical(record);
    record.width = canonical.cols;
    record.height = canonical.rows;
    const auto props = proposer->propose(record.id, canonical);
    proposals[record.id] = props;
    const auto samples = augment_record(record, props, seed);
    export_augmented(options.out_dir, record.id, samples, prepare_rasters(canonical, props));
    manifest.add_output(options.out_dir / record.id / "geometry.json");
    exported += samples.size();
  }
  write_proposals(options.out_dir / "proposals.csv", proposals);
  manifest.add_output(options.out_dir / "proposals.csv");
  manifest.set("samples_exported", exported);
  manifest.add_timing("total", seconds_since(start));
  manifest.write(options.out_dir);
  return exported;
}

TrainOutcome cmd_train(const TrainCommandOptions &options) {
  const auto start = Clock::now();
  auto cfg = load_pipeline_config(options.config);
  nlohmann::json snapshot = cfg.snapshot;
  if (options.seed) {
    cfg.data.split.seed = *options.seed;
    cfg.augmentation.seed = *options.seed;
    cfg.train.seed = *options.seed;
    cfg.aggregator_train.seed = *options.seed;
    snapshot["seed_override"] = *options.seed;
  }
  const std::string run_id =
      cfg.run_id.empty() ? "run-" + bytes_digest(snapshot.dump()).substr(0, 8) + "-" + std::string(mode_name(options.mode))
                         : cfg.run_id;
  TrainOutcome outcome;
  outcome.run_dir = options.run_dir.empty() ? runs_root() / run_id : options.run_dir;
  ensure_directory(outcome.run_dir);

  RunManifest manifest("train --mode " + std::string(mode_name(options.mode)));
  manifest.set_config(snapshot);
  manifest.set("run_id", run_id);
  manifest.add_input(options.config);
  manifest.add_input(cfg.data.manifest);

  const auto records = ensure_split(load_manifest(cfg.data.manifest), cfg.data.split);
  write_manifest(outcome.run_dir / "splits.csv", records);
  manifest.add_output(outcome.run_dir / "splits.csv");
  const auto train_records = records_in_split(records, SplitTag::TRAIN);
  const auto val_records = records_in_split(records, SplitTag::VAL);
  const auto test_records = records_in_split(records, SplitTag::TEST);
  if (train_records.empty() || val_records.empty()) {
    fail(ErrorCode::EmptySplit, "training needs non-empty TRAIN and VAL splits");
  }
  const ClassWeights weights = compute_class_weights(train_records);
  log_line(options.log, "split: train=" + std::to_string(train_records.size()) +
                            " val=" + std::to_string(val_records.size()) +
                            " test=" + std::to_string(test_records.size()));

  const bool reuse_base = options.mode == Mode::PREMIUM && !options.base_checkpoint.empty();
  outcome.basic_checkpoint = reuse_base ? options.base_checkpoint : outcome.run_dir / "basic";

  if (!reuse_base) {
    const auto prep_start = Clock::now();
    const auto proposer = make_proposer(cfg.proposer);
    TrainingSetOptions set_options;
    set_options.augment = cfg.augmentation.enabled;
    set_options.seed = cfg.augmentation.seed;
    const SampleSet train_set = build_training_set(train_records, *proposer, set_options);
    const EvalSet val_set = build_eval_set(val_records);
    manifest.add_timing("prepare_basic", seconds_since(prep_start));
    log_line(options.log, "basic: " + std::to_string(train_set.size()) + " training samples per epoch");

    TrainOptions train_options;
    train_options.schedule = cfg.augmentation.enabled ? cfg.schedule.kind : ScheduleKind::Shuffled;
    train_options.checkpoint_dir = outcome.basic_checkpoint;
    train_options.on_epoch = [&](const EpochRecord &e) { log_line(options.log, format_epoch("basic", e)); };
    const auto first_epoch = train_options.schedule == ScheduleKind::Curriculum
                                 ? build_epoch(train_set.samples(), 0, cfg.train.seed)
                                 : build_shuffled_epoch(train_set.samples(), 0, cfg.train.seed);
    write_json(outcome.run_dir / "schedule_epoch1.json", schedule_to_json(first_epoch, train_set.samples()));
    manifest.add_output(outcome.run_dir / "schedule_epoch1.json");

    const auto train_start = Clock::now();
    auto result = train(cfg.train, train_set, val_set, weights, train_options);
    manifest.add_timing("train_basic", seconds_since(train_start));
    manifest.add_output(outcome.basic_checkpoint / "weights.bin");
    manifest.add_output(outcome.basic_checkpoint / "config.json");
    manifest.add_output(outcome.basic_checkpoint / "epochs.csv");
    manifest.add_output(outcome.basic_checkpoint / "report.json", report_digest(result.report));
    outcome.basic_report = result.report;

    if (!test_records.empty()) {
      const EvalSet test_set = build_eval_set(test_records);
      const auto probs = predict_all(*result.model, test_set);
      write_eval_outputs(outcome.basic_checkpoint, test_set.ids, test_set.labels, probs, manifest);
      outcome.basic_test = evaluate(test_set.labels, probs);
      log_line(options.log, "basic test: macro_f1=" + std::to_string(outcome.basic_test->macro_f1) +
                                " accuracy=" + std::to_string(outcome.basic_test->accuracy));
    }
  }

  if (options.mode == Mode::PREMIUM) {
    const auto prep_start = Clock::now();
    const ViewSet train_views = build_view_set(train_records);
    const ViewSet val_views = build_view_set(val_records);
    manifest.add_timing("prepare_premium", seconds_since(prep_start));
    outcome.premium_checkpoint = outcome.run_dir / "premium";
    TrainOptions premium_options;
    premium_options.checkpoint_dir = outcome.premium_checkpoint;
    premium_options.on_epoch = [&](const EpochRecord &e) { log_line(options.log, format_epoch("premium", e)); };
    const auto train_start = Clock::now();
    auto result = train_premium(outcome.basic_checkpoint, cfg.aggregator, cfg.aggregator_train, train_views,
                                val_views, weights, premium_options);
    manifest.add_timing("train_premium", seconds_since(train_start));
    manifest.add_output(outcome.premium_checkpoint / "weights.bin");
    manifest.add_output(outcome.premium_checkpoint / "backbone.bin");
    manifest.add_output(outcome.premium_checkpoint / "aggregator_config.json");
    manifest.add_output(outcome.premium_checkpoint / "report.json", report_digest(result.report));
    outcome.premium_report = result.report;

    if (!test_records.empty()) {
      const ViewSet test_views = build_view_set(test_records);
      const auto probs = predict_all(result.model, test_views);
      write_eval_outputs(outcome.premium_checkpoint, test_views.ids, test_views.labels, probs, manifest);
      outcome.premium_test = evaluate(test_views.labels, probs);
      log_line(options.log, "premium test: macro_f1=" + std::to_string(outcome.premium_test->macro_f1) +
                                " accuracy=" + std::to_string(outcome.premium_test->accuracy));
      if (reuse_base) {
        auto base = load_backbone_checkpoint(outcome.basic_checkpoint);
        const EvalSet test_set = build_eval_set(test_records);
        outcome.basic_test = evaluate(test_set.labels, predict_all(*base, test_set));
      }
    }
  }

  // Top-level copies of the final stage's report and test evaluation.
  const auto &final_dir = options.mode == Mode::PREMIUM ? outcome.premium_checkpoint : outcome.basic_checkpoint;
  const auto &final_report = options.mode == Mode::PREMIUM ? outcome.premium_report : outcome.basic_report;
  const auto &final_test = options.mode == Mode::PREMIUM ? outcome.premium_test : outcome.basic_test;
  if (final_report) {
    write_json(outcome.run_dir / "report.json", final_report->to_json());
  }
  if (final_test) {
    write_json(outcome.run_dir / "eval.json", to_json(*final_test));
    manifest.add_output(outcome.run_dir / "eval.json");
  }
  nlohmann::json summary = {{"mode", mode_name(options.mode)}, {"checkpoint", final_dir.string()}};
  if (outcome.basic_test) {
    summary["basic_test_macro_f1"] = outcome.basic_test->macro_f1;
    summary["basic_test_accuracy"] = outcome.basic_test->accuracy;
  }
  if (outcome.premium_test) {
    summary["premium_test_macro_f1"] = outcome.premium_test->macro_f1;
    summary["premium_test_accuracy"] = outcome.premium_test->accuracy;
  }
  manifest.set("summary", summary);
  manifest.add_timing("total", seconds_since(start));
  manifest.write(outcome.run_dir);
  return outcome;
}

InferOutcome cmd_infer(const InferOptions &options) {
  const auto start = Clock::now();
  if (options.workers < 1) {
    fail(ErrorCode::InvalidArgument, "--workers must be >= 1");
  }
  ExplainConfig explain_config;
  RunManifest manifest("infer --mode " + std::string(mode_name(options.mode)));
  nlohmann::json config = {{"checkpoint", options.checkpoint.string()},
                           {"explain", options.explain},
                           {"bench", options.bench},
                           {"workers", options.workers}};
  if (!options.config.empty()) {
    explain_config = load_pipeline_config(options.config).explain;
    manifest.add_input(options.config);
  }
  config["explain_style"] = explain_config.to_json();
  manifest.set_config(config);

  // Labels are never read here.
  ManifestOptions manifest_options;
  manifest_options.read_labels = false;
  const auto records = load_manifest(options.manifest, manifest_options);
  manifest.add_input(options.manifest);

  std::unique_ptr<Backbone> basic;
  PremiumModel premium;
  if (options.mode == Mode::BASIC) {
    if (is_premium_checkpoint(options.checkpoint)) {
      fail(ErrorCode::CheckpointMismatch, options.checkpoint.string() + " is a premium checkpoint; use --mode premium");
    }
    basic = load_backbone_checkpoint(options.checkpoint);
  } else {
    premium = load_premium_checkpoint(options.checkpoint);
    manifest.add_input(options.checkpoint / "backbone.bin");
  }
  manifest.add_input(options.checkpoint / "weights.bin");

  InferOutcome outcome;
  outcome.ids.reserve(records.size());
  for (const auto &r : records) {
    outcome.ids.push_back(r.id);
  }
  outcome.probabilities.assign(records.size(), PredictionVector{});

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(options.workers), records.size()));
  const auto predict_start = Clock::now();
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  // Layers cache per-sample state, so every extra worker owns a private copy,
  // made before any thread starts.
  std::vector<std::unique_ptr<Backbone>> basic_copies(workers);
  std::vector<PremiumModel> premium_copies(workers);
  for (std::size_t w = 1; w < workers; ++w) {
    if (options.mode == Mode::BASIC) {
      basic_copies[w] = basic->clone();
    } else {
      premium_copies[w].backbone = premium.backbone->clone();
      premium_copies[w].aggregator = std::make_unique<AggregatorModel>(*premium.aggregator);
    }
  }
  auto worker = [&](std::size_t w) {
    Backbone *b = w == 0 ? basic.get() : basic_copies[w].get();
    PremiumModel &p = w == 0 ? premium : premium_copies[w];
    try {
      for (std::size_t i = next++; i < records.size(); i = next++) {
        const cv::Mat canonical = load_canonical(records[i]);
        outcome.probabilities[i] = options.mode == Mode::BASIC ? b->predict(canonical) : p.predict_canonical(canonical);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) {
        failure = std::current_exception();
      }
      next = records.size();
    }
  };
  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back(worker, w);
    }
    for (auto &t : threads) {
      t.join();
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  const double predict_seconds = seconds_since(predict_start);
  manifest.add_timing("predict", predict_seconds);

  ensure_directory(options.out_dir);
  outcome.predictions = options.out_dir / "predictions.csv";
  write_predictions(outcome.predictions, outcome.ids, outcome.probabilities);
  manifest.add_output(outcome.predictions);

  if (options.explain) {
    const auto explain_start = Clock::now();
    const auto dir = options.out_dir / "explain";
    ensure_directory(dir);
    Backbone &backbone = options.mode == Mode::BASIC ? *basic : *premium.backbone;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto explanation =
          explain_case(load_canonical(records[i]), backbone, outcome.probabilities[i], explain_config);
      const auto path = dir / (records[i].id + ".png");
      write_png(path, explanation.composite);
      outcome.composites.push_back(path);
      manifest.add_output(path);
    }
    manifest.add_timing("explain", seconds_since(explain_start));
  }

  if (options.bench) {
    outcome.images_per_second =
        predict_seconds > 0.0 ? static_cast<double>(records.size()) / predict_seconds : 0.0;
    manifest.set("bench", {{"images", records.size()},
                           {"seconds", predict_seconds},
                           {"images_per_second", *outcome.images_per_second},
                           {"workers", workers},
                           {"hardware_threads", std::thread::hardware_concurrency()},
                           {"includes", "image decode, canonical resize, model forward"},
                           {"reference_claim",
                            "1000 cases in 30 s (33.3 images/s) on a 12-core CPU; hardware-specific, "
                            "reported for context and not used as a threshold"}});
  }
  manifest.add_timing("total", seconds_since(start));
  outcome.run_manifest = manifest.write(options.out_dir);
  return outcome;
}

VerifyOutcome cmd_verify_tables(std::ostream &out, const std::filesystem::path &out_dir) {
  const auto start = Clock::now();
  VerifyOutcome outcome;
  outcome.checks = verify_tables(published_tables());
  outcome.all_passed = true;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &c : outcome.checks) {
    outcome.all_passed = outcome.all_passed && c.pass;
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " expected=" << std::fixed << std::setprecision(4)
        << c.expected << " actual=" << std::setprecision(6) << c.actual << " tolerance=" << std::setprecision(4)
        << c.tolerance << '\n';
    rows.push_back({{"name", c.name},
                    {"expected", c.expected},
                    {"actual", c.actual},
                    {"tolerance", c.tolerance},
                    {"pass", c.pass}});
  }
  RunManifest manifest("verify-tables");
  manifest.set("checks", rows);
  manifest.set("all_passed", outcome.all_passed);
  manifest.add_timing("total", seconds_since(start));
  manifest.write(out_dir.empty() ? runs_root() / "verify-tables" : out_dir);
  return outcome;
}

int run_cli(int argc, char **argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"thyrofna: region-aware cytology image classification pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SynthOptions synth;
  std::string corpus_kind = "clusters";
  auto *synth_cmd = app.add_subcommand("synth-corpus", "Generate a separable synthetic corpus");
  synth_cmd->add_option("--n", synth.n_per_class, "Images per class")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--kind", corpus_kind, "clusters or blobs")->check(CLI::IsMember({"clusters", "blobs"}));

  SplitOptions split;
  std::string split_config;
  std::vector<double> ratios;
  auto *split_cmd = app.add_subcommand("split", "Assign TRAIN/VAL/TEST");
  split_cmd->add_option("--manifest", split.manifest, "Input manifest")->required();
  split_cmd->add_option("--out", split.out_manifest, "Output manifest")->required();
  split_cmd->add_option("--seed", split.spec.seed, "Split seed");
  split_cmd->add_option("--ratios", ratios, "train val test ratios")->expected(3);
  split_cmd->add_option("--config", split_config, "Pipeline config (uses data.split)");

  AugmentPreviewOptions preview;
  auto *preview_cmd = app.add_subcommand("augment-preview", "Export the 34 augmented samples of TRAIN images");
  preview_cmd->add_option("--manifest", preview.manifest, "Split manifest")->required();
  preview_cmd->add_option("--out", preview.out_dir, "Output directory")->required();
  preview_cmd->add_option("--config", preview.config, "Pipeline config");
  preview_cmd->add_option("--seed", preview.seed, "Augmentation seed (without --config)");
  preview_cmd->add_option("--limit", preview.limit, "Maximum number of images (0 = all)");

  TrainCommandOptions train_opts;
  std::string train_mode = "basic";
  std::uint64_t train_seed = 0;
  auto *train_cmd = app.add_subcommand("train", "Split, augment, schedule, train, and evaluate");
  train_cmd->add_option("--config", train_opts.config, "Pipeline config")->required();
  train_cmd->add_option("--mode", train_mode, "basic or premium")->check(CLI::IsMember({"basic", "premium"}));
  auto *seed_opt = train_cmd->add_option("--seed", train_seed, "Override every seed in the config");
  train_cmd->add_option("--base", train_opts.base_checkpoint, "Premium: existing Basic checkpoint");
  train_cmd->add_option("--run-dir", train_opts.run_dir, "Run directory (default $THYROFNA_RUNS_DIR/<run_id>)");

  InferOptions infer;
  std::string infer_mode = "basic";
  auto *infer_cmd = app.add_subcommand("infer", "Label-blind batch inference");
  infer_cmd->add_option("--checkpoint", infer.checkpoint, "Checkpoint directory")->required();
  infer_cmd->add_option("--manifest", infer.manifest, "Image manifest")->required();
  infer_cmd->add_option("--out", infer.out_dir, "Output directory")->required();
  infer_cmd->add_option("--mode", infer_mode, "basic or premium")->check(CLI::IsMember({"basic", "premium"}));
  infer_cmd->add_flag("--explain", infer.explain, "Write Grad-CAM composites");
  infer_cmd->add_flag("--bench", infer.bench, "Record throughput in the run manifest");
  infer_cmd->add_option("--workers", infer.workers, "Parallel workers")->check(CLI::PositiveNumber);
  infer_cmd->add_option("--config", infer.config, "Pipeline config (explain section)");

  std::filesystem::path verify_out;
  auto *verify_cmd = app.add_subcommand("verify-tables", "Recompute F1 from the published confusion matrices");
  verify_cmd->add_option("--out", verify_out, "Directory for the run manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth_cmd) {
      synth.kind = corpus_kind == "blobs" ? CorpusKind::BLOBS : CorpusKind::CLUSTERS;
      const auto r = cmd_synth_corpus(synth);
      out << "wrote " << r.images << " images; manifest " << r.manifest.string() << '\n';
    } else if (*split_cmd) {
      if (!split_config.empty()) {
        split.spec = load_pipeline_config(split_config).data.split;
      }
      if (!ratios.empty()) {
        split.spec.ratios = {ratios[0], ratios[1], ratios[2]};
      }
      const auto records = cmd_split(split);
      out << "split " << records.size() << " records into " << split.out_manifest.string() << '\n';
    } else if (*preview_cmd) {
      const auto n = cmd_augment_preview(preview);
      out << "exported " << n << " samples to " << preview.out_dir.string() << '\n';
    } else if (*train_cmd) {
      train_opts.mode = parse_mode(train_mode);
      if (seed_opt->count() > 0) {
        train_opts.seed = train_seed;
      }
      train_opts.log = &out;
      const auto r = cmd_train(train_opts);
      out << "run directory: " << r.run_dir.string() << '\n';
    } else if (*infer_cmd) {
      infer.mode = parse_mode(infer_mode);
      const auto r = cmd_infer(infer);
      out << "wrote " << r.ids.size() << " predictions to " << r.predictions.string() << '\n';
      if (r.images_per_second) {
        out << "throughput: " << std::fixed << std::setprecision(2) << *r.images_per_second << " images/s\n";
      }
    } else if (*verify_cmd) {
      return cmd_verify_tables(out, verify_out).all_passed ? 0 : 1;
    }
  } catch (const Error &e) {
    err << "error [" << error_code_name(e.code()) << "]: " << e.what() << '\n';
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

} // namespace thyrofna::cli
