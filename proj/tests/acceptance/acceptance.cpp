// Acceptance driver: one PASS/FAIL line per criterion. Exit code 0 only when
// every criterion passes.

#include "unit/support.hpp"

#include "thyrofna/aggregator.hpp"
#include "thyrofna/augmentation.hpp"
#include "thyrofna/cli/commands.hpp"
#include "thyrofna/cli/run_manifest.hpp"
#include "thyrofna/curriculum.hpp"
#include "thyrofna/explainability.hpp"
#include "thyrofna/image.hpp"
#include "thyrofna/loss.hpp"
#include "thyrofna/manifest.hpp"
#include "thyrofna/rng.hpp"
#include "thyrofna/synth.hpp"
#include "thyrofna/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

using namespace thyrofna;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

nlohmann::json read_json(const fs::path &p) {
  std::ifstream in(p);
  if (!in) {
    throw std::runtime_error("cannot read " + p.string());
  }
  return nlohmann::json::parse(in);
}

void write_json(const fs::path &p, const nlohmann::json &j) { std::ofstream(p) << j.dump(2) << '\n'; }

int run(std::vector<std::string> args, std::string *captured = nullptr) {
  args.insert(args.begin(), "thyrofna");
  std::vector<char *> argv;
  for (auto &a : args) {
    argv.push_back(a.data());
  }
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (captured != nullptr) {
    *captured = out.str();
  }
  if (code != 0) {
    std::cerr << err.str();
  }
  return code;
}

std::vector<RegionProposal> random_proposals(int count, Rng &rng) {
  std::vector<RegionProposal> out;
  for (int i = 0; i < count; ++i) {
    const int w = 64 + static_cast<int>(rng.uniform_index(400));
    const int h = 64 + static_cast<int>(rng.uniform_index(400));
    const int x = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(kCanonicalWidth - w + 1)));
    const int y = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(kCanonicalHeight - h + 1)));
    out.push_back({x, y, w, h, rng.uniform()});
  }
  std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.score > b.score; });
  return out;
}

// --- 1 -----------------------------------------------------------------------

Outcome ac1_verify_tables() {
  const auto start = Clock::now();
  const auto dir = testsupport::fresh_dir("ac1");
  std::string out;
  const int code = run({"verify-tables", "--out", dir.string()}, &out);
  const double elapsed = seconds_since(start);
  const auto checks = cli::verify_tables(cli::published_tables());
  bool macro = false;
  int per_class = 0;
  std::string values;
  for (const auto &c : checks) {
    if (c.name == "internal_test.macro_f1") {
      macro = c.pass && std::abs(c.actual - 0.8919) <= 0.0005;
      values += "macro " + fmt(c.actual) + "; ";
    } else if (c.name.find(".f1.") != std::string::npos && c.name.rfind("internal_test", 0) != 0) {
      per_class += c.pass && std::abs(c.actual - c.expected) <= 0.005;
      values += c.name + " " + fmt(c.actual, 3) + "; ";
    }
  }
  const bool pass = code == 0 && macro && per_class == 3 && elapsed < 1.0;
  return {pass, values + "runtime " + fmt(elapsed, 3) + " s"};
}

// --- 2 -----------------------------------------------------------------------

Outcome ac2_augmentation_cardinality() {
  const auto start = Clock::now();
  Rng rng(2);
  const std::array<int, 4> counts = {0, 3, 8, 15};
  int good = 0;
  for (int i = 0; i < 50; ++i) {
    const ClassLabel label = label_from_index(i % 3);
    const auto synth = render_cluster_image(label, derive_seed(2, static_cast<std::uint64_t>(i)));
    ImageRecord record;
    record.id = "ac2_" + std::to_string(i);
    record.label = label;
    record.split = SplitTag::TRAIN;
    const auto proposals = random_proposals(counts[static_cast<std::size_t>(i % 4)], rng);
    const auto samples = augment_record(record, proposals, 42);
    const auto rasters = prepare_rasters(synth.image, proposals);
    std::map<SetTag, int> tally;
    bool rasters_ok = true;
    for (const auto &s : samples) {
      ++tally[s.set_tag];
      const cv::Mat m = materialize(s, rasters);
      rasters_ok = rasters_ok && !m.empty() && m.type() == CV_8UC3;
    }
    good += samples.size() == 34 && tally[SetTag::A] == 1 && tally[SetTag::B] == 1 && tally[SetTag::C] == 8 &&
            tally[SetTag::D] == 12 && tally[SetTag::E] == 12 && rasters_ok;
  }
  const double elapsed = seconds_since(start);
  return {good == 50 && elapsed < 30.0,
          std::to_string(good) + "/50 images with 34 samples {A1,B1,C8,D12,E12}; runtime " + fmt(elapsed, 2) + " s"};
}

// --- 3 -----------------------------------------------------------------------

Outcome ac3_grid_partition() {
  const auto rects = grid_rects();
  bool geometry = rects.size() == 12;
  std::int64_t area = 0;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    geometry = geometry && rects[i].width == 256 && rects[i].height == 256 &&
               (rects[i] & cv::Rect(0, 0, kCanonicalWidth, kCanonicalHeight)) == rects[i];
    area += rects[i].area();
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      geometry = geometry && (rects[i] & rects[j]).area() == 0;
    }
  }
  geometry = geometry && area == static_cast<std::int64_t>(kCanonicalWidth) * kCanonicalHeight;
  int identical = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto image = testsupport::random_canonical(1000 + seed);
    const auto tiles = generate_grid(image);
    cv::Mat rebuilt(kCanonicalHeight, kCanonicalWidth, CV_8UC3, cv::Scalar::all(0));
    for (std::size_t i = 0; i < tiles.size(); ++i) {
      tiles[i].copyTo(rebuilt(rects[i]));
    }
    identical += cv::norm(rebuilt, image, cv::NORM_INF) == 0.0;
  }
  return {geometry && identical == 100, std::string("disjoint 256x256 cover: ") + (geometry ? "yes" : "no") +
                                             "; exact reassembly " + std::to_string(identical) + "/100"};
}

// --- 4 -----------------------------------------------------------------------

Outcome ac4_curriculum() {
  int good = 0, total = 0;
  for (const int n : {1, 5, 37}) {
    std::vector<AugmentedSample> samples;
    for (int i = 0; i < n; ++i) {
      ImageRecord r;
      r.id = "ac4_" + std::to_string(n) + "_" + std::to_string(i);
      r.label = label_from_index(i % 3);
      r.split = SplitTag::TRAIN;
      const auto s = augment_record(r, {}, 4);
      samples.insert(samples.end(), s.begin(), s.end());
    }
    Rng rng(static_cast<std::uint64_t>(n));
    rng.shuffle(std::span<AugmentedSample>(samples));
    std::vector<std::vector<std::set<std::size_t>>> blocks_by_epoch;
    for (int epoch = 0; epoch < 2; ++epoch) {
      ++total;
      const auto e = build_epoch(samples, epoch, 42);
      std::vector<std::pair<SetTag, std::set<std::size_t>>> runs;
      for (const auto i : e.order) {
        const SetTag t = samples[i].set_tag;
        if (runs.empty() || runs.back().first != t) {
          runs.push_back({t, {}});
        }
        runs.back().second.insert(i);
      }
      const std::array<std::size_t, 5> sizes = {12u * n, 12u * n, 8u * n, 1u * n, 1u * n};
      bool ok = runs.size() == 5;
      for (std::size_t k = 0; ok && k < 5; ++k) {
        ok = runs[k].first == kCurriculumOrder[k] && runs[k].second.size() == sizes[k];
      }
      auto sorted = e.order;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; ok && i < sorted.size(); ++i) {
        ok = sorted[i] == i;
      }
      ok = ok && build_epoch(samples, epoch, 42).order == e.order;
      good += ok;
      std::vector<std::set<std::size_t>> blocks;
      for (auto &r : runs) {
        blocks.push_back(r.second);
      }
      blocks_by_epoch.push_back(blocks);
    }
    // Two epochs: same block contents, order may differ only inside blocks.
    ++total;
    good += blocks_by_epoch[0] == blocks_by_epoch[1];
  }
  return {good == total, std::to_string(good) + "/" + std::to_string(total) + " schedule checks for N in {1,5,37}"};
}

// --- 5 -----------------------------------------------------------------------

Outcome ac5_loss() {
  const ClassWeights w{{1.2, 1.0, 0.8}};
  const std::vector<ClassLabel> benign = {ClassLabel::BENIGN};
  const std::vector<PredictionVector> perfect = {PredictionVector({1.0, 0.0, 0.0})};
  const std::vector<PredictionVector> uniform = {PredictionVector({1.0 / 3, 1.0 / 3, 1.0 / 3})};
  const std::vector<PredictionVector> two = {PredictionVector({0.5, 0.25, 0.25}), PredictionVector({0.5, 0.25, 0.25})};
  const std::vector<ClassLabel> labels = {ClassLabel::BENIGN, ClassLabel::MALIGNANT};
  const double e1 = std::abs(weighted_cross_entropy(perfect, benign, w) - 0.0);
  const double e2 = std::abs(weighted_cross_entropy(uniform, benign, ClassWeights{}) - std::log(3.0));
  const double e3 = std::abs(weighted_cross_entropy(two, labels, w) - 0.9704060527839234);
  const bool worked = e1 <= 1e-9 && e2 <= 1e-9 && e3 <= 1e-9;

  Rng rng(5);
  double worst = 0.0;
  for (int batch = 0; batch < 1000; ++batch) {
    const std::size_t n = 1 + rng.uniform_index(32);
    std::vector<PredictionVector> probs;
    std::vector<ClassLabel> ys;
    double reference = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::array<double, 3> z = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
      probs.push_back(PredictionVector::from_logits(z));
      ys.push_back(label_from_index(static_cast<int>(rng.uniform_index(3))));
      reference -= std::log(probs.back()[label_index(ys.back())]);
    }
    reference /= static_cast<double>(n);
    worst = std::max(worst, std::abs(weighted_cross_entropy(probs, ys, ClassWeights{}) - reference));
  }
  const auto cw = class_weights_from_counts({482, 541, 781});
  const std::array<double, 3> expected = {1.24758, 1.11152, 0.76996};
  double weight_err = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    weight_err = std::max(weight_err, std::abs(cw.values[j] - expected[j]));
  }
  return {worked && worst <= 1e-12 && weight_err <= 1e-5,
          "worked examples max err " + fmt(std::max({e1, e2, e3}) * 1e12, 3) + "e-12; unit-weight max err " +
              fmt(worst * 1e15, 3) + "e-15; weights (" + fmt(cw.values[0], 5) + ", " + fmt(cw.values[1], 5) + ", " +
              fmt(cw.values[2], 5) + ")"};
}

// --- 6 -----------------------------------------------------------------------

Outcome ac6_gradients() {
  const auto start = Clock::now();
  const ClassWeights w{{1.2, 1.0, 0.8}};

  auto backbone = make_backbone("reference_cnn", {{"dropout", 0.0}}, 61);
  std::vector<nn::FeatureMap> inputs;
  for (std::uint64_t s = 0; s < 2; ++s) {
    inputs.push_back(to_model_input(testsupport::random_image(224, 224, 600 + s)));
  }
  const std::vector<ClassLabel> labels = {ClassLabel::INDET_SUS, ClassLabel::MALIGNANT};
  auto backbone_loss = [&] {
    double sum = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto out = backbone->forward(inputs[i], nn::ForwardContext{});
      sum += weighted_nll(softmax3(std::span<const double>(out.logits.data(), 3)), labels[i], w);
    }
    return sum / static_cast<double>(inputs.size());
  };
  const auto bparams = backbone->parameters();
  nn::zero_grads(bparams);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto out = backbone->forward(inputs[i], nn::ForwardContext{});
    backbone->backward(weighted_ce_logit_gradient(softmax3(std::span<const double>(out.logits.data(), 3)), labels[i],
                                                  w, static_cast<double>(inputs.size())));
  }
  const auto gb = testsupport::check_gradients(backbone_loss, bparams, 8, 62);

  AggregatorConfig config;
  config.d_model = 8;
  config.num_encoder_layers = 2;
  config.num_heads = 2;
  config.ff_dim = 16;
  config.head_hidden_dims = {6};
  config.dropout = 0.0;
  AggregatorModel model(config, 5, 63);
  Rng rng(64);
  nn::Matrix features(kNumTokens, 5);
  for (Eigen::Index i = 0; i < features.size(); ++i) {
    features.data()[i] = rng.uniform(-2.0, 2.0);
  }
  auto aggregator_loss = [&] {
    const nn::Vector z = model.forward(model.tokenize_features(features), nn::ForwardContext{});
    return weighted_nll(softmax3(std::span<const double>(z.data(), 3)), ClassLabel::MALIGNANT, w);
  };
  const auto aparams = model.parameters();
  nn::zero_grads(aparams);
  const nn::Vector z = model.forward(model.tokenize_features(features), nn::ForwardContext{});
  model.backward_tokenize(
      model.backward(weighted_ce_logit_gradient(softmax3(std::span<const double>(z.data(), 3)), ClassLabel::MALIGNANT,
                                                w, 1.0)));
  const auto ga = testsupport::check_gradients(aggregator_loss, aparams, 12, 65);
  const double elapsed = seconds_since(start);
  return {gb.max_relative_error < 1e-4 && ga.max_relative_error < 1e-4 && elapsed < 120.0,
          "backbone max rel err " + fmt(gb.max_relative_error * 1e6, 3) + "e-6 over " + std::to_string(gb.checked) +
              " entries; aggregator " + fmt(ga.max_relative_error * 1e6, 3) + "e-6 over " +
              std::to_string(ga.checked) + "; runtime " + fmt(elapsed, 1) + " s"};
}

// --- 7 -----------------------------------------------------------------------

Outcome ac7_reduction() {
  auto backbone = make_backbone("reference_cnn", {}, 71);
  backbone->mark_trained();
  AggregatorConfig config;
  config.d_model = 3;
  config.num_encoder_layers = 0;
  config.num_heads = 1;
  config.token_source = TokenSource::LOGITS;
  config.head = HeadKind::SOFTMAX_ONLY;
  config.positional_encoding = false;
  AggregatorModel model(config, 3, 72);
  model.set_identity_expansion();
  model.mark_ready();
  int exact = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto image = testsupport::random_canonical(700 + s);
    const auto premium = aggregate_predict(tokenize(decompose(image), *backbone, model), model);
    const auto basic = backbone->predict(image);
    exact += premium.values() == basic.values();
  }
  return {exact == 20, std::to_string(exact) + "/20 images bit-identical"};
}

// --- 8 -----------------------------------------------------------------------

struct SmokeRun {
  fs::path basic_checkpoint;
  double basic_accuracy = 0.0;
  double basic_macro = 0.0;
  double premium_macro = 0.0;
  double seconds = 0.0;
  bool ok = false;
};

SmokeRun smoke_pipeline() {
  SmokeRun r;
  const auto start = Clock::now();
  const auto dir = testsupport::fresh_dir("ac8");
  if (run({"synth-corpus", "--n", "30", "--seed", "8", "--out", (dir / "corpus").string()}) != 0) {
    return r;
  }
  auto config = read_json(fs::path(THYROFNA_SOURCE_DIR) / "config" / "smoke.json");
  config.erase("$schema");
  config["data"]["manifest"] = "corpus/manifest.csv";
  write_json(dir / "smoke.json", config);
  if (run({"train", "--config", (dir / "smoke.json").string(), "--mode", "basic", "--run-dir",
           (dir / "basic_run").string()}) != 0) {
    return r;
  }
  const auto basic_eval = read_json(dir / "basic_run" / "eval.json");
  r.basic_checkpoint = dir / "basic_run" / "basic";
  r.basic_accuracy = basic_eval.at("accuracy").get<double>();
  r.basic_macro = basic_eval.at("macro_f1").get<double>();
  if (run({"train", "--config", (dir / "smoke.json").string(), "--mode", "premium", "--base",
           r.basic_checkpoint.string(), "--run-dir", (dir / "premium_run").string()}) != 0) {
    return r;
  }
  r.premium_macro = read_json(dir / "premium_run" / "eval.json").at("macro_f1").get<double>();
  r.seconds = seconds_since(start);
  r.ok = true;
  return r;
}

Outcome ac8_smoke(const SmokeRun &r) {
  if (!r.ok) {
    return {false, "pipeline did not complete"};
  }
  return {r.basic_accuracy >= 0.90 && r.premium_macro >= r.basic_macro - 0.02 && r.seconds < 600.0,
          "basic test accuracy " + fmt(r.basic_accuracy, 3) + ", macro-F1 " + fmt(r.basic_macro, 3) +
              "; premium macro-F1 " + fmt(r.premium_macro, 3) + "; runtime " + fmt(r.seconds, 0) + " s"};
}

// --- 9 -----------------------------------------------------------------------

Outcome ac9_early_stopping() {
  int good = 0, total = 0;
  for (int k = 1; k <= 40; ++k) {
    ++total;
    Rng rng(static_cast<std::uint64_t>(900 + k));
    std::vector<double> losses;
    double level = 5.0;
    for (int e = 1; e <= 200; ++e) {
      if (e <= k) {
        level -= rng.uniform(0.01, 0.5);
        losses.push_back(level);
      } else {
        // Never strictly below the epoch-k minimum.
        losses.push_back(level + rng.uniform(0.0, 1.0) * (rng.uniform() < 0.2 ? 0.0 : 1.0));
      }
    }
    const auto out = run_training_loop(200, 10, [&](int epoch) {
      EpochRecord rec;
      rec.val_loss = losses[static_cast<std::size_t>(epoch - 1)];
      rec.val_macro_f1 = 0.5;
      return rec;
    });
    good += out.epochs_run == k + 10 && out.stop_reason == StopReason::EarlyStopping;
  }
  return {good == total, std::to_string(good) + "/" + std::to_string(total) + " scripted sequences stop at k + 10"};
}

// --- 10 ----------------------------------------------------------------------

Outcome ac10_gradcam() {
  const auto dir = testsupport::fresh_dir("ac10");
  const auto blobs = synth_blob_corpus(dir / "corpus", 20, 10);
  nlohmann::json config = {
      {"data", {{"manifest", "corpus/manifest.csv"}, {"split", {{"seed", 10}}}}},
      {"augmentation", {{"enabled", false}}},
      {"schedule", {{"kind", "shuffled"}}},
      {"train",
       {{"learning_rate", 2e-3}, {"batch_size", 8}, {"weight_decay", 1e-4}, {"max_epochs", 40}, {"patience", 10},
        {"backbone_options", {{"stem_pool", 2}}}}}};
  write_json(dir / "blob.json", config);
  if (run({"train", "--config", (dir / "blob.json").string(), "--mode", "basic", "--run-dir",
           (dir / "run").string()}) != 0) {
    return {false, "training on the blob corpus failed"};
  }
  auto model = load_backbone_checkpoint(dir / "run" / "basic");
  const auto splits = load_manifest(dir / "run" / "splits.csv");
  std::map<std::string, cv::Rect> boxes;
  for (const auto &b : blobs) {
    boxes[b.record.id] = b.blob;
  }
  // Gated on MALIGNANT images (the dark discriminative blob) with the
  // MALIGNANT target; the INDET_SUS blob is reported for information.
  bool normalized = true;
  std::map<ClassLabel, std::vector<double>> by_class;
  for (const auto &rec : splits) {
    if (rec.split == SplitTag::TRAIN) {
      continue;
    }
    const cv::Mat image = load_canonical(rec);
    const auto map = grad_cam(image, *model, *rec.label);
    double lo = 0.0, hi = 0.0;
    cv::minMaxLoc(map.values, &lo, &hi);
    normalized = normalized && lo >= 0.0 && hi <= 1.0;
    if (*rec.label != ClassLabel::BENIGN) {
      by_class[*rec.label].push_back(saliency_mass_fraction(map, boxes.at(rec.id)));
    }
  }
  const auto &malignant = by_class[ClassLabel::MALIGNANT];
  auto mean_of = [](const std::vector<double> &v) {
    double s = 0.0;
    for (const double x : v) {
      s += x;
    }
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  const double mean = mean_of(malignant);
  const double worst = malignant.empty() ? 0.0 : *std::min_element(malignant.begin(), malignant.end());
  std::string detail = "MALIGNANT target: mean in-box mass " + fmt(mean, 3) + " (min " + fmt(worst, 3) + ") over " +
                       std::to_string(malignant.size()) + " held-out images; INDET_SUS blob (not gated) " +
                       fmt(mean_of(by_class[ClassLabel::INDET_SUS]), 3);
  detail += normalized ? "; all maps in [0,1]" : "; map outside [0,1]";
  return {!malignant.empty() && mean >= 0.5 && normalized, detail};
}

// --- 11 ----------------------------------------------------------------------

struct DeterminismRun {
  std::map<std::string, std::string> digests;
};

DeterminismRun determinism_pass(const std::string &name) {
  DeterminismRun r;
  const auto dir = testsupport::fresh_dir(name);
  run({"synth-corpus", "--n", "5", "--seed", "11", "--out", (dir / "corpus").string()});
  nlohmann::json config = {
      {"data", {{"manifest", "corpus/manifest.csv"}, {"split", {{"seed", 11}}}}},
      {"augmentation", {{"enabled", true}, {"seed", 11}}},
      {"train",
       {{"learning_rate", 3e-3},
        {"batch_size", 16},
        {"max_epochs", 2},
        {"seed", 11},
        {"backbone_options", {{"channels", {4, 6, 8}}}}}}};
  write_json(dir / "config.json", config);
  run({"split", "--config", (dir / "config.json").string(), "--manifest", (dir / "corpus" / "manifest.csv").string(),
       "--out", (dir / "split.csv").string()});
  run({"augment-preview", "--config", (dir / "config.json").string(), "--manifest", (dir / "split.csv").string(),
       "--out", (dir / "preview").string(), "--limit", "0"});
  run({"train", "--config", (dir / "config.json").string(), "--mode", "basic", "--run-dir", (dir / "run").string()});
  run({"infer", "--checkpoint", (dir / "run" / "basic").string(), "--manifest",
       (dir / "corpus" / "manifest.csv").string(), "--out", (dir / "infer").string()});
  const std::vector<std::pair<std::string, fs::path>> files = {
      {"split", dir / "split.csv"},
      {"run splits", dir / "run" / "splits.csv"},
      {"schedule", dir / "run" / "schedule_epoch1.json"},
      {"predictions", dir / "infer" / "predictions.csv"},
  };
  for (const auto &[key, path] : files) {
    r.digests[key] = fs::exists(path) ? cli::file_digest(path) : "missing";
  }
  // Geometry of every previewed record.
  std::vector<fs::path> geometry;
  if (fs::exists(dir / "preview")) {
    for (const auto &entry : fs::recursive_directory_iterator(dir / "preview")) {
      if (entry.path().filename() == "geometry.json") {
        geometry.push_back(entry.path());
      }
    }
  }
  std::sort(geometry.begin(), geometry.end());
  std::string joined;
  for (const auto &g : geometry) {
    joined += cli::file_digest(g);
  }
  r.digests["geometry"] = geometry.empty() ? "missing" : cli::bytes_digest(joined);
  return r;
}

Outcome ac11_determinism() {
  const auto a = determinism_pass("ac11_a");
  const auto b = determinism_pass("ac11_b");
  bool pass = true;
  std::string detail;
  for (const auto &[key, digest] : a.digests) {
    const bool same = digest != "missing" && b.digests.at(key) == digest;
    pass = pass && same;
    detail += (detail.empty() ? "" : "; ") + key + (same ? " identical" : " DIFFERS");
  }
  return {pass, detail};
}

// --- 12 ----------------------------------------------------------------------

Outcome ac12_throughput(const SmokeRun &smoke) {
  const auto dir = testsupport::fresh_dir("ac12");
  fs::path checkpoint = smoke.basic_checkpoint;
  if (checkpoint.empty() || !fs::exists(checkpoint)) {
    TrainConfig c;
    c.max_epochs = 1;
    c.batch_size = 8;
    train(c, testsupport::toy_sample_set(2, 1), testsupport::toy_eval_set(1, 2), ClassWeights{},
          {ScheduleKind::Shuffled, dir / "checkpoint", {}});
    checkpoint = dir / "checkpoint";
  }
  auto records = synth_corpus(dir / "corpus", 34, 12);
  records.resize(100);
  write_manifest(dir / "bench.csv", records);
  std::string out;
  const int code = run({"infer", "--checkpoint", checkpoint.string(), "--manifest", (dir / "bench.csv").string(),
                        "--out", (dir / "infer").string(), "--bench"},
                       &out);
  if (code != 0) {
    return {false, "infer exited " + std::to_string(code)};
  }
  const auto manifest = read_json(dir / "infer" / cli::kRunManifestFile);
  if (!manifest.contains("bench")) {
    return {false, "run manifest has no bench record"};
  }
  const auto images = manifest["bench"].value("images", 0);
  const double ips = manifest["bench"].value("images_per_second", 0.0);
  return {images == 100 && ips > 0.0,
          std::to_string(images) + " images at " + fmt(ips, 2) + " images/s (hardware-specific, not gated)"};
}

} // namespace

// Optional arguments select criteria by number, e.g. `thyrofna_acceptance 8 12`.
int main(int argc, char **argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    selected.insert(std::stoi(argv[i]));
  }
  int failures = 0;
  auto report = [&](int id, const std::string &title, const std::function<Outcome()> &fn) {
    if (!selected.empty() && selected.count(id) == 0) {
      return;
    }
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " AC" << id << " " << title << ": " << o.detail << " ["
              << fmt(seconds_since(start), 1) << " s]" << std::endl;
  };

  report(1, "table arithmetic", ac1_verify_tables);
  report(2, "augmentation cardinality", ac2_augmentation_cardinality);
  report(3, "grid partition", ac3_grid_partition);
  report(4, "curriculum ordering", ac4_curriculum);
  report(5, "loss correctness", ac5_loss);
  report(6, "gradient checks", ac6_gradients);
  report(7, "premium reduction", ac7_reduction);
  SmokeRun smoke;
  report(8, "end-to-end smoke", [&] {
    smoke = smoke_pipeline();
    return ac8_smoke(smoke);
  });
  report(9, "early stopping", ac9_early_stopping);
  report(10, "grad-cam locality", ac10_gradcam);
  report(11, "determinism", ac11_determinism);
  report(12, "throughput report", [&] { return ac12_throughput(smoke); });
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
