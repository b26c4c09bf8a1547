#include "unit/check.hpp"
#include "unit/support.hpp"

#include "thyrofna/cli/commands.hpp"
#include "thyrofna/cli/config.hpp"
#include "thyrofna/cli/run_manifest.hpp"
#include "thyrofna/cli/verify_tables.hpp"
#include "thyrofna/manifest.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

using namespace thyrofna;
using namespace thyrofna::cli;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "thyrofna");
  std::vector<char *> argv;
  for (auto &a : args) {
    argv.push_back(a.data());
  }
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json tiny_pipeline(const std::filesystem::path &manifest) {
  return {{"data", {{"manifest", manifest.string()}}},
          {"augmentation", {{"enabled", false}}},
          {"train",
           {{"learning_rate", 3e-3},
            {"batch_size", 8},
            {"max_epochs", 1},
            {"backbone_options", {{"channels", {4, 6, 8}}}}}},
          {"aggregator",
           {{"d_model", 8},
            {"num_encoder_layers", 2},
            {"num_heads", 2},
            {"ff_dim", 8},
            {"head_hidden_dims", {4}},
            {"training", {{"max_epochs", 1}}}}}};
}

std::filesystem::path write_config(const std::filesystem::path &dir, const nlohmann::json &j) {
  std::ofstream(dir / "config.json") << j.dump(2);
  return dir / "config.json";
}

// Small corpus plus one trained Basic run, shared by several cases.
struct Fixture {
  std::filesystem::path dir;
  std::filesystem::path manifest;
  std::filesystem::path config;
  TrainOutcome trained;
};

const Fixture &fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.dir = testsupport::fresh_dir("cli_fixture");
    x.manifest = cmd_synth_corpus({5, 9, x.dir / "corpus", CorpusKind::CLUSTERS}).manifest;
    x.config = write_config(x.dir, tiny_pipeline(x.manifest));
    TrainCommandOptions o;
    o.config = x.config;
    o.mode = Mode::PREMIUM;
    o.run_dir = x.dir / "run";
    x.trained = cmd_train(o);
    return x;
  }();
  return f;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("config errors name the offending key and exit 1") {
  const auto dir = testsupport::fresh_dir("cli_config_errors");
  auto j = tiny_pipeline(dir / "m.csv");
  j["train"]["learning_rate"] = "fast";
  const auto bad = run({"train", "--config", write_config(dir, j).string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("train.learning_rate") != std::string::npos);

  auto unknown = tiny_pipeline(dir / "m.csv");
  unknown["train"]["lerning_rate"] = 0.1;
  CHECK_THROWS_CODE(parse_pipeline_config(unknown, dir), ErrorCode::ConfigError);
  auto top = tiny_pipeline(dir / "m.csv");
  top["trainer"] = nlohmann::json::object();
  CHECK_THROWS_CODE(parse_pipeline_config(top, dir), ErrorCode::ConfigError);
  auto layers = tiny_pipeline(dir / "m.csv");
  layers["aggregator"]["num_encoder_layers"] = 1;
  CHECK_THROWS_CODE(parse_pipeline_config(layers, dir), ErrorCode::ConfigError);
  auto no_manifest = tiny_pipeline(dir / "m.csv");
  no_manifest["data"].erase("manifest");
  CHECK_THROWS_CODE(parse_pipeline_config(no_manifest, dir), ErrorCode::ConfigError);
  auto ratios = tiny_pipeline(dir / "m.csv");
  ratios["data"]["split"] = {{"ratios", {0.5, 0.5}}};
  CHECK_THROWS_CODE(parse_pipeline_config(ratios, dir), ErrorCode::ConfigError);
}

TEST_CASE("pipeline config resolves paths and merges aggregator training") {
  const auto dir = testsupport::fresh_dir("cli_config_merge");
  const auto c = parse_pipeline_config(tiny_pipeline("rel/m.csv"), dir);
  CHECK(c.data.manifest == dir / "rel" / "m.csv");
  CHECK(c.aggregator_train.max_epochs == 1);
  CHECK(c.aggregator_train.batch_size == 8); // inherited from train
  CHECK(c.aggregator.d_model == 8);
  CHECK_FALSE(c.augmentation.enabled);
}

TEST_CASE("shipped configs parse") {
  const auto root = std::filesystem::path(THYROFNA_SOURCE_DIR) / "config";
  const auto d = load_pipeline_config(root / "default.json");
  CHECK(d.train.learning_rate == 1e-4);
  CHECK(d.aggregator.num_encoder_layers == 5);
  const auto s = load_pipeline_config(root / "smoke.json");
  CHECK(s.train.max_epochs <= 15);
}

TEST_CASE("usage errors exit 1; runtime failures exit 2") {
  CHECK(run({}).code == 1);
  CHECK(run({"bogus"}).code == 1);
  CHECK(run({"infer", "--manifest", "x.csv"}).code == 1);
  CHECK(run({"train", "--config", "x.json", "--mode", "deluxe"}).code == 1);
  const auto dir = testsupport::fresh_dir("cli_exit");
  CHECK(run({"split", "--manifest", (dir / "missing.csv").string(), "--out", (dir / "o.csv").string()}).code == 2);
  CHECK(run({"--version"}).code == 0);
}

TEST_CASE("verify-tables passes on the published matrices and fails when tampered") {
  const auto dir = testsupport::fresh_dir("cli_verify");
  const auto r = run({"verify-tables", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS internal_test.macro_f1") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(std::filesystem::exists(dir / kRunManifestFile));

  auto tables = published_tables();
  tables[0].confusion.counts[0][0] -= 20;
  bool any_fail = false;
  for (const auto &c : verify_tables(tables)) {
    any_fail = any_fail || !c.pass;
  }
  CHECK(any_fail);
}

TEST_CASE("synth and split through the CLI, with run manifests") {
  const auto dir = testsupport::fresh_dir("cli_split");
  CHECK(run({"synth-corpus", "--n", "3", "--seed", "2", "--out", (dir / "c").string()}).code == 0);
  CHECK(std::filesystem::exists(dir / "c" / kRunManifestFile));
  const auto a = run({"split", "--manifest", (dir / "c" / "manifest.csv").string(), "--out", (dir / "a.csv").string(),
                      "--ratios", "0.6", "0.2", "0.2"});
  const auto b = run({"split", "--manifest", (dir / "c" / "manifest.csv").string(), "--out", (dir / "b.csv").string(),
                      "--ratios", "0.6", "0.2", "0.2"});
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(std::filesystem::exists(dir / "a.run_manifest.json"));
  const auto ra = load_manifest(dir / "a.csv");
  const auto rb = load_manifest(dir / "b.csv");
  REQUIRE(ra.size() == 9);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].split == rb[i].split);
  }
  const auto m = nlohmann::json::parse(slurp(dir / "a.run_manifest.json"));
  CHECK(m["command"] == "split");
  CHECK(m["tool_version"] == kToolVersion);
  CHECK(m["outputs"].size() == 1);
}

TEST_CASE("augment-preview expands TRAIN records only") {
  const auto dir = testsupport::fresh_dir("cli_preview");
  const auto synth = cmd_synth_corpus({2, 5, dir / "c", CorpusKind::CLUSTERS});
  CHECK_THROWS_CODE(cmd_augment_preview({synth.manifest, dir / "p", {}, 42, 1}), ErrorCode::SplitViolation);
  cmd_split({synth.manifest, dir / "split.csv", SplitSpec{}});
  CHECK(cmd_augment_preview({dir / "split.csv", dir / "p", {}, 42, 1}) == 34);
  CHECK(std::filesystem::exists(dir / "p" / "proposals.csv"));
}

TEST_CASE("train writes checkpoints, splits, schedule, and a run manifest") {
  const auto &f = fixture();
  for (const char *file : {"splits.csv", "schedule_epoch1.json", "report.json", "run_manifest.json"}) {
    CHECK(std::filesystem::exists(f.trained.run_dir / file));
  }
  CHECK(std::filesystem::exists(f.trained.basic_checkpoint / "weights.bin"));
  CHECK(std::filesystem::exists(f.trained.premium_checkpoint / "aggregator_config.json"));
  CHECK(std::filesystem::exists(f.trained.run_dir / "eval.json"));
  CHECK(f.trained.basic_report.has_value());
  CHECK(f.trained.premium_report.has_value());
  const auto m = nlohmann::json::parse(slurp(f.trained.run_dir / "run_manifest.json"));
  CHECK(m["summary"]["mode"] == "premium");
  CHECK(m["timings_seconds"].contains("train_basic"));
}

TEST_CASE("inference is label-blind and independent of worker count") {
  const auto &f = fixture();
  const auto dir = testsupport::fresh_dir("cli_infer");
  // Same images with labels scrambled or removed.
  auto records = load_manifest(f.manifest);
  auto scrambled = records;
  for (std::size_t i = 0; i < scrambled.size(); ++i) {
    scrambled[i].label = label_from_index(static_cast<int>(i % 3));
  }
  auto blank = records;
  for (auto &r : blank) {
    r.label.reset();
  }
  write_manifest(dir / "scrambled.csv", scrambled);
  write_manifest(dir / "blank.csv", blank);

  InferOptions o;
  o.checkpoint = f.trained.basic_checkpoint;
  o.manifest = dir / "scrambled.csv";
  o.out_dir = dir / "a";
  const auto a = cmd_infer(o);
  o.manifest = dir / "blank.csv";
  o.out_dir = dir / "b";
  o.workers = 3;
  o.bench = true;
  const auto b = cmd_infer(o);
  CHECK(slurp(a.predictions) == slurp(b.predictions));
  REQUIRE(b.images_per_second.has_value());
  CHECK(*b.images_per_second > 0.0);
  const auto m = nlohmann::json::parse(slurp(b.run_manifest));
  CHECK(m["bench"]["images"] == records.size());
  CHECK(m["bench"]["images_per_second"].get<double>() > 0.0);

  std::ifstream csv(a.predictions);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "id,p_benign,p_indet,p_malignant,decision");
}

TEST_CASE("premium inference, explanations, and checkpoint kind checks") {
  const auto &f = fixture();
  const auto dir = testsupport::fresh_dir("cli_premium_infer");
  InferOptions o;
  o.checkpoint = f.trained.premium_checkpoint;
  o.manifest = f.manifest;
  o.out_dir = dir / "p";
  o.mode = Mode::PREMIUM;
  o.explain = true;
  const auto r = cmd_infer(o);
  CHECK(r.ids.size() == 15);
  REQUIRE(r.composites.size() == 15);
  CHECK(std::filesystem::exists(r.composites[0]));

  o.mode = Mode::BASIC;
  o.explain = false;
  CHECK_THROWS_CODE(cmd_infer(o), ErrorCode::CheckpointMismatch);
  o.checkpoint = f.trained.basic_checkpoint;
  o.mode = Mode::PREMIUM;
  CHECK_THROWS_CODE(cmd_infer(o), ErrorCode::CheckpointMismatch);
  const auto cli = run({"infer", "--checkpoint", f.trained.basic_checkpoint.string(), "--manifest", f.manifest.string(),
                        "--out", (dir / "x").string(), "--mode", "premium"});
  CHECK(cli.code == 1);
}

TEST_CASE("premium training requires a base checkpoint") {
  const auto &f = fixture();
  TrainCommandOptions o;
  o.config = f.config;
  o.mode = Mode::PREMIUM;
  o.base_checkpoint = f.dir / "no-such-checkpoint";
  o.run_dir = testsupport::fresh_dir("cli_premium_missing");
  CHECK_THROWS_CODE(cmd_train(o), ErrorCode::MissingBaseCheckpoint);
}

TEST_CASE("runs root follows the environment") {
  CHECK(runs_root() == std::filesystem::path(std::getenv("THYROFNA_RUNS_DIR")));
}

}
