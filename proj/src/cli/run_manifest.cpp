#include "thyrofna/cli/run_manifest.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/rng.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>

namespace thyrofna::cli {

std::string bytes_digest(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string file_digest(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::IoFailure, "cannot read " + path.string() + " for digest");
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes_digest(bytes);
}

std::filesystem::path runs_root() {
  const char *env = std::getenv("THYROFNA_RUNS_DIR");
  return env != nullptr && *env != '\0' ? std::filesystem::path(env) : std::filesystem::path("runs");
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

void RunManifest::add_input(const std::filesystem::path &path) {
  inputs_.push_back({{"path", path.string()}, {"fnv1a64", file_digest(path)}});
}

void RunManifest::add_output(const std::filesystem::path &path) { add_output(path, file_digest(path)); }

void RunManifest::add_output(const std::filesystem::path &path, std::string digest) {
  outputs_.push_back({{"path", path.string()}, {"fnv1a64", std::move(digest)}});
}

void RunManifest::add_timing(const std::string &name, double seconds) { timings_[name] = seconds; }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j = {{"command", command_},  {"tool_version", kToolVersion}, {"config", config_},
                      {"inputs", inputs_},    {"outputs", outputs_},         {"timings_seconds", timings_}};
  for (const auto &[key, value] : extra_.items()) {
    j[key] = value;
  }
  return j;
}

nlohmann::json RunManifest::output_digests() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto &o : outputs_) {
    out[std::filesystem::path(o.at("path").get<std::string>()).filename().string()] = o.at("fnv1a64");
  }
  return out;
}

std::filesystem::path RunManifest::write(const std::filesystem::path &dir, const std::string &file_name) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / file_name;
  std::ofstream out(path);
  if (!out || !(out << to_json().dump(2) << '\n')) {
    fail(ErrorCode::IoFailure, "cannot write " + path.string());
  }
  return path;
}

} // namespace thyrofna::cli
