#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace thyrofna::cli {

inline constexpr const char *kToolVersion = "0.1.0";
inline constexpr const char *kRunManifestFile = "run_manifest.json";

// 16 hex digits of FNV-1a over the file's bytes.
std::string file_digest(const std::filesystem::path &path);
std::string bytes_digest(std::string_view bytes);

// Root for run directories: $THYROFNA_RUNS_DIR, else "runs".
std::filesystem::path runs_root();

// One record per CLI invocation: command, config snapshot, input and output
// digests, timings, tool version.
class RunManifest {
public:
  explicit RunManifest(std::string command);

  void set_config(nlohmann::json snapshot) { config_ = std::move(snapshot); }
  void add_input(const std::filesystem::path &path);
  void add_output(const std::filesystem::path &path);
  // For outputs whose bytes include timings: digest computed by the caller.
  void add_output(const std::filesystem::path &path, std::string digest);
  void add_timing(const std::string &name, double seconds);
  void set(const std::string &key, nlohmann::json value) { extra_[key] = std::move(value); }

  nlohmann::json to_json() const;
  // Writes <dir>/<file_name> and returns its path.
  std::filesystem::path write(const std::filesystem::path &dir,
                              const std::string &file_name = kRunManifestFile) const;

  // Digests excluding timings; equal across reruns with identical inputs.
  nlohmann::json output_digests() const;

private:
  std::string command_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json timings_ = nlohmann::json::object();
  nlohmann::json extra_ = nlohmann::json::object();
};

} // namespace thyrofna::cli
