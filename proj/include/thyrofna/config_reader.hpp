#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace thyrofna {

// Typed access to one JSON object section. Every error is a ConfigError
// naming the dotted key path, e.g. "train.learning_rate".
class ConfigReader {
public:
  ConfigReader(const nlohmann::json &section, std::string path);

  bool has(const std::string &key) const;
  double number(const std::string &key, double fallback);
  long long integer(const std::string &key, long long fallback);
  std::uint64_t unsigned_integer(const std::string &key, std::uint64_t fallback);
  bool boolean(const std::string &key, bool fallback);
  std::string string(const std::string &key, const std::string &fallback);
  std::vector<int> int_list(const std::string &key, const std::vector<int> &fallback);
  std::vector<double> number_list(const std::string &key, const std::vector<double> &fallback);
  nlohmann::json raw(const std::string &key, const nlohmann::json &fallback);

  // Fails on keys that were never read.
  void finish() const;

  std::string key_path(const std::string &key) const;
  [[noreturn]] void reject(const std::string &key, const std::string &why) const;

private:
  const nlohmann::json *lookup(const std::string &key);

  const nlohmann::json &section_;
  std::string path_;
  std::set<std::string> seen_;
};

} // namespace thyrofna
