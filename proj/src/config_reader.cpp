#include "thyrofna/config_reader.hpp"

#include "thyrofna/error.hpp"

#include <cmath>
#include <limits>

namespace thyrofna {

ConfigReader::ConfigReader(const nlohmann::json &section, std::string path)
    : section_(section), path_(std::move(path)) {
  if (!section_.is_null() && !section_.is_object()) {
    fail(ErrorCode::ConfigError, path_ + ": expected an object");
  }
}

std::string ConfigReader::key_path(const std::string &key) const {
  return path_.empty() ? key : path_ + "." + key;
}

void ConfigReader::reject(const std::string &key, const std::string &why) const {
  fail(ErrorCode::ConfigError, key_path(key) + ": " + why);
}

bool ConfigReader::has(const std::string &key) const {
  return section_.is_object() && section_.contains(key);
}

const nlohmann::json *ConfigReader::lookup(const std::string &key) {
  seen_.insert(key);
  if (!has(key)) {
    return nullptr;
  }
  return &section_.at(key);
}

double ConfigReader::number(const std::string &key, double fallback) {
  const auto *v = lookup(key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_number()) {
    reject(key, "expected a number, got " + v->dump());
  }
  const double d = v->get<double>();
  if (!std::isfinite(d)) {
    reject(key, "must be finite");
  }
  return d;
}

long long ConfigReader::integer(const std::string &key, long long fallback) {
  const auto *v = lookup(key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_number_integer()) {
    reject(key, "expected an integer, got " + v->dump());
  }
  return v->get<long long>();
}

std::uint64_t ConfigReader::unsigned_integer(const std::string &key, std::uint64_t fallback) {
  const auto *v = lookup(key);
  if (v == nullptr) {
    return fallback;
  }
  if (v->is_number_unsigned()) {
    return v->get<std::uint64_t>();
  }
  if (v->is_number_integer() && v->get<long long>() >= 0) {
    return static_cast<std::uint64_t>(v->get<long long>());
  }
  reject(key, "expected a non-negative integer, got " + v->dump());
}

bool ConfigReader::boolean(const std::string &key, bool fallback) {
  const auto *v = lookup(key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_boolean()) {
    reject(key, "expected true or false, got " + v->dump());
  }
  return v->get<bool>();
}

std::string ConfigReader::string(const std::string &key, const std::string &fallback) {
  const auto *v = lookup(key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_string()) {
    reject(key, "expected a string, got " + v->dump());
  }
  return v->get<std::string>();
}

std::vector<int> ConfigReader::int_list(const std::string &key, const std::vector<int> &fallback) {
  const auto *v = lookup(key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_array()) {
    reject(key, "expected an array of integers");
  }
  std::vector<int> out;
  for (const auto &item : *v) {
    if (!item.is_number_integer()) {
      reject(key, "expected an array of integers");
    }
    const auto n = item.get<long long>();
    if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
      reject(key, "integer out of range");
    }
    out.push_back(static_cast<int>(n));
  }
  return out;
}

std::vector<double> ConfigReader::number_list(const std::string &key,
                                              const std::vector<double> &fallback) {
  const auto *v = lookup(key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_array()) {
    reject(key, "expected an array of numbers");
  }
  std::vector<double> out;
  for (const auto &item : *v) {
    if (!item.is_number()) {
      reject(key, "expected an array of numbers");
    }
    out.push_back(item.get<double>());
  }
  return out;
}

nlohmann::json ConfigReader::raw(const std::string &key, const nlohmann::json &fallback) {
  const auto *v = lookup(key);
  return v == nullptr ? fallback : *v;
}

void ConfigReader::finish() const {
  if (!section_.is_object()) {
    return;
  }
  for (const auto &[key, value] : section_.items()) {
    if (seen_.count(key) == 0) {
      reject(key, "unknown key");
    }
  }
}

} // namespace thyrofna
