// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pld::cli {

using Json = nlohmann::ordered_json;

/// Raised for malformed configs; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses JSON text, reporting syntax errors with line and column.
Json parse_config_text(const std::string& text, const std::string& source);

/// Typed view of one JSON object. Every read records the value it resolved
/// (including defaults) into `resolved()`; finish() rejects keys that were
/// never read.
class ObjectReader {
 public:
  ObjectReader(const Json& object, std::string path);

  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  std::uint64_t unsigned_integer(const std::string& key);
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
  std::optional<double> optional_number(const std::string& key);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key);
  std::string string(const std::string& key, const std::string& fallback);
  std::vector<double> number_list(const std::string& key);
  std::vector<double> number_list(const std::string& key, const std::vector<double>& fallback);
  std::vector<std::vector<double>> matrix(const std::string& key);
  bool has(const std::string& key) const;

  /// Nested object; the caller must finish() it and store its resolved()
  /// with set_resolved().
  ObjectReader object(const std::string& key);
  void set_resolved(const std::string& key, Json value);

  const std::string& path() const { return path_; }
  std::string field(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  /// Throws ConfigError listing unknown keys. Returns the resolved object.
  Json finish();

 private:
  const Json& raw(const std::string& key);

  const Json& object_;
  std::string path_;
  std::set<std::string> seen_;
  Json resolved_ = Json::object();
};

}  // namespace pld::cli
