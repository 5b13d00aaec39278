// SPDX-License-Identifier: Apache-2.0
#include "config_reader.hpp"

#include <cmath>
#include <limits>

namespace pld::cli {

Json parse_config_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": JSON syntax error: " + e.what());
  }
}

ObjectReader::ObjectReader(const Json& object, std::string path)
    : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) {
    throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected an object");
  }
}

std::string ObjectReader::field(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

void ObjectReader::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(field(key) + ": " + message);
}

bool ObjectReader::has(const std::string& key) const { return object_.contains(key); }

const Json& ObjectReader::raw(const std::string& key) {
  seen_.insert(key);
  return object_.at(key);
}

double ObjectReader::number(const std::string& key) {
  if (!has(key)) fail(key, "required number is missing");
  const Json& v = raw(key);
  if (!v.is_number()) fail(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(key, "must be finite");
  resolved_[key] = d;
  return d;
}

double ObjectReader::number(const std::string& key, double fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  return number(key);
}

std::optional<double> ObjectReader::optional_number(const std::string& key) {
  if (!has(key)) return std::nullopt;
  return number(key);
}

std::uint64_t ObjectReader::unsigned_integer(const std::string& key) {
  if (!has(key)) fail(key, "required integer is missing");
  const Json& v = raw(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    fail(key, "expected a non-negative integer");
  }
  const auto u = v.get<std::uint64_t>();
  resolved_[key] = u;
  return u;
}

std::uint64_t ObjectReader::unsigned_integer(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  return unsigned_integer(key);
}

bool ObjectReader::boolean(const std::string& key, bool fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  const Json& v = raw(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  resolved_[key] = v.get<bool>();
  return v.get<bool>();
}

std::string ObjectReader::string(const std::string& key) {
  if (!has(key)) fail(key, "required string is missing");
  const Json& v = raw(key);
  if (!v.is_string()) fail(key, "expected a string");
  resolved_[key] = v.get<std::string>();
  return v.get<std::string>();
}

std::string ObjectReader::string(const std::string& key, const std::string& fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  return string(key);
}

std::vector<double> ObjectReader::number_list(const std::string& key) {
  if (!has(key)) fail(key, "required list is missing");
  const Json& v = raw(key);
  if (!v.is_array()) fail(key, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
    if (!std::isfinite(out.back())) fail(key + "[" + std::to_string(i) + "]", "must be finite");
  }
  resolved_[key] = out;
  return out;
}

std::vector<double> ObjectReader::number_list(const std::string& key,
                                              const std::vector<double>& fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  return number_list(key);
}

std::vector<std::vector<double>> ObjectReader::matrix(const std::string& key) {
  if (!has(key)) fail(key, "required matrix is missing");
  const Json& v = raw(key);
  if (!v.is_array() || v.empty()) fail(key, "expected a non-empty list of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string row_key = key + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != v.size()) fail(row_key, "expected a square matrix row");
    std::vector<double> row;
    for (std::size_t j = 0; j < v[i].size(); ++j) {
      if (!v[i][j].is_number()) fail(row_key + "[" + std::to_string(j) + "]", "expected a number");
      row.push_back(v[i][j].get<double>());
    }
    out.push_back(std::move(row));
  }
  resolved_[key] = out;
  return out;
}

ObjectReader ObjectReader::object(const std::string& key) {
  if (!has(key)) fail(key, "required object is missing");
  const Json& v = raw(key);
  if (!v.is_object()) fail(key, "expected an object");
  return ObjectReader(v, field(key));
}

void ObjectReader::set_resolved(const std::string& key, Json value) {
  resolved_[key] = std::move(value);
}

Json ObjectReader::finish() {
  std::string unknown;
  for (const auto& [key, value] : object_.items()) {
    if (!seen_.count(key)) unknown += (unknown.empty() ? "" : ", ") + field(key);
  }
  if (!unknown.empty()) throw ConfigError("unknown key(s): " + unknown);
  return resolved_;
}

}  // namespace pld::cli
