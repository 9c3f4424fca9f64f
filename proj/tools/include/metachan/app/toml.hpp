// Copyright 2026 The metachan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace metachan::app {

// Raised for unparsable or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = 0, std::string key = {});
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

// Subset of TOML: [tables] (dotted names allowed), key = value, strings,
// integers, floats, booleans and (nested, possibly multi-line) arrays.
struct TomlValue {
  enum class Type { String, Integer, Float, Boolean, Array };
  Type type = Type::Integer;
  std::string str;
  long long integer = 0;
  double number = 0.0;
  bool boolean = false;
  std::vector<TomlValue> array;
  int line = 0;

  bool is_number() const { return type == Type::Integer || type == Type::Float; }
  double as_double() const { return type == Type::Integer ? static_cast<double>(integer) : number; }
};

struct TomlEntry {
  TomlValue value;
  bool used = false;
};

// Keys are "table.key"; top-level keys have no prefix.
class TomlDocument {
 public:
  static TomlDocument parse(const std::string& text);
  static TomlDocument parse_file(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const TomlValue* find(const std::string& key);
  void set(const std::string& key, TomlValue v, int line);

  double get_double(const std::string& key, double fallback);
  long long get_int(const std::string& key, long long fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);
  std::vector<double> get_doubles(const std::string& key);
  // Nested arrays are flattened in row-major order.
  std::vector<double> get_flat(const std::string& key, int* rows = nullptr, int* cols = nullptr);

  bool has_table(const std::string& table) const;
  // Throws ConfigError naming the first key nobody consumed.
  void reject_unused() const;

 private:
  std::map<std::string, TomlEntry> entries_;
  std::vector<std::string> tables_;
};

}  // namespace metachan::app
