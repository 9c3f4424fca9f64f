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

#include "metachan/app/toml.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace metachan::app {

namespace {

std::string where(int line, const std::string& key) {
  std::string s;
  if (line > 0) s += "line " + std::to_string(line);
  if (!key.empty()) s += (s.empty() ? "key '" : ", key '") + key + "'";
  return s;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : src_(text) {}

  void run(TomlDocument& doc, std::vector<std::string>& tables) {
    std::string table;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        skip_ws();
        const std::string name = parse_key();
        skip_ws();
        expect(']');
        if (std::find(tables.begin(), tables.end(), name) != tables.end())
          throw ConfigError("duplicate table [" + name + "]", line_);
        tables.push_back(name);
        table = name;
        end_of_line();
        continue;
      }
      const int key_line = line_;
      const std::string key = parse_key();
      skip_ws();
      expect('=');
      skip_ws();
      TomlValue v = parse_value();
      const std::string full = table.empty() ? key : table + "." + key;
      if (doc.has(full)) throw ConfigError("duplicate key", key_line, full);
      doc.set(full, std::move(v), key_line);
      end_of_line();
    }
  }

 private:
  bool eof() const { return pos_ >= src_.size(); }
  char peek() const { return eof() ? '\0' : src_[pos_]; }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n') {
        ++pos_;
        ++line_;
      } else {
        return;
      }
    }
  }

  // Whitespace, comments and newlines inside arrays.
  void skip_array_space() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r' || peek() == '\n') {
        if (peek() == '\n') ++line_;
        ++pos_;
      } else {
        return;
      }
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') throw ConfigError(std::string("unexpected character '") + peek() + "'", line_);
    ++pos_;
    ++line_;
  }

  void expect(char c) {
    if (peek() != c) throw ConfigError(std::string("expected '") + c + "'", line_);
    ++pos_;
  }

  std::string parse_key() {
    std::string key;
    while (!eof()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
        key += c;
        ++pos_;
      } else {
        break;
      }
    }
    if (key.empty() || key.front() == '.' || key.back() == '.') throw ConfigError("malformed key", line_);
    return key;
  }

  TomlValue parse_value() {
    TomlValue v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      v.type = TomlValue::Type::String;
      v.str = parse_string();
    } else if (c == '[') {
      v.type = TomlValue::Type::Array;
      ++pos_;
      skip_array_space();
      while (peek() != ']') {
        if (eof()) throw ConfigError("unterminated array", v.line);
        v.array.push_back(parse_value());
        skip_array_space();
        if (peek() == ',') {
          ++pos_;
          skip_array_space();
        } else if (peek() != ']') {
          throw ConfigError("expected ',' or ']' in array", line_);
        }
      }
      ++pos_;
    } else {
      std::string tok;
      while (!eof()) {
        const char t = peek();
        if (t == ',' || t == ']' || t == '#' || t == '\n' || t == '\r' || t == ' ' || t == '\t') break;
        tok += t;
        ++pos_;
      }
      if (tok == "true" || tok == "false") {
        v.type = TomlValue::Type::Boolean;
        v.boolean = tok == "true";
      } else {
        parse_number(tok, v);
      }
    }
    return v;
  }

  void parse_number(std::string tok, TomlValue& v) {
    if (tok.empty()) throw ConfigError("missing value", line_);
    tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    if (*b == '+') ++b;
    if (is_float) {
      v.type = TomlValue::Type::Float;
      auto [p, ec] = std::from_chars(b, e, v.number);
      if (ec != std::errc() || p != e || !std::isfinite(v.number))
        throw ConfigError("invalid number '" + tok + "'", line_);
    } else {
      v.type = TomlValue::Type::Integer;
      auto [p, ec] = std::from_chars(b, e, v.integer);
      if (ec != std::errc() || p != e) throw ConfigError("invalid value '" + tok + "'", line_);
    }
  }

  std::string parse_string() {
    ++pos_;
    std::string s;
    while (true) {
      if (eof() || peek() == '\n') throw ConfigError("unterminated string", line_);
      char c = src_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) throw ConfigError("unterminated string", line_);
        const char esc = src_[pos_++];
        switch (esc) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: throw ConfigError(std::string("unsupported escape '\\") + esc + "'", line_);
        }
      }
      s += c;
    }
    return s;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
};

void flatten(const TomlValue& v, std::vector<double>& out, const std::string& key) {
  if (v.type == TomlValue::Type::Array) {
    for (const auto& x : v.array) flatten(x, out, key);
  } else if (v.is_number()) {
    out.push_back(v.as_double());
  } else {
    throw ConfigError("expected numbers", v.line, key);
  }
}

}  // namespace

ConfigError::ConfigError(const std::string& msg, int line, std::string key)
    : std::runtime_error(where(line, key).empty() ? msg : where(line, key) + ": " + msg),
      line_(line),
      key_(std::move(key)) {}

TomlDocument TomlDocument::parse(const std::string& text) {
  TomlDocument doc;
  Parser(text).run(doc, doc.tables_);
  return doc;
}

TomlDocument TomlDocument::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const TomlValue* TomlDocument::find(const std::string& key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.used = true;
  return &it->second.value;
}

void TomlDocument::set(const std::string& key, TomlValue v, int line) {
  v.line = line;
  entries_[key] = TomlEntry{std::move(v), false};
  const auto dot = key.rfind('.');
  if (dot != std::string::npos) {
    const std::string table = key.substr(0, dot);
    if (!has_table(table)) tables_.push_back(table);
  }
}

double TomlDocument::get_double(const std::string& key, double fallback) {
  const TomlValue* v = find(key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError("expected a number", v->line, key);
  return v->as_double();
}

long long TomlDocument::get_int(const std::string& key, long long fallback) {
  const TomlValue* v = find(key);
  if (!v) return fallback;
  if (v->type == TomlValue::Type::Integer) return v->integer;
  if (v->type == TomlValue::Type::Float && v->number == std::floor(v->number) && std::abs(v->number) < 9e15)
    return static_cast<long long>(v->number);
  throw ConfigError("expected an integer", v->line, key);
}

bool TomlDocument::get_bool(const std::string& key, bool fallback) {
  const TomlValue* v = find(key);
  if (!v) return fallback;
  if (v->type != TomlValue::Type::Boolean) throw ConfigError("expected true or false", v->line, key);
  return v->boolean;
}

std::string TomlDocument::get_string(const std::string& key, const std::string& fallback) {
  const TomlValue* v = find(key);
  if (!v) return fallback;
  if (v->type != TomlValue::Type::String) throw ConfigError("expected a string", v->line, key);
  return v->str;
}

std::vector<double> TomlDocument::get_doubles(const std::string& key) {
  const TomlValue* v = find(key);
  if (!v) return {};
  if (v->is_number()) return {v->as_double()};
  if (v->type != TomlValue::Type::Array) throw ConfigError("expected an array of numbers", v->line, key);
  std::vector<double> out;
  for (const auto& x : v->array) {
    if (!x.is_number()) throw ConfigError("expected an array of numbers", v->line, key);
    out.push_back(x.as_double());
  }
  return out;
}

std::vector<double> TomlDocument::get_flat(const std::string& key, int* rows, int* cols) {
  const TomlValue* v = find(key);
  if (!v) return {};
  std::vector<double> out;
  flatten(*v, out, key);
  if (rows && cols) {
    *rows = 0;
    *cols = 0;
    if (v->type == TomlValue::Type::Array && !v->array.empty() && v->array.front().type == TomlValue::Type::Array) {
      *rows = static_cast<int>(v->array.size());
      *cols = static_cast<int>(v->array.front().array.size());
      for (const auto& r : v->array)
        if (static_cast<int>(r.array.size()) != *cols) throw ConfigError("ragged matrix", v->line, key);
    }
  }
  return out;
}

bool TomlDocument::has_table(const std::string& table) const {
  return std::find(tables_.begin(), tables_.end(), table) != tables_.end();
}

void TomlDocument::reject_unused() const {
  for (const auto& [key, e] : entries_)
    if (!e.used) throw ConfigError("unknown key", e.value.line, key);
}

}  // namespace metachan::app
