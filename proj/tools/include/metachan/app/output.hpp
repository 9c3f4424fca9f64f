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

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace metachan::app {

// Output directory or file cannot be written; exit code 4.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input CSV; exit code 5.
class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Creates dir if needed and probes that files can be created in it.
void ensure_writable_dir(const std::filesystem::path& dir);

// Writes to a temporary sibling and renames it over path.
void atomic_write(const std::filesystem::path& path, const std::string& content);

// Shortest round-trip decimal form.
std::string fmt_double(double v);

// "# key value" lines placed before a CSV column header.
std::string csv_header(const std::string& config_hash, const std::string& columns);

// Adds {"meta": {...}} identifying the tool and config.
nlohmann::json with_meta(nlohmann::json body, const std::string& config_hash);
std::string dump_json(const nlohmann::json& j);

// Binned photon counts keyed by trajectory id; steps are bin end points.
struct TraceTable {
  long long window = 0;
  std::map<int, std::vector<std::int64_t>> counts;
  std::string config_hash;  // from the file header when present
};

TraceTable read_traces_csv(const std::filesystem::path& path);

}  // namespace metachan::app
