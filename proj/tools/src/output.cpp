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

#include "metachan/app/output.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "metachan/app/config.hpp"

namespace metachan::app {

namespace fs = std::filesystem;

void ensure_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory '" + dir.string() + "'");
  const fs::path probe = dir / ".metachan-write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw OutputError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

void atomic_write(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw OutputError("write failed for '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw OutputError("cannot move output into place: '" + path.string() + "'");
  }
}

std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string csv_header(const std::string& config_hash, const std::string& columns) {
  return "# metachan " + tool_version() + "\n# config_hash " + config_hash + "\n" + columns + "\n";
}

nlohmann::json with_meta(nlohmann::json body, const std::string& config_hash) {
  body["meta"] = {{"tool", "metachan"}, {"version", tool_version()}, {"config_hash", config_hash}};
  return body;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

namespace {

long long parse_int(const std::string& s, int line, const char* what) {
  long long v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw CsvError("line " + std::to_string(line) + ": invalid " + what + " '" + s + "'");
  return v;
}

}  // namespace

TraceTable read_traces_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot read '" + path.string() + "'");
  TraceTable t;
  std::string row;
  int line = 0;
  bool header = false;
  std::map<int, long long> last_step;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    if (row[0] == '#') {
      std::istringstream ss(row.substr(1));
      std::string key, value;
      ss >> key >> value;
      if (key == "config_hash") t.config_hash = value;
      continue;
    }
    if (!header) {
      if (row != "trajectory_id,step,photons")
        throw CsvError("line " + std::to_string(line) + ": expected header 'trajectory_id,step,photons'");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 3) throw CsvError("line " + std::to_string(line) + ": expected 3 fields");
    const long long id = parse_int(f[0], line, "trajectory_id");
    const long long step = parse_int(f[1], line, "step");
    const long long photons = parse_int(f[2], line, "photons");
    if (id < 0 || id > 1000000000) throw CsvError("line " + std::to_string(line) + ": trajectory_id out of range");
    if (photons < 0) throw CsvError("line " + std::to_string(line) + ": negative photon count");
    auto& prev = last_step[static_cast<int>(id)];
    if (t.window == 0) {
      if (step <= 0) throw CsvError("line " + std::to_string(line) + ": steps must be positive");
      t.window = step;
    }
    if (step != prev + t.window)
      throw CsvError("line " + std::to_string(line) + ": steps must advance by one bin window (" +
                     std::to_string(t.window) + ")");
    prev = step;
    t.counts[static_cast<int>(id)].push_back(photons);
  }
  if (!header) throw CsvError("'" + path.string() + "' has no column header");
  if (t.counts.empty()) throw CsvError("'" + path.string() + "' contains no data rows");
  return t;
}

}  // namespace metachan::app
