// Copyright 2026 The UVIP Authors.
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

#include "uvip/manifest.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "uvip/error.hpp"
#include "uvip/hash.hpp"
#include "uvip/policy.hpp"

namespace uvip {

namespace {
constexpr const char* magic = "uvip-manifest 1";
constexpr const char* config_marker = "--- config ---";
}  // namespace

std::string format_manifest(const RunManifest& m) {
  std::string out = fmt::format("{}\ntool_version = {}\ncommand = {}\nstarted_utc = {}\n", magic,
                                m.tool_version, m.command, m.started_utc);
  out += fmt::format("wall_clock_seconds = {:.3f}\n", m.wall_clock_seconds);
  for (const auto& [stage, s] : m.stage_seconds) out += fmt::format("stage.{} = {:.3f}\n", stage, s);
  for (const auto& [k, v] : m.facts) out += fmt::format("fact.{} = {}\n", k, v);
  for (const auto& [file, hash] : m.outputs) out += fmt::format("output.{} = {}\n", file, hash);
  out += config_marker;
  out += '\n';
  out += m.config;
  return out;
}

RunManifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != magic)
    fail(ErrorCode::parse, fmt::format("line 1: expected '{}'", magic));
  RunManifest m;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == config_marker) {
      std::ostringstream rest;
      rest << in.rdbuf();
      m.config = rest.str();
      return m;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) fail(ErrorCode::parse, fmt::format("line {}: expected 'key = value'", line_no));
    const std::string key = line.substr(0, eq), value = line.substr(eq + 3);
    try {
      if (key == "tool_version") m.tool_version = value;
      else if (key == "command") m.command = value;
      else if (key == "started_utc") m.started_utc = value;
      else if (key == "wall_clock_seconds") m.wall_clock_seconds = std::stod(value);
      else if (key.rfind("stage.", 0) == 0) m.stage_seconds.emplace_back(key.substr(6), std::stod(value));
      else if (key.rfind("fact.", 0) == 0) m.facts.emplace_back(key.substr(5), value);
      else if (key.rfind("output.", 0) == 0) m.outputs.emplace_back(key.substr(7), value);
      else fail(ErrorCode::parse, fmt::format("line {}: unknown key '{}'", line_no, key));
    } catch (const std::logic_error&) {
      fail(ErrorCode::parse, fmt::format("line {}: bad number '{}'", line_no, value));
    }
  }
  fail(ErrorCode::parse, fmt::format("missing '{}' section", config_marker));
}

std::vector<ManifestMismatch> verify_manifest(const std::string& manifest_path) {
  const RunManifest m = parse_manifest(read_text_file(manifest_path));
  const std::filesystem::path dir = std::filesystem::path(manifest_path).parent_path();
  std::vector<ManifestMismatch> bad;
  for (const auto& [file, hash] : m.outputs) {
    const auto path = dir / file;
    if (!std::filesystem::exists(path)) {
      bad.push_back({file, hash, ""});
      continue;
    }
    const std::string actual = git_blob_sha1(read_text_file(path.string()));
    if (actual != hash) bad.push_back({file, hash, actual});
  }
  return bad;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace uvip
