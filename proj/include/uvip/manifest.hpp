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

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace uvip {

/// Provenance record written next to every command's outputs.
struct RunManifest {
  std::string tool_version;
  std::string command;
  std::string started_utc;
  double wall_clock_seconds = 0.0;
  std::vector<std::pair<std::string, double>> stage_seconds;
  /// Extra facts about the run (fingerprint, convergence, ...).
  std::vector<std::pair<std::string, std::string>> facts;
  /// File name (relative to the manifest's directory) and git blob id.
  std::vector<std::pair<std::string, std::string>> outputs;
  /// Emitted configuration.
  std::string config;
};

std::string format_manifest(const RunManifest& m);
RunManifest parse_manifest(const std::string& text);

struct ManifestMismatch {
  std::string file;
  std::string expected;
  std::string actual;  // empty when the file is missing
};

/// Re-hashes every listed output relative to the manifest's directory.
std::vector<ManifestMismatch> verify_manifest(const std::string& manifest_path);

/// UTC timestamp in ISO 8601 form, second resolution.
std::string utc_now();

}  // namespace uvip
