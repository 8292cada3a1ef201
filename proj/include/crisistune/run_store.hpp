// Copyright 2026 The crisistune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "crisistune/inference.hpp"

namespace crisistune {

inline constexpr std::string_view kArtifactVersion = "0.3.1";

// Where the test records for a batch of runs came from; copied into every
// run manifest so reports can reload the ground truth.
struct RunContext {
  std::string records_path;
  std::string records_digest;
};

// Persists runs as
//   <dir>/<stem>.jsonl          one line per sample (see write_run_lines)
//   <dir>/<stem>.manifest.json  endpoint config, template, run statistics
// where <stem> is the endpoint name for T4 runs and "<name>.<TEMPLATE>"
// otherwise. The manifest is written last and never overwritten, so a run
// counts as complete exactly when its manifest exists.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir, RunContext context = {});

  static std::string stem(const std::string& endpoint_name, TemplateId template_id);

  bool has(const std::string& endpoint_name, TemplateId template_id) const;
  void save(const CheckpointRun& run) const;
  CheckpointRun load(const std::string& stem) const;
  nlohmann::json load_manifest(const std::string& stem) const;
  // Stems of all complete runs, sorted.
  std::vector<std::string> list_stems() const;

  std::filesystem::path run_path(const std::string& stem) const;
  std::filesystem::path manifest_path(const std::string& stem) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  RunContext context_;
};

// {"sample_id", "attempts": [{"raw", "transport_error"}], "final": {...},
//  "attempts_used"} per line, in prediction order. Contains nothing that
// depends on timing or scheduling.
void write_run_lines(const CheckpointRun& run, std::ostream& out);

nlohmann::ordered_json partial_to_json(const PartialLabelTriple& t);
PartialLabelTriple partial_from_json(const nlohmann::json& j);

nlohmann::ordered_json endpoint_to_json(const EndpointConfig& e);
// Missing fields take the defaults of `base`.
EndpointConfig endpoint_from_json(const nlohmann::json& j, const EndpointConfig& base = {});

// {"defaults": {...}, "endpoints": [{...}, ...]} or a bare array of endpoints.
std::vector<EndpointConfig> load_endpoints_file(const std::string& path);

// ISO-8601 UTC. Uses SOURCE_DATE_EPOCH when set so outputs are reproducible.
std::string manifest_timestamp();

// Writes via a temporary file and rename.
void write_file_atomically(const std::filesystem::path& path, const std::string& content);

}  // namespace crisistune
