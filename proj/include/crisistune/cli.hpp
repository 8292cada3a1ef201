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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "crisistune/ensemble.hpp"
#include "crisistune/inference.hpp"

namespace crisistune {

struct BuildOptions {
  std::string corpus;
  std::string out_dir;
  std::uint64_t seed = 42;
  std::optional<double> train_fraction;  // unset: every record becomes training data
};

struct InferOptions {
  std::string manifest;                // from `build`; names the test records
  std::optional<std::string> records;  // overrides the manifest
  std::string endpoints;
  std::string runs_dir;
  TemplateId template_id = TemplateId::kMulti;
};

struct EnsembleOptions {
  std::string runs_dir;
  std::string out;  // sweep CSV
  std::size_t n_max = kMaxEnsembleSize;
  TemplateId template_id = TemplateId::kMulti;
  std::optional<std::string> records;
};

struct ReportOptionsCli {
  std::string runs_dir;
  std::string out_dir;
  std::size_t top_k = 10;
  std::size_t n_max = kMaxEnsembleSize;
  std::optional<std::string> records;
};

struct LoraOptions {
  std::string out_dir;
  std::uint64_t seed = 1;
  std::size_t steps = 200;
  double learning_rate = 0.5;
  std::size_t rank = 8;
  std::size_t gradcheck_seeds = 100;
};

struct MockServerOptions {
  std::string script;
  std::string host = "127.0.0.1";
  int port = 8080;
};

// Each command writes its artifacts, prints a short summary to `out` and
// warnings to `err`. Failures are thrown as crisistune::Error.
void cmd_build(const BuildOptions& o, std::ostream& out);
void cmd_infer(const InferOptions& o, std::ostream& out, std::ostream& err,
               const BackendFactory& factory = http_backend_factory());
void cmd_ensemble(const EnsembleOptions& o, std::ostream& out, std::ostream& err);
void cmd_report(const ReportOptionsCli& o, std::ostream& out);
void cmd_lora(const LoraOptions& o, std::ostream& out);
void cmd_mock_server(const MockServerOptions& o, std::ostream& out);

// Parses argv, dispatches, and maps failures to exit codes
// (0 ok, 1 usage, 2 data, 3 I/O).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crisistune
