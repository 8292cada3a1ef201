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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crisistune/ensemble.hpp"
#include "crisistune/evaluator.hpp"
#include "crisistune/inference.hpp"

namespace crisistune {

struct StoredRun {
  std::string stem;
  CheckpointRun run;
  std::string records_path;
};

struct RunCollection {
  std::vector<StoredRun> runs;  // sorted by stem
  TruthTable truths;
};

// Loads every complete run under `dir` together with the ground truth named by
// the run manifests (or read from `records_override`). A missing directory
// yields an empty collection. Throws DataError when a manifest's records
// digest no longer matches the file or two record files disagree on a label.
RunCollection load_run_collection(const std::filesystem::path& dir,
                                  const std::optional<std::string>& records_override = {});

// Non-excluded runs made with `template_id`, in stem order.
std::vector<CheckpointRun> ensemble_pool(const RunCollection& runs, TemplateId template_id);

struct ReportOptions {
  std::size_t top_k = 10;
  std::size_t n_max = kMaxEnsembleSize;
};

struct DecreaseRow {
  std::string endpoint;
  double same_acc = 0.0;  // T4
  double diff_acc = 0.0;  // T5
  double ratio = 0.0;
};

// Endpoints that have both a T4 and a T5 run, by name.
std::vector<DecreaseRow> decrease_rows(const RunCollection& runs);

struct Report {
  std::string markdown;
  std::string metrics_csv;
  // One sweep per template that has at least one eligible run.
  std::vector<std::pair<TemplateId, std::vector<SweepPoint>>> sweeps;
};

Report build_report(const RunCollection& runs, const ReportOptions& options = {});

// Line plot of overall accuracy against n, one polyline per vote type.
std::string render_sweep_svg(std::span<const SweepPoint> points, std::string_view title);

}  // namespace crisistune
