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

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "crisistune/inference.hpp"
#include "crisistune/labels.hpp"

namespace crisistune {

using TruthTable = std::unordered_map<std::string, LabelTriple>;

TruthTable make_truth_table(const std::vector<TweetRecord>& records);

struct Metrics {
  double overall_acc = 0.0;
  double event_acc = 0.0;
  double useful_acc = 0.0;
  double aid_acc = 0.0;
  double invalid_fraction = 0.0;  // predictions with any absent field
  std::size_t n_samples = 0;
};

// Scores aligned prediction/truth sequences. Throws DataError when the
// sequences differ in length or are empty.
Metrics score_predictions(std::span<const PartialLabelTriple> preds,
                          std::span<const LabelTriple> truths);

// Scores the final (post-regeneration) parses. Throws DataError naming the
// first sample without a truth.
Metrics score_run(const CheckpointRun& run, const TruthTable& truths);

struct LeaderboardEntry {
  std::string name;
  Metrics metrics;
};

// Top min(k, runs) by overall accuracy, descending; ties by name ascending.
// Throws std::invalid_argument if k == 0.
std::vector<LeaderboardEntry> leaderboard(std::span<const CheckpointRun> runs,
                                          const TruthTable& truths, std::size_t k);

// Same ordering over already-computed metrics.
void sort_leaderboard(std::vector<LeaderboardEntry>& entries);

// (same - different) / same. Throws std::invalid_argument if same <= 0.
double decrease_ratio(double acc_same_template, double acc_diff_template);
// a / b. Throws std::invalid_argument if b == 0.
double relative_performance(double a, double b);
// (a - b) / b. Throws std::invalid_argument if b == 0.
double relative_improvement(double a, double b);

// Ratio as a percentage rounded half-up to one decimal, e.g. 0.14518 -> 14.5.
double to_percent_1dp(double ratio);
// "14.5%"
std::string format_percent(double ratio);

}  // namespace crisistune
