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

#include "crisistune/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "crisistune/error.hpp"

namespace crisistune {

TruthTable make_truth_table(const std::vector<TweetRecord>& records) {
  TruthTable t;
  t.reserve(records.size());
  for (const auto& r : records) t.emplace(r.id, r.truth);
  return t;
}

Metrics score_predictions(std::span<const PartialLabelTriple> preds,
                          std::span<const LabelTriple> truths) {
  if (preds.size() != truths.size()) {
    throw DataError("score_predictions: " + std::to_string(preds.size()) + " predictions vs " +
                    std::to_string(truths.size()) + " truths");
  }
  if (preds.empty()) throw DataError("score_predictions: no samples");

  std::size_t overall = 0, event = 0, useful = 0, aid = 0, invalid = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const MatchResult m = compare(preds[i], truths[i]);
    overall += m.overall_correct;
    event += m.event_correct;
    useful += m.useful_correct;
    aid += m.aid_correct;
    invalid += !preds[i].complete();
  }
  const double n = static_cast<double>(preds.size());
  Metrics out;
  out.overall_acc = static_cast<double>(overall) / n;
  out.event_acc = static_cast<double>(event) / n;
  out.useful_acc = static_cast<double>(useful) / n;
  out.aid_acc = static_cast<double>(aid) / n;
  out.invalid_fraction = static_cast<double>(invalid) / n;
  out.n_samples = preds.size();
  return out;
}

Metrics score_run(const CheckpointRun& run, const TruthTable& truths) {
  std::vector<PartialLabelTriple> preds;
  std::vector<LabelTriple> gold;
  preds.reserve(run.predictions.size());
  gold.reserve(run.predictions.size());
  for (const auto& p : run.predictions) {
    auto it = truths.find(p.sample_id);
    if (it == truths.end()) {
      throw DataError("run '" + run.endpoint.name + "': no ground truth for sample '" +
                      p.sample_id + "'");
    }
    preds.push_back(p.final_parse.labels);
    gold.push_back(it->second);
  }
  return score_predictions(preds, gold);
}

void sort_leaderboard(std::vector<LeaderboardEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
                     if (a.metrics.overall_acc != b.metrics.overall_acc) {
                       return a.metrics.overall_acc > b.metrics.overall_acc;
                     }
                     return a.name < b.name;
                   });
}

std::vector<LeaderboardEntry> leaderboard(std::span<const CheckpointRun> runs,
                                          const TruthTable& truths, std::size_t k) {
  if (k == 0) throw std::invalid_argument("leaderboard: k must be >= 1");
  std::vector<LeaderboardEntry> entries;
  entries.reserve(runs.size());
  for (const auto& r : runs) entries.push_back({r.endpoint.name, score_run(r, truths)});
  sort_leaderboard(entries);
  if (entries.size() > k) entries.resize(k);
  return entries;
}

double decrease_ratio(double acc_same_template, double acc_diff_template) {
  if (!(acc_same_template > 0.0)) {
    throw std::invalid_argument("decrease_ratio: same-template accuracy must be > 0");
  }
  return (acc_same_template - acc_diff_template) / acc_same_template;
}

double relative_performance(double a, double b) {
  if (b == 0.0) throw std::invalid_argument("relative_performance: reference is 0");
  return a / b;
}

double relative_improvement(double a, double b) {
  if (b == 0.0) throw std::invalid_argument("relative_improvement: reference is 0");
  return (a - b) / b;
}

double to_percent_1dp(double ratio) {
  // The epsilon keeps values like 0.25 (stored as 0.2499999...) on the
  // intended side of the half-up boundary.
  return std::floor(ratio * 1000.0 + 0.5 + 1e-9) / 10.0;
}

std::string format_percent(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", to_percent_1dp(ratio));
  return buf;
}

}  // namespace crisistune
