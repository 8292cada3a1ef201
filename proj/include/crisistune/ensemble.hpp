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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crisistune/evaluator.hpp"

namespace crisistune {

enum class VoteType {
  kTriple,    // whole (event, useful, aid) triples vote
  kPerLabel,  // each field votes independently
};

std::string_view to_string(VoteType v) noexcept;
std::optional<VoteType> vote_type_from_string(std::string_view s) noexcept;

inline constexpr std::size_t kMaxEnsembleSize = 15;

struct EnsembleConfig {
  std::size_t n = 1;
  VoteType vote = VoteType::kTriple;
  std::vector<std::string> ranking;  // checkpoint names, best first
};

// Both votes take predictions in ranking order. The most frequent value wins;
// among tied values the one predicted by the highest-ranked checkpoint wins.
// Absent fields count as a value of their own. Throw std::invalid_argument on
// empty input.
PartialLabelTriple vote_triple(std::span<const PartialLabelTriple> preds);
PartialLabelTriple vote_per_label(std::span<const PartialLabelTriple> preds);
PartialLabelTriple vote(VoteType type, std::span<const PartialLabelTriple> preds);

// Run names ordered by overall accuracy (leaderboard order).
std::vector<std::string> rank_runs(std::span<const CheckpointRun> runs, const TruthTable& truths);

// Votes the final parses of the top config.n checkpoints of config.ranking for
// every sample of the top checkpoint and scores the result. Throws DataError
// when a named run is missing or does not cover a sample, and
// std::invalid_argument when n is 0 or exceeds the ranking.
Metrics ensemble_accuracy(std::span<const CheckpointRun> runs, const TruthTable& truths,
                          const EnsembleConfig& config);

struct SweepPoint {
  std::size_t n = 0;
  VoteType vote = VoteType::kTriple;
  Metrics metrics;
};

// n = 1..min(n_max, runs.size()) for both vote types, ordered by n then
// vote type. Runs are ranked with rank_runs.
std::vector<SweepPoint> sweep_n(std::span<const CheckpointRun> runs, const TruthTable& truths,
                                std::size_t n_max = kMaxEnsembleSize);

// Smallest n reaching the best overall accuracy for `vote`; nullopt when the
// sweep has no point of that type.
std::optional<SweepPoint> sweep_argmax(std::span<const SweepPoint> points, VoteType vote);

// Header: n,vote_type,overall_acc,event_acc,useful_acc,aid_acc
void write_sweep_csv(std::span<const SweepPoint> points, std::ostream& out);

}  // namespace crisistune
