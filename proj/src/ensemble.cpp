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

#include "crisistune/ensemble.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "crisistune/error.hpp"

namespace crisistune {

std::string_view to_string(VoteType v) noexcept {
  return v == VoteType::kTriple ? "TRIPLE" : "PER_LABEL";
}

std::optional<VoteType> vote_type_from_string(std::string_view s) noexcept {
  if (s == "TRIPLE" || s == "1") return VoteType::kTriple;
  if (s == "PER_LABEL" || s == "2") return VoteType::kPerLabel;
  return std::nullopt;
}

namespace {

// Index of the winning element under the count-then-rank rule.
template <typename T, typename Eq>
std::size_t majority_index(std::span<const T> items, Eq eq) {
  std::size_t best = 0;
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j) seen = eq(items[j], items[i]);
    if (seen) continue;
    std::size_t count = 0;
    for (std::size_t j = i; j < items.size(); ++j) count += eq(items[j], items[i]);
    if (count > best_count) {
      best = i;
      best_count = count;
    }
  }
  return best;
}

void require_nonempty(std::span<const PartialLabelTriple> preds) {
  if (preds.empty()) throw std::invalid_argument("vote: no predictions");
}

}  // namespace

PartialLabelTriple vote_triple(std::span<const PartialLabelTriple> preds) {
  require_nonempty(preds);
  return preds[majority_index(preds, std::equal_to<>{})];
}

PartialLabelTriple vote_per_label(std::span<const PartialLabelTriple> preds) {
  require_nonempty(preds);
  PartialLabelTriple out;
  out.event = preds[majority_index(preds, [](const auto& a, const auto& b) {
                 return a.event == b.event;
               })].event;
  out.useful = preds[majority_index(preds, [](const auto& a, const auto& b) {
                  return a.useful == b.useful;
                })].useful;
  out.aid = preds[majority_index(preds, [](const auto& a, const auto& b) {
               return a.aid == b.aid;
             })].aid;
  return out;
}

PartialLabelTriple vote(VoteType type, std::span<const PartialLabelTriple> preds) {
  return type == VoteType::kTriple ? vote_triple(preds) : vote_per_label(preds);
}

std::vector<std::string> rank_runs(std::span<const CheckpointRun> runs, const TruthTable& truths) {
  std::vector<std::string> names;
  if (runs.empty()) return names;
  for (const auto& e : leaderboard(runs, truths, runs.size())) names.push_back(e.name);
  return names;
}

Metrics ensemble_accuracy(std::span<const CheckpointRun> runs, const TruthTable& truths,
                          const EnsembleConfig& config) {
  if (config.n == 0 || config.n > config.ranking.size()) {
    throw std::invalid_argument("ensemble_accuracy: n=" + std::to_string(config.n) +
                                " outside 1.." + std::to_string(config.ranking.size()));
  }
  std::vector<const CheckpointRun*> members;
  for (std::size_t k = 0; k < config.n; ++k) {
    const CheckpointRun* found = nullptr;
    for (const auto& r : runs) {
      if (r.endpoint.name == config.ranking[k]) {
        found = &r;
        break;
      }
    }
    if (found == nullptr) throw DataError("ensemble: no run named '" + config.ranking[k] + "'");
    members.push_back(found);
  }

  // Index every member by sample id once.
  std::vector<std::unordered_map<std::string_view, const PartialLabelTriple*>> index(
      members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    for (const auto& p : members[k]->predictions) {
      index[k].emplace(p.sample_id, &p.final_parse.labels);
    }
  }

  std::vector<PartialLabelTriple> voted;
  std::vector<LabelTriple> gold;
  std::vector<PartialLabelTriple> ballot(members.size());
  for (const auto& p : members.front()->predictions) {
    for (std::size_t k = 0; k < members.size(); ++k) {
      auto it = index[k].find(p.sample_id);
      if (it == index[k].end()) {
        throw DataError("ensemble: run '" + members[k]->endpoint.name + "' has no sample '" +
                        p.sample_id + "'");
      }
      ballot[k] = *it->second;
    }
    auto truth = truths.find(p.sample_id);
    if (truth == truths.end()) {
      throw DataError("ensemble: no ground truth for sample '" + p.sample_id + "'");
    }
    voted.push_back(vote(config.vote, ballot));
    gold.push_back(truth->second);
  }
  return score_predictions(voted, gold);
}

std::vector<SweepPoint> sweep_n(std::span<const CheckpointRun> runs, const TruthTable& truths,
                                std::size_t n_max) {
  std::vector<SweepPoint> points;
  EnsembleConfig config;
  config.ranking = rank_runs(runs, truths);
  const std::size_t top = std::min(n_max, config.ranking.size());
  for (std::size_t n = 1; n <= top; ++n) {
    for (VoteType v : {VoteType::kTriple, VoteType::kPerLabel}) {
      config.n = n;
      config.vote = v;
      points.push_back({n, v, ensemble_accuracy(runs, truths, config)});
    }
  }
  return points;
}

std::optional<SweepPoint> sweep_argmax(std::span<const SweepPoint> points, VoteType vote) {
  std::optional<SweepPoint> best;
  for (const auto& p : points) {
    if (p.vote != vote) continue;
    if (!best || p.metrics.overall_acc > best->metrics.overall_acc ||
        (p.metrics.overall_acc == best->metrics.overall_acc && p.n < best->n)) {
      best = p;
    }
  }
  return best;
}

void write_sweep_csv(std::span<const SweepPoint> points, std::ostream& out) {
  out << "n,vote_type,overall_acc,event_acc,useful_acc,aid_acc\n";
  char buf[160];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.6f,%.6f,%.6f,%.6f\n", p.n,
                  std::string(to_string(p.vote)).c_str(), p.metrics.overall_acc,
                  p.metrics.event_acc, p.metrics.useful_acc, p.metrics.aid_acc);
    out << buf;
  }
}

}  // namespace crisistune
