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

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crisistune/completion.hpp"
#include "crisistune/labels.hpp"
#include "crisistune/response_parser.hpp"
#include "crisistune/templates.hpp"

namespace crisistune {

inline constexpr int kMaxAttempts = 5;
// A checkpoint whose one-shot invalid fraction exceeds this is excluded from
// regeneration.
inline constexpr double kExclusionThreshold = 0.5;

struct GenerationAttempt {
  std::string sample_id;
  int attempt_index = 1;  // 1..kMaxAttempts
  std::string raw;
  bool transport_error = false;
  ParsedResponse parsed;
};

// Sends one prompt, retrying transport failures up to
// endpoint.transport_retries extra times. If every try fails the attempt is
// recorded with an empty raw response (which parses to all-absent) and
// transport_error set.
GenerationAttempt generate_once(CompletionBackend& backend, const EndpointConfig& endpoint,
                                const std::string& sample_id, const RenderedPrompt& prompt,
                                int attempt_index = 1);

struct SamplePrediction {
  std::string sample_id;
  std::vector<GenerationAttempt> attempts;  // in order; attempts.size() == attempts_used()
  ParsedResponse final_parse;               // parse of the stopping attempt

  int attempts_used() const noexcept { return static_cast<int>(attempts.size()); }
};

// Generates until the parse is valid or kMaxAttempts attempts have been made.
// Fields are never merged across attempts. When `first` is given it counts as
// attempt 1. Requires a T4 or T5 prompt (std::invalid_argument otherwise).
SamplePrediction generate_with_regeneration(CompletionBackend& backend,
                                            const EndpointConfig& endpoint,
                                            const std::string& sample_id,
                                            const RenderedPrompt& prompt,
                                            std::optional<GenerationAttempt> first = std::nullopt);

struct CheckpointRun {
  EndpointConfig endpoint;
  TemplateId template_id = TemplateId::kMulti;
  std::vector<SamplePrediction> predictions;  // test-set order
  double one_shot_invalid_fraction = 0.0;
  bool excluded_from_regeneration = false;

  const SamplePrediction* find(const std::string& sample_id) const noexcept;
  std::size_t requests_issued() const noexcept;
};

// Phase 1: one generation per sample. If more than half are invalid the run
// is excluded and phase-1 parses are final. Otherwise invalid samples are
// regenerated (phase-1 output is attempt 1). Up to endpoint.max_concurrency
// requests are in flight; the result does not depend on scheduling.
CheckpointRun run_checkpoint(CompletionBackend& backend, const EndpointConfig& endpoint,
                             const std::vector<TweetRecord>& test_set, TemplateId template_id);

using BackendFactory = std::function<std::unique_ptr<CompletionBackend>(const EndpointConfig&)>;

// Default factory: HttpCompletionBackend.
BackendFactory http_backend_factory();

class RunStore;

// One run per endpoint. With a store, runs already persisted for
// (endpoint, template) are loaded instead of re-run, and each new run is
// persisted as soon as it completes. Throws DataError on duplicate names.
std::vector<CheckpointRun> run_experiment(const std::vector<EndpointConfig>& endpoints,
                                          const std::vector<TweetRecord>& test_set,
                                          TemplateId template_id, const BackendFactory& factory,
                                          RunStore* store = nullptr);

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace crisistune
