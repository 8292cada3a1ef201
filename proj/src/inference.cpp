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

#include "crisistune/inference.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "crisistune/error.hpp"
#include "crisistune/run_store.hpp"

namespace crisistune {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

GenerationAttempt generate_once(CompletionBackend& backend, const EndpointConfig& endpoint,
                                const std::string& sample_id, const RenderedPrompt& prompt,
                                int attempt_index) {
  GenerationAttempt attempt;
  attempt.sample_id = sample_id;
  attempt.attempt_index = attempt_index;
  const CompletionRequest request{sample_id, prompt.body};
  for (int tries = 0; tries <= endpoint.transport_retries; ++tries) {
    try {
      attempt.raw = backend.complete(request);
      attempt.transport_error = false;
      break;
    } catch (const TransportError&) {
      attempt.raw.clear();
      attempt.transport_error = true;
    }
  }
  attempt.parsed = parse_response(attempt.raw);
  return attempt;
}

namespace {

void require_multi_label(TemplateId id) {
  if (id != TemplateId::kMulti && id != TemplateId::kMultiInst) {
    throw std::invalid_argument(std::string("inference needs a multi-label template, got ") +
                                std::string(to_string(id)));
  }
}

}  // namespace

SamplePrediction generate_with_regeneration(CompletionBackend& backend,
                                            const EndpointConfig& endpoint,
                                            const std::string& sample_id,
                                            const RenderedPrompt& prompt,
                                            std::optional<GenerationAttempt> first) {
  require_multi_label(prompt.template_id);
  SamplePrediction pred;
  pred.sample_id = sample_id;
  if (first) {
    pred.attempts.push_back(*std::move(first));
  } else {
    pred.attempts.push_back(generate_once(backend, endpoint, sample_id, prompt, 1));
  }
  while (!pred.attempts.back().parsed.valid && pred.attempts_used() < kMaxAttempts) {
    pred.attempts.push_back(
        generate_once(backend, endpoint, sample_id, prompt, pred.attempts_used() + 1));
  }
  pred.final_parse = pred.attempts.back().parsed;
  return pred;
}

const SamplePrediction* CheckpointRun::find(const std::string& sample_id) const noexcept {
  for (const auto& p : predictions) {
    if (p.sample_id == sample_id) return &p;
  }
  return nullptr;
}

std::size_t CheckpointRun::requests_issued() const noexcept {
  std::size_t n = 0;
  for (const auto& p : predictions) n += p.attempts.size();
  return n;
}

CheckpointRun run_checkpoint(CompletionBackend& backend, const EndpointConfig& endpoint,
                             const std::vector<TweetRecord>& test_set, TemplateId template_id) {
  require_multi_label(template_id);
  if (test_set.empty()) throw DataError("run_checkpoint: empty test set");
  validate_endpoint(endpoint);

  CheckpointRun run;
  run.endpoint = endpoint;
  run.template_id = template_id;
  run.predictions.resize(test_set.size());

  std::vector<RenderedPrompt> prompts;
  prompts.reserve(test_set.size());
  for (const auto& rec : test_set) prompts.push_back(render_prompt(template_id, rec.text));

  parallel_for(test_set.size(), endpoint.max_concurrency, [&](std::size_t i) {
    auto& pred = run.predictions[i];
    pred.sample_id = test_set[i].id;
    pred.attempts.push_back(generate_once(backend, endpoint, test_set[i].id, prompts[i], 1));
    pred.final_parse = pred.attempts.back().parsed;
  });

  const auto invalid = static_cast<std::size_t>(
      std::count_if(run.predictions.begin(), run.predictions.end(),
                    [](const SamplePrediction& p) { return !p.final_parse.valid; }));
  run.one_shot_invalid_fraction =
      static_cast<double>(invalid) / static_cast<double>(test_set.size());
  run.excluded_from_regeneration = run.one_shot_invalid_fraction > kExclusionThreshold;
  if (run.excluded_from_regeneration || invalid == 0) return run;

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < run.predictions.size(); ++i) {
    if (!run.predictions[i].final_parse.valid) pending.push_back(i);
  }
  parallel_for(pending.size(), endpoint.max_concurrency, [&](std::size_t k) {
    const std::size_t i = pending[k];
    auto& pred = run.predictions[i];
    pred = generate_with_regeneration(backend, endpoint, pred.sample_id, prompts[i],
                                      std::move(pred.attempts.front()));
  });
  return run;
}

BackendFactory http_backend_factory() {
  return [](const EndpointConfig& e) -> std::unique_ptr<CompletionBackend> {
    return std::make_unique<HttpCompletionBackend>(e);
  };
}

std::vector<CheckpointRun> run_experiment(const std::vector<EndpointConfig>& endpoints,
                                          const std::vector<TweetRecord>& test_set,
                                          TemplateId template_id, const BackendFactory& factory,
                                          RunStore* store) {
  std::set<std::string> names;
  for (const auto& e : endpoints) {
    validate_endpoint(e);
    if (!names.insert(e.name).second) {
      throw DataError("duplicate endpoint name '" + e.name + "'");
    }
  }

  std::vector<CheckpointRun> runs;
  runs.reserve(endpoints.size());
  for (const auto& e : endpoints) {
    if (store != nullptr && store->has(e.name, template_id)) {
      runs.push_back(store->load(RunStore::stem(e.name, template_id)));
      continue;
    }
    auto backend = factory(e);
    runs.push_back(run_checkpoint(*backend, e, test_set, template_id));
    if (store != nullptr) store->save(runs.back());
  }
  return runs;
}

}  // namespace crisistune
