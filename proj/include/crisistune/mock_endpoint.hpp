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

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "crisistune/completion.hpp"

namespace crisistune {

// Scripted replies for deterministic inference tests.
//
// JSON form:
//   {
//     "rules":   [{"prompt_contains": "[INST]", "responses": ["..."]}],
//     "samples": {"<sample id>": ["attempt 1", "attempt 2", ...]},
//     "ordinal": ["reply to request #0", "reply to request #1", ...],
//     "default": ["..."],
//     "fail_first": {"<sample id>": 2}
//   }
//
// A request is answered by the first rule whose substring occurs in the
// prompt, else the sample's list, else the global request ordinal, else the
// default list. List entries are picked by the sample's own request count
// (0-based) and clamped to the last entry, so replies do not depend on
// request scheduling unless "ordinal" is used. "fail_first" makes the first
// N requests for a sample fail at the transport level.
struct MockScript {
  struct Rule {
    std::string prompt_contains;
    std::vector<std::string> responses;
  };
  std::vector<Rule> rules;
  std::map<std::string, std::vector<std::string>> samples;
  std::vector<std::string> ordinal;
  std::vector<std::string> fallback;
  std::map<std::string, int> fail_first;

  static MockScript from_json(const nlohmann::json& j);
  static MockScript from_file(const std::string& path);
};

class ScriptedResponder {
 public:
  explicit ScriptedResponder(MockScript script);

  // nullopt means "fail this request at the transport level".
  std::optional<std::string> respond(const std::string& sample_id, const std::string& prompt);

  std::size_t request_count() const;
  std::size_t request_count(const std::string& sample_id) const;
  // Forgets all request counts, as if freshly constructed.
  void reset();

 private:
  MockScript script_;
  mutable std::mutex mu_;
  std::size_t total_ = 0;
  std::map<std::string, std::size_t> per_sample_;
};

// In-process backend; no sockets.
class ScriptedBackend final : public CompletionBackend {
 public:
  explicit ScriptedBackend(std::shared_ptr<ScriptedResponder> responder)
      : responder_(std::move(responder)) {}
  std::string complete(const CompletionRequest& request) override;

 private:
  std::shared_ptr<ScriptedResponder> responder_;
};

// HTTP server speaking the completion protocol HttpCompletionBackend uses.
// Scripted failures are answered with 503.
class MockCompletionServer {
 public:
  explicit MockCompletionServer(std::shared_ptr<ScriptedResponder> responder);
  ~MockCompletionServer();
  MockCompletionServer(const MockCompletionServer&) = delete;
  MockCompletionServer& operator=(const MockCompletionServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop() is called from elsewhere.
  void listen_blocking(const std::string& host, int port);
  void stop();

  int port() const noexcept { return port_; }
  std::string base_url() const;
  const ScriptedResponder& responder() const noexcept { return *responder_; }

 private:
  struct Impl;
  std::shared_ptr<ScriptedResponder> responder_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = -1;
};

}  // namespace crisistune
