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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "crisistune/lora.hpp"

namespace crisistune {

// One checkpoint served behind a completion endpoint.
struct EndpointConfig {
  std::string name;      // unique per experiment, e.g. "Chat_Lora_32_1"
  std::string base_url;  // "http://host:port[/prefix]"; requests go to <prefix>/completions
  std::string model;     // sent as "model"; empty means use name
  double temperature = 0.7;
  int max_new_tokens = 256;
  std::chrono::milliseconds request_timeout{30000};
  int max_concurrency = 1;
  int transport_retries = 2;  // extra tries per attempt after a transport failure

  // Descriptive metadata carried into run manifests.
  std::optional<AdaptationTarget> adaptation;
  std::optional<int> lora_rank;
  std::optional<double> epoch;
  std::string foundation;  // e.g. "base", "chat"
};

// Throws DataError when a field is out of range or the name is not usable as
// a file stem ([A-Za-z0-9._+@-], not starting with '.').
void validate_endpoint(const EndpointConfig& e);

// Network failure, timeout, non-2xx status or an undecodable body. Distinct
// from a well-formed completion whose content fails to parse.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompletionRequest {
  std::string sample_id;
  std::string prompt;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  // Returns the completion text only (no prompt echo). Must be safe to call
  // concurrently. Throws TransportError.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

// POST {"model", "prompt", "temperature", "max_tokens"} as JSON. The reply
// text is read from choices[0].text, choices[0].message.content or a
// top-level "content" string, in that order. The sample id travels in the
// X-Sample-Id header; CRISISTUNE_API_TOKEN, when set, is sent as a bearer
// token.
class HttpCompletionBackend final : public CompletionBackend {
 public:
  explicit HttpCompletionBackend(EndpointConfig endpoint);
  std::string complete(const CompletionRequest& request) override;

  const std::string& scheme_host_port() const noexcept { return origin_; }
  const std::string& path() const noexcept { return path_; }

 private:
  EndpointConfig endpoint_;
  std::string origin_;
  std::string path_;
  std::string auth_token_;
};

// Splits "http://h:p/prefix" into origin and request path. Throws DataError
// for unsupported schemes.
std::pair<std::string, std::string> split_completion_url(std::string_view base_url);

// Reads the completion text out of a response body; nullopt if none found.
std::optional<std::string> extract_completion_text(std::string_view body);

}  // namespace crisistune
