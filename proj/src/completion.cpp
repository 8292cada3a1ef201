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

#include "crisistune/completion.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "crisistune/error.hpp"

namespace crisistune {

void validate_endpoint(const EndpointConfig& e) {
  if (e.name.empty() || e.name.front() == '.') {
    throw DataError("endpoint name '" + e.name + "' is empty or starts with '.'");
  }
  for (char c : e.name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-' || c == '+' || c == '@';
    if (!ok) throw DataError("endpoint name '" + e.name + "' contains '" + c + "'");
  }
  if (!(e.temperature >= 0.0)) throw DataError(e.name + ": temperature must be >= 0");
  if (e.max_new_tokens < 1) throw DataError(e.name + ": max_new_tokens must be >= 1");
  if (e.max_concurrency < 1) throw DataError(e.name + ": max_concurrency must be >= 1");
  if (e.transport_retries < 0) throw DataError(e.name + ": transport_retries must be >= 0");
  if (e.request_timeout.count() <= 0) throw DataError(e.name + ": request_timeout must be > 0");
}

std::pair<std::string, std::string> split_completion_url(std::string_view base_url) {
  constexpr std::string_view kHttp = "http://";
  if (base_url.substr(0, kHttp.size()) != kHttp) {
    throw DataError("unsupported endpoint URL '" + std::string(base_url) +
                    "' (only http:// is supported)");
  }
  const std::size_t slash = base_url.find('/', kHttp.size());
  std::string origin(base_url.substr(0, slash));
  std::string prefix = slash == std::string_view::npos ? "" : std::string(base_url.substr(slash));
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  if (origin.size() == kHttp.size()) {
    throw DataError("endpoint URL '" + std::string(base_url) + "' has no host");
  }
  std::string path;
  if (prefix.empty()) {
    path = "/v1/completions";
  } else if (prefix.size() >= 12 && prefix.compare(prefix.size() - 12, 12, "/completions") == 0) {
    path = prefix;
  } else {
    path = prefix + "/completions";
  }
  return {std::move(origin), std::move(path)};
}

std::optional<std::string> extract_completion_text(std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  if (auto c = j.find("choices"); c != j.end() && c->is_array() && !c->empty()) {
    const auto& first = (*c)[0];
    if (auto t = first.find("text"); t != first.end() && t->is_string()) {
      return t->get<std::string>();
    }
    if (auto m = first.find("message"); m != first.end() && m->is_object()) {
      if (auto t = m->find("content"); t != m->end() && t->is_string()) {
        return t->get<std::string>();
      }
    }
  }
  if (auto t = j.find("content"); t != j.end() && t->is_string()) return t->get<std::string>();
  return std::nullopt;
}

HttpCompletionBackend::HttpCompletionBackend(EndpointConfig endpoint)
    : endpoint_(std::move(endpoint)) {
  std::tie(origin_, path_) = split_completion_url(endpoint_.base_url);
  if (const char* tok = std::getenv("CRISISTUNE_API_TOKEN"); tok != nullptr) auth_token_ = tok;
}

std::string HttpCompletionBackend::complete(const CompletionRequest& request) {
  // One client per call: httplib::Client is not safe for concurrent use.
  httplib::Client client(origin_);
  const auto timeout = endpoint_.request_timeout;
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  nlohmann::ordered_json payload;
  payload["model"] = endpoint_.model.empty() ? endpoint_.name : endpoint_.model;
  payload["prompt"] = request.prompt;
  payload["temperature"] = endpoint_.temperature;
  payload["max_tokens"] = endpoint_.max_new_tokens;

  httplib::Headers headers = {{"X-Sample-Id", request.sample_id}};
  if (!auth_token_.empty()) headers.emplace("Authorization", "Bearer " + auth_token_);

  auto res = client.Post(path_, headers, payload.dump(), "application/json");
  if (!res) {
    throw TransportError(endpoint_.name + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError(endpoint_.name + ": HTTP " + std::to_string(res->status));
  }
  auto text = extract_completion_text(res->body);
  if (!text) throw TransportError(endpoint_.name + ": response body has no completion text");
  return *std::move(text);
}

}  // namespace crisistune
