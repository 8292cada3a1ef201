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

#include "crisistune/mock_endpoint.hpp"

#include <fstream>

#include <httplib.h>

#include "crisistune/error.hpp"

namespace crisistune {

MockScript MockScript::from_json(const nlohmann::json& j) {
  MockScript s;
  try {
    if (auto it = j.find("rules"); it != j.end()) {
      for (const auto& r : *it) {
        s.rules.push_back(Rule{r.at("prompt_contains").get<std::string>(),
                               r.at("responses").get<std::vector<std::string>>()});
      }
    }
    if (auto it = j.find("samples"); it != j.end()) {
      s.samples = it->get<std::map<std::string, std::vector<std::string>>>();
    }
    if (auto it = j.find("ordinal"); it != j.end()) {
      s.ordinal = it->get<std::vector<std::string>>();
    }
    if (auto it = j.find("default"); it != j.end()) {
      s.fallback = it->is_string() ? std::vector<std::string>{it->get<std::string>()}
                                   : it->get<std::vector<std::string>>();
    }
    if (auto it = j.find("fail_first"); it != j.end()) {
      s.fail_first = it->get<std::map<std::string, int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mock script: ") + e.what());
  }
  return s;
}

MockScript MockScript::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock script '" + path + "'");
  const auto j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw DataError("mock script '" + path + "' is not valid JSON");
  return from_json(j);
}

ScriptedResponder::ScriptedResponder(MockScript script) : script_(std::move(script)) {}

namespace {

const std::string& pick(const std::vector<std::string>& list, std::size_t k) {
  return list[std::min(k, list.size() - 1)];
}

}  // namespace

std::optional<std::string> ScriptedResponder::respond(const std::string& sample_id,
                                                      const std::string& prompt) {
  std::size_t ordinal = 0;
  std::size_t k = 0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    ordinal = total_++;
    k = per_sample_[sample_id]++;
  }

  if (auto it = script_.fail_first.find(sample_id);
      it != script_.fail_first.end() && k < static_cast<std::size_t>(it->second)) {
    return std::nullopt;
  }
  for (const auto& rule : script_.rules) {
    if (!rule.responses.empty() && prompt.find(rule.prompt_contains) != std::string::npos) {
      return pick(rule.responses, k);
    }
  }
  if (auto it = script_.samples.find(sample_id); it != script_.samples.end() && !it->second.empty()) {
    return pick(it->second, k);
  }
  if (ordinal < script_.ordinal.size()) return script_.ordinal[ordinal];
  if (!script_.fallback.empty()) return pick(script_.fallback, k);
  return std::string();
}

std::size_t ScriptedResponder::request_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return total_;
}

std::size_t ScriptedResponder::request_count(const std::string& sample_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = per_sample_.find(sample_id);
  return it == per_sample_.end() ? 0 : it->second;
}

void ScriptedResponder::reset() {
  std::lock_guard<std::mutex> lock(mu_);
  total_ = 0;
  per_sample_.clear();
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  auto reply = responder_->respond(request.sample_id, request.prompt);
  if (!reply) throw TransportError("scripted transport failure for '" + request.sample_id + "'");
  return *std::move(reply);
}

struct MockCompletionServer::Impl {
  httplib::Server server;
};

MockCompletionServer::MockCompletionServer(std::shared_ptr<ScriptedResponder> responder)
    : responder_(std::move(responder)), impl_(std::make_unique<Impl>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body, nullptr, /*allow_exceptions=*/false);
    if (body.is_discarded() || !body.contains("prompt") || !body["prompt"].is_string()) {
      res.status = 400;
      res.set_content(R"({"error":"expected a JSON body with a string 'prompt'"})",
                      "application/json");
      return;
    }
    const std::string sample_id = req.get_header_value("X-Sample-Id");
    auto reply = responder_->respond(sample_id, body["prompt"].get<std::string>());
    if (!reply) {
      res.status = 503;
      res.set_content(R"({"error":"scripted failure"})", "application/json");
      return;
    }
    nlohmann::ordered_json out;
    out["object"] = "text_completion";
    out["model"] = body.value("model", std::string("mock"));
    out["choices"] = nlohmann::json::array(
        {{{"index", 0}, {"text", *reply}, {"finish_reason", "stop"}}});
    res.set_content(out.dump(), "application/json");
  };
  impl_->server.Post("/v1/completions", handler);
  impl_->server.Post("/completions", handler);
}

MockCompletionServer::~MockCompletionServer() { stop(); }

int MockCompletionServer::start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
  } else {
    port_ = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) throw IoError("mock server could not bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void MockCompletionServer::listen_blocking(const std::string& host, int port) {
  host_ = host;
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("mock server could not bind " + host + ":" + std::to_string(port));
  }
  port_ = port;
  impl_->server.listen_after_bind();
}

void MockCompletionServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockCompletionServer::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_) + "/v1";
}

}  // namespace crisistune
