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

#include "crisistune/run_store.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "crisistune/error.hpp"

namespace fs = std::filesystem;

namespace crisistune {

std::string manifest_timestamp() {
  std::time_t t = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
    t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "': " + ec.message());
}

nlohmann::ordered_json partial_to_json(const PartialLabelTriple& t) {
  nlohmann::ordered_json j;
  j["event"] = t.event ? nlohmann::ordered_json(*t.event) : nlohmann::ordered_json(nullptr);
  j["useful"] = t.useful ? nlohmann::ordered_json(*t.useful) : nlohmann::ordered_json(nullptr);
  j["aid"] = t.aid ? nlohmann::ordered_json(*t.aid) : nlohmann::ordered_json(nullptr);
  return j;
}

PartialLabelTriple partial_from_json(const nlohmann::json& j) {
  PartialLabelTriple t;
  if (j.contains("event") && j["event"].is_string()) t.event = j["event"].get<std::string>();
  if (j.contains("useful") && j["useful"].is_boolean()) t.useful = j["useful"].get<bool>();
  if (j.contains("aid") && j["aid"].is_string()) t.aid = j["aid"].get<std::string>();
  return t;
}

void write_run_lines(const CheckpointRun& run, std::ostream& out) {
  for (const auto& p : run.predictions) {
    nlohmann::ordered_json line;
    line["sample_id"] = p.sample_id;
    auto attempts = nlohmann::ordered_json::array();
    for (const auto& a : p.attempts) {
      nlohmann::ordered_json aj;
      aj["raw"] = a.raw;
      aj["transport_error"] = a.transport_error;
      attempts.push_back(std::move(aj));
    }
    line["attempts"] = std::move(attempts);
    auto final_j = partial_to_json(p.final_parse.labels);
    final_j["valid"] = p.final_parse.valid;
    line["final"] = std::move(final_j);
    line["attempts_used"] = p.attempts_used();
    out << line.dump() << '\n';
  }
}

nlohmann::ordered_json endpoint_to_json(const EndpointConfig& e) {
  nlohmann::ordered_json j;
  j["name"] = e.name;
  j["base_url"] = e.base_url;
  j["model"] = e.model;
  j["temperature"] = e.temperature;
  j["max_new_tokens"] = e.max_new_tokens;
  j["request_timeout_ms"] = e.request_timeout.count();
  j["max_concurrency"] = e.max_concurrency;
  j["transport_retries"] = e.transport_retries;
  if (e.adaptation) j["adaptation"] = to_string(*e.adaptation);
  if (e.lora_rank) j["lora_rank"] = *e.lora_rank;
  if (e.epoch) j["epoch"] = *e.epoch;
  if (!e.foundation.empty()) j["foundation"] = e.foundation;
  return j;
}

EndpointConfig endpoint_from_json(const nlohmann::json& j, const EndpointConfig& base) {
  EndpointConfig e = base;
  try {
    e.name = j.value("name", e.name);
    e.base_url = j.value("base_url", e.base_url);
    e.model = j.value("model", e.model);
    e.temperature = j.value("temperature", e.temperature);
    e.max_new_tokens = j.value("max_new_tokens", e.max_new_tokens);
    e.request_timeout =
        std::chrono::milliseconds(j.value("request_timeout_ms", e.request_timeout.count()));
    e.max_concurrency = j.value("max_concurrency", e.max_concurrency);
    e.transport_retries = j.value("transport_retries", e.transport_retries);
    if (j.contains("adaptation")) {
      e.adaptation = adaptation_target_from_string(j["adaptation"].get<std::string>());
      if (!e.adaptation) throw DataError("unknown adaptation target in endpoint '" + e.name + "'");
    }
    if (j.contains("lora_rank")) e.lora_rank = j["lora_rank"].get<int>();
    if (j.contains("epoch")) e.epoch = j["epoch"].get<double>();
    e.foundation = j.value("foundation", e.foundation);
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("endpoint config: ") + ex.what());
  }
  return e;
}

std::vector<EndpointConfig> load_endpoints_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open endpoints file '" + path + "'");
  const auto j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw DataError("endpoints file '" + path + "' is not valid JSON");

  EndpointConfig defaults;
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    if (j.contains("defaults")) defaults = endpoint_from_json(j["defaults"]);
    if (!j.contains("endpoints")) throw DataError(path + ": missing 'endpoints'");
    list = &j["endpoints"];
  }
  if (!list->is_array()) throw DataError(path + ": 'endpoints' must be an array");
  std::vector<EndpointConfig> out;
  for (const auto& item : *list) {
    out.push_back(endpoint_from_json(item, defaults));
    validate_endpoint(out.back());
  }
  return out;
}

RunStore::RunStore(fs::path dir, RunContext context)
    : dir_(std::move(dir)), context_(std::move(context)) {}

std::string RunStore::stem(const std::string& endpoint_name, TemplateId template_id) {
  if (template_id == TemplateId::kMulti) return endpoint_name;
  return endpoint_name + "." + std::string(to_string(template_id));
}

fs::path RunStore::run_path(const std::string& stem) const { return dir_ / (stem + ".jsonl"); }

fs::path RunStore::manifest_path(const std::string& stem) const {
  return dir_ / (stem + ".manifest.json");
}

bool RunStore::has(const std::string& endpoint_name, TemplateId template_id) const {
  const std::string s = stem(endpoint_name, template_id);
  return fs::exists(manifest_path(s)) && fs::exists(run_path(s));
}

void RunStore::save(const CheckpointRun& run) const {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create '" + dir_.string() + "': " + ec.message());

  const std::string s = stem(run.endpoint.name, run.template_id);
  if (fs::exists(manifest_path(s))) {
    throw IoError("run manifest '" + manifest_path(s).string() + "' already exists");
  }

  std::ostringstream lines;
  write_run_lines(run, lines);
  write_file_atomically(run_path(s), lines.str());

  nlohmann::ordered_json m;
  m["artifact_version"] = kArtifactVersion;
  m["created"] = manifest_timestamp();
  m["endpoint"] = endpoint_to_json(run.endpoint);
  m["template"] = to_string(run.template_id);
  m["template_digest"] = templates_digest();
  m["records_path"] = context_.records_path;
  m["records_digest"] = context_.records_digest;
  m["n_samples"] = run.predictions.size();
  m["one_shot_invalid_fraction"] = run.one_shot_invalid_fraction;
  m["excluded_from_regeneration"] = run.excluded_from_regeneration;
  m["requests_issued"] = run.requests_issued();
  m["run_file"] = run_path(s).filename().string();
  write_file_atomically(manifest_path(s), m.dump(2) + "\n");
}

nlohmann::json RunStore::load_manifest(const std::string& stem) const {
  std::ifstream in(manifest_path(stem));
  if (!in) throw IoError("cannot open '" + manifest_path(stem).string() + "'");
  auto j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw DataError("'" + manifest_path(stem).string() + "' is not valid JSON");
  return j;
}

CheckpointRun RunStore::load(const std::string& stem) const {
  const auto m = load_manifest(stem);
  CheckpointRun run;
  try {
    run.endpoint = endpoint_from_json(m.at("endpoint"));
    const auto tid = template_from_string(m.at("template").get<std::string>());
    if (!tid) throw DataError("unknown template in manifest");
    run.template_id = *tid;
    run.one_shot_invalid_fraction = m.at("one_shot_invalid_fraction").get<double>();
    run.excluded_from_regeneration = m.at("excluded_from_regeneration").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path(stem).string() + ": " + e.what());
  }

  std::ifstream in(run_path(stem), std::ios::binary);
  if (!in) throw IoError("cannot open '" + run_path(stem).string() + "'");
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      SamplePrediction p;
      p.sample_id = j.at("sample_id").get<std::string>();
      int index = 1;
      for (const auto& a : j.at("attempts")) {
        GenerationAttempt att;
        att.sample_id = p.sample_id;
        att.attempt_index = index++;
        att.raw = a.at("raw").get<std::string>();
        att.transport_error = a.value("transport_error", false);
        att.parsed = parse_response(att.raw);
        p.attempts.push_back(std::move(att));
      }
      const auto& f = j.at("final");
      p.final_parse.raw = p.attempts.empty() ? std::string() : p.attempts.back().raw;
      p.final_parse.labels = partial_from_json(f);
      p.final_parse.valid = p.final_parse.labels.complete();
      run.predictions.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(run_path(stem).string() + " line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return run;
}

std::vector<std::string> RunStore::list_stems() const {
  std::vector<std::string> stems;
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) return stems;
  constexpr std::string_view kSuffix = ".manifest.json";
  for (const auto& entry : fs::directory_iterator(dir_)) {
    const std::string name = entry.path().filename().string();
    if (name.size() <= kSuffix.size() ||
        name.compare(name.size() - kSuffix.size(), kSuffix.size(), kSuffix) != 0) {
      continue;
    }
    const std::string s = name.substr(0, name.size() - kSuffix.size());
    if (fs::exists(run_path(s))) stems.push_back(s);
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

}  // namespace crisistune
