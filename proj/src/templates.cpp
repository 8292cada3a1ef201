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

#include "crisistune/templates.hpp"

#include <cassert>
#include <string>

#include <json.hpp>

#include "crisistune/digest.hpp"

namespace crisistune {
namespace {

#include "crisistune/template_data.inc"

std::string_view strip_final_newline(std::string_view s) {
  if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
  return s;
}

struct TemplateName {
  TemplateId id;
  std::string_view name;
};

constexpr std::array<TemplateName, 5> kNames = {{
    {TemplateId::kEvent, "T1_EVENT"},
    {TemplateId::kUseful, "T2_USEFUL"},
    {TemplateId::kAid, "T3_AID"},
    {TemplateId::kMulti, "T4_MULTI"},
    {TemplateId::kMultiInst, "T5_MULTI_INST"},
}};

std::string json_string(std::string_view s) {
  return nlohmann::json(std::string(s)).dump();
}

}  // namespace

std::string_view to_string(TemplateId id) noexcept {
  for (const auto& n : kNames) {
    if (n.id == id) return n.name;
  }
  return "?";
}

std::optional<TemplateId> template_from_string(std::string_view name) noexcept {
  for (const auto& n : kNames) {
    if (n.name == name) return n.id;
  }
  // Short forms: "T4", "4", "type4".
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    const std::string digit = std::to_string(i + 1);
    if (name == digit || name == "T" + digit || name == "type" + digit) return kNames[i].id;
  }
  return std::nullopt;
}

TemplateFields template_fields(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::kEvent:
      return {true, false, false};
    case TemplateId::kUseful:
      return {false, true, false};
    case TemplateId::kAid:
      return {false, false, true};
    case TemplateId::kMulti:
    case TemplateId::kMultiInst:
      return {true, true, true};
  }
  return {};
}

std::string_view template_body(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::kEvent:
      return strip_final_newline(kTemplateFile1);
    case TemplateId::kUseful:
      return strip_final_newline(kTemplateFile2);
    case TemplateId::kAid:
      return strip_final_newline(kTemplateFile3);
    case TemplateId::kMulti:
      return strip_final_newline(kTemplateFile4);
    case TemplateId::kMultiInst:
      return strip_final_newline(kTemplateFile5);
  }
  return {};
}

RenderedPrompt render_prompt(TemplateId id, std::string_view tweet_text) {
  const std::string_view body = template_body(id);
  const std::size_t response_at = body.find(kResponsePlaceholder);
  assert(response_at != std::string_view::npos);
  const std::string_view head = body.substr(0, response_at);
  const std::size_t text_at = head.find(kTextPlaceholder);
  assert(text_at != std::string_view::npos);

  RenderedPrompt out;
  out.template_id = id;
  out.text_slot = std::string(tweet_text);
  out.body.reserve(head.size() + tweet_text.size());
  out.body.append(head.substr(0, text_at));
  out.body.append(tweet_text);
  out.body.append(head.substr(text_at + kTextPlaceholder.size()));
  return out;
}

std::string render_target(TemplateId id, const LabelTriple& truth) {
  const TemplateFields f = template_fields(id);
  std::string out = "{";
  auto sep = [&] {
    if (out.size() > 1) out += ", ";
  };
  if (f.event) {
    sep();
    out += "\"event type\": " + json_string(to_string(truth.event));
  }
  if (f.useful) {
    sep();
    out += std::string("\"useful\": ") + (truth.useful ? "true" : "false");
  }
  if (f.aid) {
    sep();
    out += "\"humanitarian aid type\": " + json_string(to_string(truth.aid));
  }
  out += "}";
  return out;
}

std::string render_training_text(TemplateId id, std::string_view tweet_text,
                                 const LabelTriple& truth) {
  const std::string_view body = template_body(id);
  const std::size_t response_at = body.find(kResponsePlaceholder);
  std::string out = render_prompt(id, tweet_text).body;
  out += render_target(id, truth);
  out.append(body.substr(response_at + kResponsePlaceholder.size()));
  return out;
}

std::string templates_digest() {
  std::string all;
  for (TemplateId id : kAllTemplates) {
    all.append(template_body(id));
    all.push_back('\0');
  }
  return sha256_hex(all);
}

}  // namespace crisistune
