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

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "crisistune/labels.hpp"

namespace crisistune {

enum class TemplateId {
  kEvent,       // type 1: event type only
  kUseful,      // type 2: useful only
  kAid,         // type 3: humanitarian aid type only
  kMulti,       // type 4: all three labels
  kMultiInst,   // type 5: all three labels, [INST] chat framing
};

inline constexpr std::array<TemplateId, 5> kAllTemplates = {
    TemplateId::kEvent, TemplateId::kUseful, TemplateId::kAid, TemplateId::kMulti,
    TemplateId::kMultiInst};

inline constexpr std::array<TemplateId, 4> kTrainingTemplates = {
    TemplateId::kEvent, TemplateId::kUseful, TemplateId::kAid, TemplateId::kMulti};

// "T1_EVENT" ... "T5_MULTI_INST".
std::string_view to_string(TemplateId id) noexcept;
std::optional<TemplateId> template_from_string(std::string_view name) noexcept;

// Which label fields a template asks for / encodes.
struct TemplateFields {
  bool event = false;
  bool useful = false;
  bool aid = false;
};
TemplateFields template_fields(TemplateId id) noexcept;

inline constexpr std::string_view kTextPlaceholder = "{text}";
inline constexpr std::string_view kResponsePlaceholder = "{REPOSE}";
inline constexpr std::string_view kEndOfSequence = "</s>";

// Full template as stored in templates/typeN.txt (without the file's final
// newline).
std::string_view template_body(TemplateId id) noexcept;

struct RenderedPrompt {
  TemplateId template_id{};
  std::string text_slot;
  std::string body;
};

// Everything before the response placeholder, with the tweet text inserted.
// T1-T4 prompts end with "### Response:\n"; T5 ends with "[/INST]\n".
RenderedPrompt render_prompt(TemplateId id, std::string_view tweet_text);

// JSON-shaped supervised target for the fields the template encodes, e.g.
// {"event type": "HURRICANE", "useful": true, "humanitarian aid type": "..."}.
std::string render_target(TemplateId id, const LabelTriple& truth);

// Prompt + target + the template's end-of-sequence tail, as used for
// fine-tuning export.
std::string render_training_text(TemplateId id, std::string_view tweet_text,
                                 const LabelTriple& truth);

// SHA-256 over the five template bodies, hex encoded.
std::string templates_digest();

}  // namespace crisistune
