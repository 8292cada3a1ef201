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

#include <string>
#include <string_view>

#include "crisistune/labels.hpp"

namespace crisistune {

struct ParsedResponse {
  std::string raw;
  PartialLabelTriple labels;
  bool valid = false;  // all three fields present

  friend bool operator==(const ParsedResponse&, const ParsedResponse&) = default;
};

struct MatchResult {
  bool event_correct = false;
  bool useful_correct = false;
  bool aid_correct = false;
  bool overall_correct = false;
};

// Extracts (event type, useful, humanitarian aid type) from free text.
//
// 1. If a case-insensitive "Response:" header occurs (optionally preceded by
//    '#'), only the text after the last such header is scanned.
// 2. The scanned text is read as a sequence of `key: value` pairs, tolerant
//    of JSON quoting, single quotes, markdown emphasis and line syntax.
//    Keys containing "event type" map to the event, keys containing "useful"
//    to usefulness, keys containing both "human" and "aid" to the aid type.
//    Nested objects are scanned in place; a list value yields its first
//    element.
// 3. The first non-empty value for each field wins. Strings go through
//    normalize_label, usefulness through parse_useful.
//
// Total and deterministic: never throws.
ParsedResponse parse_response(std::string_view raw);

// Start offset of the region parse_response scans.
std::size_t response_region_start(std::string_view raw) noexcept;

// Field-wise exact match on canonical strings; an absent field is wrong.
MatchResult compare(const PartialLabelTriple& pred, const LabelTriple& truth) noexcept;
inline MatchResult compare(const ParsedResponse& pred, const LabelTriple& truth) noexcept {
  return compare(pred.labels, truth);
}

}  // namespace crisistune
