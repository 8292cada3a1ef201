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

#include "crisistune/response_parser.hpp"

#include <algorithm>
#include <cctype>

namespace crisistune {
namespace {

char lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool is_alpha(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

bool is_hspace(char c) { return c == ' ' || c == '\t'; }

bool is_key_delimiter(char c) {
  switch (c) {
    case '\n': case '\r': case '{': case '}': case ',': case '[': case ']': case ';':
      return true;
    default:
      return false;
  }
}

bool is_key_junk(char c) {
  switch (c) {
    case ' ': case '\t': case '"': case '\'': case '*': case '#': case '-': case '`':
    case '>':
      return true;
    default:
      return false;
  }
}

// Lowercase, '_' -> ' ', trimmed of quoting/markup, whitespace collapsed.
std::string clean_key(std::string_view k) {
  std::size_t b = 0;
  std::size_t e = k.size();
  while (b < e && is_key_junk(k[b])) ++b;
  while (e > b && is_key_junk(k[e - 1])) --e;
  std::string out;
  bool space = false;
  for (std::size_t i = b; i < e; ++i) {
    char c = k[i];
    if (c == '_' || is_hspace(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(lower(c));
  }
  return out;
}

enum class Field { kNone, kEvent, kUseful, kAid };

Field classify_key(const std::string& key) {
  if (key.find("event type") != std::string::npos) return Field::kEvent;
  if (key.find("useful") != std::string::npos) return Field::kUseful;
  if (key.find("human") != std::string::npos && key.find("aid") != std::string::npos) {
    return Field::kAid;
  }
  return Field::kNone;
}

struct Value {
  std::string_view text;
  std::size_t next = 0;  // scan resumes here
};

Value read_value(std::string_view s, std::size_t pos) {
  while (pos < s.size() && (is_hspace(s[pos]) || s[pos] == '*' || s[pos] == '`')) ++pos;
  if (pos >= s.size()) return {{}, s.size()};
  // A nested object holds its own keys; leave it to the scanner.
  if (s[pos] == '{') return {{}, pos};
  // Lists yield their first element.
  if (s[pos] == '[') {
    ++pos;
    while (pos < s.size() && is_hspace(s[pos])) ++pos;
    if (pos >= s.size()) return {{}, s.size()};
  }

  const char q = s[pos];
  if (q == '"' || q == '\'') {
    std::size_t i = pos + 1;
    while (i < s.size() && s[i] != q && s[i] != '\n') {
      if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] != '\n') ++i;
      ++i;
    }
    const std::string_view text = s.substr(pos + 1, i - pos - 1);
    return {text, (i < s.size() && s[i] == q) ? i + 1 : i};
  }

  std::size_t i = pos;
  while (i < s.size() && s[i] != ',' && s[i] != ';' && s[i] != '}' && s[i] != ']' &&
         s[i] != '\n' && s[i] != '\r') {
    ++i;
  }
  std::string_view text = s.substr(pos, i - pos);
  while (!text.empty() && (text.back() == '*' || text.back() == '`')) text.remove_suffix(1);
  return {text, i};
}

bool is_null_word(const std::string& canonical) {
  return canonical == "NONE" || canonical == "NULL";
}

}  // namespace

std::size_t response_region_start(std::string_view raw) noexcept {
  static constexpr std::string_view kWord = "response";
  std::size_t start = 0;
  for (std::size_t i = 0; i + kWord.size() <= raw.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < kWord.size(); ++j) {
      if (lower(raw[i + j]) != kWord[j]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    if (i > 0 && is_alpha(raw[i - 1])) continue;
    std::size_t k = i + kWord.size();
    while (k < raw.size() && is_hspace(raw[k])) ++k;
    if (k < raw.size() && raw[k] == ':') start = k + 1;
  }
  return start;
}

ParsedResponse parse_response(std::string_view raw) {
  ParsedResponse out;
  out.raw = std::string(raw);
  const std::string_view region = raw.substr(response_region_start(raw));

  PartialLabelTriple& labels = out.labels;
  std::size_t pos = 0;
  while (pos < region.size()) {
    const std::size_t colon = region.find(':', pos);
    if (colon == std::string_view::npos) break;

    std::size_t kb = colon;
    while (kb > pos && !is_key_delimiter(region[kb - 1])) --kb;
    const std::string key = clean_key(region.substr(kb, colon - kb));
    const Value value = read_value(region, colon + 1);
    pos = std::max(value.next, colon + 1);

    switch (classify_key(key)) {
      case Field::kEvent:
        if (!labels.event) {
          std::string v = normalize_label(value.text);
          if (!v.empty() && !is_null_word(v)) labels.event = std::move(v);
        }
        break;
      case Field::kUseful:
        if (!labels.useful) labels.useful = parse_useful(value.text);
        break;
      case Field::kAid:
        if (!labels.aid) {
          std::string v = normalize_label(value.text);
          if (!v.empty() && !is_null_word(v)) labels.aid = std::move(v);
        }
        break;
      case Field::kNone:
        break;
    }
  }
  out.valid = labels.complete();
  return out;
}

MatchResult compare(const PartialLabelTriple& pred, const LabelTriple& truth) noexcept {
  MatchResult m;
  m.event_correct = pred.event && *pred.event == to_string(truth.event);
  m.useful_correct = pred.useful && *pred.useful == truth.useful;
  m.aid_correct = pred.aid && *pred.aid == to_string(truth.aid);
  m.overall_correct = m.event_correct && m.useful_correct && m.aid_correct;
  return m;
}

}  // namespace crisistune
