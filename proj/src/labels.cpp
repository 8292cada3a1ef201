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

#include "crisistune/labels.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "crisistune/error.hpp"

namespace crisistune {

const std::array<std::string_view, kEventTypeCount> kEventTypeNames = {
    "HURRICANE", "FLOOD",   "EARTHQUAKE", "DISASTER EVENTS", "EXPLOSION",
    "BOMBING",   "FIRE",    "LANDSLIDE",  "CRASH",           "DISEASE",
    "SHOOTING",  "COLLAPSE", "HAZARD",    "VOLCANO",
};

const std::array<std::string_view, kAidTypeCount> kAidTypeNames = {
    "NOT HUMANITARIAN",
    "OTHER RELEVANT INFORMATION",
    "DONATION AND VOLUNTEERING",
    "REQUESTS OR NEEDS",
    "SYMPATHY AND SUPPORT",
    "INFRASTRUCTURE AND UTILITY DAMAGE",
    "AFFECTED INDIVIDUAL",
    "CAUTION AND ADVICE",
    "INJURED OR DEAD PEOPLE",
    "DISEASE RELATED",
    "RESPONSE EFFORTS",
    "PERSONAL UPDATE",
    "MISSING AND FOUND PEOPLE",
    "DISPLACED AND EVACUATION",
    "PHYSICAL LANDSLIDE",
    "TERRORISM RELATED",
};

std::string_view to_string(EventType e) noexcept {
  return kEventTypeNames[static_cast<std::size_t>(e)];
}

std::string_view to_string(AidType a) noexcept {
  return kAidTypeNames[static_cast<std::size_t>(a)];
}

std::optional<EventType> event_type_from_canonical(std::string_view canonical) noexcept {
  auto it = std::find(kEventTypeNames.begin(), kEventTypeNames.end(), canonical);
  if (it == kEventTypeNames.end()) return std::nullopt;
  return static_cast<EventType>(it - kEventTypeNames.begin());
}

std::optional<AidType> aid_type_from_canonical(std::string_view canonical) noexcept {
  auto it = std::find(kAidTypeNames.begin(), kAidTypeNames.end(), canonical);
  if (it == kAidTypeNames.end()) return std::nullopt;
  return static_cast<AidType>(it - kAidTypeNames.begin());
}

std::array<EventType, kEventTypeCount> all_event_types() noexcept {
  std::array<EventType, kEventTypeCount> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<EventType>(i);
  return out;
}

std::array<AidType, kAidTypeCount> all_aid_types() noexcept {
  std::array<AidType, kAidTypeCount> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<AidType>(i);
  return out;
}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_edge_junk(char c) {
  switch (c) {
    case '"': case '\'': case '[': case ']': case '(': case ')':
    case '{': case '}': case ',': case '.':
      return true;
    default:
      return is_space(c);
  }
}

}  // namespace

std::string normalize_label(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  // '_' becomes a space before trimming so "_x_" and " x " agree.
  auto junk_at = [&](std::size_t i) { return raw[i] == '_' || is_edge_junk(raw[i]); };
  while (begin < end && junk_at(begin)) ++begin;
  while (end > begin && junk_at(end - 1)) --end;

  std::string out;
  out.reserve(end - begin);
  bool pending_space = false;
  for (std::size_t i = begin; i < end; ++i) {
    char c = raw[i];
    if (c == '_' || is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    out.push_back(c);
  }
  return out;
}

std::optional<bool> parse_useful(std::string_view raw) {
  const std::string v = normalize_label(raw);
  if (v == "TRUE" || v == "YES") return true;
  if (v == "FALSE" || v == "NO") return false;
  return std::nullopt;
}

PartialLabelTriple to_partial(const LabelTriple& t) {
  return PartialLabelTriple{std::string(to_string(t.event)), t.useful,
                            std::string(to_string(t.aid))};
}

namespace {

std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw DataError("line " + std::to_string(line_no) + ": missing or non-string field '" +
                    key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<TweetRecord> load_records(std::istream& in) {
  std::vector<TweetRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t index = 0;
  for (; std::getline(in, line); ++index) {
    const std::size_t line_no = index + 1;
    if (std::all_of(line.begin(), line.end(), is_space)) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw DataError("line " + std::to_string(line_no) + ": expected a JSON object");
    }

    TweetRecord rec;
    if (auto it = obj.find("id"); it != obj.end()) {
      if (!it->is_string()) {
        throw DataError("line " + std::to_string(line_no) + ": 'id' must be a string");
      }
      rec.id = it->get<std::string>();
    } else {
      rec.id = std::to_string(index);
    }
    rec.text = require_string(obj, "text", line_no);
    if (rec.text.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty text");
    }

    const std::string event_raw = require_string(obj, "event_type", line_no);
    const auto event = event_type_from_canonical(normalize_label(event_raw));
    if (!event) {
      throw DataError("line " + std::to_string(line_no) + ": event_type '" + event_raw +
                      "' is not in the event vocabulary");
    }
    const std::string aid_raw = require_string(obj, "humanitarian_type", line_no);
    const auto aid = aid_type_from_canonical(normalize_label(aid_raw));
    if (!aid) {
      throw DataError("line " + std::to_string(line_no) + ": humanitarian_type '" + aid_raw +
                      "' is not in the humanitarian aid vocabulary");
    }

    auto inf = obj.find("informative");
    std::optional<bool> useful;
    if (inf != obj.end() && inf->is_boolean()) {
      useful = inf->get<bool>();
    } else if (inf != obj.end() && inf->is_string()) {
      useful = parse_useful(inf->get<std::string>());
    }
    if (!useful) {
      throw DataError("line " + std::to_string(line_no) +
                      ": 'informative' must be a boolean or \"true\"/\"false\"");
    }

    rec.truth = LabelTriple{*event, *useful, *aid};
    if (!seen.insert(rec.id).second) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate id '" + rec.id + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TweetRecord> load_records_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open records file '" + path + "'");
  try {
    return load_records(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void save_records(const std::vector<TweetRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    nlohmann::ordered_json obj;
    obj["id"] = r.id;
    obj["text"] = r.text;
    obj["event_type"] = to_string(r.truth.event);
    obj["informative"] = r.truth.useful;
    obj["humanitarian_type"] = to_string(r.truth.aid);
    out << obj.dump() << '\n';
  }
}

}  // namespace crisistune
