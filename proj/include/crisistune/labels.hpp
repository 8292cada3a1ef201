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
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crisistune {

// Closed vocabularies. Enumerator order matches the order the prompt
// templates list the categories in.
enum class EventType : std::uint8_t {
  kHurricane,
  kFlood,
  kEarthquake,
  kDisasterEvents,
  kExplosion,
  kBombing,
  kFire,
  kLandslide,
  kCrash,
  kDisease,
  kShooting,
  kCollapse,
  kHazard,
  kVolcano,
};

enum class AidType : std::uint8_t {
  kNotHumanitarian,
  kOtherRelevantInformation,
  kDonationAndVolunteering,
  kRequestsOrNeeds,
  kSympathyAndSupport,
  kInfrastructureAndUtilityDamage,
  kAffectedIndividual,
  kCautionAndAdvice,
  kInjuredOrDeadPeople,
  kDiseaseRelated,
  kResponseEfforts,
  kPersonalUpdate,
  kMissingAndFoundPeople,
  kDisplacedAndEvacuation,
  kPhysicalLandslide,
  kTerrorismRelated,
};

inline constexpr std::size_t kEventTypeCount = 14;
inline constexpr std::size_t kAidTypeCount = 16;

// Canonical spellings, indexed by enumerator value.
extern const std::array<std::string_view, kEventTypeCount> kEventTypeNames;
extern const std::array<std::string_view, kAidTypeCount> kAidTypeNames;

std::string_view to_string(EventType e) noexcept;
std::string_view to_string(AidType a) noexcept;

// Lookup of an already-normalized label. Returns nullopt when the label is
// outside the vocabulary.
std::optional<EventType> event_type_from_canonical(std::string_view canonical) noexcept;
std::optional<AidType> aid_type_from_canonical(std::string_view canonical) noexcept;

std::array<EventType, kEventTypeCount> all_event_types() noexcept;
std::array<AidType, kAidTypeCount> all_aid_types() noexcept;

// Uppercases, maps '_' to ' ', strips surrounding quotes, brackets, commas,
// periods and whitespace, and collapses whitespace runs. Idempotent.
std::string normalize_label(std::string_view raw);

// "true"/"yes" -> true, "false"/"no" -> false (case-insensitive, after the
// same trimming normalize_label performs); anything else -> nullopt.
std::optional<bool> parse_useful(std::string_view raw);

// Ground truth: always complete and in-vocabulary.
struct LabelTriple {
  EventType event{};
  bool useful = false;
  AidType aid{};

  friend bool operator==(const LabelTriple&, const LabelTriple&) = default;
};

// A prediction. Any field may be absent; present strings are canonical but
// not necessarily in-vocabulary.
struct PartialLabelTriple {
  std::optional<std::string> event;
  std::optional<bool> useful;
  std::optional<std::string> aid;

  bool complete() const noexcept { return event && useful && aid; }

  friend bool operator==(const PartialLabelTriple&, const PartialLabelTriple&) = default;
  friend auto operator<=>(const PartialLabelTriple&, const PartialLabelTriple&) = default;
};

PartialLabelTriple to_partial(const LabelTriple& t);

struct TweetRecord {
  std::string id;
  std::string text;
  LabelTriple truth;

  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

// Reads JSON-lines records (keys: id?, text, event_type, informative,
// humanitarian_type). Blank lines are skipped; a missing id becomes the
// 0-based line index. Throws DataError naming the line on malformed input,
// out-of-vocabulary labels, empty text, or duplicate ids.
std::vector<TweetRecord> load_records(std::istream& in);
std::vector<TweetRecord> load_records_file(const std::string& path);

// Inverse of load_records.
void save_records(const std::vector<TweetRecord>& records, std::ostream& out);

}  // namespace crisistune
