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

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crisistune/labels.hpp"

namespace crisistune::testing {

inline std::filesystem::path data_dir() { return CRISISTUNE_TEST_DATA_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "ct") {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(rng() % 100000000ULL));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline LabelTriple random_triple(std::mt19937_64& rng) {
  LabelTriple t;
  t.event = static_cast<EventType>(rng() % kEventTypeCount);
  t.useful = (rng() & 1) != 0;
  t.aid = static_cast<AidType>(rng() % kAidTypeCount);
  return t;
}

// Vocabulary values with each field absent with probability p_absent.
inline PartialLabelTriple random_partial(std::mt19937_64& rng, double p_absent) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const LabelTriple t = random_triple(rng);
  PartialLabelTriple p;
  if (u(rng) >= p_absent) p.event = std::string(to_string(t.event));
  if (u(rng) >= p_absent) p.useful = t.useful;
  if (u(rng) >= p_absent) p.aid = std::string(to_string(t.aid));
  return p;
}

// Small label alphabet so that votes collide often.
inline PartialLabelTriple random_partial_narrow(std::mt19937_64& rng, double p_absent) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PartialLabelTriple p;
  if (u(rng) >= p_absent) p.event = std::string(kEventTypeNames[rng() % 3]);
  if (u(rng) >= p_absent) p.useful = (rng() & 1) != 0;
  if (u(rng) >= p_absent) p.aid = std::string(kAidTypeNames[rng() % 3]);
  return p;
}

inline std::string random_text(std::mt19937_64& rng) {
  static const char* kWords[] = {"flood", "help", "road", "closed", "#storm", "water",
                                 "need", "\"quoted\"", "café", "ok", "fire"};
  std::string s;
  const std::size_t n = 1 + rng() % 12;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += kWords[rng() % std::size(kWords)];
  }
  return s;
}

inline std::vector<TweetRecord> random_records(std::mt19937_64& rng, std::size_t n) {
  std::vector<TweetRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"r" + std::to_string(i), random_text(rng), random_triple(rng)});
  }
  return out;
}

inline std::string records_jsonl(const std::vector<TweetRecord>& records) {
  std::ostringstream os;
  save_records(records, os);
  return os.str();
}

}  // namespace crisistune::testing
