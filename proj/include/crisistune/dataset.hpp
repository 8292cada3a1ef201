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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "crisistune/labels.hpp"
#include "crisistune/templates.hpp"

namespace crisistune {

// One (INSTRUCTION, OUTPUT) training pair. The tweet text lives inside the
// instruction, as in the prompt templates.
struct InstructionInstance {
  std::string record_id;
  TemplateId template_id{};
  std::string instruction;
  std::string output;

  friend bool operator==(const InstructionInstance&, const InstructionInstance&) = default;
};

// Four instances per record (T1..T4), grouped by record in input order.
std::vector<InstructionInstance> build_instances(const std::vector<TweetRecord>& records);

struct DatasetSplit {
  std::vector<TweetRecord> train;
  std::vector<TweetRecord> test;
};

// Seeded shuffle, then the first floor(n * train_fraction) records (clamped so
// both sides are non-empty) go to train. Requires train_fraction in (0, 1)
// and at least two records; throws DataError otherwise.
DatasetSplit split_dataset(const std::vector<TweetRecord>& records, double train_fraction,
                           std::uint64_t seed);

// JSON-lines: {"record_id", "template", "instruction", "output"} per line.
std::size_t export_instances(const std::vector<InstructionInstance>& instances,
                             std::ostream& out);
std::size_t export_instances_file(const std::vector<InstructionInstance>& instances,
                                  const std::string& path);

std::vector<InstructionInstance> import_instances(std::istream& in);

}  // namespace crisistune
