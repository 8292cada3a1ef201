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

#include "crisistune/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "crisistune/error.hpp"

namespace crisistune {

std::vector<InstructionInstance> build_instances(const std::vector<TweetRecord>& records) {
  std::vector<InstructionInstance> out;
  out.reserve(records.size() * kTrainingTemplates.size());
  for (const auto& rec : records) {
    for (TemplateId id : kTrainingTemplates) {
      out.push_back(InstructionInstance{rec.id, id, render_prompt(id, rec.text).body,
                                        render_target(id, rec.truth)});
    }
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<TweetRecord>& records, double train_fraction,
                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DataError("train_fraction must lie strictly between 0 and 1, got " +
                    std::to_string(train_fraction));
  }
  if (records.size() < 2) {
    throw DataError("splitting needs at least 2 records, got " +
                    std::to_string(records.size()));
  }

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = records.size();
  auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  DatasetSplit split;
  split.train.reserve(n_train);
  split.test.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? split.train : split.test).push_back(records[order[i]]);
  }
  return split;
}

std::size_t export_instances(const std::vector<InstructionInstance>& instances,
                             std::ostream& out) {
  std::size_t written = 0;
  for (const auto& inst : instances) {
    nlohmann::ordered_json obj;
    obj["record_id"] = inst.record_id;
    obj["template"] = to_string(inst.template_id);
    obj["instruction"] = inst.instruction;
    obj["output"] = inst.output;
    out << obj.dump() << '\n';
    if (!out) throw IoError("write failed after " + std::to_string(written) + " instances");
    ++written;
  }
  return written;
}

std::size_t export_instances_file(const std::vector<InstructionInstance>& instances,
                                  const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  try {
    const std::size_t n = export_instances(instances, out);
    out.flush();
    if (!out) throw IoError("flush failed");
    return n;
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::vector<InstructionInstance> import_instances(std::istream& in) {
  std::vector<InstructionInstance> out;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      InstructionInstance inst;
      inst.record_id = obj.at("record_id").get<std::string>();
      const auto tid = template_from_string(obj.at("template").get<std::string>());
      if (!tid) throw DataError("unknown template");
      inst.template_id = *tid;
      inst.instruction = obj.at("instruction").get<std::string>();
      inst.output = obj.at("output").get<std::string>();
      out.push_back(std::move(inst));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("instances line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("instances line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace crisistune
