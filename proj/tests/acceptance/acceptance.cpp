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

// Acceptance checks. Prints one "AC<n> PASS|FAIL <detail>" line per
// criterion and exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crisistune/cli.hpp"
#include "crisistune/dataset.hpp"
#include "crisistune/ensemble.hpp"
#include "crisistune/evaluator.hpp"
#include "crisistune/inference.hpp"
#include "crisistune/lora.hpp"
#include "crisistune/mock_endpoint.hpp"
#include "crisistune/response_parser.hpp"
#include "crisistune/run_store.hpp"
#include "crisistune/templates.hpp"
#include "run_fixtures.hpp"

namespace ct = crisistune;
namespace fs = std::filesystem;
using ct::testing::read_file;

namespace {

// Tolerances and budgets.
constexpr double kPpTolerance = 0.05;       // percentage points, AC4/AC5
constexpr double kGradCheckTolerance = 1e-5;  // AC9
constexpr double kAc1Seconds = 1.0;
constexpr double kAc2Seconds = 1.0;
constexpr double kAc7Seconds = 60.0;
constexpr double kAc9Seconds = 30.0;
constexpr int kAc7Fixtures = 1000;
constexpr int kAc11Runs = 1000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// AC1
Outcome dataset_multiplier() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  for (std::size_t n : {1u, 10u, 137u}) {
    const auto records = ct::testing::random_records(rng, n);
    const auto inst = ct::build_instances(records);
    o.require(inst.size() == 4 * n, "size " + std::to_string(n) + " gave " +
                                        std::to_string(inst.size()) + " instances");
  }
  const double s = seconds_since(t0);
  o.require(s < kAc1Seconds, "took " + fmt("%.3f s", s));
  if (o.pass) o.detail = "sizes 1/10/137 -> 4x, " + fmt("%.3f s", s);
  return o;
}

// AC2
Outcome template_fidelity() {
  Outcome o;
  const auto t0 = Clock::now();
  for (int i = 1; i <= 5; ++i) {
    const auto golden = read_file(ct::testing::data_dir() / "golden" /
                                  ("type" + std::to_string(i) + "_sample.txt"));
    o.require(!golden.empty() &&
                  ct::render_prompt(ct::kAllTemplates[i - 1], "SAMPLE").body == golden,
              "template " + std::to_string(i) + " differs from golden");
  }
  std::size_t triples = 0;
  for (auto e : ct::all_event_types()) {
    for (bool u : {false, true}) {
      for (auto a : ct::all_aid_types()) {
        const ct::LabelTriple t{e, u, a};
        ++triples;
        for (ct::TemplateId id : ct::kAllTemplates) {
          const auto f = ct::template_fields(id);
          ct::PartialLabelTriple want;
          if (f.event) want.event = std::string(ct::to_string(e));
          if (f.useful) want.useful = u;
          if (f.aid) want.aid = std::string(ct::to_string(a));
          o.require(ct::parse_response(ct::render_target(id, t)).labels == want,
                    "round trip failed for " + std::string(ct::to_string(id)));
        }
      }
    }
  }
  o.require(triples == 448, "expected 448 triples");
  const double s = seconds_since(t0);
  o.require(s < kAc2Seconds, "took " + fmt("%.3f s", s));
  if (o.pass) o.detail = "5 golden prompts, 448 triples x 5 templates, " + fmt("%.3f s", s);
  return o;
}

// AC3
Outcome parser_fixtures() {
  Outcome o;
  std::ifstream in(ct::testing::data_dir() / "fixtures" / "responses.jsonl");
  std::string line;
  std::size_t total = 0, adversarial = 0, published = 0, matched = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    ct::PartialLabelTriple want;
    const auto& e = j.at("expected");
    if (!e.at("event").is_null()) want.event = e.at("event").get<std::string>();
    if (!e.at("useful").is_null()) want.useful = e.at("useful").get<bool>();
    if (!e.at("aid").is_null()) want.aid = e.at("aid").get<std::string>();
    const auto got = ct::parse_response(j.at("raw").get<std::string>());
    const bool ok = got.labels == want && got.valid == j.at("valid").get<bool>();
    ++total;
    matched += ok;
    adversarial += j.at("source") == "adversarial";
    published += j.at("source") == "published";
    o.require(ok, "fixture '" + j.at("name").get<std::string>() + "' mismatched");
  }
  o.require(adversarial >= 30, "only " + std::to_string(adversarial) + " adversarial fixtures");
  o.require(published >= 3, "missing published-example fixtures");
  if (o.pass) {
    o.detail = std::to_string(matched) + "/" + std::to_string(total) + " exact (" +
               std::to_string(adversarial) + " adversarial)";
  }
  return o;
}

// AC4
Outcome decrease_table() {
  struct Row {
    double same, diff, printed;
  };
  const Row rows[] = {{0.613, 0.524, 14.5}, {0.593, 0.280, 52.8}, {0.585, 0.427, 27.0},
                      {0.584, 0.438, 25.0}, {0.581, 0.345, 40.6}};
  Outcome o;
  double worst = 0;
  for (const auto& r : rows) {
    const double pct = ct::to_percent_1dp(ct::decrease_ratio(r.same, r.diff));
    worst = std::max(worst, std::fabs(pct - r.printed));
    o.require(std::fabs(pct - r.printed) <= kPpTolerance,
              fmt("row printed %.1f", r.printed) + fmt(" computed %.1f", pct));
  }
  if (o.pass) o.detail = "5 rows, max deviation " + fmt("%.3f pp", worst);
  return o;
}

// AC5
Outcome ratio_arithmetic() {
  Outcome o;
  const double rp = ct::to_percent_1dp(ct::relative_performance(0.593, 0.613));
  const double ri = ct::to_percent_1dp(ct::relative_improvement(0.638, 0.613));
  o.require(std::fabs(rp - 96.7) <= kPpTolerance, fmt("relative performance %.1f", rp));
  o.require(std::fabs(ri - 4.1) <= kPpTolerance, fmt("improvement %.1f", ri));
  if (o.pass) o.detail = fmt("%.1f%%", rp) + " / " + fmt("%.1f%%", ri);
  return o;
}

const std::string kValid =
    R"({"event type": "FLOOD", "useful": true, "humanitarian aid type": "RESPONSE EFFORTS"})";
const std::string kInvalid = R"({"event type": "FLOOD", "useful": true})";

std::shared_ptr<ct::ScriptedResponder> responder(const nlohmann::json& script) {
  return std::make_shared<ct::ScriptedResponder>(ct::MockScript::from_json(script));
}

ct::EndpointConfig mock_endpoint(const std::string& name, int concurrency) {
  ct::EndpointConfig e;
  e.name = name;
  e.base_url = "http://127.0.0.1:1/v1";
  e.model = "mock";
  e.max_concurrency = concurrency;
  return e;
}

// AC6
Outcome regeneration_contract() {
  Outcome o;
  const auto prompt = ct::render_prompt(ct::TemplateId::kMulti, "water rising");
  const auto ep = mock_endpoint("regen", 1);
  for (int k = 0; k <= 4; ++k) {
    std::vector<std::string> seq(k, kInvalid);
    seq.push_back(kValid);
    ct::ScriptedBackend backend(responder({{"default", seq}}));
    const auto p = ct::generate_with_regeneration(backend, ep, "s", prompt);
    o.require(p.attempts_used() == k + 1 && p.final_parse.valid,
              "k=" + std::to_string(k) + " used " + std::to_string(p.attempts_used()));
  }
  {
    ct::ScriptedBackend backend(responder({{"default", std::vector<std::string>(5, kInvalid)}}));
    const auto p = ct::generate_with_regeneration(backend, ep, "s", prompt);
    o.require(p.attempts_used() == 5 && !p.final_parse.valid, "invalid x5 not capped at 5");
  }

  // 30 of 50 samples invalid on the first try, served over HTTP.
  std::mt19937_64 rng(6);
  const auto records = ct::testing::random_records(rng, 50);
  nlohmann::json samples = nlohmann::json::object();
  for (std::size_t i = 0; i < records.size(); ++i) {
    samples[records[i].id] = {i < 30 ? kInvalid : kValid, kValid};
  }
  ct::MockCompletionServer server(responder({{"samples", samples}}));
  server.start();
  auto e = mock_endpoint("excluded", 4);
  e.base_url = server.base_url();
  ct::HttpCompletionBackend http(e);
  const auto run = ct::run_checkpoint(http, e, records, ct::TemplateId::kMulti);
  const std::size_t served = server.responder().request_count();
  server.stop();
  o.require(run.one_shot_invalid_fraction == 0.6, "one-shot invalid fraction " +
                                                      fmt("%.3f", run.one_shot_invalid_fraction));
  o.require(run.excluded_from_regeneration, "0.6 invalid run was not excluded");
  o.require(served == 50 && run.requests_issued() == 50,
            "issued " + std::to_string(served) + " requests");
  if (o.pass) o.detail = "k=0..4 -> k+1 attempts, x5 capped, 0.6/50 excluded after 50 requests";
  return o;
}

// AC7
Outcome ensemble_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  std::size_t samples_checked = 0;
  for (int f = 0; f < kAc7Fixtures && o.pass; ++f) {
    const std::size_t n_runs = 1 + rng() % ct::kMaxEnsembleSize;
    const std::size_t n_samples = 1 + rng() % 200;
    auto fx = ct::testing::random_fixture(rng, n_runs, n_samples, f % 4 == 0);
    const auto truths = ct::make_truth_table(fx.records);
    const auto ranking = ct::rank_runs(fx.runs, truths);
    const std::size_t n = 1 + rng() % n_runs;

    std::map<std::string, const ct::CheckpointRun*> by_name;
    for (const auto& r : fx.runs) by_name[r.endpoint.name] = &r;
    for (ct::VoteType v : {ct::VoteType::kTriple, ct::VoteType::kPerLabel}) {
      std::vector<ct::PartialLabelTriple> voted;
      std::vector<ct::LabelTriple> gold;
      for (std::size_t s = 0; s < n_samples; ++s) {
        std::vector<ct::PartialLabelTriple> ballots;
        for (std::size_t k = 0; k < n; ++k) {
          ballots.push_back(by_name[ranking[k]]->predictions[s].final_parse.labels);
        }
        const auto want = ct::testing::oracle_vote(v, ballots);
        o.require(ct::vote(v, ballots) == want,
                  "fixture " + std::to_string(f) + " sample " + std::to_string(s) + " differs");
        voted.push_back(want);
        gold.push_back(fx.records[s].truth);
        ++samples_checked;
      }
      const auto want = ct::score_predictions(voted, gold);
      const auto got = ct::ensemble_accuracy(fx.runs, truths, {n, v, ranking});
      o.require(got.overall_acc == want.overall_acc && got.event_acc == want.event_acc &&
                    got.useful_acc == want.useful_acc && got.aid_acc == want.aid_acc,
                "fixture " + std::to_string(f) + " metrics differ");

      const auto top = ct::score_run(*by_name[ranking[0]], truths);
      const auto one = ct::ensemble_accuracy(fx.runs, truths, {1, v, ranking});
      o.require(one.overall_acc == top.overall_acc && one.event_acc == top.event_acc &&
                    one.useful_acc == top.useful_acc && one.aid_acc == top.aid_acc,
                "fixture " + std::to_string(f) + " n=1 differs from top run");
    }
  }
  const double s = seconds_since(t0);
  o.require(s < kAc7Seconds, "took " + fmt("%.1f s", s));
  if (o.pass) {
    o.detail = std::to_string(kAc7Fixtures) + " fixtures, " + std::to_string(samples_checked) +
               " sample votes, " + fmt("%.2f s", s);
  }
  return o;
}

// AC8
Outcome per_label_beats_triple() {
  Outcome o;
  // Three checkpoints, each wrong on a different single field; on the
  // last two samples two of them agree on a full wrong triple.
  std::vector<ct::TweetRecord> records;
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) {
    records.push_back({"d" + std::to_string(i), "x",
                       {ct::EventType::kEarthquake, true, ct::AidType::kInjuredOrDeadPeople}});
    ids.push_back(records.back().id);
  }
  const ct::PartialLabelTriple right{"EARTHQUAKE", true, "INJURED OR DEAD PEOPLE"};
  auto e = right, u = right, a = right;
  e.event = "FLOOD";
  u.useful = false;
  a.aid = "CAUTION AND ADVICE";
  std::vector<ct::CheckpointRun> runs{
      ct::testing::make_run("m1", ids, {e, e, e, e}),
      ct::testing::make_run("m2", ids, {u, u, e, right}),
      ct::testing::make_run("m3", ids, {a, a, a, a})};
  const auto truths = ct::make_truth_table(records);
  const auto ranking = ct::rank_runs(runs, truths);

  // Brute force: count exact matches of the oracle's votes.
  auto brute = [&](ct::VoteType v) {
    std::size_t correct = 0;
    for (std::size_t s = 0; s < ids.size(); ++s) {
      std::vector<ct::PartialLabelTriple> ballots;
      for (const auto& name : ranking) {
        for (const auto& r : runs) {
          if (r.endpoint.name == name) ballots.push_back(r.predictions[s].final_parse.labels);
        }
      }
      correct += ct::compare(ct::testing::oracle_vote(v, ballots), records[s].truth).overall_correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ids.size());
  };
  const double triple = ct::ensemble_accuracy(runs, truths, {3, ct::VoteType::kTriple, ranking}).overall_acc;
  const double per_label =
      ct::ensemble_accuracy(runs, truths, {3, ct::VoteType::kPerLabel, ranking}).overall_acc;
  o.require(triple == brute(ct::VoteType::kTriple), "TRIPLE differs from brute force");
  o.require(per_label == brute(ct::VoteType::kPerLabel), "PER_LABEL differs from brute force");
  o.require(per_label > triple, fmt("PER_LABEL %.3f", per_label) + fmt(" <= TRIPLE %.3f", triple));
  if (o.pass) o.detail = fmt("PER_LABEL %.3f", per_label) + fmt(" > TRIPLE %.3f (n=3)", triple);
  return o;
}

// AC9
Outcome lora_numerics() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto c = ct::make_grad_check_case(seed);
    const auto rep = ct::grad_check(c.layer, c.sample, 1e-5);
    worst = std::max(worst, rep.max_relative_error);
  }
  o.require(worst < kGradCheckTolerance, "grad check error " + fmt("%.3e", worst));

  const auto toy = ct::make_toy_problem(1);
  ct::LoraLayer layer(toy.w, 8, 1);
  const ct::Matrix w0 = layer.w();
  ct::TrainConfig config;
  config.steps = 200;
  const auto losses = ct::train_toy(layer, toy.dataset, config);
  o.require(layer.w() == w0, "W changed during training");
  o.require(losses.back() < 0.5 * losses.front(),
            fmt("loss %.4f", losses.front()) + fmt(" -> %.4f", losses.back()));
  o.require(ct::param_count(3, 4, 2).trainable == 14, "param_count(3,4,2) != 14");
  const double s = seconds_since(t0);
  o.require(s < kAc9Seconds, "took " + fmt("%.1f s", s));
  if (o.pass) {
    o.detail = "grad check " + fmt("%.2e", worst) + ", loss " + fmt("%.4f", losses.front()) +
               fmt(" -> %.4f", losses.back()) + ", W unchanged, " + fmt("%.2f s", s);
  }
  return o;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "crisistune");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ct::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  return code;
}

// Every regular file under `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return files;
}

// AC10
Outcome determinism() {
  Outcome o;
  std::mt19937_64 rng(10);
  const auto records = ct::testing::random_records(rng, 60);
  nlohmann::json samples = nlohmann::json::object();
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::vector<std::string> seq(i % 6, kInvalid);
    seq.push_back(i % 4 == 0 ? R"({"event type": "FIRE", "useful": false, "humanitarian aid type": "NOT HUMANITARIAN"})"
                             : kValid);
    samples[records[i].id] = seq;
  }
  const nlohmann::json script{{"samples", samples}};

  std::string bytes[2];
  int idx = 0;
  for (int conc : {1, 8}) {
    ct::ScriptedBackend backend(responder(script));
    const auto run = ct::run_checkpoint(backend, mock_endpoint("det", conc), records,
                                        ct::TemplateId::kMulti);
    std::ostringstream os;
    ct::write_run_lines(run, os);
    bytes[idx++] = os.str();
  }
  o.require(!bytes[0].empty() && bytes[0] == bytes[1], "run files differ for concurrency 1 vs 8");

  // Whole CLI pipeline twice into separate directories.
  ct::testing::TempDir tmp("acceptance");
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  ct::testing::write_file(tmp / "corpus.jsonl", ct::testing::records_jsonl(records));
  // One server per endpoint: reply selection counts requests per sample.
  std::vector<std::shared_ptr<ct::ScriptedResponder>> responders;
  std::vector<std::unique_ptr<ct::MockCompletionServer>> servers;
  nlohmann::json eps{{"endpoints", nlohmann::json::array()}};
  for (int k = 0; k < 3; ++k) {
    responders.push_back(responder(script));
    servers.push_back(std::make_unique<ct::MockCompletionServer>(responders.back()));
    servers.back()->start();
    eps["endpoints"].push_back({{"name", "m" + std::to_string(k + 1)},
                                {"base_url", servers.back()->base_url()},
                                {"max_concurrency", 1 + 3 * k}});
  }
  ct::testing::write_file(tmp / "eps.json", eps.dump());

  std::map<std::string, std::string> snaps[2];
  for (int round = 0; round < 2; ++round) {
    for (auto& r : responders) r->reset();
    const fs::path d = tmp / ("round" + std::to_string(round));
    const std::string ds = (d / "ds").string();
    const std::string runs = (d / "runs").string();
    const std::vector<std::vector<std::string>> commands{
        {"build", "--corpus", (tmp / "corpus.jsonl").string(), "--out", ds, "--seed", "5",
         "--train-fraction", "0.8"},
        {"infer", "--manifest", ds + "/manifest.json", "--endpoints", (tmp / "eps.json").string(),
         "--runs", runs},
        {"ensemble", "--runs", runs, "--out", (d / "sweep.csv").string()},
        {"report", "--runs", runs, "--out", (d / "report").string()},
        {"lora", "--out", (d / "lora").string(), "--steps", "50", "--gradcheck-seeds", "10"}};
    for (const auto& c : commands) {
      o.require(cli(c) == 0, "command '" + c[0] + "' failed");
    }
    snaps[round] = snapshot(d);
  }
  for (auto& s : servers) s->stop();
  unsetenv("SOURCE_DATE_EPOCH");

  // Absolute paths differ by directory name; compare after substitution.
  std::size_t files = 0;
  for (const auto& [name, content] : snaps[0]) {
    auto it = snaps[1].find(name);
    o.require(it != snaps[1].end(), "'" + name + "' missing in second round");
    if (it == snaps[1].end()) continue;
    std::string other = it->second;
    const std::string from = (tmp / "round1").string(), to = (tmp / "round0").string();
    for (std::size_t p; (p = other.find(from)) != std::string::npos;) other.replace(p, from.size(), to);
    o.require(other == content, "'" + name + "' differs between rounds");
    ++files;
  }
  o.require(snaps[0].size() == snaps[1].size(), "file sets differ");
  o.require(files >= 15, "only " + std::to_string(files) + " files produced");
  if (o.pass) {
    o.detail = "concurrency 1 vs 8 identical; " + std::to_string(files) +
               " CLI artifacts identical across two runs";
  }
  return o;
}

// AC11
Outcome metric_invariant() {
  Outcome o;
  std::mt19937_64 rng(11);
  for (int i = 0; i < kAc11Runs; ++i) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<ct::PartialLabelTriple> preds;
    std::vector<ct::LabelTriple> gold;
    for (std::size_t s = 0; s < n; ++s) {
      gold.push_back(ct::testing::random_triple(rng));
      preds.push_back(rng() % 2 ? ct::to_partial(gold.back())
                                : ct::testing::random_partial_narrow(rng, 0.2));
      if (rng() % 3 == 0) preds.back().useful = !gold.back().useful;
    }
    const auto m = ct::score_predictions(preds, gold);
    o.require(m.overall_acc <= std::min({m.event_acc, m.useful_acc, m.aid_acc}),
              "violated on run " + std::to_string(i));
  }
  if (o.pass) o.detail = std::to_string(kAc11Runs) + " random runs";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1", dataset_multiplier}, {"AC2", template_fidelity},    {"AC3", parser_fixtures},
      {"AC4", decrease_table},     {"AC5", ratio_arithmetic},     {"AC6", regeneration_contract},
      {"AC7", ensemble_oracle},    {"AC8", per_label_beats_triple}, {"AC9", lora_numerics},
      {"AC10", determinism},       {"AC11", metric_invariant}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::cout << name << (o.pass ? " PASS " : " FAIL ") << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
