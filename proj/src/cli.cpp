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

#include "crisistune/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "crisistune/dataset.hpp"
#include "crisistune/digest.hpp"
#include "crisistune/error.hpp"
#include "crisistune/lora.hpp"
#include "crisistune/mock_endpoint.hpp"
#include "crisistune/report.hpp"
#include "crisistune/run_store.hpp"

namespace fs = std::filesystem;

namespace crisistune {
namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

std::string records_to_string(const std::vector<TweetRecord>& records) {
  std::ostringstream os;
  save_records(records, os);
  return os.str();
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  auto j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw DataError("'" + path.string() + "' is not valid JSON");
  return j;
}

nlohmann::ordered_json metrics_json(const CheckpointRun& run, const Metrics& m) {
  nlohmann::ordered_json j;
  j["endpoint"] = run.endpoint.name;
  j["template"] = to_string(run.template_id);
  j["n_samples"] = m.n_samples;
  j["overall_acc"] = m.overall_acc;
  j["event_acc"] = m.event_acc;
  j["useful_acc"] = m.useful_acc;
  j["aid_acc"] = m.aid_acc;
  j["invalid_fraction"] = m.invalid_fraction;
  j["one_shot_invalid_fraction"] = run.one_shot_invalid_fraction;
  j["excluded_from_regeneration"] = run.excluded_from_regeneration;
  j["requests_issued"] = run.requests_issued();
  return j;
}

bool all_transport_failures(const CheckpointRun& run) {
  for (const auto& p : run.predictions) {
    for (const auto& a : p.attempts) {
      if (!a.transport_error) return false;
    }
  }
  return !run.predictions.empty();
}

}  // namespace

void cmd_build(const BuildOptions& o, std::ostream& out) {
  const auto records = load_records_file(o.corpus);
  if (records.empty()) throw DataError("corpus '" + o.corpus + "' has no records");

  const fs::path dir(o.out_dir);
  ensure_dir(dir);

  nlohmann::ordered_json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["created"] = manifest_timestamp();
  manifest["corpus_path"] = o.corpus;
  manifest["corpus_digest"] = sha256_file(o.corpus);
  manifest["n_records"] = records.size();
  manifest["seed"] = o.seed;
  manifest["template_digest"] = templates_digest();

  std::vector<InstructionInstance> instances;
  if (o.train_fraction) {
    const auto split = split_dataset(records, *o.train_fraction, o.seed);
    instances = build_instances(split.train);
    write_file_atomically(dir / "train_records.jsonl", records_to_string(split.train));
    write_file_atomically(dir / "test_records.jsonl", records_to_string(split.test));
    manifest["train_fraction"] = *o.train_fraction;
    manifest["n_train"] = split.train.size();
    manifest["n_test"] = split.test.size();
    manifest["train_records"] = "train_records.jsonl";
    manifest["test_records"] = "test_records.jsonl";
  } else {
    instances = build_instances(records);
    manifest["train_fraction"] = nullptr;
    manifest["test_records"] = fs::absolute(o.corpus).lexically_normal().string();
  }

  std::ostringstream lines;
  export_instances(instances, lines);
  write_file_atomically(dir / "instances.jsonl", lines.str());
  manifest["instances_file"] = "instances.jsonl";
  manifest["n_instances"] = instances.size();
  write_file_atomically(dir / "manifest.json", manifest.dump(2) + "\n");

  out << "built " << instances.size() << " instances from " << records.size() << " records -> "
      << (dir / "instances.jsonl").string() << "\n";
}

void cmd_infer(const InferOptions& o, std::ostream& out, std::ostream& err,
               const BackendFactory& factory) {
  fs::path records_path;
  if (o.records) {
    records_path = *o.records;
  } else {
    if (o.manifest.empty()) throw UsageError("infer needs --manifest or --records");
    const auto m = read_json_file(o.manifest);
    if (!m.contains("test_records") || !m["test_records"].is_string()) {
      throw DataError("'" + o.manifest + "' names no test_records");
    }
    records_path = m["test_records"].get<std::string>();
    if (records_path.is_relative()) records_path = fs::path(o.manifest).parent_path() / records_path;
  }
  records_path = fs::absolute(records_path).lexically_normal();

  const auto records = load_records_file(records_path.string());
  if (records.empty()) throw DataError("'" + records_path.string() + "' has no records");
  const auto endpoints = load_endpoints_file(o.endpoints);
  if (endpoints.empty()) throw DataError("'" + o.endpoints + "' lists no endpoints");

  RunStore store(o.runs_dir, {records_path.string(), sha256_file(records_path.string())});
  const auto runs = run_experiment(endpoints, records, o.template_id, factory, &store);
  const auto truths = make_truth_table(records);

  for (const auto& run : runs) {
    const Metrics m = score_run(run, truths);
    const std::string stem = RunStore::stem(run.endpoint.name, run.template_id);
    write_file_atomically(fs::path(o.runs_dir) / (stem + ".metrics.json"),
                          metrics_json(run, m).dump(2) + "\n");
    if (all_transport_failures(run)) {
      err << "warning: endpoint '" << run.endpoint.name << "' was unreachable ("
          << run.endpoint.base_url << "); run recorded as excluded\n";
    }
    out << stem << ": overall_acc=" << fixed(m.overall_acc, 3)
        << " invalid_fraction=" << fixed(m.invalid_fraction, 3)
        << " one_shot_invalid=" << fixed(run.one_shot_invalid_fraction, 3)
        << " excluded=" << (run.excluded_from_regeneration ? "yes" : "no") << "\n";
  }
}

void cmd_ensemble(const EnsembleOptions& o, std::ostream& out, std::ostream& err) {
  if (o.n_max == 0) throw UsageError("--n-max must be >= 1");
  const auto collection = load_run_collection(o.runs_dir, o.records);
  const auto pool = ensemble_pool(collection, o.template_id);
  if (o.n_max > pool.size()) {
    err << "warning: " << pool.size() << " eligible " << to_string(o.template_id)
        << " runs; sweep truncated at n=" << pool.size() << "\n";
  }
  const auto points = sweep_n(pool, collection.truths, o.n_max);
  std::ostringstream csv;
  write_sweep_csv(points, csv);
  const fs::path target(o.out);
  if (target.has_parent_path()) ensure_dir(target.parent_path());
  write_file_atomically(target, csv.str());

  for (VoteType v : {VoteType::kTriple, VoteType::kPerLabel}) {
    if (auto best = sweep_argmax(points, v)) {
      out << to_string(v) << ": best n=" << best->n
          << " overall_acc=" << fixed(best->metrics.overall_acc, 3) << "\n";
    }
  }
}

void cmd_report(const ReportOptionsCli& o, std::ostream& out) {
  const auto collection = load_run_collection(o.runs_dir, o.records);
  ReportOptions ro;
  ro.top_k = o.top_k;
  ro.n_max = o.n_max;
  if (ro.top_k == 0) throw UsageError("--top must be >= 1");
  if (ro.n_max == 0) throw UsageError("--n-max must be >= 1");
  const Report report = build_report(collection, ro);

  const fs::path dir(o.out_dir);
  ensure_dir(dir);
  write_file_atomically(dir / "report.md", report.markdown);
  write_file_atomically(dir / "metrics.csv", report.metrics_csv);
  for (const auto& [tid, points] : report.sweeps) {
    const std::string base = "sweep_" + std::string(to_string(tid));
    std::ostringstream csv;
    write_sweep_csv(points, csv);
    write_file_atomically(dir / (base + ".csv"), csv.str());
    write_file_atomically(dir / (base + ".svg"),
                          render_sweep_svg(points, "Ensemble sweep " + std::string(to_string(tid))));
  }
  out << "report for " << collection.runs.size() << " runs -> " << (dir / "report.md").string()
      << "\n";
}

void cmd_lora(const LoraOptions& o, std::ostream& out) {
  TrainConfig config;
  config.learning_rate = o.learning_rate;
  config.steps = o.steps;
  config.rank = o.rank;
  config.seed = o.seed;
  validate(config);

  auto toy = make_toy_problem(o.seed);
  LoraLayer layer(toy.w, config.rank, config.seed);
  const std::vector<double> w_before(layer.w().data().begin(), layer.w().data().end());
  const auto losses = train_toy(layer, toy.dataset, config);
  const bool w_frozen = std::equal(w_before.begin(), w_before.end(), layer.w().data().begin());

  const fs::path dir(o.out_dir);
  ensure_dir(dir);
  std::ostringstream loss_csv;
  loss_csv << "step,loss\n";
  char buf[128];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g\n", i, losses[i]);
    loss_csv << buf;
  }
  write_file_atomically(dir / "loss.csv", loss_csv.str());

  std::ostringstream gc_csv;
  gc_csv << "seed,max_relative_error,max_entry_relative_error,max_absolute_error,entries\n";
  double worst = 0.0;
  for (std::size_t s = 1; s <= o.gradcheck_seeds; ++s) {
    const auto c = make_grad_check_case(s);
    const auto r = grad_check(c.layer, c.sample);
    worst = std::max(worst, r.max_relative_error);
    std::snprintf(buf, sizeof buf, "%zu,%.6e,%.6e,%.6e,%zu\n", s, r.max_relative_error,
                  r.max_entry_relative_error, r.max_absolute_error, r.entries_checked);
    gc_csv << buf;
  }
  write_file_atomically(dir / "gradcheck.csv", gc_csv.str());

  out << "loss " << fixed(losses.front(), 6) << " -> " << fixed(losses.back(), 6) << " over "
      << config.steps << " steps; W " << (w_frozen ? "unchanged" : "CHANGED")
      << "; gradcheck max relative error ";
  std::snprintf(buf, sizeof buf, "%.3e", worst);
  out << buf << " over " << o.gradcheck_seeds << " seeds\n";
}

void cmd_mock_server(const MockServerOptions& o, std::ostream& out) {
  auto responder = std::make_shared<ScriptedResponder>(MockScript::from_file(o.script));
  MockCompletionServer server(responder);
  out << "serving " << o.script << " on http://" << o.host << ":" << o.port << "/v1" << std::endl;
  server.listen_blocking(o.host, o.port);
}

namespace {

TemplateId parse_template_or_throw(const std::string& s) {
  auto t = template_from_string(s);
  if (!t) throw UsageError("unknown template '" + s + "'");
  return *t;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"crisis tweet instruction-tuning toolkit", "crisistune"};
  app.set_config("--config", "", "TOML file with option defaults; flags override it");
  app.require_subcommand(1);

  BuildOptions build;
  double train_fraction = 0.0;
  auto* sc_build = app.add_subcommand("build", "Build the instruction dataset");
  sc_build->add_option("--corpus", build.corpus, "Labelled tweets (JSON lines)")->required();
  sc_build->add_option("--out", build.out_dir, "Output directory")->required();
  sc_build->add_option("--seed", build.seed, "Split seed")->capture_default_str();
  auto* opt_fraction =
      sc_build->add_option("--train-fraction", train_fraction, "Hold out the rest as test set");

  InferOptions infer;
  std::string infer_template = "T4_MULTI";
  std::string infer_records;
  auto* sc_infer = app.add_subcommand("infer", "Query endpoints and store runs");
  sc_infer->add_option("--manifest", infer.manifest, "Manifest written by build");
  auto* opt_infer_records =
      sc_infer->add_option("--records", infer_records, "Test records (overrides the manifest)");
  sc_infer->add_option("--endpoints", infer.endpoints, "Endpoints JSON")->required();
  sc_infer->add_option("--runs", infer.runs_dir, "Run directory")->required();
  sc_infer->add_option("--template", infer_template, "T4_MULTI or T5_MULTI_INST")
      ->capture_default_str();

  EnsembleOptions ens;
  std::string ens_template = "T4_MULTI";
  std::string ens_records;
  auto* sc_ens = app.add_subcommand("ensemble", "Sweep top-N majority voting");
  sc_ens->add_option("--runs", ens.runs_dir, "Run directory")->required();
  sc_ens->add_option("--out", ens.out, "Sweep CSV")->required();
  sc_ens->add_option("--n-max", ens.n_max, "Largest ensemble")->capture_default_str();
  sc_ens->add_option("--template", ens_template, "Template of the runs to ensemble")
      ->capture_default_str();
  auto* opt_ens_records = sc_ens->add_option("--records", ens_records, "Ground-truth override");

  ReportOptionsCli rep;
  std::string rep_records;
  auto* sc_rep = app.add_subcommand("report", "Write markdown/CSV/SVG report");
  sc_rep->add_option("--runs", rep.runs_dir, "Run directory")->required();
  sc_rep->add_option("--out", rep.out_dir, "Report directory")->required();
  sc_rep->add_option("--top", rep.top_k, "Leaderboard size")->capture_default_str();
  sc_rep->add_option("--n-max", rep.n_max, "Largest ensemble")->capture_default_str();
  auto* opt_rep_records = sc_rep->add_option("--records", rep_records, "Ground-truth override");

  LoraOptions lora;
  auto* sc_lora = app.add_subcommand("lora", "Train the toy LoRA layer and check gradients");
  sc_lora->add_option("--out", lora.out_dir, "Output directory")->required();
  sc_lora->add_option("--seed", lora.seed)->capture_default_str();
  sc_lora->add_option("--steps", lora.steps)->capture_default_str();
  sc_lora->add_option("--lr", lora.learning_rate)->capture_default_str();
  sc_lora->add_option("--rank", lora.rank)->capture_default_str();
  sc_lora->add_option("--gradcheck-seeds", lora.gradcheck_seeds)->capture_default_str();

  MockServerOptions mock;
  auto* sc_mock = app.add_subcommand("mock-server", "Serve scripted completions over HTTP");
  sc_mock->add_option("--script", mock.script, "Mock script JSON")->required();
  sc_mock->add_option("--host", mock.host)->capture_default_str();
  sc_mock->add_option("--port", mock.port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (sc_build->parsed()) {
      if (opt_fraction->count() > 0) build.train_fraction = train_fraction;
      cmd_build(build, out);
    } else if (sc_infer->parsed()) {
      infer.template_id = parse_template_or_throw(infer_template);
      if (opt_infer_records->count() > 0) infer.records = infer_records;
      cmd_infer(infer, out, err);
    } else if (sc_ens->parsed()) {
      ens.template_id = parse_template_or_throw(ens_template);
      if (opt_ens_records->count() > 0) ens.records = ens_records;
      cmd_ensemble(ens, out, err);
    } else if (sc_rep->parsed()) {
      if (opt_rep_records->count() > 0) rep.records = rep_records;
      cmd_report(rep, out);
    } else if (sc_lora->parsed()) {
      cmd_lora(lora, out);
    } else if (sc_mock->parsed()) {
      cmd_mock_server(mock, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kIo);
  }
  return 0;
}

}  // namespace crisistune
