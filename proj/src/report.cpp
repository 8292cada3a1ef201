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

#include "crisistune/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "crisistune/digest.hpp"
#include "crisistune/error.hpp"
#include "crisistune/run_store.hpp"

namespace fs = std::filesystem;

namespace crisistune {
namespace {

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void merge_truths(TruthTable& into, const std::vector<TweetRecord>& records,
                  const std::string& path) {
  for (const auto& r : records) {
    auto [it, inserted] = into.emplace(r.id, r.truth);
    if (!inserted && !(it->second == r.truth)) {
      throw DataError("'" + path + "' disagrees with another record file on sample '" + r.id +
                      "'");
    }
  }
}

}  // namespace

RunCollection load_run_collection(const fs::path& dir,
                                  const std::optional<std::string>& records_override) {
  RunCollection out;
  RunStore store(dir);
  std::map<std::string, bool> loaded_records;
  if (records_override) {
    merge_truths(out.truths, load_records_file(*records_override), *records_override);
    loaded_records[*records_override] = true;
  }
  for (const auto& stem : store.list_stems()) {
    StoredRun sr;
    sr.stem = stem;
    sr.run = store.load(stem);
    const auto manifest = store.load_manifest(stem);
    sr.records_path = manifest.value("records_path", std::string());
    if (!records_override && !sr.records_path.empty() && !loaded_records.count(sr.records_path)) {
      const std::string expected = manifest.value("records_digest", std::string());
      if (!expected.empty() && sha256_file(sr.records_path) != expected) {
        throw DataError("records file '" + sr.records_path + "' changed since run '" + stem +
                        "' was made");
      }
      merge_truths(out.truths, load_records_file(sr.records_path), sr.records_path);
      loaded_records[sr.records_path] = true;
    }
    out.runs.push_back(std::move(sr));
  }
  return out;
}

std::vector<CheckpointRun> ensemble_pool(const RunCollection& runs, TemplateId template_id) {
  std::vector<CheckpointRun> pool;
  for (const auto& sr : runs.runs) {
    if (sr.run.template_id == template_id && !sr.run.excluded_from_regeneration) {
      pool.push_back(sr.run);
    }
  }
  return pool;
}

std::vector<DecreaseRow> decrease_rows(const RunCollection& runs) {
  std::map<std::string, const CheckpointRun*> same, diff;
  for (const auto& sr : runs.runs) {
    if (sr.run.template_id == TemplateId::kMulti) same[sr.run.endpoint.name] = &sr.run;
    if (sr.run.template_id == TemplateId::kMultiInst) diff[sr.run.endpoint.name] = &sr.run;
  }
  std::vector<DecreaseRow> rows;
  for (const auto& [name, run] : same) {
    auto it = diff.find(name);
    if (it == diff.end()) continue;
    DecreaseRow row;
    row.endpoint = name;
    row.same_acc = score_run(*run, runs.truths).overall_acc;
    row.diff_acc = score_run(*it->second, runs.truths).overall_acc;
    if (row.same_acc <= 0.0) continue;  // ratio undefined
    row.ratio = decrease_ratio(row.same_acc, row.diff_acc);
    rows.push_back(row);
  }
  return rows;
}

Report build_report(const RunCollection& runs, const ReportOptions& options) {
  Report report;
  std::ostringstream md;
  std::ostringstream csv;
  csv << "run,endpoint,template,n_samples,overall_acc,event_acc,useful_acc,aid_acc,"
         "invalid_fraction,one_shot_invalid_fraction,excluded,requests\n";

  md << "# Evaluation report\n\n";
  if (runs.runs.empty()) {
    md << "No runs found.\n";
    report.markdown = md.str();
    report.metrics_csv = csv.str();
    return report;
  }

  for (TemplateId t : kAllTemplates) {
    const auto pool = ensemble_pool(runs, t);
    if (pool.empty()) continue;
    const auto top = leaderboard(pool, runs.truths, options.top_k);
    md << "## Leaderboard (" << to_string(t) << ", top " << top.size() << ")\n\n"
       << "| rank | endpoint | overall | event | useful | aid |\n"
       << "|---:|---|---:|---:|---:|---:|\n";
    for (std::size_t i = 0; i < top.size(); ++i) {
      const auto& m = top[i].metrics;
      md << "| " << i + 1 << " | " << top[i].name << " | " << fixed3(m.overall_acc) << " | "
         << fixed3(m.event_acc) << " | " << fixed3(m.useful_acc) << " | " << fixed3(m.aid_acc)
         << " |\n";
    }
    md << "\n";
  }

  md << "## Per-run metrics\n\n"
     << "| run | template | n | overall | event | useful | aid | invalid | one-shot invalid | "
        "excluded | requests |\n"
     << "|---|---|---:|---:|---:|---:|---:|---:|---:|---|---:|\n";
  for (const auto& sr : runs.runs) {
    const Metrics m = score_run(sr.run, runs.truths);
    const char* excluded = sr.run.excluded_from_regeneration ? "yes" : "no";
    md << "| " << sr.stem << " | " << to_string(sr.run.template_id) << " | " << m.n_samples
       << " | " << fixed3(m.overall_acc) << " | " << fixed3(m.event_acc) << " | "
       << fixed3(m.useful_acc) << " | " << fixed3(m.aid_acc) << " | "
       << fixed3(m.invalid_fraction) << " | " << fixed3(sr.run.one_shot_invalid_fraction)
       << " | " << excluded << " | " << sr.run.requests_issued() << " |\n";
    csv << sr.stem << ',' << sr.run.endpoint.name << ',' << to_string(sr.run.template_id) << ','
        << m.n_samples << ',' << fixed3(m.overall_acc) << ',' << fixed3(m.event_acc) << ','
        << fixed3(m.useful_acc) << ',' << fixed3(m.aid_acc) << ',' << fixed3(m.invalid_fraction)
        << ',' << fixed3(sr.run.one_shot_invalid_fraction) << ',' << excluded << ','
        << sr.run.requests_issued() << '\n';
  }
  md << "\n";

  const auto rows = decrease_rows(runs);
  if (!rows.empty()) {
    md << "## Template mismatch\n\n"
       << "| endpoint | " << to_string(TemplateId::kMulti) << " | "
       << to_string(TemplateId::kMultiInst) << " | decrease ratio |\n"
       << "|---|---:|---:|---:|\n";
    for (const auto& r : rows) {
      md << "| " << r.endpoint << " | " << fixed3(r.same_acc) << " | " << fixed3(r.diff_acc)
         << " | " << format_percent(r.ratio) << " |\n";
    }
    md << "\n";
  }

  for (TemplateId t : kAllTemplates) {
    const auto pool = ensemble_pool(runs, t);
    if (pool.empty()) continue;
    auto points = sweep_n(pool, runs.truths, options.n_max);
    md << "## Ensemble sweep (" << to_string(t) << ")\n\n"
       << "| n | " << to_string(VoteType::kTriple) << " | " << to_string(VoteType::kPerLabel)
       << " |\n|---:|---:|---:|\n";
    for (std::size_t i = 0; i + 1 < points.size(); i += 2) {
      md << "| " << points[i].n << " | " << fixed3(points[i].metrics.overall_acc) << " | "
         << fixed3(points[i + 1].metrics.overall_acc) << " |\n";
    }
    md << "\n";
    for (VoteType v : {VoteType::kTriple, VoteType::kPerLabel}) {
      if (auto best = sweep_argmax(points, v)) {
        md << "Best " << to_string(v) << ": n=" << best->n << ", overall "
           << fixed3(best->metrics.overall_acc) << "\n";
      }
    }
    md << "\n";
    report.sweeps.emplace_back(t, std::move(points));
  }

  report.markdown = md.str();
  report.metrics_csv = csv.str();
  return report;
}

std::string render_sweep_svg(std::span<const SweepPoint> points, std::string_view title) {
  constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  std::size_t n_max = 1;
  double lo = 1.0, hi = 0.0;
  for (const auto& p : points) {
    n_max = std::max(n_max, p.n);
    lo = std::min(lo, p.metrics.overall_acc);
    hi = std::max(hi, p.metrics.overall_acc);
  }
  if (points.empty()) lo = 0.0, hi = 1.0;
  if (hi - lo < 0.01) {
    lo -= 0.005;
    hi += 0.005;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto x_of = [&](std::size_t n) {
    return n_max == 1 ? kLeft + plot_w / 2
                      : kLeft + plot_w * static_cast<double>(n - 1) / static_cast<double>(n_max - 1);
  };
  auto y_of = [&](double acc) { return kTop + plot_h * (hi - acc) / (hi - lo); };

  std::ostringstream svg;
  char buf[160];
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"320\" y=\"22\" text-anchor=\"middle\">" << title << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", kLeft,
                kTop + plot_h, kLeft + plot_w, kTop + plot_h);
  svg << buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", kLeft,
                kTop, kLeft, kTop + plot_h);
  svg << buf;
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%zu</text>\n",
                  x_of(n), kTop + plot_h + 18, n);
    svg << buf;
  }
  for (int i = 0; i <= 4; ++i) {
    const double acc = lo + (hi - lo) * i / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3f</text>\n",
                  kLeft - 6, y_of(acc) + 4, acc);
    svg << buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">n</text>\n",
                kLeft + plot_w / 2, kHeight - 10);
  svg << buf;

  const struct {
    VoteType vote;
    const char* color;
  } series[] = {{VoteType::kTriple, "#1f77b4"}, {VoteType::kPerLabel, "#d62728"}};
  int legend_row = 0;
  for (const auto& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& p : points) {
      if (p.vote != s.vote) continue;
      std::snprintf(buf, sizeof buf, "%s%.1f,%.1f", first ? "" : " ", x_of(p.n),
                    y_of(p.metrics.overall_acc));
      svg << buf;
      first = false;
    }
    svg << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" fill=\"%s\">%s</text>\n", kLeft + plot_w - 90,
                  kTop + 14.0 + 16.0 * legend_row++, s.color,
                  std::string(to_string(s.vote)).c_str());
    svg << buf;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace crisistune
