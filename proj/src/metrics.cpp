#include "uiprobe/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace uiprobe {

using json = nlohmann::json;

std::set<std::string> action_descriptors(const std::vector<ActionSequence>& sequences, const UIState& state) {
  std::set<std::string> out;
  for (const auto& seq : sequences) {
    for (const auto& step : candidate_steps(seq, state)) out.insert(descriptor_key(step));
  }
  return out;
}

std::set<std::string> action_descriptors(const std::vector<std::vector<StepDescriptor>>& sequences) {
  std::set<std::string> out;
  for (const auto& seq : sequences) {
    for (const auto& step : seq) out.insert(descriptor_key(step));
  }
  return out;
}

double harmonic_mean(double a, double b) { return a + b > 0 ? 2 * a * b / (a + b) : 0.0; }

PRF sample_prf(const std::set<std::string>& predicted, const std::set<std::string>& gold) {
  if (gold.empty()) throw Error(ErrorCode::EmptyGold, "gold action set is empty");
  size_t hit = 0;
  for (const auto& p : predicted) hit += gold.count(p);
  PRF r;
  r.precision = predicted.empty() ? 0.0 : 100.0 * static_cast<double>(hit) / static_cast<double>(predicted.size());
  r.recall = 100.0 * static_cast<double>(hit) / static_cast<double>(gold.size());
  r.f1 = harmonic_mean(r.precision, r.recall);
  return r;
}

PRF macro_prf(const std::vector<PRF>& samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "macro average of no samples");
  PRF m;
  for (const auto& s : samples) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  double n = static_cast<double>(samples.size());
  return {m.precision / n, m.recall / n, m.f1 / n};
}

double verification_overall(double pass_acc, double terminate_acc) { return (pass_acc + terminate_acc) / 2.0; }

VerificationScores verification_scores(const std::vector<VerificationVerdict>& predicted,
                                       const std::vector<VerificationVerdict>& gold) {
  if (predicted.size() != gold.size() || gold.empty()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predicted.size()) + " predictions for " +
                                               std::to_string(gold.size()) + " gold verdicts");
  }
  size_t pass = 0;
  size_t term = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    pass += predicted[i].pass == gold[i].pass;
    term += predicted[i].terminate == gold[i].terminate;
  }
  double n = static_cast<double>(gold.size());
  VerificationScores s;
  s.pass_acc = 100.0 * static_cast<double>(pass) / n;
  s.terminate_acc = 100.0 * static_cast<double>(term) / n;
  s.overall_acc = verification_overall(s.pass_acc, s.terminate_acc);
  return s;
}

double pipeline_overall(double completeness, double correctness, double dedup, const PipelineWeights& w) {
  return w.completeness * completeness + w.correctness * correctness + w.dedup * dedup;
}

PipelineGold gold_from_manifest(const FixtureManifest& m) {
  PipelineGold g;
  for (const auto& e : m.elements) g.elements.insert(e.signature);
  for (const auto& t : m.transitions) g.labels[descriptor_key(t.steps)] = t.category;
  return g;
}

int duplicate_count(const ExplorationTrace& trace) {
  std::set<std::string> seen;
  int dup = 0;
  for (const auto& e : trace.executed) dup += !seen.insert(descriptor_key(e.steps)).second;
  return dup;
}

PipelineScores pipeline_scores(const ExplorationTrace& trace, const PipelineGold& gold, const PipelineWeights& w) {
  if (gold.elements.empty()) throw Error(ErrorCode::EmptyGold, "gold lists no interactive elements");
  std::set<std::string> touched;
  size_t correct = 0;
  for (const auto& e : trace.executed) {
    for (const auto& s : e.steps) touched.insert(s.signature);
    auto it = gold.labels.find(descriptor_key(e.steps));
    correct += it != gold.labels.end() && it->second == e.classification;
  }
  size_t covered = 0;
  for (const auto& el : gold.elements) covered += touched.count(el);

  PipelineScores s;
  double n = static_cast<double>(trace.executed.size());
  s.completeness = 100.0 * static_cast<double>(covered) / static_cast<double>(gold.elements.size());
  s.correctness = n > 0 ? 100.0 * static_cast<double>(correct) / n : 0.0;
  s.dedup_rate = n > 0 ? 100.0 * (1.0 - duplicate_count(trace) / n) : 100.0;
  s.overall = pipeline_overall(s.completeness, s.correctness, s.dedup_rate, w);
  return s;
}

TraceStats trace_length(const std::vector<ExplorationTrace>& traces) {
  if (traces.empty()) throw Error(ErrorCode::InvalidArgument, "no traces");
  TraceStats t;
  t.min = t.max = traces.front().wall_steps;
  double sum = 0;
  for (const auto& tr : traces) {
    sum += tr.wall_steps;
    t.min = std::min(t.min, tr.wall_steps);
    t.max = std::max(t.max, tr.wall_steps);
  }
  t.mean = sum / static_cast<double>(traces.size());
  return t;
}

json to_json_report(const MetricsReport& r) {
  json j = json::object();
  if (r.action) j["action"] = {{"precision", r.action->precision}, {"recall", r.action->recall}, {"f1", r.action->f1}};
  if (r.verification) {
    j["verification"] = {{"pass_acc", r.verification->pass_acc},
                         {"terminate_acc", r.verification->terminate_acc},
                         {"overall_acc", r.verification->overall_acc}};
  }
  if (r.pipeline) {
    j["pipeline"] = {{"completeness", r.pipeline->completeness},
                     {"correctness", r.pipeline->correctness},
                     {"dedup_rate", r.pipeline->dedup_rate},
                     {"overall", r.pipeline->overall}};
  }
  if (r.traces) j["trace_length"] = {{"mean", r.traces->mean}, {"min", r.traces->min}, {"max", r.traces->max}};
  return j;
}

namespace {

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width(header.size());
  for (size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (size_t c = 0; c < cells.size(); ++c) {
      std::string pad(width[c] - cells[c].size(), ' ');
      // names left, numbers right
      out += c == 0 ? cells[c] + pad : " | " + pad + cells[c];
    }
    return out + "\n";
  };
  std::string out = line(header);
  size_t total = 0;
  for (size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 3 : 0);
  out += std::string(total, '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string format_action_table(const std::vector<std::pair<std::string, PRF>>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& [name, p] : rows) cells.push_back({name, pct(p.precision), pct(p.recall), pct(p.f1)});
  return table({"Model", "Precision (%)", "Recall (%)", "F1 (%)"}, cells);
}

std::string format_verification_table(const std::vector<std::pair<std::string, VerificationScores>>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& [name, v] : rows) cells.push_back({name, pct(v.pass_acc), pct(v.terminate_acc), pct(v.overall_acc)});
  return table({"Model", "Pass Acc", "Terminate Acc", "Overall Acc"}, cells);
}

std::string format_pipeline_table(const std::vector<std::pair<std::string, PipelineScores>>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& [name, s] : rows) {
    cells.push_back({name, pct(s.completeness), pct(s.correctness), pct(s.dedup_rate), pct(s.overall)});
  }
  return table({"Run", "Completeness (%)", "Correctness (%)", "Dedup Rate (%)", "Overall (%)"}, cells);
}

}  // namespace uiprobe
