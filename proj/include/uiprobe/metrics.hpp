#pragma once

// Scores for action generation, step verification and whole exploration
// runs. All percentages are on a 0-100 scale.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "uiprobe/corpus.hpp"
#include "uiprobe/explorer.hpp"

namespace uiprobe {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Descriptor keys (see descriptor_key) of every action in `sequences`, with
// targets resolved against `state` the way the explorer resolves candidates.
std::set<std::string> action_descriptors(const std::vector<ActionSequence>& sequences, const UIState& state);
std::set<std::string> action_descriptors(const std::vector<std::vector<StepDescriptor>>& sequences);

// Throws Error(EmptyGold).
PRF sample_prf(const std::set<std::string>& predicted, const std::set<std::string>& gold);
// Column means. Throws Error(InvalidArgument) for no samples.
PRF macro_prf(const std::vector<PRF>& samples);
double harmonic_mean(double a, double b);

struct VerificationScores {
  double pass_acc = 0.0;
  double terminate_acc = 0.0;
  double overall_acc = 0.0;
};

double verification_overall(double pass_acc, double terminate_acc);
// Throws Error(LengthMismatch) for unequal or empty lists.
VerificationScores verification_scores(const std::vector<VerificationVerdict>& predicted,
                                       const std::vector<VerificationVerdict>& gold);

struct PipelineWeights {
  double completeness = 0.40;
  double correctness = 0.35;
  double dedup = 0.25;
};

struct PipelineScores {
  double completeness = 0.0;
  double correctness = 0.0;
  double dedup_rate = 0.0;
  double overall = 0.0;
};

double pipeline_overall(double completeness, double correctness, double dedup, const PipelineWeights& w = {});

// Ground truth for one page: its controls and the expected category of each
// sequence, keyed by descriptor_key of the steps.
struct PipelineGold {
  std::set<std::string> elements;
  std::map<std::string, Classification> labels;
};

PipelineGold gold_from_manifest(const FixtureManifest& m);

// Throws Error(EmptyGold) when the gold lists no elements. A sequence the
// gold does not label counts as incorrect; an empty trace scores 0 on
// correctness and 100 on dedup.
PipelineScores pipeline_scores(const ExplorationTrace& trace, const PipelineGold& gold, const PipelineWeights& w = {});
// Executed entries whose step tuple repeats an earlier one.
int duplicate_count(const ExplorationTrace& trace);

struct TraceStats {
  double mean = 0.0;
  int min = 0;
  int max = 0;
};

// Throws Error(InvalidArgument) for no traces.
TraceStats trace_length(const std::vector<ExplorationTrace>& traces);

struct MetricsReport {
  std::optional<PRF> action;
  std::optional<VerificationScores> verification;
  std::optional<PipelineScores> pipeline;
  std::optional<TraceStats> traces;
};

nlohmann::json to_json_report(const MetricsReport& report);

// Aligned plain-text tables, one row per named entry.
std::string format_action_table(const std::vector<std::pair<std::string, PRF>>& rows);
std::string format_verification_table(const std::vector<std::pair<std::string, VerificationScores>>& rows);
std::string format_pipeline_table(const std::vector<std::pair<std::string, PipelineScores>>& rows);

}  // namespace uiprobe
