#pragma once

// Offline benchmark files and the runners behind eval-agent / eval-pipeline.
//
// A benchmark directory holds agent.jsonl and verification.jsonl. Each line
// names a page (relative to the directory), the DSL sequences that lead from
// the loaded page to the sample's state, and the expected answer:
//   agent:        {"page", "path": [..], "gold": "\boxed{..}, \boxed{..}"}
//   verification: {"page", "path": [..], "sequence": "\boxed{..}", "pass", "terminate"}
// Element ids in `gold` and `sequence` refer to the sample's state.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "uiprobe/corpus.hpp"
#include "uiprobe/env.hpp"
#include "uiprobe/metrics.hpp"
#include "uiprobe/policy.hpp"

namespace uiprobe {

struct AgentSample {
  std::string page;
  std::vector<std::string> path;
  std::string gold;
};

struct VerificationSample {
  std::string page;
  std::vector<std::string> path;
  std::string sequence;
  bool pass = false;
  StateMarker terminate = StateMarker::Complete;
};

struct Benchmark {
  std::vector<AgentSample> agent;
  std::vector<VerificationSample> verification;
};

// Samples for one fixture: an agent sample per distinct transition prefix,
// whose gold is every manifest sequence starting there, and a verification
// sample per transition. `page` is stored as given. Throws
// Error(LoadFailure) or Error(UnknownTarget) when the manifest does not fit
// the page.
Benchmark benchmark_from_manifest(const FixtureManifest& m, const std::string& document, const std::string& page);

void save_benchmark(const Benchmark& b, const std::filesystem::path& dir);
// Throws Error(SerializationFailure) or Error(SchemaMismatch).
Benchmark load_benchmark(const std::filesystem::path& dir);

struct EvalOptions {
  BackendKind backend = BackendKind::Simulator;
  EnvOptions env;
  int parallelism = 4;
};

struct AgentEval {
  PRF macro;
  std::vector<PRF> samples;
  VerificationScores verification;
  int failed_calls = 0;  // replies that could not be used; scored as empty
};

// Scores `policy` on every sample. Agent samples missing from the benchmark
// leave `macro` at zero; same for verification. Throws Error(LoadFailure)
// and Error(ExecutionFailure) when a sample's page or path does not run.
AgentEval eval_agent(const std::filesystem::path& bench_dir, Policy& policy, const EvalOptions& options = {});

struct PipelineRow {
  std::string fixture_id;
  PipelineScores scores;
  int wall_steps = 0;
};

// Each run directory under `runs` is matched to gold/<name>/manifest.json by
// directory name. Runs without gold are skipped. Throws Error(EmptyGold)
// when nothing matched.
std::vector<PipelineRow> eval_pipeline(const std::filesystem::path& runs, const std::filesystem::path& gold,
                                       const PipelineWeights& weights = {});
// Column means, with the overall recomputed from the mean columns.
PipelineScores mean_scores(const std::vector<PipelineRow>& rows, const PipelineWeights& weights = {});

}  // namespace uiprobe
