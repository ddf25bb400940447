#pragma once

// Exploration loop: pop a frontier state, rebuild it by replaying its path on
// a fresh session, ask the policy for candidate sequences, run and verify
// each one, and record the outcome in the interaction graph.

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "uiprobe/env.hpp"
#include "uiprobe/graph.hpp"
#include "uiprobe/policy.hpp"

namespace uiprobe {

struct ExploreBudget {
  int max_depth = 5;
  int max_candidates_per_state = 12;
  int max_total_actions = 200;
  double strategy_mix = 0.5;  // share of frontier pops served LIFO

  // Throws Error(InvalidArgument).
  void validate() const;
};

// Order for the i-th pop (0-based): LIFO whenever floor((i+1)*mix) moves past
// floor(i*mix), so over n pops round(n*mix)-ish are depth-first and the two
// orders interleave evenly.
FrontierOrder pop_order(double strategy_mix, int pop_index);

struct TraceEntry {
  std::string state_key;             // state the sequence ran from
  ActionSequence sequence;
  std::vector<StepDescriptor> steps;  // targets resolved in the state each action ran in
  VerificationVerdict verdict;
  Classification classification = Classification::NonInteractive;
  std::string target_key;            // final state; state_key when nothing ran
  std::string note;                  // execution or verification error

  bool operator==(const TraceEntry&) const = default;
};

struct ExplorationTrace {
  std::vector<TraceEntry> executed;
  int wall_steps = 0;
  std::vector<std::string> warnings;  // states that could not be expanded

  bool operator==(const ExplorationTrace&) const = default;
};

struct ExploreOptions {
  BackendKind backend = BackendKind::Simulator;
  EnvOptions env;        // env.artifact_dir receives screenshots
  int parallelism = 4;   // concurrent candidate sessions per state
};

struct ExploreResult {
  InteractionGraph graph;
  ExplorationTrace trace;
};

// Throws Error(LoadFailure) when the page cannot be loaded and
// Error(InvalidArgument) for a bad budget. Everything after the first load is
// recorded rather than thrown.
ExploreResult explore(const PageSource& source, Policy& policy, const ExploreBudget& budget,
                      const ExploreOptions& options = {});

// Steps of `seq` with every target resolved against `state`; ids missing
// from it (controls revealed by an earlier action) resolve to "#<id>".
std::vector<StepDescriptor> candidate_steps(const ActionSequence& seq, const UIState& state);

// Drops candidates whose step tuple, resolved against `state`, was already
// executed or appears earlier in the list. Order is preserved.
std::vector<ActionSequence> dedup_candidates(const std::vector<ActionSequence>& candidates,
                                             const std::set<std::string>& executed_keys, const UIState& state);

// Rebuilds a state: fresh session plus replay of `path`. `history` receives
// one entry per replayed sequence. Throws Error(LoadFailure) or
// Error(ExecutionFailure) when a replayed sequence fails.
EnvSession replay_path(const PageSource& source, const std::vector<ActionSequence>& path, const ExploreOptions& options,
                       std::vector<HistoryEntry>* history = nullptr);

void to_json(nlohmann::json& j, const TraceEntry& e);
void from_json(const nlohmann::json& j, TraceEntry& e);
void to_json(nlohmann::json& j, const ExplorationTrace& t);
void from_json(const nlohmann::json& j, ExplorationTrace& t);

// Run directory: graph.json, trace.json, screenshots/, prompts/.
namespace run_dir {
inline constexpr const char* kGraph = "graph.json";
inline constexpr const char* kTrace = "trace.json";
inline constexpr const char* kScreenshots = "screenshots";
inline constexpr const char* kPrompts = "prompts";

// Creates the directory tree and attaches a prompt audit to `policy`.
std::shared_ptr<PromptAudit> prepare(const std::filesystem::path& dir, Policy& policy);
// Env options that store screenshots under `dir`.
EnvOptions env_options(const std::filesystem::path& dir, EnvOptions base = {});
void save(const std::filesystem::path& dir, const ExploreResult& result);
// Throws Error(SerializationFailure) or Error(SchemaMismatch).
ExploreResult load(const std::filesystem::path& dir);
ExplorationTrace load_trace(const std::filesystem::path& path);
}  // namespace run_dir

}  // namespace uiprobe
