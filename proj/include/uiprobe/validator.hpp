#pragma once

// Task-oriented page validation. Tasks come from a reference graph or a
// fixture manifest; each one runs on its own session through three prompted
// stages (pick a first sequence, continue until done, judge the branch).

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "uiprobe/corpus.hpp"
#include "uiprobe/env.hpp"
#include "uiprobe/graph.hpp"
#include "uiprobe/policy.hpp"

namespace uiprobe {

// One task per group of usable transitions sharing a step tuple, named after
// the label of each sequence's last target; transitions out of deeper states
// chain the path's names with " - ". Throws Error(EmptyReference).
std::vector<Task> derive_tasks(const InteractionGraph& graph);
// The manifest's own tasks. Throws Error(EmptyReference).
std::vector<Task> derive_tasks(const FixtureManifest& manifest);

struct BranchStep {
  UIState state;  // before the sequence
  ActionSequence sequence;
};

struct TaskResult {
  Task task;
  bool passed = false;
  int rounds = 0;  // executed sequences
  std::vector<BranchStep> trace;
  std::vector<UIState> states;  // chronological, shown to the judge
  std::string judge_rationale;
  std::string reason;           // why a task failed before judging
};

struct ValidationReport {
  std::string page_ref;
  std::vector<TaskResult> tasks;
  double pass_rate = 0.0;
};

struct ValidateOptions {
  int round_cap = 5;
  int protocol_retries = 1;  // extra attempts for an unparseable stage reply
  BackendKind backend = BackendKind::Simulator;
  EnvOptions env;
  int parallelism = 4;
  Policy* judge = nullptr;  // defaults to the actor
};

// Percentage of passed results; 0 for an empty list.
double pass_rate(const std::vector<TaskResult>& results);

// Single-task run. Throws Error(LoadFailure); protocol trouble is a failed
// result with a reason.
TaskResult run_task(const PageSource& source, const Task& task, Policy& policy, const ValidateOptions& options = {});

// Stage 1 runs once over the whole task list on the initial page; each task
// then continues on its own session. Throws Error(InvalidArgument) for an
// empty task list and Error(LoadFailure).
ValidationReport validate(const PageSource& source, const std::vector<Task>& tasks, Policy& policy,
                          const ValidateOptions& options = {});

nlohmann::json report_to_json(const ValidationReport& report);

}  // namespace uiprobe
