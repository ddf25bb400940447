#include "uiprobe/validator.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <map>
#include <set>
#include <thread>

namespace uiprobe {

using json = nlohmann::json;

namespace {

struct Resolved {
  std::vector<StepDescriptor> steps;
  std::string name;  // label of the last target
};

Resolved resolve(const InteractionGraph& g, const Transition& t) {
  Resolved r;
  for (size_t i = 0; i < t.sequence.actions.size(); ++i) {
    const Action& a = t.sequence.actions[i];
    const std::string& key = i == 0 ? t.from : t.intermediate.at(i - 1);
    const DomNode* n = find_element(g.state(key).dom, a.target);
    r.steps.push_back({a.kind, n ? n->signature : "#" + std::to_string(a.target), a.payload});
    r.name = n && !n->label.empty() ? n->label : "#" + std::to_string(a.target);
  }
  return r;
}

std::set<std::string> signatures(const DomNode& dom) {
  std::set<std::string> out;
  for (const DomNode* n : interactive_nodes(dom)) out.insert(n->signature);
  return out;
}

}  // namespace

std::vector<Task> derive_tasks(const InteractionGraph& g) {
  if (g.empty()) throw Error(ErrorCode::EmptyReference, "reference graph has no states");
  const auto& ts = g.transitions();
  std::map<std::string, size_t> first_in;
  for (size_t i = 0; i < ts.size(); ++i) {
    const Transition& t = ts[i];
    if (t.classification == Classification::NonInteractive || t.intermediate.size() != t.sequence.actions.size()) continue;
    if (t.to() != g.root() && t.to() != t.from) first_in.emplace(t.to(), i);
  }

  std::vector<Task> out;
  std::set<std::string> seen;
  for (size_t i = 0; i < ts.size(); ++i) {
    const Transition& t = ts[i];
    if (t.classification == Classification::NonInteractive) continue;
    std::deque<size_t> chain{i};
    bool reachable = true;
    for (std::string key = t.from; key != g.root();) {
      auto it = first_in.find(key);
      if (it == first_in.end() || chain.size() > ts.size()) {
        reachable = false;
        break;
      }
      chain.push_front(it->second);
      key = ts[it->second].from;
    }
    if (!reachable) continue;
    Task task;
    for (size_t k : chain) {
      Resolved r = resolve(g, ts[k]);
      task.name += (task.name.empty() ? "" : " - ") + r.name;
      task.steps.insert(task.steps.end(), r.steps.begin(), r.steps.end());
    }
    if (!seen.insert(descriptor_key(task.steps)).second) continue;
    if (t.classification == Classification::UsableExpand) {
      std::set<std::string> before = signatures(g.state(t.from).dom);
      for (const auto& s : signatures(g.state(t.to()).dom)) {
        if (!before.count(s)) task.expected_new_signatures.push_back(s);
      }
    }
    task.expected_effect = "graph:" + std::to_string(i);
    task.description = "Reproduce transition " + std::to_string(i) + " of the reference page";
    out.push_back(std::move(task));
  }
  return out;
}

std::vector<Task> derive_tasks(const FixtureManifest& m) {
  if (m.elements.empty() && m.transitions.empty()) {
    throw Error(ErrorCode::EmptyReference, "manifest " + m.fixture_id + " lists nothing");
  }
  return m.tasks;
}

double pass_rate(const std::vector<TaskResult>& results) {
  if (results.empty()) return 0.0;
  size_t passed = std::count_if(results.begin(), results.end(), [](const TaskResult& r) { return r.passed; });
  return 100.0 * static_cast<double>(passed) / static_cast<double>(results.size());
}

namespace {

// The reply's sequence for `task`: the one labelled with its name, else the
// only unlabelled one.
std::optional<ActionSequence> sequence_for(const Proposal& p, const std::string& task) {
  for (const auto& s : p.sequences) {
    if (s.task_label && *s.task_label == task) return s;
  }
  if (p.sequences.size() == 1 && !p.sequences[0].task_label) return p.sequences[0];
  return std::nullopt;
}

std::string issues_text(const Proposal& p) {
  return p.issues.empty() ? "no sequence for this task" : p.issues.front().message;
}

// Stage 1 with retries while the reply does not parse at all.
Proposal select_stage(Policy& policy, const PolicyRequest& req, int retries) {
  Proposal p = policy.select(req);
  for (int i = 0; i < retries && p.sequences.empty() && !p.issues.empty(); ++i) p = policy.select(req);
  return p;
}

class Branch {
 public:
  Branch(const PageSource& source, const Task& task, Policy& actor, Policy& judge, const ValidateOptions& opts)
      : source_(source), actor_(actor), judge_(judge), opts_(opts) {
    result_.task = task;
  }

  TaskResult run(const std::optional<ActionSequence>& first, const std::string& stage1_issue) {
    try {
      session_.emplace(EnvSession::load(source_, opts_.backend, opts_.env));
    } catch (const Error& e) {
      return fail(e.what());
    }
    result_.states.push_back(session_->current());
    if (!first) return fail("ProtocolFailure: stage 1: " + stage1_issue);
    if (!execute(*first)) return result_;
    StateMarker marker = first->state_marker.value_or(StateMarker::Complete);
    while (marker == StateMarker::Continue) {
      PolicyRequest req;
      req.kind = RequestKind::ValidateProcess;
      req.states = {session_->current()};
      req.task = result_.task;
      req.history = history_;
      if (result_.rounds >= opts_.round_cap) return fail("round cap");
      Proposal p = actor_.process(req);
      std::optional<ActionSequence> next = sequence_for(p, result_.task.name);
      for (int i = 0; i < opts_.protocol_retries && !next; ++i) {
        p = actor_.process(req);
        next = sequence_for(p, result_.task.name);
      }
      if (!next) return fail("ProtocolFailure: stage 2: " + issues_text(p));
      if (!execute(*next)) return result_;
      marker = next->state_marker.value_or(StateMarker::Complete);
    }
    judge();
    return result_;
  }

 private:
  TaskResult fail(std::string reason) {
    result_.passed = false;
    result_.reason = std::move(reason);
    return result_;
  }

  bool execute(ActionSequence seq) {
    if (result_.rounds >= opts_.round_cap) {
      fail("round cap");
      return false;
    }
    ++result_.rounds;
    seq.task_label = result_.task.name;
    UIState before = session_->current();
    SequenceResult r = session_->run_sequence(seq);
    std::vector<const UIState*> ptrs{&before};
    for (size_t i = 0; i < r.states.size() && ptrs.size() < seq.actions.size(); ++i) ptrs.push_back(&r.states[i]);
    history_.push_back(make_history_entry(seq, ptrs));
    result_.trace.push_back({before, seq});
    for (auto& s : r.states) result_.states.push_back(std::move(s));
    if (!r.ok()) {
      fail(std::string("execution failed: ") + r.error->what());
      return false;
    }
    return true;
  }

  void judge() {
    PolicyRequest req;
    req.kind = RequestKind::ValidateJudge;
    req.task = result_.task;
    req.states = result_.states;
    std::string last_error;
    for (int i = 0; i <= opts_.protocol_retries; ++i) {
      try {
        JudgeVerdict v = judge_.judge(req);
        result_.passed = v.pass;
        result_.judge_rationale = v.rationale;
        return;
      } catch (const Error& e) {
        last_error = e.what();
        if (e.code() == ErrorCode::BackendFailure) break;
      }
    }
    fail("ProtocolFailure: stage 3: " + last_error);
  }

  const PageSource& source_;
  Policy& actor_;
  Policy& judge_;
  const ValidateOptions& opts_;
  std::optional<EnvSession> session_;
  std::vector<HistoryEntry> history_;
  TaskResult result_;
};

}  // namespace

ValidationReport validate(const PageSource& source, const std::vector<Task>& tasks, Policy& policy,
                          const ValidateOptions& options) {
  if (tasks.empty()) throw Error(ErrorCode::InvalidArgument, "no tasks to validate");
  if (options.round_cap < 0) throw Error(ErrorCode::InvalidArgument, "round_cap must be >= 0");
  Policy& judge = options.judge ? *options.judge : policy;
  ValidationReport report;
  report.page_ref = source.ref.empty() ? source.file.string() : source.ref;

  EnvSession initial = EnvSession::load(source, options.backend, options.env);
  PolicyRequest req;
  req.kind = RequestKind::ValidateSelect;
  req.states = {initial.current()};
  req.tasks = tasks;
  Proposal stage1;
  std::string stage1_error;
  try {
    stage1 = select_stage(policy, req, options.protocol_retries);
  } catch (const Error& e) {
    stage1_error = e.what();
  }

  report.tasks.resize(tasks.size());
  size_t width = std::min<size_t>(tasks.size(), static_cast<size_t>(std::max(1, options.parallelism)));
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      std::optional<ActionSequence> first;
      if (stage1_error.empty()) first = sequence_for(stage1, tasks[i].name);
      std::string issue = stage1_error.empty() ? issues_text(stage1) : stage1_error;
      try {
        report.tasks[i] = Branch(source, tasks[i], policy, judge, options).run(first, issue);
      } catch (const std::exception& e) {
        report.tasks[i].task = tasks[i];
        report.tasks[i].reason = e.what();
      }
    }
  };
  if (width <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < width; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  report.pass_rate = pass_rate(report.tasks);
  return report;
}

TaskResult run_task(const PageSource& source, const Task& task, Policy& policy, const ValidateOptions& options) {
  return validate(source, {task}, policy, options).tasks.front();
}

namespace {

std::string sequence_text(const ActionSequence& s) {
  try {
    return serialize_sequence(s);
  } catch (const Error&) {
    // labels with braces cannot be boxed; drop the markers
    return serialize_sequences({{s.actions, std::nullopt, std::nullopt}});
  }
}

}  // namespace

json report_to_json(const ValidationReport& report) {
  json tasks = json::array();
  for (const auto& r : report.tasks) {
    json trace = json::array();
    for (const auto& s : r.trace) {
      trace.push_back({{"state_key", s.state.state_key},
                       {"screenshot", s.state.screenshot.path},
                       {"sequence", sequence_text(s.sequence)}});
    }
    tasks.push_back({{"name", r.task.name},
                     {"task", r.task},
                     {"passed", r.passed},
                     {"rounds", r.rounds},
                     {"reason", r.reason},
                     {"judge_rationale", r.judge_rationale},
                     {"trace", trace}});
  }
  return {{"page_ref", report.page_ref}, {"tasks", tasks}, {"pass_rate", report.pass_rate}};
}

}  // namespace uiprobe
