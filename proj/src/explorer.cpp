#include "uiprobe/explorer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace uiprobe {

void ExploreBudget::validate() const {
  if (max_depth < 1 || max_candidates_per_state < 1 || max_total_actions < 1) {
    throw Error(ErrorCode::InvalidArgument, "budget bounds must be >= 1");
  }
  if (!(strategy_mix >= 0.0 && strategy_mix <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "strategy_mix must lie in [0, 1]");
  }
}

FrontierOrder pop_order(double mix, int i) {
  return std::floor((i + 1) * mix) > std::floor(i * mix) ? FrontierOrder::LIFO : FrontierOrder::FIFO;
}

std::vector<StepDescriptor> candidate_steps(const ActionSequence& seq, const UIState& state) {
  std::vector<StepDescriptor> out;
  for (const Action& a : seq.actions) {
    const DomNode* n = find_element(state.dom, a.target);
    out.push_back({a.kind, n ? n->signature : "#" + std::to_string(a.target), a.payload});
  }
  return out;
}

std::vector<ActionSequence> dedup_candidates(const std::vector<ActionSequence>& candidates,
                                             const std::set<std::string>& executed_keys, const UIState& state) {
  std::set<std::string> seen = executed_keys;
  std::vector<ActionSequence> out;
  for (const auto& c : candidates) {
    if (seen.insert(descriptor_key(candidate_steps(c, state))).second) out.push_back(c);
  }
  return out;
}

EnvSession replay_path(const PageSource& source, const std::vector<ActionSequence>& path, const ExploreOptions& options,
                       std::vector<HistoryEntry>* history) {
  EnvSession session = EnvSession::load(source, options.backend, options.env);
  for (size_t k = 0; k < path.size(); ++k) {
    UIState before = session.current();
    SequenceResult r = session.run_sequence(path[k]);
    if (!r.ok()) {
      throw Error(ErrorCode::ExecutionFailure,
                  "replay of path step " + std::to_string(k + 1) + " failed: " + r.error->what());
    }
    if (history) {
      std::vector<const UIState*> ptrs{&before};
      for (size_t i = 0; i + 1 < r.states.size(); ++i) ptrs.push_back(&r.states[i]);
      history->push_back(make_history_entry(path[k], ptrs));
    }
  }
  return session;
}

namespace {

// What one candidate produced, before it is merged into the graph.
struct Outcome {
  std::vector<UIState> states;
  HistoryEntry entry;
  VerificationVerdict verdict;
  std::string note;
};

Outcome run_candidate(const PageSource& source, const std::vector<ActionSequence>& path,
                      const std::vector<HistoryEntry>& history, const UIState& origin, const ActionSequence& candidate,
                      Policy& policy, const ExploreOptions& options) {
  Outcome out;
  out.verdict = {false, StateMarker::Complete, ""};
  try {
    EnvSession session = replay_path(source, path, options);
    if (session.current().state_key != origin.state_key) {
      throw Error(ErrorCode::ExecutionFailure, "replay reached a different state");
    }
    SequenceResult r = session.run_sequence(candidate);
    out.states = std::move(r.states);
    std::vector<const UIState*> ptrs{&origin};
    for (size_t i = 0; i < out.states.size() && ptrs.size() < candidate.actions.size(); ++i) {
      ptrs.push_back(&out.states[i]);
    }
    out.entry = make_history_entry(candidate, ptrs);
    if (!r.ok()) {
      out.note = r.error->what();
      out.verdict.rationale = "execution failed";
      return out;
    }
    PolicyRequest req;
    req.kind = RequestKind::Verify;
    req.states.push_back(origin);
    for (const auto& s : out.states) req.states.push_back(s);
    req.history = history;
    req.history.push_back(out.entry);
    req.element_names = {format_element_names(out.entry)};
    out.verdict = policy.verify(req);
  } catch (const std::exception& e) {
    out.note = e.what();
    out.verdict = {false, StateMarker::Complete, "candidate aborted"};
    if (out.entry.sequence.actions.empty()) out.entry = make_history_entry(candidate, {&origin});
  }
  return out;
}

template <typename Fn>
void parallel_for(size_t n, int width, Fn fn) {
  size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, width)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

ExploreResult explore(const PageSource& source, Policy& policy, const ExploreBudget& budget,
                      const ExploreOptions& options) {
  budget.validate();
  ExploreResult res;
  InteractionGraph& graph = res.graph;
  ExplorationTrace& trace = res.trace;

  {
    EnvSession first = EnvSession::load(source, options.backend, options.env);
    graph.intern_state(first.current());
    graph.push_frontier(graph.root());
  }

  std::set<std::string> executed_keys;
  for (int pops = 0; trace.wall_steps < budget.max_total_actions; ++pops) {
    auto key = graph.frontier_pop(pop_order(budget.strategy_mix, pops));
    if (!key) break;
    if (graph.depth(*key) >= budget.max_depth) continue;

    std::vector<ActionSequence> path = graph.path_to(*key);
    std::vector<HistoryEntry> history;
    UIState origin;
    try {
      EnvSession session = replay_path(source, path, options, &history);
      origin = session.current();
      if (origin.state_key != *key) throw Error(ErrorCode::ExecutionFailure, "replay reached a different state");
    } catch (const std::exception& e) {
      trace.warnings.push_back(*key + ": " + e.what());
      continue;
    }

    Proposal proposal;
    try {
      PolicyRequest req;
      req.kind = RequestKind::Propose;
      req.states = {origin};
      req.history = history;
      proposal = policy.propose(req);
    } catch (const std::exception& e) {
      trace.warnings.push_back(*key + ": " + e.what());
      continue;
    }

    std::vector<ActionSequence> candidates = dedup_candidates(proposal.sequences, executed_keys, origin);
    size_t room = static_cast<size_t>(
        std::min(budget.max_candidates_per_state, budget.max_total_actions - trace.wall_steps));
    if (candidates.size() > room) candidates.resize(room);
    for (const auto& c : candidates) executed_keys.insert(descriptor_key(candidate_steps(c, origin)));

    std::vector<Outcome> outcomes(candidates.size());
    parallel_for(candidates.size(), options.parallelism, [&](size_t i) {
      outcomes[i] = run_candidate(source, path, history, origin, candidates[i], policy, options);
    });

    // single writer: merge in proposal order
    for (size_t i = 0; i < candidates.size(); ++i) {
      Outcome& o = outcomes[i];
      Transition t;
      t.from = *key;
      t.sequence = candidates[i];
      for (const auto& s : o.states) t.intermediate.push_back(graph.intern_state(s).first);
      t.verdict = o.verdict;
      t.classification = classify(o.verdict);
      t.note = o.note;
      TraceEntry e{*key, t.sequence, o.entry.steps, t.verdict, t.classification, t.to(), t.note};
      graph.record_transition(std::move(t));
      trace.executed.push_back(std::move(e));
      ++trace.wall_steps;
    }
  }
  return res;
}

void to_json(nlohmann::json& j, const TraceEntry& e) {
  j = {{"state_key", e.state_key},
       {"sequence", e.sequence},
       {"steps", e.steps},
       {"verdict", e.verdict},
       {"classification", std::string(to_string(e.classification))},
       {"target_key", e.target_key},
       {"note", e.note}};
}

void from_json(const nlohmann::json& j, TraceEntry& e) {
  j.at("state_key").get_to(e.state_key);
  j.at("sequence").get_to(e.sequence);
  j.at("steps").get_to(e.steps);
  j.at("verdict").get_to(e.verdict);
  e.classification = classification_from_string(j.at("classification").get<std::string>());
  j.at("target_key").get_to(e.target_key);
  e.note = j.value("note", "");
}

void to_json(nlohmann::json& j, const ExplorationTrace& t) {
  j = {{"wall_steps", t.wall_steps}, {"executed", t.executed}, {"warnings", t.warnings}};
}

void from_json(const nlohmann::json& j, ExplorationTrace& t) {
  j.at("executed").get_to(t.executed);
  j.at("wall_steps").get_to(t.wall_steps);
  t.warnings = j.value("warnings", std::vector<std::string>{});
}

}  // namespace uiprobe
