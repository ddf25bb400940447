#include <algorithm>
#include <map>
#include <set>

#include "uiprobe/policy.hpp"

namespace uiprobe {

namespace {

std::string attr(const DomNode& n, const std::string& key) {
  auto it = n.attributes.find(key);
  return it == n.attributes.end() ? std::string() : it->second;
}

bool is_toggle(const DomNode& n) {
  std::string type = attr(n, "type");
  return n.tag == "input" && (type == "checkbox" || type == "radio");
}

bool is_field(const DomNode& n) { return is_text_entry(n) || n.tag == "select"; }

bool is_group_container(const DomNode& n) {
  std::string role = attr(n, "role");
  return n.tag == "form" || role == "form" || role == "search" || role == "dialog";
}

struct Located {
  const DomNode* node;
  int group;  // node_id of the grouping container
};

// Interactive nodes in document order with the container that groups them:
// the nearest form/search/dialog ancestor, else the parent element.
void locate(const DomNode& n, std::vector<const DomNode*>& ancestors, std::vector<Located>& out) {
  if (n.interactive) {
    int group = ancestors.empty() ? -1 : ancestors.back()->node_id;
    for (auto it = ancestors.rbegin(); it != ancestors.rend(); ++it) {
      if (is_group_container(**it)) {
        group = (*it)->node_id;
        break;
      }
    }
    out.push_back({&n, group});
  }
  ancestors.push_back(&n);
  for (const auto& c : n.children) locate(c, ancestors, out);
  ancestors.pop_back();
}

std::vector<Located> locate_all(const DomNode& root) {
  std::vector<Located> out;
  std::vector<const DomNode*> ancestors;
  locate(root, ancestors, out);
  return out;
}

void collect_options(const DomNode& n, std::vector<const DomNode*>& out) {
  for (const auto& c : n.children) {
    if (c.tag == "option") out.push_back(&c);
    else collect_options(c, out);
  }
}

std::string option_label(const DomNode& o) {
  std::string label = collapse_whitespace(o.text);
  return label.empty() ? attr(o, "value") : label;
}

// First option that is not the current choice; empty when there is none.
std::string alternative_option(const DomNode& select) {
  std::vector<const DomNode*> options;
  collect_options(select, options);
  if (options.size() < 2) return "";
  const DomNode* current = options.front();
  for (const DomNode* o : options) {
    if (o->attributes.count("selected")) current = o;
  }
  for (const DomNode* o : options) {
    if (o != current) {
      std::string label = option_label(*o);
      if (!label.empty() && label.find(']') == std::string::npos) return label;
    }
  }
  return "";
}

std::optional<Action> field_action(const DomNode& field, const std::optional<std::string>& payload) {
  int id = *field.element_id;
  if (field.tag == "select") {
    std::string choice = payload ? *payload : alternative_option(field);
    if (choice.empty()) return std::nullopt;
    return Action::select(id, choice);
  }
  return Action::enter(id, payload ? *payload : OraclePolicy::sample_text(field));
}

std::set<std::string> interactive_signatures(const DomNode& root) {
  std::set<std::string> out;
  for (const DomNode* n : interactive_nodes(root)) out.insert(n->signature);
  return out;
}

// Resolves the task's remaining steps against `dom`, stopping before the first
// unresolvable step and after any click that is not the last step (a click
// may reshape the page, so later ids are read from the next state).
std::optional<ActionSequence> continue_task(const Task& task, size_t done, const DomNode& dom) {
  ActionSequence seq;
  seq.task_label = task.name;
  size_t i = done;
  for (; i < task.steps.size(); ++i) {
    const StepDescriptor& step = task.steps[i];
    const DomNode* node = find_by_signature(dom, step.signature);
    if (!node) break;
    if (step.kind == ActionKind::Click) {
      seq.actions.push_back(Action::click(*node->element_id));
      ++i;
      break;
    }
    auto action = field_action(*node, step.payload);
    if (!action) break;
    if (action->kind != step.kind) break;
    seq.actions.push_back(*action);
  }
  if (seq.actions.empty()) return std::nullopt;
  seq.state_marker = i >= task.steps.size() ? StateMarker::Complete : StateMarker::Continue;
  return seq;
}

size_t actions_done(const std::vector<HistoryEntry>& history, const std::string& task) {
  size_t n = 0;
  for (const auto& e : history) {
    if (e.sequence.task_label && *e.sequence.task_label == task) n += e.sequence.actions.size();
  }
  return n;
}

}  // namespace

std::string OraclePolicy::sample_text(const DomNode& field) {
  std::string type = attr(field, "type");
  if (type == "email") return "user@example.com";
  if (type == "password") return "secret123";
  if (type == "number" || type == "range") return "3";
  if (type == "tel") return "5550100";
  if (type == "url") return "https://example.com";
  if (type == "date") return "2024-01-01";
  return "test";
}

Proposal OraclePolicy::oracle_propose(const PolicyRequest& request) {
  const DomNode& dom = request.states.back().dom;
  std::set<std::string> used;
  for (const auto& e : request.history) {
    for (const auto& s : e.steps) used.insert(s.signature);
  }

  std::vector<Located> all = locate_all(dom);
  std::map<int, std::vector<const DomNode*>> groups;
  for (const auto& l : all) groups[l.group].push_back(l.node);

  std::set<int> covered;  // element ids consumed by a composed sequence
  std::vector<std::pair<int, ActionSequence>> out;  // keyed by first element id
  std::set<std::string> proposed;

  for (const auto& [group, members] : groups) {
    std::vector<const DomNode*> fields;
    for (const DomNode* n : members) {
      if (is_field(*n)) fields.push_back(n);
    }
    if (fields.empty()) continue;
    const DomNode* submit = nullptr;
    for (const DomNode* n : members) {
      if (!is_field(*n) && !is_toggle(*n) && *n->element_id > *fields.back()->element_id) {
        submit = n;
        break;
      }
    }
    bool fresh = false;
    for (const DomNode* f : fields) fresh = fresh || !used.count(f->signature);
    if (submit) fresh = fresh || !used.count(submit->signature);
    for (const DomNode* f : fields) covered.insert(*f->element_id);
    if (submit) covered.insert(*submit->element_id);
    if (!fresh) continue;
    ActionSequence seq;
    std::string key;
    for (const DomNode* f : fields) {
      auto a = field_action(*f, std::nullopt);
      if (!a) continue;
      seq.actions.push_back(*a);
      key += f->signature + ";";
    }
    if (submit) {
      seq.actions.push_back(Action::click(*submit->element_id));
      key += submit->signature;
    }
    if (seq.actions.empty() || !proposed.insert(key).second) continue;
    out.emplace_back(seq.actions.front().target, std::move(seq));
  }

  for (const auto& l : all) {
    const DomNode& n = *l.node;
    int id = *n.element_id;
    if (covered.count(id) || is_field(n) || used.count(n.signature)) continue;
    // one representative per signature ("multiple similar items")
    if (!proposed.insert(n.signature).second) continue;
    out.emplace_back(id, ActionSequence{{Action::click(id)}, {}, {}});
  }

  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Proposal p;
  for (auto& [id, seq] : out) p.sequences.push_back(std::move(seq));
  p.completed = p.sequences.empty();
  return p;
}

VerificationVerdict OraclePolicy::oracle_verify(const PolicyRequest& request) {
  const UIState& first = request.states.front();
  const UIState& last = request.states.back();
  VerificationVerdict v;
  v.pass = first.state_key != last.state_key;
  std::set<std::string> before = interactive_signatures(first.dom);
  std::vector<std::string> added;
  for (const auto& sig : interactive_signatures(last.dom)) {
    if (!before.count(sig)) added.push_back(sig);
  }
  v.terminate = added.empty() ? StateMarker::Complete : StateMarker::Continue;
  if (!v.pass) {
    v.rationale = "page unchanged";
  } else if (added.empty()) {
    v.rationale = "page changed without new controls";
  } else {
    v.rationale = "new controls: " + std::to_string(added.size());
  }
  return v;
}

Proposal OraclePolicy::oracle_select(const PolicyRequest& request) {
  const DomNode& dom = request.states.back().dom;
  Proposal p;
  std::vector<Task> tasks = request.kind == RequestKind::ValidateProcess && request.task
                                ? std::vector<Task>{*request.task}
                                : request.tasks;
  for (const auto& task : tasks) {
    auto seq = continue_task(task, actions_done(request.history, task.name), dom);
    if (seq) p.sequences.push_back(std::move(*seq));
  }
  return p;
}

JudgeVerdict OraclePolicy::oracle_judge(const PolicyRequest& request) {
  JudgeVerdict j;
  const auto& s = request.states;
  if (s.size() < 2) {
    j.rationale = "no action was executed";
    return j;
  }
  for (size_t i = 1; i < s.size(); ++i) {
    if (s[i].state_key == s[i - 1].state_key) {
      j.rationale = "step " + std::to_string(i) + " had no visible effect";
      return j;
    }
  }
  if (request.task) {
    std::set<std::string> final_sigs = interactive_signatures(s.back().dom);
    for (const auto& sig : request.task->expected_new_signatures) {
      if (!final_sigs.count(sig)) {
        j.rationale = "expected control missing: " + sig;
        return j;
      }
    }
  }
  j.pass = true;
  j.rationale = "every step changed the page";
  return j;
}

std::string OraclePolicy::respond(const PolicyRequest& request, const std::string&) {
  switch (request.kind) {
    case RequestKind::Propose: {
      Proposal p = oracle_propose(request);
      if (p.completed) return std::string(kCompletionSentinel);
      return serialize_sequences(p.sequences);
    }
    case RequestKind::Verify:
      return serialize_verdict(oracle_verify(request));
    case RequestKind::ValidateSelect:
    case RequestKind::ValidateProcess: {
      std::string out;
      for (const auto& seq : oracle_select(request).sequences) {
        if (!out.empty()) out += "\n";
        out += serialize_sequence(seq);
      }
      return out.empty() ? "No applicable components." : out;
    }
    case RequestKind::ValidateJudge: {
      JudgeVerdict j = oracle_judge(request);
      return std::string(j.pass ? "\\boxed{Yes} " : "\\boxed{No} ") + j.rationale;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown request kind");
}

}  // namespace uiprobe
