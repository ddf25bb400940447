#include "uiprobe/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

namespace uiprobe {

using json = nlohmann::json;

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::NonInteractive: return "NonInteractive";
    case Classification::UsableTerminal: return "UsableTerminal";
    case Classification::UsableExpand: return "UsableExpand";
  }
  return "?";
}

Classification classification_from_string(std::string_view name) {
  if (name == "NonInteractive") return Classification::NonInteractive;
  if (name == "UsableTerminal") return Classification::UsableTerminal;
  if (name == "UsableExpand") return Classification::UsableExpand;
  throw Error(ErrorCode::InvalidArgument, "unknown classification '" + std::string(name) + "'");
}

Classification classify(const VerificationVerdict& verdict) {
  if (!verdict.pass) return Classification::NonInteractive;
  return verdict.terminate == StateMarker::Continue ? Classification::UsableExpand : Classification::UsableTerminal;
}

std::pair<std::string, bool> InteractionGraph::intern_state(const UIState& state) {
  auto [it, inserted] = states_.emplace(state.state_key, state);
  if (inserted) {
    it->second.image.clear();
    order_.push_back(state.state_key);
    if (root_.empty()) root_ = state.state_key;
  }
  return {state.state_key, inserted};
}

void InteractionGraph::record_transition(Transition t) {
  if (!contains(t.from)) throw Error(ErrorCode::DanglingEndpoint, "transition source not interned: " + t.from);
  for (const auto& k : t.intermediate) {
    if (!contains(k)) throw Error(ErrorCode::DanglingEndpoint, "transition state not interned: " + k);
  }
  if (t.classification != classify(t.verdict)) {
    throw Error(ErrorCode::InvalidArgument, "classification does not match verdict");
  }
  size_t index = transitions_.size();
  for (const auto& k : t.intermediate) {
    if (k != root_ && !parent_.count(k)) parent_[k] = index;
  }
  transitions_.push_back(std::move(t));
  const Transition& rec = transitions_.back();
  if (rec.classification == Classification::UsableExpand) push_frontier(rec.to());
}

void InteractionGraph::push_frontier(const std::string& key) {
  if (!contains(key)) throw Error(ErrorCode::DanglingEndpoint, "frontier state not interned: " + key);
  if (expanded_.count(key)) return;
  if (std::find(frontier_.begin(), frontier_.end(), key) != frontier_.end()) return;
  frontier_.push_back(key);
}

std::optional<std::string> InteractionGraph::frontier_pop(FrontierOrder order) {
  if (frontier_.empty()) return std::nullopt;
  std::string key;
  if (order == FrontierOrder::FIFO) {
    key = frontier_.front();
    frontier_.pop_front();
  } else {
    key = frontier_.back();
    frontier_.pop_back();
  }
  expanded_.insert(key);
  return key;
}

void InteractionGraph::restore_frontier(const std::vector<std::string>& frontier,
                                        const std::set<std::string>& expanded) {
  for (const auto& k : frontier) {
    if (!contains(k)) throw Error(ErrorCode::DanglingEndpoint, "frontier state not interned: " + k);
    if (expanded.count(k)) throw Error(ErrorCode::InvalidArgument, "state both queued and expanded: " + k);
  }
  for (const auto& k : expanded) {
    if (!contains(k)) throw Error(ErrorCode::DanglingEndpoint, "expanded state not interned: " + k);
  }
  frontier_.assign(frontier.begin(), frontier.end());
  expanded_ = expanded;
}

const UIState& InteractionGraph::state(const std::string& key) const {
  auto it = states_.find(key);
  if (it == states_.end()) throw Error(ErrorCode::DanglingEndpoint, "unknown state " + key);
  return it->second;
}

std::vector<ActionSequence> InteractionGraph::path_to(const std::string& key) const {
  if (!contains(key)) throw Error(ErrorCode::DanglingEndpoint, "unknown state " + key);
  std::vector<ActionSequence> path;
  std::string cur = key;
  // parent links always point at earlier transitions, so this terminates
  while (cur != root_) {
    auto it = parent_.find(cur);
    if (it == parent_.end()) throw Error(ErrorCode::DanglingEndpoint, "state not reachable from root: " + key);
    const Transition& t = transitions_[it->second];
    // an intermediate state is reached by a prefix of its transition's sequence
    ActionSequence step = t.sequence;
    auto pos = std::find(t.intermediate.begin(), t.intermediate.end(), cur);
    step.actions.resize(static_cast<size_t>(pos - t.intermediate.begin()) + 1);
    path.push_back(std::move(step));
    cur = t.from;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

int InteractionGraph::depth(const std::string& key) const { return static_cast<int>(path_to(key).size()); }

bool InteractionGraph::operator==(const InteractionGraph& o) const {
  return root_ == o.root_ && states_ == o.states_ && order_ == o.order_ && transitions_ == o.transitions_ &&
         frontier_ == o.frontier_ && expanded_ == o.expanded_ && parent_ == o.parent_;
}

void to_json(json& j, const Action& a) {
  j = {{"kind", to_string(a.kind)}, {"target", a.target}};
  if (a.payload) j["payload"] = *a.payload;
}

void from_json(const json& j, Action& a) {
  std::string kind = j.at("kind");
  if (kind == "click") a.kind = ActionKind::Click;
  else if (kind == "enter") a.kind = ActionKind::Enter;
  else if (kind == "select") a.kind = ActionKind::Select;
  else throw Error(ErrorCode::SchemaMismatch, "unknown action kind " + kind);
  a.target = j.at("target");
  a.payload.reset();
  if (j.contains("payload")) a.payload = j.at("payload").get<std::string>();
}

void to_json(json& j, const ActionSequence& s) {
  j = {{"actions", s.actions}};
  if (s.task_label) j["task"] = *s.task_label;
  if (s.state_marker) j["state"] = to_string(*s.state_marker);
}

void from_json(const json& j, ActionSequence& s) {
  s.actions = j.at("actions").get<std::vector<Action>>();
  s.task_label.reset();
  s.state_marker.reset();
  if (j.contains("task")) s.task_label = j.at("task").get<std::string>();
  if (j.contains("state")) {
    s.state_marker = j.at("state") == "Continue" ? StateMarker::Continue : StateMarker::Complete;
  }
}

void to_json(json& j, const VerificationVerdict& v) {
  j = {{"pass", v.pass}, {"terminate", to_string(v.terminate)}, {"rationale", v.rationale}};
}

void from_json(const json& j, VerificationVerdict& v) {
  v.pass = j.at("pass");
  v.terminate = j.at("terminate") == "Continue" ? StateMarker::Continue : StateMarker::Complete;
  v.rationale = j.value("rationale", "");
}

void to_json(json& j, const Screenshot& s) {
  j = {{"path", s.path}, {"digest", s.digest}, {"media_type", s.media_type}};
}

void from_json(const json& j, Screenshot& s) {
  s.path = j.at("path");
  s.digest = j.at("digest");
  s.media_type = j.at("media_type");
}

void to_json(json& j, const UIState& s) {
  j = {{"state_key", s.state_key}, {"screenshot", s.screenshot}, {"step_index", s.step_index}, {"dom", s.dom}};
}

void from_json(const json& j, UIState& s) {
  s.state_key = j.at("state_key");
  s.screenshot = j.at("screenshot").get<Screenshot>();
  s.step_index = j.at("step_index");
  s.dom = j.at("dom").get<DomNode>();
  s.dom_text = serialize_dom(s.dom);
  s.image.clear();
}

void to_json(json& j, const Transition& t) {
  j = {{"from", t.from},
       {"sequence", t.sequence},
       {"intermediate", t.intermediate},
       {"verdict", t.verdict},
       {"classification", to_string(t.classification)}};
  if (!t.note.empty()) j["note"] = t.note;
}

void from_json(const json& j, Transition& t) {
  t.from = j.at("from");
  t.sequence = j.at("sequence").get<ActionSequence>();
  t.intermediate = j.at("intermediate").get<std::vector<std::string>>();
  t.verdict = j.at("verdict").get<VerificationVerdict>();
  t.classification = classification_from_string(j.at("classification").get<std::string>());
  t.note = j.value("note", "");
}

json graph_to_json(const InteractionGraph& g) {
  json states = json::array();
  for (const auto& key : g.state_order()) states.push_back(g.state(key));
  json frontier = std::vector<std::string>(g.frontier().begin(), g.frontier().end());
  json expanded = g.expanded();
  return {{"version", InteractionGraph::kFormatVersion},
          {"root", g.root()},
          {"states", states},
          {"transitions", g.transitions()},
          {"frontier", frontier},
          {"expanded", expanded}};
}

InteractionGraph graph_from_json(const json& j) {
  if (!j.is_object() || !j.contains("version")) throw Error(ErrorCode::SchemaMismatch, "missing version header");
  if (j.at("version") != InteractionGraph::kFormatVersion) {
    throw Error(ErrorCode::SchemaMismatch, "unsupported graph version " + j.at("version").dump());
  }
  InteractionGraph g;
  try {
    for (const auto& s : j.at("states")) {
      UIState state = s.get<UIState>();
      if (dom_state_key(state.dom) != state.state_key) {
        throw Error(ErrorCode::SchemaMismatch, "state key does not match its DOM: " + state.state_key);
      }
      g.intern_state(state);
    }
    if (g.root() != j.at("root").get<std::string>()) throw Error(ErrorCode::SchemaMismatch, "root is not the first state");
    // replaying transitions rebuilds parent links; the stored queue then replaces what replay pushed
    for (const auto& t : j.at("transitions")) g.record_transition(t.get<Transition>());
    g.restore_frontier(j.at("frontier").get<std::vector<std::string>>(),
                       j.at("expanded").get<std::set<std::string>>());
    return g;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaMismatch) throw;
    throw Error(ErrorCode::SchemaMismatch, e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::SerializationFailure, "cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw Error(ErrorCode::SerializationFailure, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::SerializationFailure, "cannot move into place " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SerializationFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void export_graph(const InteractionGraph& g, const std::filesystem::path& path) {
  if (g.empty()) throw Error(ErrorCode::SerializationFailure, "graph has no root");
  write_file_atomic(path, graph_to_json(g).dump(1) + "\n");
}

InteractionGraph import_graph(const std::filesystem::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::SchemaMismatch, path.string() + " is not a complete JSON document");
  return graph_from_json(j);
}

std::vector<std::string> check_graph_invariants(const InteractionGraph& g) {
  std::vector<std::string> out;
  if (g.empty()) return out;
  if (!g.contains(g.root())) out.push_back("root not interned");
  std::map<std::string, std::vector<std::string>> adj;
  for (size_t i = 0; i < g.transitions().size(); ++i) {
    const Transition& t = g.transitions()[i];
    std::string where = "transition " + std::to_string(i) + ": ";
    if (!g.contains(t.from)) out.push_back(where + "source not interned");
    std::string prev = t.from;
    for (const auto& k : t.intermediate) {
      if (!g.contains(k)) out.push_back(where + "endpoint not interned");
      adj[prev].push_back(k);
      prev = k;
    }
    if (t.classification != classify(t.verdict)) out.push_back(where + "classification disagrees with verdict");
  }
  std::set<std::string> seen{g.root()};
  std::vector<std::string> stack{g.root()};
  while (!stack.empty()) {
    std::string k = stack.back();
    stack.pop_back();
    for (const auto& n : adj[k]) {
      if (seen.insert(n).second) stack.push_back(n);
    }
  }
  for (const auto& k : g.state_order()) {
    if (!seen.count(k)) out.push_back("state " + k.substr(0, 12) + " unreachable from root");
  }
  for (const auto& k : g.frontier()) {
    if (!g.contains(k)) out.push_back("frontier state not interned");
    if (g.is_expanded(k)) out.push_back("frontier holds expanded state " + k.substr(0, 12));
  }
  if (g.states().size() != g.state_order().size()) out.push_back("state index out of sync");
  return out;
}

}  // namespace uiprobe
