#include "uiprobe/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "uiprobe/explorer.hpp"
#include "uiprobe/policy.hpp"
#include "uiprobe/prompts.hpp"

namespace uiprobe {

using json = nlohmann::json;

std::string_view to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::ActionGen: return "action_gen";
    case RecordKind::Verification: return "verification";
    case RecordKind::UI2Code: return "ui2code";
  }
  return "?";
}

RecordKind record_kind_from_string(std::string_view name) {
  for (RecordKind k : {RecordKind::ActionGen, RecordKind::Verification, RecordKind::UI2Code}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::SchemaMismatch, "unknown record kind '" + std::string(name) + "'");
}

void to_json(json& j, const DatasetRecord& r) { j = {{"kind", to_string(r.kind)}, {"payload", r.payload}}; }

void from_json(const json& j, DatasetRecord& r) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("payload")) {
    throw Error(ErrorCode::SchemaMismatch, "record needs kind and payload");
  }
  r.kind = record_kind_from_string(j.at("kind").get<std::string>());
  r.payload = j.at("payload");
}

namespace {

ExploreResult load_run(const std::filesystem::path& dir) {
  ExploreResult r;
  try {
    r = run_dir::load(dir);
  } catch (const Error& e) {
    throw Error(ErrorCode::IncompleteRun, dir.string() + ": " + e.what());
  }
  if (r.graph.empty()) throw Error(ErrorCode::IncompleteRun, dir.string() + ": graph has no states");
  const auto& ts = r.graph.transitions();
  const auto& ex = r.trace.executed;
  bool aligned = ts.size() == ex.size();
  for (size_t i = 0; aligned && i < ts.size(); ++i) {
    aligned = ts[i].from == ex[i].state_key && ts[i].sequence == ex[i].sequence;
  }
  if (!aligned) throw Error(ErrorCode::IncompleteRun, dir.string() + ": trace does not match the graph");
  return r;
}

ActionSequence bare(const ActionSequence& s) { return {s.actions, std::nullopt, std::nullopt}; }

// History the policy saw at `key`: the actions that first reached it.
std::vector<HistoryEntry> history_to(const InteractionGraph& g, const std::string& key) {
  std::vector<HistoryEntry> out;
  const auto& ts = g.transitions();
  for (std::string cur = key; cur != g.root();) {
    const Transition* hit = nullptr;
    size_t pos = 0;
    for (const auto& t : ts) {
      auto it = std::find(t.intermediate.begin(), t.intermediate.end(), cur);
      if (it != t.intermediate.end()) {
        hit = &t;
        pos = static_cast<size_t>(it - t.intermediate.begin());
        break;
      }
    }
    if (!hit || out.size() > ts.size()) throw Error(ErrorCode::IncompleteRun, "state " + cur + " is not reachable");
    ActionSequence prefix = bare(hit->sequence);
    prefix.actions.resize(pos + 1);
    std::vector<const UIState*> states{&g.state(hit->from)};
    for (size_t i = 0; i < pos; ++i) states.push_back(&g.state(hit->intermediate[i]));
    out.push_back(make_history_entry(prefix, states));
    cur = hit->from;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<DatasetRecord> export_action_dataset(const std::filesystem::path& dir) {
  ExploreResult run = load_run(dir);
  std::map<std::string, std::vector<const TraceEntry*>> by_state;
  for (const auto& e : run.trace.executed) by_state[e.state_key].push_back(&e);

  std::vector<DatasetRecord> out;
  for (const auto& key : run.graph.state_order()) {
    auto it = by_state.find(key);
    if (it == by_state.end()) continue;
    std::vector<ActionSequence> gold;
    for (const TraceEntry* e : it->second) {
      if (e->classification != Classification::NonInteractive) gold.push_back(bare(e->sequence));
    }
    const UIState& s = run.graph.state(key);
    out.push_back({RecordKind::ActionGen,
                   {{"state_key", key},
                    {"screenshot", s.screenshot.path},
                    {"dom", s.dom_text},
                    {"history", format_history(history_to(run.graph, key))},
                    {"gold", gold.empty() ? std::string(kCompletionSentinel) : serialize_sequences(gold)}}});
  }
  return out;
}

std::vector<DatasetRecord> export_verification_dataset(const std::filesystem::path& dir) {
  ExploreResult run = load_run(dir);
  std::vector<DatasetRecord> out;
  const auto& ts = run.graph.transitions();
  for (size_t i = 0; i < ts.size(); ++i) {
    const Transition& t = ts[i];
    if (!run.trace.executed[i].note.empty() || t.intermediate.size() != t.sequence.actions.size()) continue;
    json after = json::array();
    for (const auto& k : t.intermediate) after.push_back(run.graph.state(k).screenshot.path);
    out.push_back({RecordKind::Verification,
                   {{"transition", i},
                    {"before", run.graph.state(t.from).screenshot.path},
                    {"sequence", serialize_sequence(bare(t.sequence))},
                    {"after", after},
                    {"r", t.verdict.pass ? 1 : 0},
                    {"terminate", to_string(t.verdict.terminate)}}});
  }
  return out;
}

namespace {

std::string operation_text(const Action& a, const DomNode* n) {
  std::string what = n ? n->tag + (n->label.empty() ? "" : " \"" + n->label + "\"") : "#" + std::to_string(a.target);
  switch (a.kind) {
    case ActionKind::Click: return "click " + what;
    case ActionKind::Enter: return "input \"" + a.payload.value_or("") + "\" into " + what;
    case ActionKind::Select: return "select \"" + a.payload.value_or("") + "\" in " + what;
  }
  return what;
}

}  // namespace

DatasetRecord export_ui2code_pairs(const InteractionGraph& g, const std::string& code) {
  if (g.empty()) throw Error(ErrorCode::EmptyGraph, "no states to describe");
  std::map<std::string, int> index;
  json images = json::array();
  for (const auto& key : g.state_order()) {
    index[key] = static_cast<int>(index.size()) + 1;
    images.push_back(g.state(key).screenshot.path);
  }

  json ops = json::array();
  std::string think;
  for (const auto& t : g.transitions()) {
    if (t.classification == Classification::NonInteractive || t.intermediate.size() != t.sequence.actions.size()) continue;
    json steps = json::array(), text = json::array(), elidable = json::array();
    std::string from = t.from;
    for (size_t i = 0; i < t.sequence.actions.size(); ++i) {
      const Action& a = t.sequence.actions[i];
      steps.push_back(index.at(t.intermediate[i]));
      text.push_back(operation_text(a, find_element(g.state(from).dom, a.target)));
      // only the first and last screenshot of a long sequence are needed
      elidable.push_back(i + 1 < t.sequence.actions.size());
      from = t.intermediate[i];
    }
    int start = index.at(t.from);
    think += "Image " + std::to_string(start) + " -> image " + std::to_string(steps.back().get<int>()) + ": " +
             text.back().get<std::string>() + "\n";
    ops.push_back({{"start", start}, {"steps", steps}, {"operations", text}, {"elidable", elidable}});
  }

  json payload = {{"instruction", std::string(prompt_template(TemplateId::InteractiveCodeGen).body)},
                  {"images", images},
                  {"operation_sequences", ops},
                  {"target", "<think>" + think + "</think><answer>" + code + "</answer>"}};
  return {RecordKind::UI2Code, payload};
}

void write_jsonl(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationFailure, "cannot write " + path.string());
  for (const auto& r : records) out << json(r).dump() << '\n';
  if (!out) throw Error(ErrorCode::SerializationFailure, "write failed for " + path.string());
}

std::vector<DatasetRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SerializationFailure, "cannot read " + path.string());
  std::vector<DatasetRecord> out;
  std::string line;
  for (size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::SerializationFailure, path.string() + ":" + std::to_string(n) + ": bad json");
    out.push_back(j.get<DatasetRecord>());
  }
  return out;
}

}  // namespace uiprobe
