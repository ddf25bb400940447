#include "uiprobe/action_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace uiprobe {

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Click: return "click";
    case ActionKind::Enter: return "enter";
    case ActionKind::Select: return "select";
  }
  return "click";
}

std::string_view to_string(StateMarker marker) {
  return marker == StateMarker::Continue ? "Continue" : "Complete";
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void malformed(std::string_view text, std::string_view why) {
  throw Error(ErrorCode::MalformedAction, std::string(why) + " in '" + std::string(text) + "'");
}

void skip_space(std::string_view text, size_t& pos) {
  while (pos < text.size() && is_space(text[pos])) ++pos;
}

// Reads one action starting at `pos`, leaving `pos` just past it.
Action read_action(std::string_view text, size_t& pos) {
  skip_space(text, pos);
  size_t verb_start = pos;
  while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
  std::string verb = lower(text.substr(verb_start, pos - verb_start));
  Action action;
  if (verb == "click") {
    action.kind = ActionKind::Click;
  } else if (verb == "enter") {
    action.kind = ActionKind::Enter;
  } else if (verb == "select") {
    action.kind = ActionKind::Select;
  } else {
    malformed(text, verb.empty() ? "missing verb" : "unknown verb '" + verb + "'");
  }
  if (pos >= text.size() || text[pos] != '[') malformed(text, "missing '[' after verb");
  ++pos;
  size_t close = text.find(']', pos);
  if (close == std::string_view::npos) malformed(text, "missing ']' after id");
  std::string_view id_text = trim(text.substr(pos, close - pos));
  int id = -1;
  auto [end, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id, 10);
  if (id_text.empty() || ec != std::errc() || end != id_text.data() + id_text.size() || id < 0) {
    malformed(text, "non-integer id '" + std::string(id_text) + "'");
  }
  action.target = id;
  pos = close + 1;
  if (pos < text.size() && text[pos] == '[') {
    size_t payload_close = text.find(']', pos + 1);
    if (payload_close == std::string_view::npos) malformed(text, "unterminated payload");
    action.payload = std::string(text.substr(pos + 1, payload_close - pos - 1));
    pos = payload_close + 1;
  }
  validate_action(action);
  return action;
}

enum class MarkerType { Boxed, Task, State, Terminate };

struct Marker {
  MarkerType type;
  std::string content;
  bool terminated = true;
  size_t end = 0;  // one past the closing brace
};

// Finds the '}' closing a marker whose content starts at `pos`. Braces inside
// a bracketed payload are literal; nested {} pairs outside brackets balance.
size_t find_marker_end(std::string_view text, size_t pos) {
  int depth = 0;
  bool in_bracket = false;
  for (size_t i = pos; i < text.size(); ++i) {
    char c = text[i];
    if (in_bracket) {
      if (c == ']') in_bracket = false;
      continue;
    }
    if (c == '[') {
      in_bracket = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (depth == 0) return i;
      --depth;
    }
  }
  return std::string_view::npos;
}

std::vector<Marker> scan_markers(std::string_view text) {
  static constexpr std::pair<std::string_view, MarkerType> kNames[] = {
      {"\\boxed{", MarkerType::Boxed},
      {"\\task{", MarkerType::Task},
      {"\\state{", MarkerType::State},
      {"\\terminate{", MarkerType::Terminate},
  };
  std::vector<Marker> markers;
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '\\') {
      ++i;
      continue;
    }
    bool matched = false;
    for (const auto& [name, type] : kNames) {
      if (text.substr(i, name.size()) != name) continue;
      size_t start = i + name.size();
      size_t end = find_marker_end(text, start);
      Marker m{type, {}, end != std::string_view::npos};
      if (end == std::string_view::npos) {
        m.content = std::string(text.substr(start));
        i = text.size();
      } else {
        m.content = std::string(text.substr(start, end - start));
        i = end + 1;
      }
      m.end = i;
      markers.push_back(std::move(m));
      matched = true;
      break;
    }
    if (!matched) ++i;
  }
  return markers;
}

bool contains_sentinel(std::string_view response) {
  std::string hay = lower(response);
  return hay.find(lower(kCompletionSentinel)) != std::string::npos;
}

std::optional<StateMarker> parse_state_word(std::string_view word) {
  std::string w = lower(trim(word));
  if (w == "continue") return StateMarker::Continue;
  if (w == "complete") return StateMarker::Complete;
  return std::nullopt;
}

std::optional<bool> parse_yes_no(std::string_view word) {
  std::string w = lower(trim(word));
  if (w == "yes") return true;
  if (w == "no") return false;
  return std::nullopt;
}

}  // namespace

void validate_action(const Action& action) {
  auto describe = [&] { return std::string(to_string(action.kind)) + "[" + std::to_string(action.target) + "]"; };
  if (action.target < 0) malformed(describe(), "negative id");
  if (action.kind == ActionKind::Click) {
    if (action.payload) malformed(describe(), "click takes no payload");
  } else if (!action.payload || action.payload->empty()) {
    malformed(describe(), "missing payload");
  }
}

Action parse_action(std::string_view token) {
  std::string_view t = trim(token);
  if (t.empty()) malformed(token, "empty action");
  size_t pos = 0;
  Action action = read_action(t, pos);
  if (pos != t.size()) malformed(t, "trailing characters");
  return action;
}

std::vector<Action> parse_action_list(std::string_view text) {
  std::vector<Action> actions;
  size_t pos = 0;
  skip_space(text, pos);
  while (pos < text.size()) {
    if (text[pos] == ',') {  // tolerate empty items such as a trailing comma
      ++pos;
      skip_space(text, pos);
      continue;
    }
    actions.push_back(read_action(text, pos));
    skip_space(text, pos);
    if (pos < text.size()) {
      if (text[pos] != ',') malformed(text, "expected ',' between actions");
      ++pos;
      skip_space(text, pos);
    }
  }
  if (actions.empty()) malformed(text, "no actions");
  return actions;
}

AgentResponse parse_agent_response(std::string_view response) {
  AgentResponse result;
  result.completed = contains_sentinel(response);

  std::optional<std::string> pending_task;
  // After a group, a following \state{} belongs to it; -1 when no group waits.
  std::ptrdiff_t awaiting_state = -1;
  size_t group_index = 0;

  for (Marker& m : scan_markers(response)) {
    switch (m.type) {
      case MarkerType::Task:
        pending_task = std::string(trim(m.content));
        awaiting_state = -1;
        break;
      case MarkerType::Boxed: {
        size_t index = group_index++;
        awaiting_state = -1;
        if (!m.terminated) {
          result.issues.push_back({ErrorCode::MalformedAction, "unterminated \\boxed{} group", index});
          pending_task.reset();
          break;
        }
        try {
          ActionSequence seq;
          seq.actions = parse_action_list(m.content);
          seq.task_label = std::move(pending_task);
          pending_task.reset();
          result.sequences.push_back(std::move(seq));
          awaiting_state = static_cast<std::ptrdiff_t>(result.sequences.size()) - 1;
        } catch (const Error& e) {
          result.issues.push_back({e.code(), e.what(), index});
          pending_task.reset();
        }
        break;
      }
      case MarkerType::State:
        if (awaiting_state >= 0) {
          result.sequences[static_cast<size_t>(awaiting_state)].state_marker = parse_state_word(m.content);
        }
        // A stray \state{} without a preceding group is ignored.
        awaiting_state = -1;
        break;
      case MarkerType::Terminate:
        break;
    }
  }

  if (result.sequences.empty() && !result.completed && result.issues.empty()) {
    result.issues.push_back({ErrorCode::NoBoxedContent, "response contains no \\boxed{} group", 0});
  } else if (result.sequences.empty() && !result.completed) {
    result.issues.push_back({ErrorCode::NoBoxedContent, "no parseable \\boxed{} group", 0});
  }
  return result;
}

VerificationVerdict parse_verification_response(std::string_view response) {
  std::optional<bool> pass;
  std::optional<StateMarker> terminate;
  size_t verdict_end = 0;
  size_t terminate_end = 0;

  for (const Marker& m : scan_markers(response)) {
    if (m.type == MarkerType::Boxed && !pass) {
      pass = parse_yes_no(m.content);
      if (!pass) throw Error(ErrorCode::MissingVerdict, "boxed answer is not Yes/No: '" + m.content + "'");
      verdict_end = m.end;
    } else if (m.type == MarkerType::Terminate && !terminate) {
      terminate = parse_state_word(m.content);
      if (terminate) terminate_end = m.end;
    }
  }
  if (!pass) throw Error(ErrorCode::MissingVerdict, "no \\boxed{Yes|No} verdict");
  if (!terminate) throw Error(ErrorCode::MissingTerminate, "no \\terminate{Continue|Complete} marker");

  VerificationVerdict verdict;
  verdict.pass = *pass;
  verdict.terminate = *terminate;
  size_t tail = std::max(verdict_end, terminate_end);
  verdict.rationale = std::string(trim(response.substr(std::min(tail, response.size()))));
  return verdict;
}

JudgeVerdict parse_judge_response(std::string_view response) {
  for (const Marker& m : scan_markers(response)) {
    if (m.type != MarkerType::Boxed) continue;
    auto yes = parse_yes_no(m.content);
    if (!yes) throw Error(ErrorCode::MissingVerdict, "boxed answer is not Yes/No: '" + m.content + "'");
    return {*yes, std::string(trim(response.substr(m.end)))};
  }
  throw Error(ErrorCode::MissingVerdict, "no \\boxed{Yes|No} verdict");
}

std::string serialize_action(const Action& action) {
  validate_action(action);
  std::string out(to_string(action.kind));
  out += "[" + std::to_string(action.target) + "]";
  if (action.payload) {
    if (action.payload->find(']') != std::string::npos) {
      malformed(*action.payload, "payload contains ']' which the grammar cannot carry");
    }
    out += "[" + *action.payload + "]";
  }
  return out;
}

std::string serialize_sequence(const ActionSequence& seq, bool boxed) {
  if (seq.actions.empty()) throw Error(ErrorCode::MalformedAction, "cannot serialize an empty sequence");
  std::string body;
  for (size_t i = 0; i < seq.actions.size(); ++i) {
    if (i) body += ", ";
    body += serialize_action(seq.actions[i]);
  }
  if (!boxed) return body;
  std::string out;
  if (seq.task_label) {
    if (seq.task_label->find_first_of("{}") != std::string::npos) {
      malformed(*seq.task_label, "task label contains braces");
    }
    out += "\\task{" + *seq.task_label + "}";
  }
  out += "\\boxed{" + body + "}";
  if (seq.state_marker) out += "\\state{" + std::string(to_string(*seq.state_marker)) + "}";
  return out;
}

std::string serialize_sequences(const std::vector<ActionSequence>& seqs) {
  std::string out;
  for (size_t i = 0; i < seqs.size(); ++i) {
    if (i) out += ", ";
    out += serialize_sequence(seqs[i]);
  }
  return out;
}

std::string serialize_verdict(const VerificationVerdict& verdict) {
  std::string out = verdict.pass ? "\\boxed{Yes}" : "\\boxed{No}";
  out += "\\terminate{" + std::string(to_string(verdict.terminate)) + "}";
  if (!verdict.rationale.empty()) out += " " + verdict.rationale;
  return out;
}

}  // namespace uiprobe
