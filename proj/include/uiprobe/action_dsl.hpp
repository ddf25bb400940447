#pragma once

// The click/enter/select action grammar and the response markers
// (\boxed{}, \task{}, \state{}, \terminate{}) exchanged with agent,
// verifier and validator backends.
//
//   action := verb "[" int "]" ( "[" payload "]" )?
//   verb   := "click" | "enter" | "select"
//
// Payloads run to the first ']' and have no escape mechanism.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uiprobe/errors.hpp"

namespace uiprobe {

enum class ActionKind { Click, Enter, Select };

std::string_view to_string(ActionKind kind);

struct Action {
  ActionKind kind = ActionKind::Click;
  int target = 0;
  std::optional<std::string> payload;

  static Action click(int target) { return {ActionKind::Click, target, std::nullopt}; }
  static Action enter(int target, std::string text) { return {ActionKind::Enter, target, std::move(text)}; }
  static Action select(int target, std::string option) {
    return {ActionKind::Select, target, std::move(option)};
  }

  bool operator==(const Action&) const = default;
};

enum class StateMarker { Continue, Complete };

std::string_view to_string(StateMarker marker);

struct ActionSequence {
  std::vector<Action> actions;
  std::optional<std::string> task_label;
  std::optional<StateMarker> state_marker;

  bool empty() const { return actions.empty(); }
  bool operator==(const ActionSequence&) const = default;
};

struct VerificationVerdict {
  bool pass = false;
  StateMarker terminate = StateMarker::Complete;
  std::string rationale;

  bool operator==(const VerificationVerdict&) const = default;
};

struct ParseIssue {
  ErrorCode code;
  std::string message;
  std::size_t group_index = 0;  // index of the offending \boxed{} group
};

struct AgentResponse {
  std::vector<ActionSequence> sequences;
  bool completed = false;  // the "all operations completed" sentinel was present
  std::vector<ParseIssue> issues;
};

struct JudgeVerdict {
  bool pass = false;
  std::string rationale;
};

inline constexpr std::string_view kCompletionSentinel = "All operations on this page are completed";

// Throws Error(MalformedAction).
Action parse_action(std::string_view token);

// Splits the inside of one \boxed{} group into actions. Commas inside
// bracketed payloads do not split. Throws Error(MalformedAction).
std::vector<Action> parse_action_list(std::string_view text);

// Never throws. A response without any parseable group and without the
// completion sentinel records a NoBoxedContent issue.
AgentResponse parse_agent_response(std::string_view response);

// Throws Error(MissingVerdict) or Error(MissingTerminate).
VerificationVerdict parse_verification_response(std::string_view response);

// \boxed{Yes|No} followed by free text. Throws Error(MissingVerdict).
JudgeVerdict parse_judge_response(std::string_view response);

std::string serialize_action(const Action& action);

// Canonical text: "verb[id]" / "verb[id][payload]" joined by ", ", wrapped in
// \boxed{} when `boxed`, with \task{} / \state{} markers when present.
// Throws Error(MalformedAction) for empty sequences, invalid actions, and
// payloads or labels the grammar cannot carry.
std::string serialize_sequence(const ActionSequence& seq, bool boxed = true);

// Sequences separated by ", " (the form agents emit for multiple groups).
std::string serialize_sequences(const std::vector<ActionSequence>& seqs);

std::string serialize_verdict(const VerificationVerdict& verdict);

// Checks the per-kind payload rules; throws Error(MalformedAction).
void validate_action(const Action& action);

}  // namespace uiprobe
