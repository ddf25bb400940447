#pragma once

// Interaction graph: interned UI states plus verified transitions between
// them, the exploration frontier, and a versioned JSON file format.
//
// The graph itself is not synchronised. The explorer is its only writer and
// records results from one thread.

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uiprobe/action_dsl.hpp"
#include "uiprobe/env.hpp"

namespace uiprobe {

enum class Classification { NonInteractive, UsableTerminal, UsableExpand };

std::string_view to_string(Classification c);
Classification classification_from_string(std::string_view name);

// NonInteractive iff !pass; otherwise Continue expands and Complete terminates.
Classification classify(const VerificationVerdict& verdict);

struct Transition {
  std::string from;
  ActionSequence sequence;
  std::vector<std::string> intermediate;  // one key per executed action, last is the target
  VerificationVerdict verdict;
  Classification classification = Classification::NonInteractive;
  std::string note;  // execution error, if any

  // Final state key; `from` when nothing executed.
  const std::string& to() const { return intermediate.empty() ? from : intermediate.back(); }

  bool operator==(const Transition&) const = default;
};

enum class FrontierOrder { FIFO, LIFO };

class InteractionGraph {
 public:
  static constexpr int kFormatVersion = 1;

  InteractionGraph() = default;

  // The first interned state becomes the root.
  std::pair<std::string, bool> intern_state(const UIState& state);

  // Throws Error(DanglingEndpoint) when `from` or any intermediate key is
  // not interned, Error(InvalidArgument) when the classification disagrees
  // with the verdict. UsableExpand targets enter the frontier unless already
  // queued or expanded.
  void record_transition(Transition t);

  // Queues `key` for expansion (no-op when queued or expanded).
  // Throws Error(DanglingEndpoint).
  void push_frontier(const std::string& key);
  // Pops and marks the state expanded.
  std::optional<std::string> frontier_pop(FrontierOrder order);
  // Replaces the frontier and expanded set (used when loading a file).
  // Throws Error(DanglingEndpoint) for unknown keys, Error(InvalidArgument)
  // when a key is in both.
  void restore_frontier(const std::vector<std::string>& frontier, const std::set<std::string>& expanded);

  bool empty() const { return states_.empty(); }
  const std::string& root() const { return root_; }
  bool contains(const std::string& key) const { return states_.count(key) != 0; }
  const UIState& state(const std::string& key) const;
  const std::map<std::string, UIState>& states() const { return states_; }
  // Keys in interning order.
  const std::vector<std::string>& state_order() const { return order_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::deque<std::string>& frontier() const { return frontier_; }
  const std::set<std::string>& expanded() const { return expanded_; }
  bool is_expanded(const std::string& key) const { return expanded_.count(key) != 0; }

  // Sequences that lead from the root to `key` along the transition that first
  // reached each state. Empty for the root. Throws Error(DanglingEndpoint).
  std::vector<ActionSequence> path_to(const std::string& key) const;
  // Number of sequences on path_to(key).
  int depth(const std::string& key) const;

  bool operator==(const InteractionGraph& other) const;

 private:
  std::string root_;
  std::map<std::string, UIState> states_;
  std::vector<std::string> order_;
  std::vector<Transition> transitions_;
  std::deque<std::string> frontier_;
  std::set<std::string> expanded_;
  std::map<std::string, size_t> parent_;  // key -> index of the transition that first reached it
};

nlohmann::json graph_to_json(const InteractionGraph& g);
// Throws Error(SchemaMismatch) on a wrong version, missing fields or broken
// references.
InteractionGraph graph_from_json(const nlohmann::json& j);

// Throws Error(SerializationFailure).
void export_graph(const InteractionGraph& g, const std::filesystem::path& path);
// Throws Error(SerializationFailure) when unreadable, Error(SchemaMismatch)
// when the contents do not form a graph document.
InteractionGraph import_graph(const std::filesystem::path& path);

// Checks root membership, endpoint membership, reachability from the root,
// classification consistency and the frontier/expanded split. Returns one
// message per violation.
std::vector<std::string> check_graph_invariants(const InteractionGraph& g);

void to_json(nlohmann::json& j, const Action& a);
void from_json(const nlohmann::json& j, Action& a);
void to_json(nlohmann::json& j, const ActionSequence& s);
void from_json(const nlohmann::json& j, ActionSequence& s);
void to_json(nlohmann::json& j, const VerificationVerdict& v);
void from_json(const nlohmann::json& j, VerificationVerdict& v);
void to_json(nlohmann::json& j, const Screenshot& s);
void from_json(const nlohmann::json& j, Screenshot& s);
// The image bytes are not serialised.
void to_json(nlohmann::json& j, const UIState& s);
void from_json(const nlohmann::json& j, UIState& s);
void to_json(nlohmann::json& j, const Transition& t);
void from_json(const nlohmann::json& j, Transition& t);

// Writes `text` to `path` through a temporary file and rename.
// Throws Error(SerializationFailure).
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
// Throws Error(SerializationFailure).
std::string read_file(const std::filesystem::path& path);

}  // namespace uiprobe
