#pragma once

// Page-independent descriptions of actions and user tasks. Steps name their
// target by element signature rather than by id, since ids shift between
// states and between an original page and a regenerated one.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uiprobe/action_dsl.hpp"
#include "uiprobe/dom.hpp"

namespace uiprobe {

struct StepDescriptor {
  ActionKind kind = ActionKind::Click;
  std::string signature;
  std::optional<std::string> payload;

  bool operator==(const StepDescriptor&) const = default;
};

// Matching key used by metrics and dedup: kind + signature, Enter payload
// dropped (free-form text), Select payload kept.
std::string descriptor_key(const StepDescriptor& step);
std::string descriptor_key(const std::vector<StepDescriptor>& steps);

struct Task {
  std::string name;
  std::string description;
  std::vector<StepDescriptor> steps;
  std::vector<std::string> expected_new_signatures;  // must be visible at the end
  std::string expected_effect;                       // e.g. "manifest:3" or "graph:5"

  bool operator==(const Task&) const = default;
};

// First interactive node carrying `signature`, or nullptr.
const DomNode* find_by_signature(const DomNode& root, const std::string& signature);

void to_json(nlohmann::json& j, const StepDescriptor& s);
void from_json(const nlohmann::json& j, StepDescriptor& s);
void to_json(nlohmann::json& j, const Task& t);
void from_json(const nlohmann::json& j, Task& t);

}  // namespace uiprobe
