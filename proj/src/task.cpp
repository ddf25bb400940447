#include "uiprobe/task.hpp"

namespace uiprobe {

using json = nlohmann::json;

std::string descriptor_key(const StepDescriptor& step) {
  std::string key = std::string(to_string(step.kind)) + "@" + step.signature;
  if (step.kind == ActionKind::Select && step.payload) key += "=" + *step.payload;
  return key;
}

std::string descriptor_key(const std::vector<StepDescriptor>& steps) {
  std::string key;
  for (const auto& s : steps) {
    if (!key.empty()) key += " > ";
    key += descriptor_key(s);
  }
  return key;
}

const DomNode* find_by_signature(const DomNode& root, const std::string& signature) {
  for (const DomNode* n : interactive_nodes(root)) {
    if (n->signature == signature) return n;
  }
  return nullptr;
}

void to_json(json& j, const StepDescriptor& s) {
  j = {{"kind", to_string(s.kind)}, {"signature", s.signature}};
  if (s.payload) j["payload"] = *s.payload;
}

void from_json(const json& j, StepDescriptor& s) {
  std::string kind = j.at("kind");
  if (kind == "click") s.kind = ActionKind::Click;
  else if (kind == "enter") s.kind = ActionKind::Enter;
  else if (kind == "select") s.kind = ActionKind::Select;
  else throw Error(ErrorCode::SchemaMismatch, "unknown step kind " + kind);
  s.signature = j.at("signature");
  s.payload.reset();
  if (j.contains("payload")) s.payload = j.at("payload").get<std::string>();
}

void to_json(json& j, const Task& t) {
  j = {{"name", t.name},
       {"description", t.description},
       {"steps", t.steps},
       {"expected_new_signatures", t.expected_new_signatures},
       {"expected_effect", t.expected_effect}};
}

void from_json(const json& j, Task& t) {
  t.name = j.at("name");
  t.description = j.value("description", "");
  t.steps = j.at("steps").get<std::vector<StepDescriptor>>();
  t.expected_new_signatures = j.value("expected_new_signatures", std::vector<std::string>{});
  t.expected_effect = j.value("expected_effect", "");
}

}  // namespace uiprobe
