#pragma once

// Shipped prompt templates and slot filling. Bodies are plain text; each
// template lists the placeholder strings it carries and the context key that
// fills each one.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace uiprobe {

enum class TemplateId {
  ActionGen,
  Verification,
  ValidateSelect,
  ValidateProcess,
  ValidateJudge,
  PageDesign,
  CodeGen,
  InteractiveCodeGen,
};

std::string_view to_string(TemplateId id);
// Throws Error(InvalidArgument).
TemplateId template_from_string(std::string_view name);
const std::vector<TemplateId>& all_templates();

struct Slot {
  std::string_view placeholder;  // literal text in the body
  std::string_view key;          // context key
};

struct PromptTemplate {
  TemplateId id;
  std::string_view body;
  std::vector<Slot> slots;
};

const PromptTemplate& prompt_template(TemplateId id);

using PromptContext = std::map<std::string, std::string>;

// Replaces every placeholder with its context value in one pass (fills are
// never rescanned). Extra keys are ignored. Throws Error(MissingSlot).
std::string render_prompt(TemplateId id, const PromptContext& context);

// ['a', 'b'] the way the templates' {str(tasks)} slot expects.
std::string python_list_repr(const std::vector<std::string>& items);

}  // namespace uiprobe
