#pragma once

// Annotated DOM: the filtered, id-numbered view of a page that prompts,
// policies and state hashing work on.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uiprobe/html.hpp"

namespace uiprobe {

struct DomNode {
  int node_id = 0;                  // preorder index, unique within a tree
  std::optional<int> element_id;    // set on interactive nodes: 0, 1, 2... in document order
  std::string tag;
  std::string text;                 // own text (child text nodes), whitespace collapsed
  std::map<std::string, std::string> attributes;
  bool interactive = false;
  std::string xpath;
  std::string label;                // visible label, interactive nodes only
  std::string signature;            // interactive nodes only
  std::vector<DomNode> children;

  bool operator==(const DomNode&) const = default;
};

struct AnnotateOptions {
  // Attribute values matching this pattern are dropped before hashing
  // (session tokens, nonces and similar). Empty disables the filter.
  std::string volatile_value_pattern = "^[A-Za-z0-9+/_-]{32,}={0,2}$";
};

// Attributes kept in the annotated tree.
const std::vector<std::string>& retained_attributes();

// Root is the <body> element. Filters script/style/comments/hidden subtrees.
DomNode annotate_dom(const html::Document& doc, const AnnotateOptions& options = {});

// Indented "tag attr=... "text"" lines with [id=N] on interactive nodes.
std::string serialize_dom(const DomNode& root);

// sha256 of serialize_dom.
std::string dom_state_key(const DomNode& root);

// Canonical text render of what is visible, used as the simulator's screenshot.
std::string render_text(const DomNode& root);

// Depth-first visit of all nodes; stop descending when fn returns false.
void visit(const DomNode& root, const std::function<bool(const DomNode&)>& fn);

const DomNode* find_element(const DomNode& root, int element_id);
std::vector<const DomNode*> interactive_nodes(const DomNode& root);
int interactive_count(const DomNode& root);

// "tag|normalized label|scope", stable across states where ids shift.
std::string element_signature(const DomNode& node);

// input (text-like types) or textarea.
bool is_text_entry(const DomNode& node);

// Short human description, e.g. `button "Save"` or `input "Name"`.
std::string describe_element(const DomNode& node);

void to_json(nlohmann::json& j, const DomNode& node);
void from_json(const nlohmann::json& j, DomNode& node);

std::string collapse_whitespace(std::string_view text);

}  // namespace uiprobe
