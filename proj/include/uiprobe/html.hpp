#pragma once

// A small HTML tree with a forgiving parser. Enough of the HTML syntax for
// generated pages and DOM snapshots pulled out of a browser; no scripting and
// no CSS.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uiprobe::html {

enum class NodeType { Document, Element, Text, Comment };

struct Node {
  NodeType type = NodeType::Element;
  std::string name;  // lowercase tag name for elements
  std::vector<std::pair<std::string, std::string>> attrs;
  std::string text;  // text and comment nodes
  std::vector<std::unique_ptr<Node>> children;
  Node* parent = nullptr;

  bool is_element() const { return type == NodeType::Element; }
  bool is_element(std::string_view tag) const { return type == NodeType::Element && name == tag; }

  const std::string* attr(std::string_view key) const;
  bool has_attr(std::string_view key) const { return attr(key) != nullptr; }
  std::string attr_or(std::string_view key, std::string_view fallback = {}) const;
  void set_attr(std::string_view key, std::string_view value);
  void remove_attr(std::string_view key);

  Node* append(std::unique_ptr<Node> child);
  std::unique_ptr<Node> detach(Node* child);
  void clear_children();
  // Replaces all children with a single text node (or none for empty text).
  void set_text(std::string_view value);
  // Concatenated text of all descendant text nodes.
  std::string text_content() const;
  std::unique_ptr<Node> clone() const;
};

std::unique_ptr<Node> make_element(std::string name);
std::unique_ptr<Node> make_text(std::string text);

// Owns a tree whose root is a Document node holding one <html> element with
// <head> and <body> children.
class Document {
 public:
  Document();
  explicit Document(std::unique_ptr<Node> root);
  Document(Document&&) noexcept = default;
  Document& operator=(Document&&) noexcept = default;

  Document clone() const;

  Node& root() { return *root_; }
  const Node& root() const { return *root_; }
  Node* html();
  const Node* html() const;
  Node* body();
  const Node* body() const;
  Node* find_by_id(std::string_view id);
  Node* find_first_with_attr(std::string_view key);

 private:
  std::unique_ptr<Node> root_;
};

// Never fails: unknown or mismatched markup is recovered. Missing end tags are
// closed at the boundary of the enclosing element, stray end tags are dropped,
// and missing <html>/<head>/<body> wrappers are synthesized.
Document parse(std::string_view source);

std::string decode_entities(std::string_view text);
std::string escape_text(std::string_view text);
std::string escape_attr(std::string_view text);

// Serializes back to markup.
std::string to_html(const Node& node);

bool is_void_element(std::string_view tag);

// Absolute positional path such as /html[1]/body[1]/div[2]/button[1]. Only
// defined for element nodes.
std::string xpath_of(const Node& element);

// Evaluates the subset of XPath used by this project: absolute location
// paths with '/' and '//' steps, name tests or '*', and predicates of the
// form [n], [@a] and [@a='v']. Returns matches in document order.
// Throws Error(InvalidArgument) on syntax it does not understand.
std::vector<Node*> evaluate_xpath(Node& document_root, std::string_view expr);
std::vector<const Node*> evaluate_xpath(const Node& document_root, std::string_view expr);

}  // namespace uiprobe::html
