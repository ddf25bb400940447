#include "uiprobe/dom.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <unordered_map>

#include "uiprobe/hashing.hpp"

namespace uiprobe {

namespace {

bool one_of(std::string_view s, std::initializer_list<std::string_view> list) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool filtered_tag(std::string_view tag) {
  return one_of(tag, {"script", "style", "noscript", "template", "head", "meta", "link", "title", "base"});
}

bool is_hidden(const html::Node& n) {
  if (n.has_attr("hidden")) return true;
  if (lower(n.attr_or("aria-hidden")) == "true") return true;
  if (n.name == "input" && lower(n.attr_or("type")) == "hidden") return true;
  if (const std::string* style = n.attr("style")) {
    std::string s = strip_spaces(*style);
    if (s.find("display:none") != std::string::npos || s.find("visibility:hidden") != std::string::npos) return true;
  }
  return false;
}

bool is_interactive(const html::Node& n) {
  if (one_of(n.name, {"button", "a", "input", "select", "textarea"})) return true;
  if (n.has_attr("onclick") || n.has_attr("data-click")) return true;
  return lower(n.attr_or("role")) == "button";
}

std::string own_text(const html::Node& n) {
  std::string raw;
  for (const auto& c : n.children) {
    if (c->type == html::NodeType::Text) raw += c->text + " ";
  }
  return collapse_whitespace(raw);
}

std::string first_nonempty(std::initializer_list<std::string> options) {
  for (const auto& o : options) {
    std::string c = collapse_whitespace(o);
    if (!c.empty()) return c;
  }
  return {};
}

std::string visible_text(const DomNode& node) {
  std::string out = node.text;
  for (const auto& c : node.children) {
    std::string t = visible_text(c);
    if (!t.empty()) out += (out.empty() ? "" : " ") + t;
  }
  return out;
}

std::string attr_of(const DomNode& n, const std::string& key) {
  auto it = n.attributes.find(key);
  return it == n.attributes.end() ? std::string() : it->second;
}

bool text_entry_input(const DomNode& n) {
  if (n.tag == "textarea") return true;
  if (n.tag != "input") return false;
  std::string type = lower(attr_of(n, "type"));
  return !one_of(type, {"button", "submit", "reset", "checkbox", "radio", "image", "file", "range", "color"});
}

class Annotator {
 public:
  Annotator(const html::Document& doc, const AnnotateOptions& options) : doc_(doc) {
    if (!options.volatile_value_pattern.empty()) volatile_.emplace(options.volatile_value_pattern);
    collect_labels(doc.root());
  }

  DomNode run() {
    const html::Node* body = doc_.body();
    DomNode root;
    if (!body) {
      root.tag = "body";
      root.xpath = "/html[1]/body[1]";
      return root;
    }
    root = *build(*body, "/html/body");
    return root;
  }

 private:
  void collect_labels(const html::Node& n) {
    if (n.is_element("label")) {
      if (const std::string* f = n.attr("for")) label_for_[*f] = collapse_whitespace(n.text_content());
    }
    for (const auto& c : n.children) collect_labels(*c);
  }

  std::optional<DomNode> build(const html::Node& n, const std::string& scope) {
    if (!n.is_element() || filtered_tag(n.name) || is_hidden(n)) return std::nullopt;
    DomNode d;
    d.node_id = next_node_++;
    d.tag = n.name;
    d.text = own_text(n);
    for (const auto& [k, v] : n.attrs) {
      if (std::find(retained_attributes().begin(), retained_attributes().end(), k) == retained_attributes().end()) {
        continue;
      }
      std::string value = collapse_whitespace(v);
      if (volatile_ && std::regex_match(value, *volatile_)) continue;
      d.attributes[k] = value;
    }
    d.interactive = is_interactive(n);
    if (d.interactive) d.element_id = next_element_++;
    d.xpath = html::xpath_of(n);

    std::string child_scope = scope;
    auto id = d.attributes.find("id");
    if (id != d.attributes.end() && !id->second.empty()) child_scope = "//" + d.tag + "[@id='" + id->second + "']";
    for (const auto& c : n.children) {
      if (auto child = build(*c, child_scope)) d.children.push_back(std::move(*child));
    }
    if (d.interactive) {
      d.label = label_of(d);
      d.signature = d.tag + "|" + lower(d.label) + "|" + scope;
    }
    return d;
  }

  std::string label_of(const DomNode& d) const {
    std::string id = attr_of(d, "id");
    auto for_label = label_for_.find(id);
    std::string linked = (id.empty() || for_label == label_for_.end()) ? std::string() : for_label->second;
    if (text_entry_input(d) || (d.tag == "input" && one_of(lower(attr_of(d, "type")), {"checkbox", "radio"}))) {
      return first_nonempty({attr_of(d, "aria-label"), linked, attr_of(d, "placeholder"), attr_of(d, "name"), id});
    }
    if (d.tag == "select") return first_nonempty({attr_of(d, "aria-label"), linked, attr_of(d, "name"), id});
    if (d.tag == "input") return first_nonempty({attr_of(d, "value"), attr_of(d, "aria-label"), attr_of(d, "name"), id});
    return first_nonempty(
        {visible_text(d), attr_of(d, "aria-label"), attr_of(d, "title"), attr_of(d, "alt"), attr_of(d, "value")});
  }

  const html::Document& doc_;
  std::optional<std::regex> volatile_;
  std::unordered_map<std::string, std::string> label_for_;
  int next_node_ = 0;
  int next_element_ = 0;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

void serialize_into(const DomNode& n, int depth, std::string& out) {
  out.append(static_cast<size_t>(depth) * 2, ' ');
  if (n.element_id) out += "[id=" + std::to_string(*n.element_id) + "] ";
  out += n.tag;
  for (const auto& [k, v] : n.attributes) {
    out += " " + k;
    if (!v.empty()) out += "=" + quote(v);
  }
  if (!n.text.empty()) out += " " + quote(n.text);
  out += "\n";
  for (const auto& c : n.children) serialize_into(c, depth + 1, out);
}

std::string selected_option(const DomNode& select) {
  const DomNode* first = nullptr;
  const DomNode* chosen = nullptr;
  visit(select, [&](const DomNode& n) {
    if (n.tag == "option") {
      if (!first) first = &n;
      if (!chosen && n.attributes.count("selected")) chosen = &n;
    }
    return true;
  });
  const DomNode* pick = chosen ? chosen : first;
  return pick ? visible_text(*pick) : std::string();
}

void render_into(const DomNode& n, int depth, std::string& out) {
  std::string line;
  bool descend = true;
  if (n.interactive) {
    std::string type = lower(attr_of(n, "type"));
    if (n.tag == "select") {
      line = "[select " + n.label + "=" + selected_option(n) + "]";
      descend = false;
    } else if (n.tag == "input" && (type == "checkbox" || type == "radio")) {
      line = std::string(n.attributes.count("checked") ? "[x] " : "[ ] ") + n.label;
    } else if (text_entry_input(n)) {
      std::string value = n.tag == "textarea" ? n.text : attr_of(n, "value");
      line = "[" + n.tag + " " + n.label + "=" + value + "]";
    } else {
      line = "[" + n.tag + " " + n.label + "]";
      descend = n.tag != "button" && n.tag != "a";
    }
  } else if (!n.text.empty()) {
    line = n.text;
  }
  if (!line.empty()) {
    out.append(static_cast<size_t>(depth) * 2, ' ');
    out += line + "\n";
  }
  if (!descend) return;
  for (const auto& c : n.children) render_into(c, line.empty() ? depth : depth + 1, out);
}

}  // namespace

const std::vector<std::string>& retained_attributes() {
  static const std::vector<std::string> kKeep = {"id",   "class", "type",       "name", "value",
                                                 "placeholder", "aria-label", "role", "href",
                                                 "title", "alt", "checked", "selected", "disabled", "for"};
  return kKeep;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    bool space = std::isspace(c) != 0;
    // U+00A0 counts as whitespace
    if (c == 0xC2 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0xA0) {
      space = true;
      ++i;
    }
    if (space) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

DomNode annotate_dom(const html::Document& doc, const AnnotateOptions& options) {
  return Annotator(doc, options).run();
}

std::string serialize_dom(const DomNode& root) {
  std::string out;
  serialize_into(root, 0, out);
  return out;
}

std::string dom_state_key(const DomNode& root) { return sha256_hex(serialize_dom(root)); }

std::string render_text(const DomNode& root) {
  std::string out;
  render_into(root, 0, out);
  return out;
}

void visit(const DomNode& root, const std::function<bool(const DomNode&)>& fn) {
  if (!fn(root)) return;
  for (const auto& c : root.children) visit(c, fn);
}

const DomNode* find_element(const DomNode& root, int element_id) {
  const DomNode* found = nullptr;
  visit(root, [&](const DomNode& n) {
    if (found) return false;
    if (n.element_id == element_id) found = &n;
    return !found;
  });
  return found;
}

std::vector<const DomNode*> interactive_nodes(const DomNode& root) {
  std::vector<const DomNode*> out;
  visit(root, [&](const DomNode& n) {
    if (n.interactive) out.push_back(&n);
    return true;
  });
  return out;
}

int interactive_count(const DomNode& root) { return static_cast<int>(interactive_nodes(root).size()); }

std::string element_signature(const DomNode& node) { return node.signature; }

bool is_text_entry(const DomNode& node) { return text_entry_input(node); }

std::string describe_element(const DomNode& node) {
  std::string out = node.tag;
  std::string type = attr_of(node, "type");
  if (node.tag == "input" && !type.empty()) out += "[" + type + "]";
  return out + " " + quote(node.label);
}

void to_json(nlohmann::json& j, const DomNode& node) {
  j = nlohmann::json{{"node_id", node.node_id},
                     {"element_id", node.element_id ? nlohmann::json(*node.element_id) : nlohmann::json(nullptr)},
                     {"tag", node.tag},
                     {"text", node.text},
                     {"attributes", node.attributes},
                     {"interactive", node.interactive},
                     {"xpath", node.xpath},
                     {"label", node.label},
                     {"signature", node.signature},
                     {"children", node.children}};
}

void from_json(const nlohmann::json& j, DomNode& node) {
  node.node_id = j.at("node_id").get<int>();
  node.element_id = j.at("element_id").is_null() ? std::nullopt : std::optional<int>(j.at("element_id").get<int>());
  node.tag = j.at("tag").get<std::string>();
  node.text = j.at("text").get<std::string>();
  node.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
  node.interactive = j.at("interactive").get<bool>();
  node.xpath = j.at("xpath").get<std::string>();
  node.label = j.at("label").get<std::string>();
  node.signature = j.at("signature").get<std::string>();
  node.children = j.at("children").get<std::vector<DomNode>>();
}

}  // namespace uiprobe
