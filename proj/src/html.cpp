#include "uiprobe/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <functional>

namespace uiprobe::html {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool one_of(std::string_view name, std::initializer_list<std::string_view> names) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

bool is_raw_text(std::string_view tag) { return one_of(tag, {"script", "style", "textarea", "title"}); }

bool closes_paragraph(std::string_view tag) {
  return one_of(tag, {"address", "article", "aside", "blockquote", "details", "dialog", "div", "dl",
                      "fieldset", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6",
                      "header", "hr", "main", "menu", "nav", "ol", "p", "pre", "section", "table", "ul"});
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {
    root_ = std::make_unique<Node>();
    root_->type = NodeType::Document;
    stack_.push_back(root_.get());
  }

  std::unique_ptr<Node> run() {
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<' && try_markup()) continue;
      size_t next = src_.find('<', pos_ + 1);
      if (next == std::string_view::npos) next = src_.size();
      add_text(decode_entities(src_.substr(pos_, next - pos_)));
      pos_ = next;
    }
    return std::move(root_);
  }

 private:
  Node* top() { return stack_.back(); }

  void add_text(std::string text) {
    if (text.empty()) return;
    Node* parent = top();
    if (!parent->children.empty() && parent->children.back()->type == NodeType::Text) {
      parent->children.back()->text += text;
      return;
    }
    parent->append(make_text(std::move(text)));
  }

  bool try_markup() {
    std::string_view rest = src_.substr(pos_);
    if (rest.substr(0, 4) == "<!--") {
      size_t end = src_.find("-->", pos_ + 4);
      auto comment = std::make_unique<Node>();
      comment->type = NodeType::Comment;
      if (end == std::string_view::npos) {
        comment->text = std::string(src_.substr(pos_ + 4));
        pos_ = src_.size();
      } else {
        comment->text = std::string(src_.substr(pos_ + 4, end - pos_ - 4));
        pos_ = end + 3;
      }
      top()->append(std::move(comment));
      return true;
    }
    if (rest.size() >= 2 && (rest[1] == '!' || rest[1] == '?')) {  // doctype, processing instruction
      size_t end = src_.find('>', pos_);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      return true;
    }
    if (rest.size() >= 3 && rest[1] == '/' && std::isalpha(static_cast<unsigned char>(rest[2]))) {
      size_t p = pos_ + 2;
      std::string name = read_name(p);
      size_t end = src_.find('>', p);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      end_tag(name);
      return true;
    }
    if (rest.size() >= 2 && std::isalpha(static_cast<unsigned char>(rest[1]))) {
      start_tag();
      return true;
    }
    return false;
  }

  std::string read_name(size_t& p) {
    size_t start = p;
    while (p < src_.size()) {
      char c = src_[p];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':' || c == '_') {
        ++p;
      } else {
        break;
      }
    }
    return lower(src_.substr(start, p - start));
  }

  void skip_ws(size_t& p) {
    while (p < src_.size() && std::isspace(static_cast<unsigned char>(src_[p]))) ++p;
  }

  void start_tag() {
    size_t p = pos_ + 1;
    auto element = make_element(read_name(p));
    bool self_closing = false;
    while (p < src_.size()) {
      skip_ws(p);
      if (p >= src_.size()) break;
      if (src_[p] == '>') {
        ++p;
        break;
      }
      if (src_[p] == '/') {
        self_closing = true;
        ++p;
        continue;
      }
      size_t name_start = p;
      while (p < src_.size() && !std::isspace(static_cast<unsigned char>(src_[p])) && src_[p] != '=' &&
             src_[p] != '>' && !(src_[p] == '/' && p + 1 < src_.size() && src_[p + 1] == '>')) {
        ++p;
      }
      std::string key = lower(src_.substr(name_start, p - name_start));
      if (key.empty()) {  // stray character such as a lone quote
        ++p;
        continue;
      }
      skip_ws(p);
      std::string value;
      if (p < src_.size() && src_[p] == '=') {
        ++p;
        skip_ws(p);
        if (p < src_.size() && (src_[p] == '"' || src_[p] == '\'')) {
          char quote = src_[p++];
          size_t close = src_.find(quote, p);
          if (close == std::string_view::npos) close = src_.size();
          value = decode_entities(src_.substr(p, close - p));
          p = std::min(close + 1, src_.size());
        } else {
          size_t vstart = p;
          while (p < src_.size() && !std::isspace(static_cast<unsigned char>(src_[p])) && src_[p] != '>') ++p;
          value = decode_entities(src_.substr(vstart, p - vstart));
        }
      }
      if (!element->has_attr(key)) element->attrs.emplace_back(std::move(key), std::move(value));
    }
    pos_ = p;
    open(std::move(element), self_closing);
  }

  // Pops up to and including the nearest open element named in `names`,
  // unless one of `boundaries` is hit first.
  void close_open(std::initializer_list<std::string_view> names, std::initializer_list<std::string_view> boundaries) {
    for (size_t i = stack_.size(); i-- > 1;) {
      const std::string& n = stack_[i]->name;
      if (one_of(n, names)) {
        stack_.resize(i);
        return;
      }
      if (one_of(n, boundaries)) return;
    }
  }

  Node* find_open(std::string_view name) {
    for (Node* n : stack_) {
      if (n->is_element(name)) return n;
    }
    return nullptr;
  }

  void open(std::unique_ptr<Node> element, bool self_closing) {
    const std::string name = element->name;
    if (name == "html" || name == "body" || name == "head") {
      if (Node* existing = find_open(name)) {
        for (auto& [k, v] : element->attrs) {
          if (!existing->has_attr(k)) existing->attrs.emplace_back(k, v);
        }
        return;
      }
    }
    if (top()->is_element("head") && !one_of(name, {"meta", "link", "title", "style", "script", "base", "noscript"})) {
      stack_.pop_back();
    }
    if (name == "button") close_open({"button"}, {});
    if (closes_paragraph(name)) close_open({"p"}, {"button", "table", "td", "th", "html", "body"});
    if (name == "li") close_open({"li"}, {"ul", "ol", "menu"});
    if (name == "dt" || name == "dd") close_open({"dt", "dd"}, {"dl"});
    if (name == "option") close_open({"option"}, {"select", "datalist", "optgroup"});
    if (name == "optgroup") close_open({"optgroup", "option"}, {"select"});
    if (name == "tr") close_open({"tr", "td", "th"}, {"table", "tbody", "thead", "tfoot"});
    if (name == "td" || name == "th") close_open({"td", "th"}, {"tr", "table"});
    if (name == "tbody" || name == "thead" || name == "tfoot") {
      close_open({"tbody", "thead", "tfoot", "tr", "td", "th"}, {"table"});
    }

    Node* node = top()->append(std::move(element));
    if (is_void_element(name) || self_closing) return;
    if (is_raw_text(name)) {
      std::string closing = "</" + name;
      size_t end = pos_;
      while (true) {
        end = src_.find("</", end);
        if (end == std::string_view::npos) break;
        if (lower(src_.substr(end, closing.size())) == closing) break;
        end += 2;
      }
      if (end == std::string_view::npos) end = src_.size();
      std::string_view raw = src_.substr(pos_, end - pos_);
      std::string body = (name == "textarea" || name == "title") ? decode_entities(raw) : std::string(raw);
      // A newline directly after <textarea> is not part of its value.
      if (name == "textarea" && !body.empty() && body.front() == '\n') body.erase(0, 1);
      if (!body.empty()) node->append(make_text(std::move(body)));
      size_t gt = end == src_.size() ? end : src_.find('>', end);
      pos_ = gt == std::string_view::npos ? src_.size() : gt + 1;
      return;
    }
    stack_.push_back(node);
  }

  void end_tag(const std::string& name) {
    if (name == "html" || name == "body" || name == "head" || is_void_element(name)) return;
    for (size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->name == name) {
        stack_.resize(i);
        return;
      }
    }
    // No matching open element: dropped.
  }

  std::string_view src_;
  size_t pos_ = 0;
  std::unique_ptr<Node> root_;
  std::vector<Node*> stack_;
};

bool is_blank(const Node& n) {
  return n.type == NodeType::Text &&
         std::all_of(n.text.begin(), n.text.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

void normalize_structure(Node& doc) {
  Node* html = nullptr;
  for (auto& c : doc.children) {
    if (c->is_element("html")) {
      html = c.get();
      break;
    }
  }
  if (!html) {
    auto fresh = make_element("html");
    while (!doc.children.empty()) fresh->append(doc.detach(doc.children.front().get()));
    html = doc.append(std::move(fresh));
  } else {
    // Anything outside <html> belongs inside it.
    std::vector<Node*> strays;
    for (auto& c : doc.children) {
      if (c.get() != html) strays.push_back(c.get());
    }
    for (Node* s : strays) {
      auto owned = doc.detach(s);
      if (!is_blank(*owned) && owned->type != NodeType::Comment) html->append(std::move(owned));
    }
  }

  Node* head = nullptr;
  Node* body = nullptr;
  for (auto& c : html->children) {
    if (!head && c->is_element("head")) head = c.get();
    if (!body && c->is_element("body")) body = c.get();
  }
  std::vector<std::unique_ptr<Node>> loose;
  {
    std::vector<Node*> others;
    for (auto& c : html->children) {
      if (c.get() != head && c.get() != body) others.push_back(c.get());
    }
    for (Node* o : others) loose.push_back(html->detach(o));
  }
  std::unique_ptr<Node> head_owned = head ? html->detach(head) : make_element("head");
  std::unique_ptr<Node> body_owned = body ? html->detach(body) : make_element("body");
  // Loose content before an explicit body goes first, anything after it last.
  std::vector<std::unique_ptr<Node>> before;
  for (auto& n : loose) {
    if (is_blank(*n)) continue;
    if (n->is_element() && one_of(n->name, {"meta", "link", "title", "base"}) && body_owned->children.empty()) {
      head_owned->append(std::move(n));
    } else {
      before.push_back(std::move(n));
    }
  }
  if (!before.empty()) {
    std::vector<std::unique_ptr<Node>> merged;
    for (auto& n : before) merged.push_back(std::move(n));
    for (auto& n : body_owned->children) merged.push_back(std::move(n));
    body_owned->children.clear();
    for (auto& n : merged) body_owned->append(std::move(n));
  }
  html->append(std::move(head_owned));
  html->append(std::move(body_owned));
}

void find_all(Node& node, const std::function<bool(Node&)>& visit) {
  if (!visit(node)) return;
  for (auto& c : node.children) find_all(*c, visit);
}

}  // namespace

const std::string* Node::attr(std::string_view key) const {
  for (const auto& [k, v] : attrs) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string Node::attr_or(std::string_view key, std::string_view fallback) const {
  const std::string* v = attr(key);
  return v ? *v : std::string(fallback);
}

void Node::set_attr(std::string_view key, std::string_view value) {
  for (auto& [k, v] : attrs) {
    if (k == key) {
      v = std::string(value);
      return;
    }
  }
  attrs.emplace_back(std::string(key), std::string(value));
}

void Node::remove_attr(std::string_view key) {
  attrs.erase(std::remove_if(attrs.begin(), attrs.end(), [&](const auto& kv) { return kv.first == key; }),
              attrs.end());
}

Node* Node::append(std::unique_ptr<Node> child) {
  child->parent = this;
  children.push_back(std::move(child));
  return children.back().get();
}

std::unique_ptr<Node> Node::detach(Node* child) {
  for (auto it = children.begin(); it != children.end(); ++it) {
    if (it->get() == child) {
      std::unique_ptr<Node> owned = std::move(*it);
      children.erase(it);
      owned->parent = nullptr;
      return owned;
    }
  }
  return nullptr;
}

void Node::clear_children() { children.clear(); }

void Node::set_text(std::string_view value) {
  children.clear();
  if (!value.empty()) append(make_text(std::string(value)));
}

std::string Node::text_content() const {
  if (type == NodeType::Text) return text;
  std::string out;
  for (const auto& c : children) {
    if (c->type != NodeType::Comment) out += c->text_content();
  }
  return out;
}

std::unique_ptr<Node> Node::clone() const {
  auto copy = std::make_unique<Node>();
  copy->type = type;
  copy->name = name;
  copy->attrs = attrs;
  copy->text = text;
  for (const auto& c : children) copy->append(c->clone());
  return copy;
}

std::unique_ptr<Node> make_element(std::string name) {
  auto n = std::make_unique<Node>();
  n->type = NodeType::Element;
  n->name = std::move(name);
  return n;
}

std::unique_ptr<Node> make_text(std::string text) {
  auto n = std::make_unique<Node>();
  n->type = NodeType::Text;
  n->text = std::move(text);
  return n;
}

Document::Document() : Document(parse("")) {}

Document::Document(std::unique_ptr<Node> root) : root_(std::move(root)) {}

Document Document::clone() const { return Document(root_->clone()); }

Node* Document::html() {
  for (auto& c : root_->children) {
    if (c->is_element("html")) return c.get();
  }
  return nullptr;
}

const Node* Document::html() const { return const_cast<Document*>(this)->html(); }

Node* Document::body() {
  Node* h = html();
  if (!h) return nullptr;
  for (auto& c : h->children) {
    if (c->is_element("body")) return c.get();
  }
  return nullptr;
}

const Node* Document::body() const { return const_cast<Document*>(this)->body(); }

Node* Document::find_by_id(std::string_view id) {
  Node* found = nullptr;
  find_all(*root_, [&](Node& n) {
    if (found) return false;
    if (n.is_element()) {
      const std::string* v = n.attr("id");
      if (v && *v == id) found = &n;
    }
    return !found;
  });
  return found;
}

Node* Document::find_first_with_attr(std::string_view key) {
  Node* found = nullptr;
  find_all(*root_, [&](Node& n) {
    if (found) return false;
    if (n.is_element() && n.has_attr(key)) found = &n;
    return !found;
  });
  return found;
}

Document parse(std::string_view source) {
  Parser parser(source);
  std::unique_ptr<Node> root = parser.run();
  normalize_structure(*root);
  return Document(std::move(root));
}

std::string decode_entities(std::string_view text) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 16> kNamed{{
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", "\xC2\xA0"},
      {"copy", "\xC2\xA9"}, {"hellip", "\xE2\x80\xA6"}, {"mdash", "\xE2\x80\x94"},
      {"ndash", "\xE2\x80\x93"}, {"times", "\xC3\x97"}, {"rarr", "\xE2\x86\x92"},
      {"larr", "\xE2\x86\x90"}, {"middot", "\xC2\xB7"}, {"laquo", "\xC2\xAB"}, {"raquo", "\xC2\xBB"},
  }};
  std::string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    std::string_view ent = text.substr(i + 1, semi - i - 1);
    bool done = false;
    if (!ent.empty() && ent[0] == '#') {
      unsigned long cp = 0;
      std::from_chars_result r{};
      if (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')) {
        r = std::from_chars(ent.data() + 2, ent.data() + ent.size(), cp, 16);
      } else {
        r = std::from_chars(ent.data() + 1, ent.data() + ent.size(), cp, 10);
      }
      if (r.ec == std::errc() && r.ptr == ent.data() + ent.size() && ent.size() > 1) {
        append_utf8(out, cp);
        done = true;
      }
    } else {
      for (const auto& [name, value] : kNamed) {
        if (ent == name) {
          out += value;
          done = true;
          break;
        }
      }
    }
    if (done) {
      i = semi;
    } else {
      out.push_back('&');
    }
  }
  return out;
}

std::string escape_text(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string escape_attr(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '<': out += "&lt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

bool is_void_element(std::string_view tag) {
  return one_of(tag, {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source",
                      "track", "wbr"});
}

std::string to_html(const Node& node) {
  switch (node.type) {
    case NodeType::Document: {
      std::string out = "<!DOCTYPE html>\n";
      for (const auto& c : node.children) out += to_html(*c);
      return out;
    }
    case NodeType::Text:
      if (node.parent && (node.parent->name == "script" || node.parent->name == "style")) return node.text;
      return escape_text(node.text);
    case NodeType::Comment:
      return "<!--" + node.text + "-->";
    case NodeType::Element:
      break;
  }
  std::string out = "<" + node.name;
  for (const auto& [k, v] : node.attrs) {
    out += " " + k;
    if (!v.empty()) out += "=\"" + escape_attr(v) + "\"";
  }
  out += ">";
  if (is_void_element(node.name)) return out;
  for (const auto& c : node.children) out += to_html(*c);
  out += "</" + node.name + ">";
  return out;
}

}  // namespace uiprobe::html
