// In-process page backend. Widget behaviour is declared on elements:
//
//   data-click="cmd; cmd; ..."   run when the element is clicked
//   data-change="cmd; ..."       run after enter/select on the element
//
// Commands (selectors: #id, [attr], @self, @parent, @closest(tag)):
//   show S | hide S | toggle S        flip the hidden attribute
//   text S literal...                 replace S's text
//   incr S [delta] | setnum S n       rewrite the last integer in S's text
//   copy SRC DST [prefix...]          DST text = prefix + " " + value of SRC
//   clear S                           empty a field or remove S's children
//   filter LIST SRC                   hide LIST children not containing SRC's value
//   append LIST SRC TPL               clone TPL's children into LIST, {value} filled
//   remove S
//   attr S name [value] | unattr S name
//   require S                         stop here when S's value is empty
//
// A #id selector that matches nothing fails the action; an [attr] selector
// that matches nothing skips the command.

#include <algorithm>
#include <cctype>
#include <sstream>

#include "uiprobe/env.hpp"

namespace uiprobe {

namespace {

using html::Node;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ExecutionFailure, msg); }

bool text_field(const Node& n) {
  if (n.name == "textarea") return true;
  if (n.name != "input") return false;
  std::string type = lower(n.attr_or("type", "text"));
  return type == "text" || type == "search" || type == "email" || type == "password" || type == "number" ||
         type == "tel" || type == "url" || type.empty();
}

std::vector<Node*> element_children(Node& n) {
  std::vector<Node*> out;
  for (auto& c : n.children) {
    if (c->is_element()) out.push_back(c.get());
  }
  return out;
}

void collect_options(Node& n, std::vector<Node*>& out) {
  for (auto& c : n.children) {
    if (c->is_element("option")) out.push_back(c.get());
    else if (c->is_element()) collect_options(*c, out);
  }
}

std::string field_value(Node& n) {
  if (n.name == "input") return n.attr_or("value");
  if (n.name == "textarea") return n.text_content();
  if (n.name == "select") {
    std::vector<Node*> options;
    collect_options(n, options);
    for (Node* o : options) {
      if (o->has_attr("selected")) return collapse_whitespace(o->text_content());
    }
    return options.empty() ? std::string() : collapse_whitespace(options.front()->text_content());
  }
  return collapse_whitespace(n.text_content());
}

// Finds the last integer in the text under `n` and replaces it via `update`.
bool rewrite_last_integer(Node& n, const std::function<long(long)>& update) {
  for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
    Node& c = **it;
    if (c.is_element()) {
      if (rewrite_last_integer(c, update)) return true;
      continue;
    }
    if (c.type != html::NodeType::Text) continue;
    std::string& t = c.text;
    size_t end = t.size();
    while (end > 0 && !std::isdigit(static_cast<unsigned char>(t[end - 1]))) --end;
    if (end == 0) continue;
    size_t start = end;
    while (start > 0 && std::isdigit(static_cast<unsigned char>(t[start - 1]))) --start;
    if (start > 0 && t[start - 1] == '-') --start;
    long value = std::stol(t.substr(start, end - start));
    t.replace(start, end - start, std::to_string(update(value)));
    return true;
  }
  return false;
}

void substitute(Node& n, const std::string& value) {
  auto fill = [&](std::string& s) {
    for (size_t p = s.find("{value}"); p != std::string::npos; p = s.find("{value}", p + value.size())) {
      s.replace(p, 7, value);
    }
  };
  fill(n.text);
  for (auto& kv : n.attrs) fill(kv.second);
  for (auto& c : n.children) substitute(*c, value);
}

class SimulatorBackend : public Backend {
 public:
  void load(const PageSource& source) override { doc_ = html::parse(source.read()); }

  html::Document extract() override { return doc_.clone(); }

  std::string capture(const DomNode& dom) override { return render_text(dom); }

  std::string media_type() const override { return "text/plain"; }

  void dispatch(const DomNode& target, const Action& action) override {
    auto found = html::evaluate_xpath(doc_.root(), target.xpath);
    if (found.size() != 1) fail("element " + target.xpath + " no longer resolves");
    Node& el = *found.front();
    if (el.has_attr("disabled")) return;
    switch (action.kind) {
      case ActionKind::Click: click(el); break;
      case ActionKind::Enter: enter(el, *action.payload); break;
      case ActionKind::Select: select(el, *action.payload); break;
    }
  }

 private:
  void click(Node& el) {
    if (el.is_element("input")) {
      std::string type = lower(el.attr_or("type"));
      if (type == "checkbox") {
        if (el.has_attr("checked")) el.remove_attr("checked");
        else el.set_attr("checked", "");
      } else if (type == "radio") {
        std::string group = el.attr_or("name");
        for (Node* n : all_elements()) {
          if (n->is_element("input") && lower(n->attr_or("type")) == "radio" && n->attr_or("name") == group) {
            n->remove_attr("checked");
          }
        }
        el.set_attr("checked", "");
      }
    }
    if (const std::string* script = el.attr("data-click")) run(el, *script);
  }

  void enter(Node& el, const std::string& text) {
    if (!text_field(el)) fail("enter target <" + el.name + "> is not a text field");
    if (el.name == "textarea") {
      el.set_text(text);
    } else {
      el.set_attr("value", text);
    }
    if (const std::string* script = el.attr("data-change")) run(el, *script);
  }

  void select(Node& el, const std::string& option) {
    if (!el.is_element("select")) fail("select target <" + el.name + "> is not a select");
    std::vector<Node*> options;
    collect_options(el, options);
    Node* match = nullptr;
    for (Node* o : options) {
      if (collapse_whitespace(o->text_content()) == collapse_whitespace(option) || o->attr_or("value") == option) {
        match = o;
        break;
      }
    }
    if (!match) fail("select has no option '" + option + "'");
    for (Node* o : options) o->remove_attr("selected");
    match->set_attr("selected", "");
    if (const std::string* script = el.attr("data-change")) run(el, *script);
  }

  std::vector<Node*> all_elements() {
    std::vector<Node*> out;
    std::function<void(Node&)> walk = [&](Node& n) {
      if (n.is_element()) out.push_back(&n);
      for (auto& c : n.children) walk(*c);
    };
    walk(doc_.root());
    return out;
  }

  Node* resolve(Node& self, const std::string& selector) {
    if (selector.empty()) fail("missing selector");
    if (selector == "@self") return &self;
    if (selector == "@parent") {
      if (!self.parent || !self.parent->is_element()) fail("@parent of root");
      return self.parent;
    }
    if (selector.rfind("@closest(", 0) == 0 && selector.back() == ')') {
      std::string tag = selector.substr(9, selector.size() - 10);
      for (Node* n = &self; n && n->is_element(); n = n->parent) {
        if (n->name == tag) return n;
      }
      fail("no enclosing <" + tag + ">");
    }
    if (selector[0] == '#') {
      Node* n = doc_.find_by_id(selector.substr(1));
      if (!n) fail("no element " + selector);
      return n;
    }
    if (selector.front() == '[' && selector.back() == ']') {
      return doc_.find_first_with_attr(selector.substr(1, selector.size() - 2));
    }
    fail("bad selector '" + selector + "'");
  }

  void run(Node& self, const std::string& script) {
    std::stringstream commands(script);
    std::string command;
    while (std::getline(commands, command, ';')) {
      command = trim(command);
      if (command.empty()) continue;
      if (!run_one(self, command)) return;
    }
  }

  // Returns false when the rest of the script must be skipped.
  bool run_one(Node& self, const std::string& command) {
    std::istringstream in(command);
    std::string op;
    std::string sel;
    in >> op >> sel;
    std::string rest;
    std::getline(in, rest);
    rest = trim(rest);
    auto args = [&] {
      std::istringstream r(rest);
      std::vector<std::string> out;
      for (std::string a; r >> a;) out.push_back(a);
      return out;
    };

    Node* target = resolve(self, sel);
    if (!target) return true;
    if (op == "show") {
      target->remove_attr("hidden");
    } else if (op == "hide") {
      target->set_attr("hidden", "");
    } else if (op == "toggle") {
      if (target->has_attr("hidden")) target->remove_attr("hidden");
      else target->set_attr("hidden", "");
    } else if (op == "text") {
      target->set_text(rest);
    } else if (op == "incr" || op == "setnum") {
      long n = 1;
      if (!rest.empty()) {
        try {
          n = std::stol(rest);
        } catch (const std::exception&) {
          fail("bad number in '" + command + "'");
        }
      }
      bool ok = op == "incr" ? rewrite_last_integer(*target, [n](long v) { return v + n; })
                             : rewrite_last_integer(*target, [n](long) { return n; });
      if (!ok) fail("no number to update in " + sel);
    } else if (op == "copy") {
      auto a = args();
      if (a.empty()) fail("copy needs a destination");
      Node* dst = resolve(self, a[0]);
      if (!dst) return true;
      std::string prefix = trim(rest.substr(a[0].size()));
      std::string value = field_value(*target);
      dst->set_text(prefix.empty() ? value : prefix + " " + value);
    } else if (op == "clear") {
      if (target->is_element("input")) target->set_attr("value", "");
      else target->clear_children();
    } else if (op == "filter") {
      auto a = args();
      if (a.size() != 1) fail("filter needs a source");
      Node* src = resolve(self, a[0]);
      std::string needle = src ? lower(collapse_whitespace(field_value(*src))) : std::string();
      for (Node* item : element_children(*target)) {
        bool keep = needle.empty() || needle == "all" ||
                    lower(collapse_whitespace(item->text_content())).find(needle) != std::string::npos;
        if (keep) item->remove_attr("hidden");
        else item->set_attr("hidden", "");
      }
    } else if (op == "append") {
      auto a = args();
      if (a.size() != 2) fail("append needs a source and a template");
      Node* src = resolve(self, a[0]);
      Node* tpl = resolve(self, a[1]);
      if (!src || !tpl) return true;
      std::string value = collapse_whitespace(field_value(*src));
      if (value.empty()) return false;
      for (const auto& c : tpl->children) {
        auto copy = c->clone();
        substitute(*copy, value);
        target->append(std::move(copy));
      }
      if (src->is_element("input")) src->set_attr("value", "");
      else src->clear_children();
    } else if (op == "remove") {
      if (!target->parent) fail("cannot remove the document");
      bool removes_self = false;
      for (Node* n = &self; n; n = n->parent) removes_self |= n == target;
      target->parent->detach(target);
      // `self` is gone; nothing after this may touch it
      if (removes_self) return false;
    } else if (op == "attr") {
      auto a = args();
      if (a.empty()) fail("attr needs a name");
      target->set_attr(a[0], a.size() > 1 ? a[1] : "");
    } else if (op == "unattr") {
      auto a = args();
      if (a.empty()) fail("unattr needs a name");
      target->remove_attr(a[0]);
    } else if (op == "require") {
      if (collapse_whitespace(field_value(*target)).empty()) return false;
    } else {
      fail("unknown command '" + op + "'");
    }
    return true;
  }

  html::Document doc_;
};

}  // namespace

std::unique_ptr<Backend> make_simulator_backend() { return std::make_unique<SimulatorBackend>(); }

}  // namespace uiprobe
