#include <cctype>
#include <charconv>
#include <unordered_set>

#include "uiprobe/errors.hpp"
#include "uiprobe/html.hpp"

namespace uiprobe::html {

std::string xpath_of(const Node& element) {
  if (!element.is_element()) throw Error(ErrorCode::InvalidArgument, "xpath_of needs an element node");
  std::vector<std::string> parts;
  for (const Node* n = &element; n && n->is_element(); n = n->parent) {
    int index = 1;
    if (n->parent) {
      for (const auto& sib : n->parent->children) {
        if (sib.get() == n) break;
        if (sib->is_element(n->name)) ++index;
      }
    }
    parts.push_back("/" + n->name + "[" + std::to_string(index) + "]");
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) out += *it;
  return out;
}

namespace {

struct Predicate {
  int position = 0;  // > 0 for [n]
  std::string attr;
  std::optional<std::string> value;
};

struct Step {
  bool descendant = false;
  std::string name;  // "*" matches any element
  std::vector<Predicate> predicates;
};

[[noreturn]] void bad(std::string_view expr, std::string_view why) {
  throw Error(ErrorCode::InvalidArgument, "xpath '" + std::string(expr) + "': " + std::string(why));
}

std::vector<Step> compile(std::string_view expr) {
  std::vector<Step> steps;
  size_t p = 0;
  if (expr.empty() || expr[0] != '/') bad(expr, "must be absolute");
  while (p < expr.size()) {
    Step step;
    if (expr.substr(p, 2) == "//") {
      step.descendant = true;
      p += 2;
    } else if (expr[p] == '/') {
      p += 1;
    } else {
      bad(expr, "expected '/'");
    }
    size_t start = p;
    if (p < expr.size() && expr[p] == '*') {
      ++p;
    } else {
      while (p < expr.size() && (std::isalnum(static_cast<unsigned char>(expr[p])) || expr[p] == '-' ||
                                 expr[p] == '_' || expr[p] == ':')) {
        ++p;
      }
    }
    if (p == start) bad(expr, "missing name test");
    step.name = std::string(expr.substr(start, p - start));
    while (p < expr.size() && expr[p] == '[') {
      size_t close = p + 1;
      char quote = 0;
      for (; close < expr.size(); ++close) {
        char c = expr[close];
        if (quote) {
          if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
          quote = c;
        } else if (c == ']') {
          break;
        }
      }
      if (close >= expr.size()) bad(expr, "unterminated predicate");
      std::string_view body = expr.substr(p + 1, close - p - 1);
      Predicate pred;
      if (!body.empty() && body[0] == '@') {
        size_t eq = body.find('=');
        pred.attr = std::string(body.substr(1, eq == std::string_view::npos ? body.size() - 1 : eq - 1));
        if (eq != std::string_view::npos) {
          std::string_view v = body.substr(eq + 1);
          if (v.size() < 2 || (v.front() != '\'' && v.front() != '"') || v.back() != v.front()) {
            bad(expr, "attribute value must be quoted");
          }
          pred.value = std::string(v.substr(1, v.size() - 2));
        }
        if (pred.attr.empty()) bad(expr, "empty attribute name");
      } else {
        int n = 0;
        auto r = std::from_chars(body.data(), body.data() + body.size(), n);
        if (r.ec != std::errc() || r.ptr != body.data() + body.size() || n < 1) bad(expr, "bad predicate");
        pred.position = n;
      }
      step.predicates.push_back(std::move(pred));
      p = close + 1;
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

void collect_self_and_descendants(Node& n, std::vector<Node*>& out) {
  out.push_back(&n);
  for (auto& c : n.children) {
    if (c->is_element()) collect_self_and_descendants(*c, out);
  }
}

void in_document_order(Node& n, const std::unordered_set<Node*>& wanted, std::vector<Node*>& out) {
  if (wanted.count(&n)) out.push_back(&n);
  for (auto& c : n.children) in_document_order(*c, wanted, out);
}

}  // namespace

std::vector<Node*> evaluate_xpath(Node& document_root, std::string_view expr) {
  std::vector<Step> steps = compile(expr);
  std::vector<Node*> context{&document_root};
  for (const Step& step : steps) {
    std::vector<Node*> parents;
    if (step.descendant) {
      for (Node* c : context) collect_self_and_descendants(*c, parents);
    } else {
      parents = context;
    }
    std::unordered_set<Node*> matched;
    for (Node* parent : parents) {
      std::vector<Node*> candidates;
      for (auto& c : parent->children) {
        if (c->is_element() && (step.name == "*" || c->name == step.name)) candidates.push_back(c.get());
      }
      for (const Predicate& pred : step.predicates) {
        std::vector<Node*> kept;
        if (pred.position > 0) {
          if (static_cast<size_t>(pred.position) <= candidates.size()) kept.push_back(candidates[pred.position - 1]);
        } else {
          for (Node* c : candidates) {
            const std::string* v = c->attr(pred.attr);
            if (v && (!pred.value || *v == *pred.value)) kept.push_back(c);
          }
        }
        candidates = std::move(kept);
      }
      matched.insert(candidates.begin(), candidates.end());
    }
    context.clear();
    in_document_order(document_root, matched, context);
    if (context.empty()) break;
  }
  return context;
}

std::vector<const Node*> evaluate_xpath(const Node& document_root, std::string_view expr) {
  auto found = evaluate_xpath(const_cast<Node&>(document_root), expr);
  return {found.begin(), found.end()};
}

}  // namespace uiprobe::html
