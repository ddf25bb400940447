#include "uiprobe/corpus.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>

namespace uiprobe {

using json = nlohmann::json;

const std::vector<std::string>& stock_widgets() {
  static const std::vector<std::string> kWidgets = {"counter",  "tabs",      "modal_form", "dropdown_filter",
                                                    "searchable_list", "todo", "accordion", "pagination",
                                                    "login_form", "toggle_panel"};
  return kWidgets;
}

namespace {

const std::vector<std::string> kTitles = {"Inventory", "Workshop", "Garden", "Library", "Studio", "Kitchen", "Harbor",
                                          "Atlas"};
const std::vector<std::string> kNouns = {"Visitors", "Tickets", "Cups", "Laps", "Points"};
const std::vector<std::string> kTabs = {"Overview", "Details", "Reviews", "Pricing", "Support", "History", "Specs"};
const std::vector<std::string> kFields = {"Name", "Title", "City", "Nickname"};
const std::vector<std::string> kPeople = {"Ada", "Grace", "Linus", "Marie", "Alan", "Edsger"};
const std::vector<std::string> kCategories = {"Fruit", "Vegetable", "Dairy", "Bakery", "Grain"};
const std::vector<std::string> kGroceries = {"Apple", "Carrot", "Cheese", "Bread", "Rice", "Pear", "Leek", "Yogurt"};
const std::vector<std::string> kDocs = {"Alpha report", "Budget plan", "Client list", "Design notes", "Expense sheet",
                                        "Field guide"};
const std::vector<std::string> kChores = {"Buy milk", "Call Sam", "Water plants", "Pay rent", "Read book", "Walk dog"};
const std::vector<std::string> kTopics = {"Shipping", "Returns", "Warranty", "Payment", "Privacy", "Contact"};
const std::vector<std::string> kEmails = {"ada@example.com", "grace@example.org", "linus@example.net"};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

using Steps = std::vector<StepDescriptor>;

StepDescriptor click(const std::string& sig) { return {ActionKind::Click, sig, std::nullopt}; }
StepDescriptor enter(const std::string& sig, std::optional<std::string> text = std::nullopt) {
  return {ActionKind::Enter, sig, std::move(text)};
}
StepDescriptor choose(const std::string& sig, const std::string& option) { return {ActionKind::Select, sig, option}; }

// Writes one widget's markup and its share of the manifest.
class Widget {
 public:
  Widget(std::string prefix, std::mt19937_64& rng, FixtureManifest& m, bool inert)
      : p_(std::move(prefix)), rng_(rng), m_(m), inert_(inert) {}

  std::string html;

  const std::string& p() const { return p_; }
  std::string id(const std::string& suffix) const { return p_ + "-" + suffix; }
  std::string scope(const std::string& tag = "section", const std::string& suffix = "") const {
    return "//" + tag + "[@id='" + (suffix.empty() ? p_ : id(suffix)) + "']";
  }

  const std::string& pick(const std::vector<std::string>& pool) { return pool[rng_() % pool.size()]; }
  // `n` distinct entries in pool order shifted by a random offset
  std::vector<std::string> pick_n(const std::vector<std::string>& pool, size_t n) {
    std::vector<std::string> out;
    size_t start = rng_() % pool.size();
    for (size_t i = 0; i < n; ++i) out.push_back(pool[(start + i) % pool.size()]);
    return out;
  }
  int number(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<uint64_t>(hi - lo + 1)); }

  std::string element(const std::string& tag, const std::string& label, const std::string& scope, ActionKind kind) {
    std::string sig = tag + "|" + lower(label) + "|" + scope;
    m_.elements.push_back({sig, kind, label});
    return sig;
  }

  // data-click attribute, dropped for the disabled control
  std::string on_click(const std::string& script, bool is_inert_target, const std::string& sig) {
    if (inert_ && is_inert_target) {
      m_.inert_signature = sig;
      return "";
    }
    return " data-click=\"" + script + "\"";
  }

  size_t transition(std::vector<Steps> prefix, Steps steps, Classification c, std::vector<std::string> fresh = {}) {
    m_.transitions.push_back({std::move(prefix), std::move(steps), c, std::move(fresh)});
    return m_.transitions.size() - 1;
  }

  void task(std::string name, std::string description, Steps steps, size_t effect,
            std::vector<std::string> expected_new = {}) {
    m_.tasks.push_back(
        {std::move(name), std::move(description), std::move(steps), std::move(expected_new), "manifest:" + std::to_string(effect)});
  }

 private:
  std::string p_;
  std::mt19937_64& rng_;
  FixtureManifest& m_;
  bool inert_;
};

using enum Classification;

void counter(Widget& w) {
  std::string title = w.pick(kTitles);
  std::string noun = w.pick(kNouns);
  int start = w.number(1, 9);  // nonzero so Reset has something to undo
  std::string scope = w.scope();
  std::string inc = w.element("button", "Increment", scope, ActionKind::Click);
  std::string reset = w.element("button", "Reset", scope, ActionKind::Click);
  w.html += "<section id=\"" + w.p() + "\">\n  <h2>" + title + " counter</h2>\n";
  w.html += "  <p id=\"" + w.id("value") + "\">" + noun + ": " + std::to_string(start) + "</p>\n";
  w.html += "  <button id=\"" + w.id("inc") + "\"" + w.on_click("incr #" + w.id("value"), false, inc) + ">Increment</button>\n";
  w.html += "  <button id=\"" + w.id("reset") + "\"" + w.on_click("setnum #" + w.id("value") + " 0", true, reset) +
            ">Reset</button>\n</section>\n";
  w.task("Increment", "Raise the " + lower(noun) + " count by one", {click(inc)}, w.transition({}, {click(inc)}, UsableTerminal));
  w.task("Reset", "Set the " + lower(noun) + " count back to zero", {click(reset)},
         w.transition({}, {click(reset)}, UsableTerminal));
}

void tabs(Widget& w) {
  auto labels = w.pick_n(kTabs, 3);
  std::string scope = w.scope();
  std::vector<std::string> sigs;
  for (const auto& l : labels) sigs.push_back(w.element("button", l, scope, ActionKind::Click));
  w.html += "<section id=\"" + w.p() + "\">\n  <div role=\"tablist\">\n";
  for (int i = 0; i < 3; ++i) {
    std::string script;
    for (int k = 0; k < 3; ++k) {
      if (!script.empty()) script += "; ";
      script += (k == i ? "show #" : "hide #") + w.id("panel" + std::to_string(k + 1));
    }
    w.html += "    <button role=\"tab\"" + w.on_click(script, i == 2, sigs[i]) + ">" + labels[i] + "</button>\n";
  }
  w.html += "  </div>\n";
  for (int i = 0; i < 3; ++i) {
    w.html += "  <div id=\"" + w.id("panel" + std::to_string(i + 1)) + "\"" + (i ? " hidden" : "") + ">" + labels[i] +
              " for the " + lower(w.pick(kTitles)) + ".</div>\n";
  }
  w.html += "</section>\n";
  // the first tab is already showing
  w.transition({}, {click(sigs[0])}, NonInteractive);
  for (int i = 1; i < 3; ++i) {
    w.task(labels[i], "Show the " + labels[i] + " tab", {click(sigs[i])}, w.transition({}, {click(sigs[i])}, UsableTerminal));
  }
}

void modal_form(Widget& w) {
  std::string field = w.pick(kFields);
  std::string person = w.pick(kPeople);
  std::string scope = w.scope();
  std::string form_scope = w.scope("form", "form");
  std::string open = w.element("button", "Open", scope, ActionKind::Click);
  std::string input = w.element("input", field, form_scope, ActionKind::Enter);
  std::string save = w.element("button", "Save", form_scope, ActionKind::Click);
  std::string cancel = w.element("button", "Cancel", form_scope, ActionKind::Click);
  std::string fid = "#" + w.id("field");
  std::string dialog = "#" + w.id("dialog");
  w.html += "<section id=\"" + w.p() + "\">\n  <h2>" + w.pick(kTitles) + " profile</h2>\n";
  w.html += "  <p id=\"" + w.id("display") + "\">" + field + ": none</p>\n";
  w.html += "  <button id=\"" + w.id("open") + "\"" + w.on_click("show " + dialog, false, open) + ">Open</button>\n";
  w.html += "  <div id=\"" + w.id("dialog") + "\" role=\"dialog\" hidden>\n    <form id=\"" + w.id("form") + "\">\n";
  w.html += "      <input id=\"" + w.id("field") + "\" type=\"text\" value=\"\" aria-label=\"" + field + "\">\n";
  w.html += "      <button type=\"submit\"" +
            w.on_click("require " + fid + "; copy " + fid + " #" + w.id("display") + " " + field + ":; hide " + dialog +
                           "; clear " + fid,
                       true, save) +
            ">Save</button>\n";
  w.html += "      <button type=\"button\"" + w.on_click("hide " + dialog + "; clear " + fid, false, cancel) +
            ">Cancel</button>\n    </form>\n  </div>\n</section>\n";

  size_t t_open = w.transition({}, {click(open)}, UsableExpand, {input, save, cancel});
  size_t t_save = w.transition({{click(open)}}, {enter(input), click(save)}, UsableTerminal);
  size_t t_cancel = w.transition({{click(open)}}, {click(cancel)}, UsableTerminal);
  w.task("Open", "Open the edit dialog", {click(open)}, t_open, {input, save, cancel});
  w.task("Open - Fill - Save", "Open the dialog, set " + lower(field) + " to " + person + " and save",
         {click(open), enter(input, person), click(save)}, t_save);
  w.task("Open - Cancel", "Open the dialog and close it without saving", {click(open), click(cancel)}, t_cancel);
}

void dropdown_filter(Widget& w) {
  auto cats = w.pick_n(kCategories, 2);
  auto items = w.pick_n(kGroceries, 4);
  std::string form_scope = w.scope("form", "form");
  std::string select = w.element("select", "Category", form_scope, ActionKind::Select);
  std::string apply = w.element("button", "Apply", form_scope, ActionKind::Click);
  w.html += "<section id=\"" + w.p() + "\">\n  <form id=\"" + w.id("form") + "\">\n";
  w.html += "    <select id=\"" + w.id("category") + "\" aria-label=\"Category\"><option selected>All</option><option>" +
            cats[0] + "</option><option>" + cats[1] + "</option></select>\n";
  w.html += "    <button type=\"button\"" +
            w.on_click("filter #" + w.id("items") + " #" + w.id("category"), true, apply) + ">Apply</button>\n  </form>\n";
  w.html += "  <ul id=\"" + w.id("items") + "\">\n";
  // alternate categories so either choice hides something
  for (size_t i = 0; i < items.size(); ++i) w.html += "    <li>" + items[i] + " (" + cats[i % 2] + ")</li>\n";
  w.html += "  </ul>\n</section>\n";
  // the oracle picks the first option that is not selected
  size_t effect = w.transition({}, {choose(select, cats[0]), click(apply)}, UsableTerminal);
  w.task("Category - Apply", "Show only " + lower(cats[1]) + " items", {choose(select, cats[1]), click(apply)}, effect);
}

void searchable_list(Widget& w) {
  auto docs = w.pick_n(kDocs, 4);
  std::string form_scope = w.scope("form", "form");
  std::string input = w.element("input", "Search documents", form_scope, ActionKind::Enter);
  std::string go = w.element("button", "Search", form_scope, ActionKind::Click);
  std::string clear = w.element("button", "Clear", form_scope, ActionKind::Click);
  std::string q = "#" + w.id("q");
  std::string list = "#" + w.id("list");
  w.html += "<section id=\"" + w.p() + "\">\n  <form id=\"" + w.id("form") + "\" role=\"search\">\n";
  w.html += "    <input id=\"" + w.id("q") + "\" type=\"search\" value=\"\" aria-label=\"Search documents\">\n";
  w.html += "    <button type=\"submit\"" + w.on_click("require " + q + "; filter " + list + " " + q, true, go) +
            ">Search</button>\n";
  w.html += "    <button type=\"button\"" + w.on_click("clear " + q + "; filter " + list + " " + q, false, clear) +
            ">Clear</button>\n  </form>\n  <ul id=\"" + w.id("list") + "\">\n";
  for (const auto& d : docs) w.html += "    <li>" + d + "</li>\n";
  w.html += "  </ul>\n</section>\n";
  std::string query = docs[1].substr(0, docs[1].find(' '));
  size_t t_search = w.transition({}, {enter(input), click(go)}, UsableTerminal);
  // nothing typed and nothing filtered yet
  w.transition({}, {click(clear)}, NonInteractive);
  w.task("Search", "Find the " + docs[1] + " entry", {enter(input, query), click(go)}, t_search);
}

void todo(Widget& w) {
  auto chores = w.pick_n(kChores, 3);
  std::string form_scope = w.scope("form", "form");
  std::string list_scope = w.scope("ul", "list");
  std::string input = w.element("input", "New task", form_scope, ActionKind::Enter);
  std::string add = w.element("button", "Add", form_scope, ActionKind::Click);
  std::string del = w.element("button", "Delete", list_scope, ActionKind::Click);
  std::string del_attr = w.on_click("remove @closest(li)", true, del);
  w.html += "<section id=\"" + w.p() + "\">\n  <form id=\"" + w.id("form") + "\">\n";
  w.html += "    <input id=\"" + w.id("new") + "\" type=\"text\" value=\"\" placeholder=\"New task\">\n";
  w.html += "    <button type=\"submit\"" +
            w.on_click("require #" + w.id("new") + "; append #" + w.id("list") + " #" + w.id("new") + " #" + w.id("tpl"),
                       false, add) +
            ">Add</button>\n  </form>\n  <ul id=\"" + w.id("list") + "\">\n";
  for (int i = 0; i < 2; ++i) w.html += "    <li>" + chores[i] + " <button" + del_attr + ">Delete</button></li>\n";
  w.html += "  </ul>\n  <div id=\"" + w.id("tpl") + "\" hidden><li>{value} <button" + del_attr +
            ">Delete</button></li></div>\n</section>\n";
  // new rows reuse the Delete signature, so nothing counts as new
  size_t t_add = w.transition({}, {enter(input), click(add)}, UsableTerminal);
  size_t t_del = w.transition({}, {click(del)}, UsableTerminal);
  w.task("Add", "Add \"" + chores[2] + "\" to the list", {enter(input, chores[2]), click(add)}, t_add);
  w.task("Delete", "Remove the first entry", {click(del)}, t_del);
}

void accordion(Widget& w) {
  auto topics = w.pick_n(kTopics, 3);
  std::string scope = w.scope();
  w.html += "<section id=\"" + w.p() + "\">\n";
  for (int i = 0; i < 3; ++i) {
    std::string sig = w.element("button", topics[i], scope, ActionKind::Click);
    std::string body = w.id("body" + std::to_string(i + 1));
    w.html += "  <div class=\"fold\">\n    <button" + w.on_click("toggle #" + body, i == 1, sig) + ">" + topics[i] +
              "</button>\n    <div id=\"" + body + "\" hidden>" + topics[i] + " policy for " + w.pick(kTitles) +
              ".</div>\n  </div>\n";
    w.task(topics[i], "Expand the " + topics[i] + " section", {click(sig)}, w.transition({}, {click(sig)}, UsableTerminal));
  }
  w.html += "</section>\n";
}

void pagination(Widget& w) {
  auto items = w.pick_n(kGroceries, 6);
  std::string nav_scope = w.scope("nav", "nav");
  w.html += "<section id=\"" + w.p() + "\">\n  <p id=\"" + w.id("indicator") + "\">Page 1 of 3</p>\n";
  for (int i = 0; i < 3; ++i) {
    w.html += "  <ul id=\"" + w.id("page" + std::to_string(i + 1)) + "\"" + (i ? " hidden" : "") + "><li>" +
              items[2 * i] + "</li><li>" + items[2 * i + 1] + "</li></ul>\n";
  }
  w.html += "  <nav id=\"" + w.id("nav") + "\">\n";
  for (int i = 0; i < 3; ++i) {
    std::string n = std::to_string(i + 1);
    std::string sig = w.element("button", n, nav_scope, ActionKind::Click);
    std::string script;
    for (int k = 0; k < 3; ++k) script += (k == i ? "show #" : "hide #") + w.id("page" + std::to_string(k + 1)) + "; ";
    script += "text #" + w.id("indicator") + " Page " + n + " of 3";
    w.html += "    <button" + w.on_click(script, i == 2, sig) + ">" + n + "</button>\n";
    if (i == 0) {
      w.transition({}, {click(sig)}, NonInteractive);  // already on page 1
    } else {
      w.task("Page " + n, "Go to page " + n, {click(sig)}, w.transition({}, {click(sig)}, UsableTerminal));
    }
  }
  w.html += "  </nav>\n</section>\n";
}

void login_form(Widget& w) {
  std::string email_value = w.pick(kEmails);
  std::string form_scope = w.scope("form", "login");
  std::string welcome_scope = w.scope("div", "welcome");
  std::string email = w.element("input", "Email", form_scope, ActionKind::Enter);
  std::string password = w.element("input", "Password", form_scope, ActionKind::Enter);
  std::string signin = w.element("button", "Sign in", form_scope, ActionKind::Click);
  std::string signout = w.element("button", "Sign out", welcome_scope, ActionKind::Click);
  std::string e = "#" + w.id("email");
  std::string pw = "#" + w.id("password");
  w.html += "<section id=\"" + w.p() + "\">\n  <form id=\"" + w.id("login") + "\">\n";
  w.html += "    <input id=\"" + w.id("email") + "\" type=\"email\" value=\"\" aria-label=\"Email\">\n";
  w.html += "    <input id=\"" + w.id("password") + "\" type=\"password\" value=\"\" aria-label=\"Password\">\n";
  w.html += "    <button type=\"submit\"" +
            w.on_click("require " + e + "; require " + pw + "; copy " + e + " #" + w.id("greeting") +
                           " Signed in as; hide #" + w.id("login") + "; show #" + w.id("welcome"),
                       true, signin) +
            ">Sign in</button>\n  </form>\n";
  w.html += "  <div id=\"" + w.id("welcome") + "\" hidden>\n    <p id=\"" + w.id("greeting") + "\">Signed out</p>\n";
  w.html += "    <button" +
            w.on_click("clear " + e + "; clear " + pw + "; hide #" + w.id("welcome") + "; show #" + w.id("login"), false,
                       signout) +
            ">Sign out</button>\n  </div>\n</section>\n";
  Steps in{enter(email), enter(password), click(signin)};
  size_t t_in = w.transition({}, in, UsableExpand, {signout});
  // signing out brings the form back, which counts as newly visible controls
  size_t t_out = w.transition({in}, {click(signout)}, UsableExpand, {email, password, signin});
  Steps in_task{enter(email, email_value), enter(password, "hunter2"), click(signin)};
  w.task("Sign in", "Sign in as " + email_value, in_task, t_in, {signout});
  Steps both = in_task;
  both.push_back(click(signout));
  w.task("Sign in - Sign out", "Sign in and sign out again", both, t_out, {email, password, signin});
}

void toggle_panel(Widget& w) {
  std::string scope = w.scope();
  std::string panel_scope = w.scope("div", "panel");
  std::string details = w.element("button", "Details", scope, ActionKind::Click);
  std::string close = w.element("button", "Close", panel_scope, ActionKind::Click);
  w.html += "<section id=\"" + w.p() + "\">\n  <button" + w.on_click("toggle #" + w.id("panel"), false, details) +
            ">Details</button>\n";
  w.html += "  <div id=\"" + w.id("panel") + "\" hidden>\n    <p>Opening hours for the " + lower(w.pick(kTitles)) +
            ".</p>\n    <button" + w.on_click("hide #" + w.id("panel"), true, close) + ">Close</button>\n  </div>\n</section>\n";
  size_t t_open = w.transition({}, {click(details)}, UsableExpand, {close});
  size_t t_close = w.transition({{click(details)}}, {click(close)}, UsableTerminal);
  w.task("Details", "Show the details panel", {click(details)}, t_open, {close});
  w.task("Details - Close", "Show the details panel and close it", {click(details), click(close)}, t_close);
}

const std::map<std::string, std::function<void(Widget&)>>& templates() {
  static const std::map<std::string, std::function<void(Widget&)>> kTemplates = {
      {"counter", counter},     {"tabs", tabs},           {"modal_form", modal_form},
      {"dropdown_filter", dropdown_filter}, {"searchable_list", searchable_list}, {"todo", todo},
      {"accordion", accordion}, {"pagination", pagination}, {"login_form", login_form},
      {"toggle_panel", toggle_panel}};
  return kTemplates;
}

}  // namespace

Fixture synth_fixture(uint64_t seed, const std::vector<std::string>& widgets, bool inert) {
  if (widgets.empty()) throw Error(ErrorCode::UnsupportedWidget, "no widgets requested");
  for (const auto& w : widgets) {
    if (!templates().count(w)) throw Error(ErrorCode::UnsupportedWidget, "unknown widget '" + w + "'");
  }
  Fixture f;
  FixtureManifest& m = f.manifest;
  m.seed = seed;
  m.widgets = widgets;
  for (const auto& w : widgets) m.fixture_id += (m.fixture_id.empty() ? "" : "+") + w;
  if (inert) m.fixture_id += "-inert";

  std::mt19937_64 rng(seed);
  std::map<std::string, int> seen;
  std::string body;
  for (size_t i = 0; i < widgets.size(); ++i) {
    int n = ++seen[widgets[i]];
    std::string prefix = widgets[i] + (n > 1 ? "-" + std::to_string(n) : "");
    std::replace(prefix.begin(), prefix.end(), '_', '-');
    Widget w(prefix, rng, m, inert && i == 0);
    templates().at(widgets[i])(w);
    body += w.html;
  }
  m.predicted_step_count = static_cast<int>(m.transitions.size());
  f.document = "<!DOCTYPE html>\n<html>\n<head>\n  <meta charset=\"utf-8\">\n  <title>" + m.fixture_id +
               "</title>\n</head>\n<body>\n" + body + "</body>\n</html>\n";
  return f;
}

std::vector<std::string> check_manifest(const FixtureManifest& m) {
  std::vector<std::string> out;
  std::set<std::string> listed;
  for (const auto& e : m.elements) {
    if (!listed.insert(e.signature).second) out.push_back("element listed twice: " + e.signature);
  }
  auto check_steps = [&](const Steps& steps, const std::string& where) {
    if (steps.empty()) out.push_back(where + ": no steps");
    for (const auto& s : steps) {
      if (!listed.count(s.signature)) out.push_back(where + ": unlisted target " + s.signature);
    }
  };
  std::set<std::string> keys;
  for (size_t i = 0; i < m.transitions.size(); ++i) {
    const auto& t = m.transitions[i];
    std::string where = "transition " + std::to_string(i);
    check_steps(t.steps, where);
    for (const auto& p : t.prefix) check_steps(p, where + " prefix");
    for (const auto& s : t.new_signatures) {
      if (!listed.count(s)) out.push_back(where + ": unlisted new control " + s);
    }
    if (!keys.insert(descriptor_key(t.steps)).second) out.push_back(where + ": duplicate step tuple");
    if ((t.category == Classification::UsableExpand) == t.new_signatures.empty()) {
      out.push_back(where + ": new controls disagree with category");
    }
  }
  for (const auto& t : m.tasks) {
    if (t.name.empty()) out.push_back("unnamed task");
    check_steps(t.steps, "task '" + t.name + "'");
  }
  if (m.predicted_step_count != static_cast<int>(m.transitions.size())) {
    out.push_back("predicted_step_count differs from the transition count");
  }
  if (!m.inert_signature.empty() && !listed.count(m.inert_signature)) out.push_back("inert control is not listed");
  return out;
}

std::vector<std::filesystem::path> write_corpus(const std::filesystem::path& dir, uint64_t seed, bool inert_variants) {
  std::vector<std::filesystem::path> out;
  for (const auto& w : stock_widgets()) {
    for (bool inert : {false, true}) {
      if (inert && !inert_variants) continue;
      Fixture f = synth_fixture(seed, {w}, inert);
      std::filesystem::path d = dir / f.manifest.fixture_id;
      std::error_code ec;
      std::filesystem::create_directories(d, ec);
      if (ec) throw Error(ErrorCode::SerializationFailure, "cannot create " + d.string() + ": " + ec.message());
      write_file_atomic(d / "page.html", f.document);
      save_manifest(f.manifest, d / "manifest.json");
      out.push_back(d);
    }
  }
  return out;
}

namespace {

ActionKind kind_from(const std::string& s) {
  if (s == "click") return ActionKind::Click;
  if (s == "enter") return ActionKind::Enter;
  if (s == "select") return ActionKind::Select;
  throw Error(ErrorCode::SchemaMismatch, "unknown action kind '" + s + "'");
}

}  // namespace

void to_json(json& j, const ManifestElement& e) {
  j = {{"signature", e.signature}, {"kind", to_string(e.kind)}, {"label", e.label}};
}

void from_json(const json& j, ManifestElement& e) {
  e.signature = j.at("signature");
  e.kind = kind_from(j.at("kind"));
  e.label = j.value("label", "");
}

void to_json(json& j, const ManifestTransition& t) {
  j = {{"prefix", t.prefix},
       {"steps", t.steps},
       {"category", to_string(t.category)},
       {"new_signatures", t.new_signatures}};
}

void from_json(const json& j, ManifestTransition& t) {
  t.prefix = j.value("prefix", std::vector<Steps>{});
  t.steps = j.at("steps").get<Steps>();
  t.category = classification_from_string(j.at("category").get<std::string>());
  t.new_signatures = j.value("new_signatures", std::vector<std::string>{});
}

void to_json(json& j, const FixtureManifest& m) {
  j = {{"fixture_id", m.fixture_id},
       {"seed", m.seed},
       {"widgets", m.widgets},
       {"elements", m.elements},
       {"transitions", m.transitions},
       {"tasks", m.tasks},
       {"predicted_step_count", m.predicted_step_count}};
  if (!m.inert_signature.empty()) j["inert_signature"] = m.inert_signature;
}

void from_json(const json& j, FixtureManifest& m) {
  m.fixture_id = j.at("fixture_id");
  m.seed = j.value("seed", uint64_t{0});
  m.widgets = j.value("widgets", std::vector<std::string>{});
  m.elements = j.at("elements").get<std::vector<ManifestElement>>();
  m.transitions = j.at("transitions").get<std::vector<ManifestTransition>>();
  m.tasks = j.value("tasks", std::vector<Task>{});
  m.predicted_step_count = j.value("predicted_step_count", static_cast<int>(m.transitions.size()));
  m.inert_signature = j.value("inert_signature", "");
}

void save_manifest(const FixtureManifest& m, const std::filesystem::path& path) {
  json j = m;
  write_file_atomic(path, j.dump(2) + "\n");
}

FixtureManifest load_manifest(const std::filesystem::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::SchemaMismatch, path.string() + " is not JSON");
  try {
    return j.get<FixtureManifest>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, path.string() + ": " + e.what());
  }
}

}  // namespace uiprobe
