#include <gtest/gtest.h>

#include <mutex>
#include <random>

#include "uiprobe/explorer.hpp"
#include "uiprobe/validator.hpp"

using namespace uiprobe;

namespace {

PageSource page(const Fixture& f) { return PageSource::from_html(f.document, f.manifest.fixture_id); }

const Task& task_named(const std::vector<Task>& tasks, const std::string& name) {
  for (const auto& t : tasks) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("no task " + name);
}

// Oracle that remembers what each judge call was shown.
class RecordingOracle : public OraclePolicy {
 public:
  std::mutex mu;
  std::map<std::string, std::vector<std::string>> judged;  // task -> state keys

 protected:
  std::string respond(const PolicyRequest& r, const std::string& prompt) override {
    if (r.kind == RequestKind::ValidateJudge) {
      std::lock_guard<std::mutex> lock(mu);
      for (const auto& s : r.states) judged[r.task->name].push_back(s.state_key);
    }
    return OraclePolicy::respond(r, prompt);
  }
};

const char* kDeletePage = R"HTML(
<section id="files">
  <ul id="rows"><li>report.pdf</li></ul>
  <button data-click="show #confirm">Delete</button>
  <div id="confirm" role="dialog" hidden>
    <p>Remove the file?</p>
    <button data-click="clear #rows; hide #confirm">Confirm Delete</button>
  </div>
</section>)HTML";

}  // namespace

TEST(DeriveTasks, SearchBoxFromGraph) {
  Fixture f = synth_fixture(1, {"searchable_list"});
  OraclePolicy oracle;
  auto r = explore(page(f), oracle, {});
  auto tasks = derive_tasks(r.graph);
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(tasks[0].name, "Search");
  ASSERT_EQ(tasks[0].steps.size(), 2u);
  EXPECT_EQ(tasks[0].steps[0].kind, ActionKind::Enter);
  EXPECT_EQ(tasks[0].steps[1].kind, ActionKind::Click);
  EXPECT_EQ(tasks[0].steps[1].signature, f.manifest.elements[1].signature);
}

TEST(DeriveTasks, OnlyNonInteractiveGivesNone) {
  auto s = EnvSession::load(PageSource::from_html("<button>Idle</button>"), BackendKind::Simulator);
  InteractionGraph g;
  g.intern_state(s.current());
  UIState after = s.apply(Action::click(0));
  g.intern_state(after);
  g.record_transition({g.root(), {{Action::click(0)}, {}, {}}, {after.state_key}, {false, StateMarker::Complete, ""},
                       Classification::NonInteractive, ""});
  EXPECT_TRUE(derive_tasks(g).empty());
  EXPECT_THROW(derive_tasks(InteractionGraph{}), Error);
}

TEST(DeriveTasks, ConfirmChain) {
  OraclePolicy oracle;
  auto r = explore(PageSource::from_html(kDeletePage), oracle, {});
  auto tasks = derive_tasks(r.graph);
  ASSERT_EQ(tasks.size(), 2u);
  EXPECT_EQ(tasks[0].name, "Delete");
  EXPECT_EQ(tasks[0].expected_new_signatures,
            std::vector<std::string>{"button|confirm delete|//div[@id='confirm']"});
  EXPECT_EQ(tasks[1].name, "Delete - Confirm Delete");
  EXPECT_EQ(tasks[1].steps.size(), 2u);
  // and the derived chain validates on the same page
  EXPECT_EQ(validate(PageSource::from_html(kDeletePage), tasks, oracle).pass_rate, 100.0);
}

TEST(DeriveTasks, FromManifest) {
  Fixture f = synth_fixture(1, {"modal_form"});
  auto tasks = derive_tasks(f.manifest);
  EXPECT_EQ(task_named(tasks, "Open - Fill - Save").steps.size(), 3u);
  EXPECT_THROW(derive_tasks(FixtureManifest{}), Error);
}

TEST(RunTask, FaithfulAndInertSearch) {
  OraclePolicy oracle;
  Fixture good = synth_fixture(1, {"searchable_list"});
  const Task& search = task_named(good.manifest.tasks, "Search");
  TaskResult r = run_task(page(good), search, oracle);
  EXPECT_TRUE(r.passed) << r.reason << r.judge_rationale;
  EXPECT_EQ(r.rounds, 1);
  EXPECT_EQ(r.states.size(), 3u);

  Fixture bad = synth_fixture(1, {"searchable_list"}, true);
  r = run_task(page(bad), search, oracle);
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(r.reason.empty());
  EXPECT_FALSE(r.judge_rationale.empty());
}

TEST(RunTask, RoundCap) {
  OraclePolicy oracle;
  Fixture f = synth_fixture(1, {"modal_form"});
  const Task& chain = task_named(f.manifest.tasks, "Open - Fill - Save");
  ValidateOptions opts;
  opts.round_cap = 0;
  TaskResult r = run_task(page(f), chain, oracle, opts);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.reason, "round cap");
  EXPECT_EQ(r.rounds, 0);
  opts.round_cap = 1;
  r = run_task(page(f), chain, oracle, opts);
  EXPECT_EQ(r.reason, "round cap");
  EXPECT_EQ(r.rounds, 1);
  opts.round_cap = 2;
  r = run_task(page(f), chain, oracle, opts);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.rounds, 2);
}

TEST(Validate, PassRates) {
  auto results = [](std::vector<bool> passed) {
    std::vector<TaskResult> out(passed.size());
    for (size_t i = 0; i < passed.size(); ++i) out[i].passed = passed[i];
    return out;
  };
  EXPECT_DOUBLE_EQ(pass_rate(results({true, true, false, true})), 75.0);
  EXPECT_DOUBLE_EQ(pass_rate(results({true, true})), 100.0);
  EXPECT_DOUBLE_EQ(pass_rate({}), 0.0);

  // monotone in the pass set
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<bool> v(1 + rng() % 12);
    for (size_t k = 0; k < v.size(); ++k) v[k] = rng() % 2;
    double before = pass_rate(results(v));
    EXPECT_GE(before, 0.0);
    EXPECT_LE(before, 100.0);
    v[rng() % v.size()] = true;
    EXPECT_GE(pass_rate(results(v)), before);
  }
}

TEST(Validate, ThreeOfFour) {
  OraclePolicy oracle;
  Fixture f = synth_fixture(2, {"tabs", "counter"}, true);
  auto tasks = derive_tasks(f.manifest);
  ASSERT_EQ(tasks.size(), 4u);
  auto report = validate(page(f), tasks, oracle);
  EXPECT_DOUBLE_EQ(report.pass_rate, 75.0);
  EXPECT_THROW(validate(page(f), {}, oracle), Error);
}

TEST(Validate, DiscriminatesEveryTemplate) {
  OraclePolicy oracle;
  for (const auto& w : stock_widgets()) {
    Fixture good = synth_fixture(1, {w});
    Fixture bad = synth_fixture(1, {w}, true);
    auto tasks = derive_tasks(good.manifest);
    auto ok = validate(page(good), tasks, oracle);
    EXPECT_DOUBLE_EQ(ok.pass_rate, 100.0) << w;
    for (const auto& r : ok.tasks) EXPECT_TRUE(r.passed) << w << " " << r.task.name << " " << r.reason << r.judge_rationale;
    EXPECT_LT(validate(page(bad), tasks, oracle).pass_rate, 100.0) << w;
  }
}

TEST(Validate, JudgeSeesOnlyItsBranch) {
  RecordingOracle oracle;
  Fixture f = synth_fixture(1, {"modal_form"});
  auto report = validate(page(f), f.manifest.tasks, oracle);
  EXPECT_EQ(report.pass_rate, 100.0);
  for (const auto& r : report.tasks) {
    std::vector<std::string> keys;
    for (const auto& s : r.states) keys.push_back(s.state_key);
    EXPECT_EQ(oracle.judged[r.task.name], keys) << r.task.name;
    size_t actions = 0;
    for (const auto& b : r.trace) actions += b.sequence.actions.size();
    EXPECT_EQ(keys.size(), actions + 1);
  }
}

TEST(Validate, FailClosed) {
  Fixture f = synth_fixture(1, {"counter"});
  const Task& inc = task_named(f.manifest.tasks, "Increment");
  // unparseable stage 1, retried once
  ReplayPolicy garbage({"I am not sure.", "Still not sure."});
  TaskResult r = run_task(page(f), inc, garbage);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.reason.rfind("ProtocolFailure: stage 1", 0), 0u) << r.reason;
  EXPECT_EQ(garbage.remaining(), 0u);

  // judge never answers Yes/No
  ReplayPolicy mute({"\\boxed{click[0]}\\task{Increment}\\state{Complete}", "maybe", "perhaps"});
  r = run_task(page(f), inc, mute);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.reason.rfind("ProtocolFailure: stage 3", 0), 0u) << r.reason;

  // backend gone
  ReplayPolicy empty(std::vector<std::string>{});
  r = run_task(page(f), inc, empty);
  EXPECT_FALSE(r.passed);
  EXPECT_NE(r.reason.find("BackendFailure"), std::string::npos) << r.reason;

  // stage-1 sequence that does not execute
  ReplayPolicy broken({"\\boxed{click[9]}\\task{Increment}\\state{Complete}"});
  r = run_task(page(f), inc, broken);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.reason.rfind("execution failed", 0), 0u) << r.reason;
}

TEST(Validate, SeparateJudge) {
  OraclePolicy actor;
  ReplayPolicy judge({"\\boxed{No} the count did not move", "\\boxed{No} nothing reset"});
  Fixture f = synth_fixture(1, {"counter"});
  ValidateOptions opts;
  opts.judge = &judge;
  opts.parallelism = 1;
  auto report = validate(page(f), f.manifest.tasks, actor, opts);
  EXPECT_EQ(report.pass_rate, 0.0);
  EXPECT_EQ(report.tasks[0].judge_rationale, "the count did not move");
}

TEST(Validate, ReportJson) {
  OraclePolicy oracle;
  Fixture f = synth_fixture(1, {"toggle_panel"});
  auto j = report_to_json(validate(page(f), f.manifest.tasks, oracle));
  EXPECT_EQ(j["page_ref"], "toggle_panel");
  EXPECT_EQ(j["pass_rate"], 100.0);
  ASSERT_EQ(j["tasks"].size(), 2u);
  EXPECT_EQ(j["tasks"][1]["name"], "Details - Close");
  EXPECT_EQ(j["tasks"][1]["rounds"], 2);
  EXPECT_EQ(j["tasks"][1]["trace"][0]["sequence"], "\\task{Details - Close}\\boxed{click[0]}\\state{Continue}");
}
