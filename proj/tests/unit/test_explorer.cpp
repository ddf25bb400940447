#include <gtest/gtest.h>

#include <map>
#include <random>

#include "support/test_paths.hpp"
#include "uiprobe/explorer.hpp"

using namespace uiprobe;
using uiprobe::testing::fixture_path;
using uiprobe::testing::TempDir;

namespace {

PageSource fixture(const std::string& name) { return PageSource::from_file(fixture_path(name)); }

ExploreBudget generous() { return {8, 20, 500, 0.5}; }

ActionSequence seq(std::vector<Action> actions) { return {std::move(actions), {}, {}}; }

std::set<std::string> covered_signatures(const ExplorationTrace& t) {
  std::set<std::string> out;
  for (const auto& e : t.executed) {
    for (const auto& s : e.steps) out.insert(s.signature);
  }
  return out;
}

// Every interactive control of every recorded state.
std::set<std::string> all_signatures(const InteractionGraph& g) {
  std::set<std::string> out;
  for (const auto& [key, s] : g.states()) {
    for (const DomNode* n : interactive_nodes(s.dom)) out.insert(n->signature);
  }
  return out;
}

}  // namespace

TEST(Classify, FollowsVerdict) {
  EXPECT_EQ(classify({false, StateMarker::Continue, ""}), Classification::NonInteractive);
  EXPECT_EQ(classify({false, StateMarker::Complete, ""}), Classification::NonInteractive);
  EXPECT_EQ(classify({true, StateMarker::Complete, ""}), Classification::UsableTerminal);
  EXPECT_EQ(classify({true, StateMarker::Continue, ""}), Classification::UsableExpand);
}

TEST(Budget, Validation) {
  EXPECT_NO_THROW(ExploreBudget{}.validate());
  EXPECT_THROW((ExploreBudget{0, 1, 1, 0.5}.validate()), Error);
  EXPECT_THROW((ExploreBudget{1, 0, 1, 0.5}.validate()), Error);
  EXPECT_THROW((ExploreBudget{1, 1, 0, 0.5}.validate()), Error);
  EXPECT_THROW((ExploreBudget{1, 1, 1, 1.5}.validate()), Error);
  EXPECT_THROW((ExploreBudget{1, 1, 1, -0.1}.validate()), Error);
  ExploreBudget d;
  EXPECT_EQ(d.max_depth, 5);
  EXPECT_EQ(d.max_candidates_per_state, 12);
  EXPECT_EQ(d.max_total_actions, 200);
  EXPECT_DOUBLE_EQ(d.strategy_mix, 0.5);
}

TEST(Budget, PopOrderShare) {
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(pop_order(0.0, i), FrontierOrder::FIFO);
    EXPECT_EQ(pop_order(1.0, i), FrontierOrder::LIFO);
  }
  EXPECT_EQ(pop_order(0.5, 0), FrontierOrder::FIFO);
  EXPECT_EQ(pop_order(0.5, 1), FrontierOrder::LIFO);
  for (double mix : {0.1, 0.25, 0.3, 0.5, 0.75, 0.9}) {
    for (int n : {1, 7, 10, 40, 101}) {
      int lifo = 0;
      for (int i = 0; i < n; ++i) lifo += pop_order(mix, i) == FrontierOrder::LIFO;
      // count of integers k in (0, n*mix]
      int expected = 0;
      for (int k = 1; k <= n; ++k) expected += k <= n * mix + 1e-12;
      EXPECT_EQ(lifo, expected) << mix << " " << n;
    }
  }
}

TEST(Dedup, Examples) {
  auto session = EnvSession::load(fixture("counter.html"), BackendKind::Simulator);
  const UIState& s = session.current();
  auto out = dedup_candidates({seq({Action::click(0)}), seq({Action::click(0)})}, {}, s);
  EXPECT_EQ(out, std::vector<ActionSequence>{seq({Action::click(0)})});
  out = dedup_candidates({seq({Action::click(1)}), seq({Action::click(0)})}, {}, s);
  EXPECT_EQ(out, (std::vector<ActionSequence>{seq({Action::click(1)}), seq({Action::click(0)})}));
  std::string done = descriptor_key(candidate_steps(seq({Action::click(1)}), s));
  out = dedup_candidates({seq({Action::click(1)}), seq({Action::click(0)})}, {done}, s);
  EXPECT_EQ(out, std::vector<ActionSequence>{seq({Action::click(0)})});
}

TEST(Dedup, SimilarItemsKeepOne) {
  auto session = EnvSession::load(
      PageSource::from_html("<ul id=t><li>a <button>Edit</button></li><li>b <button>Edit</button></li></ul>"),
      BackendKind::Simulator);
  const UIState& s = session.current();
  ASSERT_EQ(find_element(s.dom, 0)->signature, find_element(s.dom, 1)->signature);
  auto out = dedup_candidates({seq({Action::click(0)}), seq({Action::click(1)})}, {}, s);
  EXPECT_EQ(out, std::vector<ActionSequence>{seq({Action::click(0)})});
  // payloads of free text do not distinguish; select choices do
  EXPECT_EQ(descriptor_key(candidate_steps(seq({Action::enter(0, "a")}), s)),
            descriptor_key(candidate_steps(seq({Action::enter(0, "b")}), s)));
  EXPECT_NE(descriptor_key(candidate_steps(seq({Action::select(0, "a")}), s)),
            descriptor_key(candidate_steps(seq({Action::select(0, "b")}), s)));
}

TEST(Explore, CounterCoversBothButtons) {
  OraclePolicy oracle;
  auto r = explore(fixture("counter.html"), oracle, generous());
  ASSERT_EQ(r.trace.wall_steps, 2);
  ASSERT_EQ(r.trace.executed.size(), 2u);
  EXPECT_EQ(r.trace.executed[0].sequence, seq({Action::click(0)}));
  EXPECT_EQ(r.trace.executed[1].sequence, seq({Action::click(1)}));
  EXPECT_EQ(r.trace.executed[0].classification, Classification::UsableTerminal);
  // count starts at zero, so resetting shows nothing new
  EXPECT_EQ(r.trace.executed[1].classification, Classification::NonInteractive);
  EXPECT_EQ(r.graph.transitions().size(), 2u);
  EXPECT_TRUE(check_graph_invariants(r.graph).empty());
}

TEST(Explore, ModalOpenExpands) {
  OraclePolicy oracle;
  auto r = explore(fixture("modal.html"), oracle, generous());
  EXPECT_GE(r.graph.states().size(), 2u);
  const Transition& open = r.graph.transitions().front();
  EXPECT_EQ(open.from, r.graph.root());
  EXPECT_EQ(open.sequence, seq({Action::click(0)}));
  EXPECT_EQ(open.classification, Classification::UsableExpand);
  EXPECT_TRUE(r.graph.is_expanded(open.to()));
  bool from_dialog = false;
  for (const auto& t : r.graph.transitions()) from_dialog = from_dialog || t.from == open.to();
  EXPECT_TRUE(from_dialog);
  EXPECT_EQ(all_signatures(r.graph), covered_signatures(r.trace));
}

TEST(Explore, SingleActionBudget) {
  OraclePolicy oracle;
  auto r = explore(fixture("modal.html"), oracle, {5, 12, 1, 0.5});
  EXPECT_EQ(r.trace.wall_steps, 1);
  EXPECT_EQ(r.trace.executed.size(), 1u);
}

TEST(Explore, DepthLimitStopsExpansion) {
  OraclePolicy oracle;
  auto r = explore(fixture("modal.html"), oracle, {1, 12, 100, 0.5});
  for (const auto& e : r.trace.executed) EXPECT_EQ(e.state_key, r.graph.root());
}

TEST(Explore, CandidateCapPerState) {
  OraclePolicy oracle;
  auto r = explore(fixture("modal.html"), oracle, {5, 1, 100, 0.5});
  std::map<std::string, int> per;
  for (const auto& e : r.trace.executed) ++per[e.state_key];
  for (const auto& [k, n] : per) EXPECT_LE(n, 1) << k;
}

TEST(Explore, ParallelMatchesSerial) {
  for (const char* f : {"modal.html", "search.html", "form.html", "visibility.html"}) {
    OraclePolicy oracle;
    ExploreOptions serial;
    serial.parallelism = 1;
    ExploreOptions wide;
    wide.parallelism = 4;
    auto a = explore(fixture(f), oracle, generous(), serial);
    auto b = explore(fixture(f), oracle, generous(), wide);
    EXPECT_EQ(a.graph, b.graph) << f;
    EXPECT_EQ(a.trace, b.trace) << f;
  }
}

TEST(Explore, CandidateErrorsAreRecorded) {
  ReplayPolicy replay({"\\boxed{click[99]}, \\boxed{click[0]}", "\\boxed{Yes}\\terminate{Complete} count went up"});
  ExploreOptions opts;
  opts.parallelism = 1;
  auto r = explore(fixture("counter.html"), replay, generous(), opts);
  ASSERT_EQ(r.trace.executed.size(), 2u);
  EXPECT_EQ(r.trace.executed[0].classification, Classification::NonInteractive);
  EXPECT_NE(r.trace.executed[0].note.find("UnknownTarget"), std::string::npos);
  EXPECT_EQ(r.trace.executed[0].target_key, r.graph.root());
  EXPECT_EQ(r.trace.executed[1].classification, Classification::UsableTerminal);
  EXPECT_EQ(replay.remaining(), 0u);
  EXPECT_TRUE(check_graph_invariants(r.graph).empty());
}

TEST(Explore, PolicyFailureIsAWarning) {
  ReplayPolicy replay({"nothing useful here"});
  auto r = explore(fixture("counter.html"), replay, generous());
  EXPECT_EQ(r.trace.wall_steps, 0);
  ASSERT_EQ(r.trace.warnings.size(), 1u);
  EXPECT_NE(r.trace.warnings[0].find("EmptyProposal"), std::string::npos);
  EXPECT_EQ(r.graph.states().size(), 1u);
}

TEST(Explore, LoadFailurePropagates) {
  OraclePolicy oracle;
  try {
    explore(PageSource::from_file("/nonexistent/page.html"), oracle, generous());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LoadFailure);
  }
  EXPECT_THROW(explore(fixture("counter.html"), oracle, {0, 1, 1, 0.5}), Error);
}

TEST(Explore, PropertiesAcrossBudgets) {
  std::mt19937 rng(7);
  const std::vector<std::string> files{"counter.html", "modal.html", "search.html", "form.html", "visibility.html"};
  for (int round = 0; round < 25; ++round) {
    ExploreBudget b{1 + static_cast<int>(rng() % 4), 1 + static_cast<int>(rng() % 4), 1 + static_cast<int>(rng() % 8),
                    (rng() % 5) / 4.0};
    const std::string& f = files[rng() % files.size()];
    OraclePolicy oracle;
    auto r = explore(fixture(f), oracle, b);
    SCOPED_TRACE(f + " round " + std::to_string(round));
    EXPECT_EQ(r.trace.wall_steps, static_cast<int>(r.trace.executed.size()));
    EXPECT_LE(r.trace.wall_steps, b.max_total_actions);
    EXPECT_TRUE(check_graph_invariants(r.graph).empty());
    // each state expanded once: its entries form one contiguous block
    std::set<std::string> closed;
    std::string current;
    std::map<std::string, int> per;
    for (const auto& e : r.trace.executed) {
      if (e.state_key != current) {
        EXPECT_FALSE(closed.count(e.state_key));
        if (!current.empty()) closed.insert(current);
        current = e.state_key;
      }
      ++per[e.state_key];
      EXPECT_LT(r.graph.depth(e.state_key), b.max_depth);
    }
    for (const auto& [k, n] : per) EXPECT_LE(n, b.max_candidates_per_state);
    // replay soundness
    for (const auto& key : r.graph.state_order()) {
      EnvSession s = replay_path(fixture(f), r.graph.path_to(key), {});
      EXPECT_EQ(s.current().state_key, key);
    }
  }
}

TEST(Explore, CoverageOnFixtures) {
  for (const char* f : {"counter.html", "modal.html", "search.html", "form.html", "visibility.html"}) {
    OraclePolicy oracle;
    auto r = explore(fixture(f), oracle, generous());
    auto session = EnvSession::load(fixture(f), BackendKind::Simulator);
    std::set<std::string> covered = covered_signatures(r.trace);
    for (const DomNode* n : interactive_nodes(session.current().dom)) {
      EXPECT_TRUE(covered.count(n->signature)) << f << " " << n->signature;
    }
  }
}

TEST(RunDir, SaveLoadAndArtifacts) {
  TempDir dir;
  OraclePolicy oracle;
  auto audit = run_dir::prepare(dir.path(), oracle);
  ExploreOptions opts;
  opts.env = run_dir::env_options(dir.path());
  auto r = explore(fixture("modal.html"), oracle, generous(), opts);
  run_dir::save(dir.path(), r);
  auto back = run_dir::load(dir.path());
  EXPECT_EQ(back.graph, r.graph);
  EXPECT_EQ(back.trace, r.trace);
  for (const auto& [key, s] : r.graph.states()) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / s.screenshot.path)) << s.screenshot.path;
  }
  // one propose per expanded state, one verify per executed sequence
  int verifies = 0;
  for (const auto& e : r.trace.executed) verifies += e.note.empty();
  EXPECT_EQ(audit->count(), static_cast<int>(r.graph.expanded().size()) + verifies);
  EXPECT_THROW(run_dir::load(dir.path() / "missing"), Error);
}
