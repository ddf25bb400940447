#include <gtest/gtest.h>

#include "support/test_paths.hpp"
#include "uiprobe/corpus.hpp"
#include "uiprobe/dataset.hpp"
#include "uiprobe/explorer.hpp"

using namespace uiprobe;
using uiprobe::testing::TempDir;

namespace {

ExploreResult run_into(const std::filesystem::path& dir, const Fixture& f) {
  OraclePolicy oracle;
  run_dir::prepare(dir, oracle);
  ExploreOptions opts;
  opts.env = run_dir::env_options(dir);
  auto r = explore(PageSource::from_html(f.document, f.manifest.fixture_id), oracle, {}, opts);
  run_dir::save(dir, r);
  return r;
}

const nlohmann::json& field(const DatasetRecord& r, const char* k) { return r.payload.at(k); }

}  // namespace

TEST(ActionDataset, CounterRun) {
  TempDir dir;
  run_into(dir.path(), synth_fixture(1, {"counter"}));
  auto recs = export_action_dataset(dir.path());
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].kind, RecordKind::ActionGen);
  EXPECT_EQ(field(recs[0], "gold"), "\\boxed{click[0]}, \\boxed{click[1]}");
  EXPECT_EQ(field(recs[0], "history"), "None");
  EXPECT_NE(field(recs[0], "dom").get<std::string>().find("[id=0]"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / field(recs[0], "screenshot").get<std::string>()));
}

TEST(ActionDataset, DeeperStatesCarryHistory) {
  TempDir dir;
  auto r = run_into(dir.path(), synth_fixture(1, {"modal_form"}));
  auto recs = export_action_dataset(dir.path());
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(field(recs[0], "history"), "None");
  std::string h = field(recs[1], "history");
  EXPECT_EQ(h.rfind("click[0]", 0), 0u) << h;
  EXPECT_EQ(h.find('\n'), std::string::npos);
  // every gold string parses back to the executed usable sequences
  for (const auto& rec : recs) {
    auto parsed = parse_agent_response(field(rec, "gold").get<std::string>());
    EXPECT_TRUE(parsed.issues.empty());
    size_t usable = 0;
    for (const auto& e : r.trace.executed) {
      usable += e.state_key == field(rec, "state_key") && e.classification != Classification::NonInteractive;
    }
    EXPECT_EQ(parsed.sequences.size(), usable);
  }
}

TEST(ActionDataset, NothingUsableGivesSentinel) {
  TempDir dir;
  Fixture f = synth_fixture(1, {"counter"}, true);
  // propose only the inert Reset, and have it judged a no-op
  ReplayPolicy inert({"\\boxed{click[1]}", "\\boxed{No} \\terminate{Complete}"});
  ExploreOptions opts;
  opts.parallelism = 1;
  opts.env = run_dir::env_options(dir.path());
  run_dir::save(dir.path(), explore(PageSource::from_html(f.document), inert, {}, opts));
  auto recs = export_action_dataset(dir.path());
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(field(recs[0], "gold"), std::string(kCompletionSentinel));
  EXPECT_TRUE(parse_agent_response(field(recs[0], "gold").get<std::string>()).completed);
}

TEST(ActionDataset, IncompleteRuns) {
  TempDir dir;
  for (auto fn : {export_action_dataset, export_verification_dataset}) {
    try {
      fn(dir.path());
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::IncompleteRun);
    }
  }
}

TEST(VerificationDataset, RecordsMatchVerdicts) {
  TempDir dir;
  auto r = run_into(dir.path(), synth_fixture(1, {"modal_form"}));
  auto recs = export_verification_dataset(dir.path());
  ASSERT_EQ(recs.size(), r.trace.executed.size());
  for (size_t i = 0; i < recs.size(); ++i) {
    const auto& p = recs[i].payload;
    EXPECT_EQ(p["r"], r.graph.transitions()[i].verdict.pass ? 1 : 0);
    auto parsed = parse_agent_response(p["sequence"].get<std::string>());
    ASSERT_EQ(parsed.sequences.size(), 1u);
    EXPECT_EQ(parsed.sequences[0].actions, r.trace.executed[i].sequence.actions);
    EXPECT_EQ(p["after"].size(), parsed.sequences[0].actions.size());
  }
  // opening the modal: one screenshot before, one after, r=1
  EXPECT_EQ(recs[0].payload["sequence"], "\\boxed{click[0]}");
  EXPECT_EQ(recs[0].payload["r"], 1);
  EXPECT_EQ(recs[0].payload["terminate"], "Continue");
  EXPECT_EQ(recs[0].payload["after"].size(), 1u);
}

TEST(VerificationDataset, InertClickAndMultiStep) {
  TempDir dir;
  auto r = run_into(dir.path(), synth_fixture(1, {"searchable_list", "counter"}, true));
  auto recs = export_verification_dataset(dir.path());
  bool saw_inert = false, saw_two = false;
  for (const auto& rec : recs) {
    saw_inert |= rec.payload["r"] == 0;
    saw_two |= rec.payload["after"].size() == 2;
  }
  EXPECT_TRUE(saw_inert);
  EXPECT_TRUE(saw_two);
}

TEST(UI2Code, ThreeStateGraph) {
  Fixture f = synth_fixture(1, {"counter"});
  OraclePolicy oracle;
  auto r = explore(PageSource::from_html(f.document), oracle, {});
  ASSERT_EQ(r.graph.states().size(), 3u);
  auto rec = export_ui2code_pairs(r.graph, f.document);
  EXPECT_EQ(rec.kind, RecordKind::UI2Code);
  const auto& ops = rec.payload["operation_sequences"];
  ASSERT_EQ(ops.size(), 2u);
  EXPECT_EQ(ops[0]["start"], 1);
  EXPECT_EQ(ops[0]["steps"], nlohmann::json::array({2}));
  EXPECT_EQ(ops[1]["start"], 1);
  EXPECT_EQ(ops[1]["steps"], nlohmann::json::array({3}));
  EXPECT_EQ(ops[0]["operations"][0].get<std::string>().rfind("click ", 0), 0u);
  EXPECT_EQ(rec.payload["images"].size(), 3u);

  std::string target = rec.payload["target"];
  EXPECT_EQ(target.rfind("<think>", 0), 0u);
  auto a = target.find("</think><answer>");
  ASSERT_NE(a, std::string::npos);
  EXPECT_EQ(target.substr(a + 16), f.document + "</answer>");
  EXPECT_THROW(export_ui2code_pairs(InteractionGraph{}, "x"), Error);
}

TEST(UI2Code, LongSequencesMarkElidableSteps) {
  Fixture f = synth_fixture(1, {"login_form"});
  OraclePolicy oracle;
  auto r = explore(PageSource::from_html(f.document), oracle, {});
  auto rec = export_ui2code_pairs(r.graph, "<html></html>");
  const auto& first = rec.payload["operation_sequences"][0];
  ASSERT_EQ(first["steps"].size(), 3u);
  EXPECT_EQ(first["elidable"], nlohmann::json::array({true, true, false}));
  EXPECT_EQ(first["operations"][0].get<std::string>().rfind("input \"", 0), 0u);
}

TEST(Jsonl, RoundTrip) {
  TempDir dir;
  run_into(dir.path() / "run", synth_fixture(4, {"todo"}));
  auto recs = export_action_dataset(dir.path() / "run");
  auto ver = export_verification_dataset(dir.path() / "run");
  recs.insert(recs.end(), ver.begin(), ver.end());
  write_jsonl(dir.path() / "out" / "all.jsonl", recs);
  EXPECT_EQ(read_jsonl(dir.path() / "out" / "all.jsonl"), recs);
  EXPECT_THROW(read_jsonl(dir.path() / "nope.jsonl"), Error);
  EXPECT_EQ(record_kind_from_string("ui2code"), RecordKind::UI2Code);
  EXPECT_THROW(record_kind_from_string("x"), Error);
}
