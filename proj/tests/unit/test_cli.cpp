#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "support/test_paths.hpp"
#include "uiprobe/cli.hpp"
#include "uiprobe/corpus.hpp"
#include "uiprobe/dataset.hpp"

using namespace uiprobe;
using uiprobe::testing::TempDir;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  CliRun r = cli({"explore"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(cli({"explore", "x.html", "--policy", "magic"}).code, 2);
  EXPECT_EQ(cli({"explore", "x.html", "--policy", "vlm"}).code, 2);       // no endpoint
  EXPECT_EQ(cli({"explore", "x.html", "--budget-mix", "1.5"}).code, 2);
  EXPECT_EQ(cli({"--backend", "browser", "explore", "x.html"}).code, 2);  // no devtools endpoint
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, DomainErrors) {
  TempDir dir;
  EXPECT_EQ(cli({"explore", (dir.path() / "missing.html").string(), "--out", (dir.path() / "run").string()}).code, 1);
  EXPECT_EQ(cli({"export", (dir.path() / "nothing").string()}).code, 1);
}

TEST(Cli, SynthExploreValidateExport) {
  TempDir dir;
  auto p = [&](const char* rel) { return (dir.path() / rel).string(); };
  CliRun r = cli({"synth", "--seed", "1", "--out", p("corpus")});
  ASSERT_EQ(r.code, 0) << r.err;
  int fixtures = 0;
  for (const auto& e : std::filesystem::directory_iterator(p("corpus"))) {
    if (std::filesystem::exists(e.path() / "manifest.json")) ++fixtures;
  }
  EXPECT_EQ(fixtures, 10);

  r = cli({"explore", p("corpus/counter"), "--policy", "oracle", "--out", p("runs/counter")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto graph = nlohmann::json::parse(slurp(p("runs/counter/graph.json")));
  int usable = 0;
  for (const auto& t : graph["transitions"]) usable += t["classification"] != "NonInteractive";
  EXPECT_EQ(usable, 2);

  r = cli({"validate", p("corpus/counter"), "--out", p("report.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("pass rate 100.00%"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(p("report.json")));

  r = cli({"validate", p("corpus/counter"), "--reference", p("runs/counter"), "--out", p("report2.json")});
  EXPECT_EQ(r.code, 0) << r.err;

  r = cli({"export", p("runs/counter"), "--code", p("corpus/counter/page.html")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_jsonl(p("runs/counter/datasets/action_gen.jsonl")).size(), 1u);
  EXPECT_EQ(read_jsonl(p("runs/counter/datasets/verification.jsonl")).size(), 2u);
  EXPECT_EQ(read_jsonl(p("runs/counter/datasets/ui2code.jsonl")).size(), 1u);
}

TEST(Cli, InertPageFailsValidation) {
  TempDir dir;
  Fixture good = synth_fixture(1, {"toggle_panel"});
  Fixture bad = synth_fixture(1, {"toggle_panel"}, true);
  std::filesystem::create_directories(dir.path() / "bad");
  std::ofstream(dir.path() / "bad" / "page.html") << bad.document;
  std::ofstream(dir.path() / "tasks.json") << nlohmann::json(good.manifest.tasks).dump();
  CliRun r = cli({"validate", (dir.path() / "bad").string(), "--tasks", (dir.path() / "tasks.json").string(), "--out",
               (dir.path() / "r.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL "), std::string::npos);
}

TEST(Cli, ReplayReproducesAnOracleRun) {
  TempDir dir;
  auto p = [&](const char* rel) { return (dir.path() / rel).string(); };
  ASSERT_EQ(cli({"synth", "--out", p("corpus")}).code, 0);
  // serial so the audit order is the call order
  ASSERT_EQ(cli({"explore", p("corpus/modal_form"), "--parallelism", "1", "--out", p("a")}).code, 0);
  CliRun r = cli({"explore", p("corpus/modal_form"), "--policy", "replay", "--replay-dir", p("a/prompts"), "--out", p("b")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(p("a/graph.json")), slurp(p("b/graph.json")));
  EXPECT_EQ(slurp(p("a/trace.json")), slurp(p("b/trace.json")));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  TempDir dir;
  auto p = [&](const char* rel) { return (dir.path() / rel).string(); };
  ASSERT_EQ(cli({"synth", "--out", p("corpus")}).code, 0);
  std::ofstream(p("run.ini")) << "backend = sim\n[explore]\nbudget-actions = 1\npolicy = oracle\n";
  CliRun r = cli({"--config", p("run.ini"), "explore", p("corpus/counter"), "--out", p("one")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("actions 1,"), std::string::npos) << r.out;
  r = cli({"--config", p("run.ini"), "explore", p("corpus/counter"), "--budget-actions", "5", "--out", p("two")});
  EXPECT_NE(r.out.find("actions 2,"), std::string::npos) << r.out;
}

TEST(Cli, EvalCommandsAndReproducibility) {
  TempDir dir;
  auto p = [&](const std::string& rel) { return (dir.path() / rel).string(); };
  ASSERT_EQ(cli({"synth", "--seed", "3", "--out", p("corpus")}).code, 0);
  for (const auto& w : stock_widgets()) {
    const std::string& id = w;
    ASSERT_EQ(cli({"explore", p("corpus/" + id), "--out", p("runs/" + id)}).code, 0) << id;
  }
  CliRun r = cli({"eval-pipeline", p("runs"), p("corpus"), "--out", p("pipe.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(slurp(p("pipe.json")));
  EXPECT_EQ(j["runs"].size(), 10u);
  for (const auto& [id, s] : j["runs"].items()) {
    double eq = 0.40 * s["completeness"].get<double>() + 0.35 * s["correctness"].get<double>() +
                0.25 * s["dedup_rate"].get<double>();
    EXPECT_NEAR(s["overall"].get<double>(), eq, 1e-9) << id;
  }

  r = cli({"eval-agent", p("corpus/benchmark"), "--out", p("agent.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(slurp(p("agent.json")));
  EXPECT_EQ(j["action"]["f1"], 100.0);
  EXPECT_EQ(j["verification"]["overall_acc"], 100.0);

  // same seed, same bytes
  ASSERT_EQ(cli({"synth", "--seed", "3", "--out", p("again")}).code, 0);
  EXPECT_EQ(slurp(p("corpus/todo/page.html")), slurp(p("again/todo/page.html")));
  EXPECT_EQ(slurp(p("corpus/benchmark/agent.jsonl")), slurp(p("again/benchmark/agent.jsonl")));
  ASSERT_EQ(cli({"explore", p("again/todo"), "--out", p("runs2/todo")}).code, 0);
  EXPECT_EQ(slurp(p("runs/todo/graph.json")), slurp(p("runs2/todo/graph.json")));
}
