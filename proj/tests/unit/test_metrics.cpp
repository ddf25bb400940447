#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "uiprobe/metrics.hpp"

using namespace uiprobe;

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

TraceEntry entry(std::vector<StepDescriptor> steps, Classification c) {
  TraceEntry e;
  e.steps = std::move(steps);
  e.classification = c;
  return e;
}

StepDescriptor click(const std::string& sig) { return {ActionKind::Click, sig, std::nullopt}; }

struct Row {
  const char* model;
  double a, b, c, overall;
};

}  // namespace

TEST(SamplePRF, Examples) {
  auto exact = sample_prf({"a", "b"}, {"a", "b"});
  EXPECT_DOUBLE_EQ(exact.precision, 100.0);
  EXPECT_DOUBLE_EQ(exact.recall, 100.0);
  EXPECT_DOUBLE_EQ(exact.f1, 100.0);

  auto half = sample_prf({"a"}, {"a", "b"});
  EXPECT_DOUBLE_EQ(half.precision, 100.0);
  EXPECT_DOUBLE_EQ(half.recall, 50.0);
  EXPECT_NEAR(half.f1, 200.0 / 3.0, 1e-9);
  EXPECT_DOUBLE_EQ(round2(half.f1), 66.67);

  auto mixed = sample_prf({"a", "c"}, {"a", "b"});
  EXPECT_DOUBLE_EQ(mixed.precision, 50.0);
  EXPECT_DOUBLE_EQ(mixed.recall, 50.0);
  EXPECT_DOUBLE_EQ(mixed.f1, 50.0);
}

TEST(SamplePRF, Degenerate) {
  auto none = sample_prf({}, {"a"});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  auto wrong = sample_prf({"x"}, {"a"});
  EXPECT_EQ(wrong.f1, 0.0);
  try {
    sample_prf({"a"}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGold);
  }
}

TEST(SamplePRF, RandomSetsAgainstCounting) {
  std::mt19937 rng(11);
  for (int i = 0; i < 300; ++i) {
    std::set<std::string> pred, gold;
    for (int k = 0; k < 8; ++k) {
      if (rng() % 2) pred.insert(std::string(1, char('a' + k)));
      if (rng() % 2) gold.insert(std::string(1, char('a' + k)));
    }
    if (gold.empty()) gold.insert("a");
    std::vector<std::string> both;
    std::set_intersection(pred.begin(), pred.end(), gold.begin(), gold.end(), std::back_inserter(both));
    double p = pred.empty() ? 0 : 100.0 * both.size() / pred.size();
    double r = 100.0 * both.size() / gold.size();
    double f = p + r == 0 ? 0 : 2 * p * r / (p + r);
    auto got = sample_prf(pred, gold);
    EXPECT_NEAR(got.precision, p, 1e-9);
    EXPECT_NEAR(got.recall, r, 1e-9);
    EXPECT_NEAR(got.f1, f, 1e-9);
    EXPECT_LE(got.f1, std::max(got.precision, got.recall) + 1e-9);
    EXPECT_GE(got.f1, std::min(got.precision, got.recall) - 1e-9);
  }
}

TEST(MacroPRF, AverageOfF1IsNotF1OfAverages) {
  auto a = sample_prf({"a"}, {"a", "b"});       // 100, 50
  auto b = sample_prf({"a", "b"}, {"a"});       // 50, 100
  auto m = macro_prf({a, b});
  EXPECT_DOUBLE_EQ(m.precision, 75.0);
  EXPECT_DOUBLE_EQ(m.recall, 75.0);
  EXPECT_DOUBLE_EQ(round2(m.f1), 66.67);
  EXPECT_DOUBLE_EQ(harmonic_mean(m.precision, m.recall), 75.0);
  EXPECT_NE(round2(m.f1), round2(harmonic_mean(m.precision, m.recall)));
  EXPECT_THROW(macro_prf({}), Error);
}

// Published action-generation rows are sample means, so their F1 sits below
// the harmonic mean of the P and R columns.
TEST(MacroPRF, PublishedRowsAreMacroAveraged) {
  const Row rows[] = {
      {"Gemini-2.5-pro", 74.01, 95.94, 0, 81.70},  {"GPT-5", 81.66, 88.41, 0, 81.85},
      {"o4-mini", 79.01, 91.80, 0, 83.16},         {"GPT-4o", 4.77, 5.43, 0, 4.85},
      {"Claude-Sonnet-3.7", 75.29, 95.18, 0, 81.72}, {"Claude-Sonnet-4", 81.16, 89.67, 0, 83.38},
      {"trained-agent", 82.37, 92.61, 0, 85.30},
  };
  for (const auto& r : rows) EXPECT_LT(r.overall, harmonic_mean(r.a, r.b)) << r.model;
  EXPECT_DOUBLE_EQ(round2(harmonic_mean(74.01, 95.94)), 83.56);
}

TEST(Verification, Examples) {
  using enum StateMarker;
  std::vector<VerificationVerdict> gold{{true, Continue, ""}, {false, Complete, ""}, {true, Complete, ""}, {true, Complete, ""}};
  std::vector<VerificationVerdict> pred{{true, Complete, ""}, {false, Complete, ""}, {false, Complete, ""}, {true, Continue, ""}};
  auto s = verification_scores(pred, gold);
  EXPECT_DOUBLE_EQ(s.pass_acc, 75.0);
  EXPECT_DOUBLE_EQ(s.terminate_acc, 50.0);
  EXPECT_DOUBLE_EQ(s.overall_acc, 62.5);
  EXPECT_DOUBLE_EQ(verification_scores(gold, gold).overall_acc, 100.0);

  try {
    verification_scores(pred, {gold[0]});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
  EXPECT_THROW(verification_scores({}, {}), Error);
}

TEST(Verification, PublishedRows) {
  const Row rows[] = {
      {"Gemini-2.5-pro", 94.34, 81.13, 0, 87.74}, {"GPT-5", 96.23, 84.91, 0, 90.57},
      {"o4-mini", 94.34, 83.02, 0, 88.68},        {"GPT-4o", 33.96, 62.26, 0, 48.11},
      {"Claude-Sonnet-3.7", 94.34, 77.36, 0, 85.85}, {"Claude-Sonnet-4", 94.34, 77.36, 0, 85.85},
  };
  for (const auto& r : rows) EXPECT_NEAR(verification_overall(r.a, r.b), r.overall, 0.01) << r.model;
  // the agent row's printed overall is not the mean of its columns
  double agent = verification_overall(98.11, 86.79);
  EXPECT_DOUBLE_EQ(round2(agent), 92.45);
  EXPECT_GT(std::abs(agent - 91.51), 0.5);
}

TEST(Pipeline, PublishedRows) {
  const Row rows[] = {
      {"Gemini-2.5-pro", 92.61, 95.39, 5.60, 71.83},  {"GPT-5", 76.66, 90.19, 93.82, 85.69},
      {"o4-mini", 91.73, 94.07, 52.73, 82.80},        {"GPT-4o", 16.46, 62.63, 97.45, 52.87},
      {"Claude-Sonnet-3.7", 75.86, 94.06, 72.36, 81.35}, {"Claude-Sonnet-4", 86.26, 95.07, 80.36, 87.87},
      {"trained-agent", 93.12, 97.71, 72.73, 89.63},
  };
  for (const auto& r : rows) EXPECT_NEAR(pipeline_overall(r.a, r.b, r.c), r.overall, 0.01) << r.model;
  PipelineWeights w;
  EXPECT_DOUBLE_EQ(w.completeness + w.correctness + w.dedup, 1.0);
}

TEST(Pipeline, ScoresFromTrace) {
  PipelineGold gold;
  gold.elements = {"s1", "s2", "s3", "s4"};
  gold.labels[descriptor_key(std::vector<StepDescriptor>{click("s1")})] = Classification::UsableTerminal;
  gold.labels[descriptor_key(std::vector<StepDescriptor>{click("s2")})] = Classification::UsableExpand;

  ExplorationTrace t;
  t.executed = {entry({click("s1")}, Classification::UsableTerminal),
                entry({click("s2")}, Classification::UsableTerminal),   // wrong class
                entry({click("s1")}, Classification::UsableTerminal),   // duplicate
                entry({click("s9")}, Classification::NonInteractive)};  // not in the gold
  auto s = pipeline_scores(t, gold);
  EXPECT_DOUBLE_EQ(s.completeness, 50.0);
  EXPECT_DOUBLE_EQ(s.correctness, 50.0);
  EXPECT_DOUBLE_EQ(s.dedup_rate, 75.0);
  EXPECT_DOUBLE_EQ(s.overall, 0.4 * 50 + 0.35 * 50 + 0.25 * 75);
  EXPECT_EQ(duplicate_count(t), 1);

  auto empty = pipeline_scores({}, gold);
  EXPECT_EQ(empty.completeness, 0.0);
  EXPECT_EQ(empty.correctness, 0.0);
  EXPECT_EQ(empty.dedup_rate, 100.0);
  EXPECT_THROW(pipeline_scores(t, PipelineGold{}), Error);
}

TEST(Pipeline, DedupProperties) {
  std::mt19937 rng(5);
  for (int i = 0; i < 100; ++i) {
    ExplorationTrace t;
    int n = 1 + rng() % 10;
    for (int k = 0; k < n; ++k) t.executed.push_back(entry({click("s" + std::to_string(rng() % 5))}, Classification::UsableTerminal));
    PipelineGold gold;
    gold.elements = {"s0"};
    double before = pipeline_scores(t, gold).dedup_rate;
    EXPECT_GE(before, 0.0);
    EXPECT_LE(before, 100.0);

    // reordering leaves it unchanged
    ExplorationTrace shuffled = t;
    std::shuffle(shuffled.executed.begin(), shuffled.executed.end(), rng);
    EXPECT_DOUBLE_EQ(pipeline_scores(shuffled, gold).dedup_rate, before);

    // appending a repeat never raises it
    t.executed.push_back(t.executed[rng() % t.executed.size()]);
    EXPECT_LT(pipeline_scores(t, gold).dedup_rate, before + 1e-9);
  }
}

TEST(Pipeline, GoldFromManifest) {
  Fixture f = synth_fixture(3, {"counter"});
  auto g = gold_from_manifest(f.manifest);
  EXPECT_EQ(g.elements.size(), f.manifest.elements.size());
  EXPECT_EQ(g.labels.size(), f.manifest.transitions.size());
}

TEST(TraceLength, Stats) {
  ExplorationTrace a, b, c;
  a.wall_steps = 3;
  b.wall_steps = 9;
  c.wall_steps = 6;
  auto s = trace_length({a, b, c});
  EXPECT_DOUBLE_EQ(s.mean, 6.0);
  EXPECT_EQ(s.min, 3);
  EXPECT_EQ(s.max, 9);
  EXPECT_THROW(trace_length({}), Error);
}

TEST(Report, JsonAndTables) {
  MetricsReport r;
  r.action = PRF{50, 100, 200.0 / 3};
  auto j = to_json_report(r);
  EXPECT_EQ(j["action"]["recall"], 100.0);
  EXPECT_FALSE(j.contains("pipeline"));

  auto text = format_action_table({{"oracle", *r.action}, {"a-much-longer-name", PRF{}}});
  EXPECT_NE(text.find("66.67"), std::string::npos);
  // every line the same width
  std::vector<size_t> widths;
  size_t start = 0;
  for (size_t nl = text.find('\n'); nl != std::string::npos; start = nl + 1, nl = text.find('\n', start)) {
    widths.push_back(nl - start);
  }
  ASSERT_EQ(widths.size(), 4u);
  EXPECT_TRUE(std::all_of(widths.begin(), widths.end(), [&](size_t w) { return w == widths[0]; }));
}
