#include "uiprobe/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "uiprobe/explorer.hpp"

namespace uiprobe {

using json = nlohmann::json;

namespace {

using Steps = std::vector<StepDescriptor>;

Action resolve(const StepDescriptor& s, const UIState& state) {
  const DomNode* n = find_by_signature(state.dom, s.signature);
  if (!n || !n->element_id) throw Error(ErrorCode::UnknownTarget, "no element " + s.signature + " on the page");
  std::optional<std::string> payload = s.payload;
  // manifests leave typed text open
  if (s.kind == ActionKind::Enter && !payload) payload = OraclePolicy::sample_text(*n);
  return {s.kind, *n->element_id, payload};
}

ActionSequence resolve_all(const Steps& steps, const UIState& state) {
  ActionSequence seq;
  for (const auto& s : steps) seq.actions.push_back(resolve(s, state));
  return seq;
}

ActionSequence parse_one(const std::string& text) {
  AgentResponse r = parse_agent_response(text);
  if (r.sequences.size() != 1) throw Error(ErrorCode::SchemaMismatch, "expected one sequence in '" + text + "'");
  return r.sequences[0];
}

}  // namespace

Benchmark benchmark_from_manifest(const FixtureManifest& m, const std::string& document, const std::string& page) {
  std::vector<std::vector<Steps>> prefixes;
  for (const auto& t : m.transitions) {
    if (std::find(prefixes.begin(), prefixes.end(), t.prefix) == prefixes.end()) prefixes.push_back(t.prefix);
  }
  Benchmark b;
  for (const auto& prefix : prefixes) {
    EnvSession session = EnvSession::load(PageSource::from_html(document, m.fixture_id), BackendKind::Simulator);
    std::vector<std::string> path;
    for (const auto& steps : prefix) {
      // each step resolved in the state it runs in
      ActionSequence seq;
      for (const auto& s : steps) {
        seq.actions.push_back(resolve(s, session.current()));
        session.apply(seq.actions.back());
      }
      path.push_back(serialize_sequence(seq));
    }
    std::vector<ActionSequence> gold;
    for (const auto& t : m.transitions) {
      if (t.prefix != prefix) continue;
      ActionSequence seq = resolve_all(t.steps, session.current());
      gold.push_back(seq);
      b.verification.push_back({page, path, serialize_sequence(seq), t.category != Classification::NonInteractive,
                                t.category == Classification::UsableExpand ? StateMarker::Continue
                                                                            : StateMarker::Complete});
    }
    b.agent.push_back({page, path, serialize_sequences(gold)});
  }
  return b;
}

void save_benchmark(const Benchmark& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string agent, verification;
  for (const auto& s : b.agent) agent += json{{"page", s.page}, {"path", s.path}, {"gold", s.gold}}.dump() + "\n";
  for (const auto& s : b.verification) {
    verification += json{{"page", s.page},
                         {"path", s.path},
                         {"sequence", s.sequence},
                         {"pass", s.pass},
                         {"terminate", to_string(s.terminate)}}
                        .dump() +
                    "\n";
  }
  write_file_atomic(dir / "agent.jsonl", agent);
  write_file_atomic(dir / "verification.jsonl", verification);
}

namespace {

std::vector<json> read_lines(const std::filesystem::path& path) {
  std::vector<json> out;
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SerializationFailure, "cannot read " + path.string());
  std::string line;
  for (size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::SerializationFailure, path.string() + ":" + std::to_string(n) + ": bad json");
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

Benchmark load_benchmark(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::SerializationFailure, "no benchmark at " + dir.string());
  Benchmark b;
  try {
    for (const auto& j : read_lines(dir / "agent.jsonl")) {
      b.agent.push_back({j.at("page"), j.value("path", std::vector<std::string>{}), j.at("gold")});
    }
    for (const auto& j : read_lines(dir / "verification.jsonl")) {
      std::string term = j.at("terminate");
      if (term != "Continue" && term != "Complete") throw Error(ErrorCode::SchemaMismatch, "terminate must be Continue or Complete");
      b.verification.push_back({j.at("page"), j.value("path", std::vector<std::string>{}), j.at("sequence"),
                                j.at("pass"), term == "Continue" ? StateMarker::Continue : StateMarker::Complete});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, dir.string() + ": " + e.what());
  }
  return b;
}

namespace {

template <typename Fn>
void for_each_parallel(size_t n, int width, Fn fn) {
  size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, width)));
  std::atomic<size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  auto work = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first) std::rethrow_exception(first);
}

struct Prepared {
  EnvSession session;
  std::vector<HistoryEntry> history;
};

Prepared prepare(const std::filesystem::path& dir, const std::string& page, const std::vector<std::string>& path,
                 const EvalOptions& options) {
  std::vector<ActionSequence> seqs;
  for (const auto& p : path) seqs.push_back(parse_one(p));
  ExploreOptions eo;
  eo.backend = options.backend;
  eo.env = options.env;
  std::vector<HistoryEntry> history;
  EnvSession s = replay_path(PageSource::from_file(dir / page), seqs, eo, &history);
  return {std::move(s), std::move(history)};
}

}  // namespace

AgentEval eval_agent(const std::filesystem::path& dir, Policy& policy, const EvalOptions& options) {
  Benchmark b = load_benchmark(dir);
  if (b.agent.empty() && b.verification.empty()) throw Error(ErrorCode::EmptyGold, "benchmark " + dir.string() + " is empty");
  AgentEval out;
  std::atomic<int> failed{0};

  out.samples.resize(b.agent.size());
  for_each_parallel(b.agent.size(), options.parallelism, [&](size_t i) {
    const AgentSample& s = b.agent[i];
    Prepared p = prepare(dir, s.page, s.path, options);
    const UIState& state = p.session.current();
    std::set<std::string> gold = action_descriptors(parse_agent_response(s.gold).sequences, state);
    PolicyRequest req;
    req.kind = RequestKind::Propose;
    req.states = {state};
    req.history = p.history;
    std::set<std::string> pred;
    try {
      pred = action_descriptors(policy.propose(req).sequences, state);
    } catch (const Error&) {
      ++failed;
    }
    out.samples[i] = sample_prf(pred, gold);
  });
  if (!out.samples.empty()) out.macro = macro_prf(out.samples);

  std::vector<VerificationVerdict> predicted(b.verification.size()), gold(b.verification.size());
  for_each_parallel(b.verification.size(), options.parallelism, [&](size_t i) {
    const VerificationSample& s = b.verification[i];
    gold[i] = {s.pass, s.terminate, ""};
    Prepared p = prepare(dir, s.page, s.path, options);
    ActionSequence seq = parse_one(s.sequence);
    UIState before = p.session.current();
    SequenceResult r = p.session.run_sequence(seq);
    if (!r.ok()) throw Error(ErrorCode::ExecutionFailure, "sample " + std::to_string(i) + ": " + r.error->what());
    PolicyRequest req;
    req.kind = RequestKind::Verify;
    req.states.push_back(before);
    std::vector<const UIState*> ptrs{&before};
    for (const auto& st : r.states) req.states.push_back(st);
    for (size_t k = 0; k + 1 < r.states.size(); ++k) ptrs.push_back(&r.states[k]);
    HistoryEntry entry = make_history_entry(seq, ptrs);
    req.history = p.history;
    req.history.push_back(entry);
    req.element_names = {format_element_names(entry)};
    try {
      predicted[i] = policy.verify(req);
    } catch (const Error&) {
      // unusable reply: wrong on both counts
      ++failed;
      predicted[i] = {!s.pass, s.terminate == StateMarker::Continue ? StateMarker::Complete : StateMarker::Continue, ""};
    }
  });
  if (!gold.empty()) out.verification = verification_scores(predicted, gold);
  out.failed_calls = failed;
  return out;
}

std::vector<PipelineRow> eval_pipeline(const std::filesystem::path& runs, const std::filesystem::path& gold,
                                       const PipelineWeights& weights) {
  std::vector<std::filesystem::path> dirs;
  if (std::filesystem::is_directory(runs)) {
    for (const auto& e : std::filesystem::directory_iterator(runs)) {
      if (e.is_directory() && std::filesystem::exists(e.path() / run_dir::kTrace)) dirs.push_back(e.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<PipelineRow> rows;
  for (const auto& d : dirs) {
    std::filesystem::path manifest = gold / d.filename() / "manifest.json";
    if (!std::filesystem::exists(manifest)) continue;
    ExplorationTrace trace = run_dir::load_trace(d / run_dir::kTrace);
    rows.push_back({d.filename().string(), pipeline_scores(trace, gold_from_manifest(load_manifest(manifest)), weights),
                    trace.wall_steps});
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyGold, "no run under " + runs.string() + " has a manifest in " + gold.string());
  return rows;
}

PipelineScores mean_scores(const std::vector<PipelineRow>& rows, const PipelineWeights& weights) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "no rows");
  PipelineScores m;
  for (const auto& r : rows) {
    m.completeness += r.scores.completeness;
    m.correctness += r.scores.correctness;
    m.dedup_rate += r.scores.dedup_rate;
  }
  double n = static_cast<double>(rows.size());
  m.completeness /= n;
  m.correctness /= n;
  m.dedup_rate /= n;
  m.overall = pipeline_overall(m.completeness, m.correctness, m.dedup_rate, weights);
  return m;
}

}  // namespace uiprobe
