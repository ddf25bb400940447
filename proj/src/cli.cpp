#include "uiprobe/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "uiprobe/benchmark.hpp"
#include "uiprobe/corpus.hpp"
#include "uiprobe/dataset.hpp"
#include "uiprobe/validator.hpp"

namespace uiprobe {

using json = nlohmann::json;
namespace fs = std::filesystem;

void RunConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (backend_from_string(backend) == BackendKind::Browser && devtools.empty()) bad("--backend browser needs --devtools");
  if (policy != "oracle" && policy != "vlm" && policy != "replay") bad("unknown policy '" + policy + "'");
  if (policy == "vlm" && endpoint.empty()) bad("--policy vlm needs --endpoint");
  if (policy == "replay" && replay_dir.empty()) bad("--policy replay needs --replay-dir");
  budget.validate();
  if (round_cap < 0) bad("--round-cap must be >= 0");
  if (parallelism < 1) bad("--parallelism must be >= 1");
  for (double w : {weights.completeness, weights.correctness, weights.dedup}) {
    if (w < 0) bad("weights must be >= 0");
  }
}

std::unique_ptr<Policy> make_policy(const RunConfig& c) {
  if (c.policy == "oracle") return std::make_unique<OraclePolicy>();
  if (c.policy == "replay") {
    if (c.replay_dir.empty()) throw Error(ErrorCode::InvalidArgument, "--policy replay needs --replay-dir");
    return ReplayPolicy::from_audit_dir(c.replay_dir);
  }
  if (c.policy == "vlm") {
    if (c.endpoint.empty()) throw Error(ErrorCode::InvalidArgument, "--policy vlm needs --endpoint");
    VlmConfig v;
    v.endpoint = c.endpoint;
    v.model = c.model;
    v.api_key_env = c.api_key_env;
    v.max_in_flight = c.parallelism;
    return std::make_unique<VlmPolicy>(v);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown policy '" + c.policy + "'");
}

namespace {

// Replies are consumed in call order, so replay runs serially.
int effective_parallelism(const RunConfig& c) { return c.policy == "replay" ? 1 : c.parallelism; }

EnvOptions env_for(const RunConfig& c, EnvOptions base = {}) {
  base.devtools_endpoint = c.devtools;
  return base;
}

// A fixture directory stands for its page.html.
fs::path page_file(const fs::path& p) { return fs::is_directory(p) ? p / "page.html" : p; }

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::SerializationFailure, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Cli {
  explicit Cli(std::ostream& o) : out(o) {}

  std::ostream& out;
  RunConfig cfg;
  // positional arguments
  std::string target, second;
  std::string tasks_file, reference_dir, code_file;
  uint64_t seed = 1;
  bool inert = false;

  void add_policy(CLI::App* sub) {
    sub->add_option("--policy", cfg.policy, "oracle, vlm or replay")->check(CLI::IsMember({"oracle", "vlm", "replay"}));
    sub->add_option("--endpoint", cfg.endpoint, "chat completions URL for --policy vlm");
    sub->add_option("--model", cfg.model);
    sub->add_option("--api-key-env", cfg.api_key_env, "environment variable holding the API key");
    sub->add_option("--replay-dir", cfg.replay_dir, "prompt audit directory for --policy replay");
    sub->add_option("--parallelism", cfg.parallelism);
  }

  int synth() {
    auto dirs = write_corpus(cfg.out, seed, inert);
    Benchmark bench;
    for (const auto& d : dirs) {
      FixtureManifest m = load_manifest(d / "manifest.json");
      Benchmark b = benchmark_from_manifest(m, read_text(d / "page.html"), "../" + d.filename().string() + "/page.html");
      bench.agent.insert(bench.agent.end(), b.agent.begin(), b.agent.end());
      bench.verification.insert(bench.verification.end(), b.verification.begin(), b.verification.end());
    }
    save_benchmark(bench, fs::path(cfg.out) / "benchmark");
    out << "wrote " << dirs.size() << " fixtures and " << bench.agent.size() + bench.verification.size()
        << " benchmark samples to " << cfg.out << "\n";
    return 0;
  }

  int explore_cmd() {
    auto policy = make_policy(cfg);
    fs::path dir = cfg.out.empty() ? "run" : cfg.out;
    run_dir::prepare(dir, *policy);
    ExploreOptions opts;
    opts.backend = backend_from_string(cfg.backend);
    opts.env = run_dir::env_options(dir, env_for(cfg));
    opts.parallelism = effective_parallelism(cfg);
    ExploreResult r = explore(PageSource::from_file(page_file(target)), *policy, cfg.budget, opts);
    run_dir::save(dir, r);
    int usable = 0;
    for (const auto& t : r.graph.transitions()) usable += t.classification != Classification::NonInteractive;
    out << "states " << r.graph.states().size() << ", transitions " << r.graph.transitions().size() << " (" << usable
        << " usable), actions " << r.trace.wall_steps << ", warnings " << r.trace.warnings.size() << "\n";
    for (const auto& w : r.trace.warnings) out << "warning: " << w << "\n";
    out << "run written to " << dir.string() << "\n";
    return 0;
  }

  int validate_cmd() {
    fs::path page = page_file(target);
    std::vector<Task> tasks;
    if (!tasks_file.empty()) {
      try {
        tasks = json::parse(read_text(tasks_file)).get<std::vector<Task>>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, tasks_file + ": " + e.what());
      }
    } else if (!reference_dir.empty()) {
      tasks = derive_tasks(run_dir::load(reference_dir).graph);
    } else if (fs::exists(page.parent_path() / "manifest.json")) {
      tasks = derive_tasks(load_manifest(page.parent_path() / "manifest.json"));
    } else {
      throw Error(ErrorCode::InvalidArgument, "no tasks: pass --tasks or --reference, or a fixture directory");
    }
    auto policy = make_policy(cfg);
    ValidateOptions opts;
    opts.round_cap = cfg.round_cap;
    opts.backend = backend_from_string(cfg.backend);
    opts.env = env_for(cfg);
    opts.parallelism = effective_parallelism(cfg);
    ValidationReport report = validate(PageSource::from_file(page), tasks, *policy, opts);
    for (const auto& r : report.tasks) {
      out << (r.passed ? "PASS " : "FAIL ") << r.task.name;
      if (!r.passed) out << " (" << (r.reason.empty() ? r.judge_rationale : r.reason) << ")";
      out << "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", report.pass_rate);
    out << "pass rate " << buf << "%\n";
    write_json(cfg.out.empty() ? "report.json" : cfg.out, report_to_json(report));
    return report.pass_rate == 100.0 ? 0 : 1;
  }

  int eval_agent_cmd() {
    auto policy = make_policy(cfg);
    EvalOptions opts;
    opts.backend = backend_from_string(cfg.backend);
    opts.env = env_for(cfg);
    opts.parallelism = effective_parallelism(cfg);
    AgentEval e = eval_agent(target, *policy, opts);
    out << format_action_table({{policy->name(), e.macro}}) << "\n"
        << format_verification_table({{policy->name(), e.verification}});
    if (e.failed_calls) out << e.failed_calls << " unusable replies scored as wrong\n";
    if (!cfg.out.empty()) {
      MetricsReport r;
      r.action = e.macro;
      r.verification = e.verification;
      json j = to_json_report(r);
      j["samples"] = e.samples.size();
      j["failed_calls"] = e.failed_calls;
      write_json(cfg.out, j);
    }
    return 0;
  }

  int eval_pipeline_cmd() {
    auto rows = eval_pipeline(target, second, cfg.weights);
    std::vector<std::pair<std::string, PipelineScores>> table;
    std::vector<ExplorationTrace> traces;
    for (const auto& r : rows) {
      table.push_back({r.fixture_id, r.scores});
      traces.emplace_back().wall_steps = r.wall_steps;
    }
    PipelineScores mean = mean_scores(rows, cfg.weights);
    table.push_back({"mean", mean});
    TraceStats len = trace_length(traces);
    out << format_pipeline_table(table);
    out << "trace length mean " << len.mean << ", min " << len.min << ", max " << len.max << "\n";
    if (!cfg.out.empty()) {
      MetricsReport r;
      r.pipeline = mean;
      r.traces = len;
      json j = to_json_report(r);
      for (const auto& row : rows) {
        j["runs"][row.fixture_id] = {{"completeness", row.scores.completeness},
                                     {"correctness", row.scores.correctness},
                                     {"dedup_rate", row.scores.dedup_rate},
                                     {"overall", row.scores.overall}};
      }
      write_json(cfg.out, j);
    }
    return 0;
  }

  int export_cmd() {
    fs::path dir = cfg.out.empty() ? fs::path(target) / "datasets" : fs::path(cfg.out);
    auto actions = export_action_dataset(target);
    auto verification = export_verification_dataset(target);
    write_jsonl(dir / "action_gen.jsonl", actions);
    write_jsonl(dir / "verification.jsonl", verification);
    out << actions.size() << " action records, " << verification.size() << " verification records";
    if (!code_file.empty()) {
      write_jsonl(dir / "ui2code.jsonl", {export_ui2code_pairs(run_dir::load(target).graph, read_text(code_file))});
      out << ", 1 ui2code record";
    }
    out << " in " << dir.string() << "\n";
    return 0;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Cli cli(out);
  RunConfig& cfg = cli.cfg;
  CLI::App app{"Explore, validate and score interactive web pages", "uiprobe"};
  app.set_config("--config", "", "key = value file; flags override it");
  app.require_subcommand(1);
  app.add_option("--backend", cfg.backend, "sim or browser")->check(CLI::IsMember({"sim", "simulator", "browser"}));
  app.add_option("--devtools", cfg.devtools, "browser DevTools endpoint");

  auto* synth = app.add_subcommand("synth", "write the fixture corpus and its benchmark");
  synth->add_option("--seed", cli.seed);
  synth->add_option("--out", cfg.out)->required();
  synth->add_flag("--inert", cli.inert, "also write a variant with one dead control per fixture");

  auto* explore = app.add_subcommand("explore", "explore a page into a run directory");
  explore->add_option("page", cli.target, "page file or fixture directory")->required();
  cli.add_policy(explore);
  explore->add_option("--budget-depth", cfg.budget.max_depth);
  explore->add_option("--budget-candidates", cfg.budget.max_candidates_per_state);
  explore->add_option("--budget-actions", cfg.budget.max_total_actions);
  explore->add_option("--budget-mix", cfg.budget.strategy_mix, "share of LIFO pops, 0..1");
  explore->add_option("--out", cfg.out, "run directory (default run)");

  auto* validate = app.add_subcommand("validate", "check a page against tasks");
  validate->add_option("page", cli.target, "page file or fixture directory")->required();
  validate->add_option("--tasks", cli.tasks_file, "JSON list of tasks");
  validate->add_option("--reference", cli.reference_dir, "run directory to derive tasks from");
  cli.add_policy(validate);
  validate->add_option("--round-cap", cfg.round_cap);
  validate->add_option("--out", cfg.out, "report file (default report.json)");

  auto* eval_agent = app.add_subcommand("eval-agent", "score a policy on a benchmark directory");
  eval_agent->add_option("benchmark", cli.target)->required();
  cli.add_policy(eval_agent);
  eval_agent->add_option("--out", cfg.out, "write the scores as JSON");

  auto* eval_pipe = app.add_subcommand("eval-pipeline", "score run directories against fixture manifests");
  eval_pipe->add_option("runs", cli.target)->required();
  eval_pipe->add_option("gold", cli.second)->required();
  eval_pipe->add_option("--w-comp", cfg.weights.completeness);
  eval_pipe->add_option("--w-correct", cfg.weights.correctness);
  eval_pipe->add_option("--w-dedup", cfg.weights.dedup);
  eval_pipe->add_option("--out", cfg.out, "write the scores as JSON");

  auto* exp = app.add_subcommand("export", "write training records from a run directory");
  exp->add_option("run", cli.target)->required();
  exp->add_option("--code", cli.code_file, "page source for a ui2code pair");
  exp->add_option("--out", cfg.out, "output directory (default <run>/datasets)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    cfg.validate();
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) return cli.synth();
    if (explore->parsed()) return cli.explore_cmd();
    if (validate->parsed()) return cli.validate_cmd();
    if (eval_agent->parsed()) return cli.eval_agent_cmd();
    if (eval_pipe->parsed()) return cli.eval_pipeline_cmd();
    if (exp->parsed()) return cli.export_cmd();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidArgument ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace uiprobe
