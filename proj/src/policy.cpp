#include "uiprobe/policy.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "uiprobe/graph.hpp"

namespace uiprobe {

std::string_view to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::Propose: return "propose";
    case RequestKind::Verify: return "verify";
    case RequestKind::ValidateSelect: return "validate_select";
    case RequestKind::ValidateProcess: return "validate_process";
    case RequestKind::ValidateJudge: return "validate_judge";
  }
  return "?";
}

HistoryEntry make_history_entry(const ActionSequence& seq, const std::vector<const UIState*>& states) {
  HistoryEntry e;
  e.sequence = seq;
  for (size_t i = 0; i < seq.actions.size(); ++i) {
    const Action& a = seq.actions[i];
    const DomNode* node = i < states.size() && states[i] ? find_element(states[i]->dom, a.target) : nullptr;
    StepDescriptor step{a.kind, node ? node->signature : "#" + std::to_string(a.target), a.payload};
    e.steps.push_back(step);
    e.descriptions.push_back(node ? describe_element(*node) : "#" + std::to_string(a.target));
  }
  return e;
}

std::string format_history(const std::vector<HistoryEntry>& history) {
  std::string out;
  for (const auto& e : history) {
    for (size_t i = 0; i < e.sequence.actions.size(); ++i) {
      if (!out.empty()) out += "\n";
      out += serialize_action(e.sequence.actions[i]);
      if (i < e.descriptions.size()) out += " " + e.descriptions[i];
      if (i < e.steps.size()) out += " (" + e.steps[i].signature + ")";
    }
  }
  return out.empty() ? "None" : out;
}

std::string format_element_names(const HistoryEntry& entry) {
  std::string out;
  for (size_t i = 0; i < entry.sequence.actions.size(); ++i) {
    const Action& a = entry.sequence.actions[i];
    if (i) out += "; ";
    out += std::string(to_string(a.kind)) + " ";
    out += i < entry.descriptions.size() ? entry.descriptions[i] : "#" + std::to_string(a.target);
    if (a.payload) out += " = " + *a.payload;
  }
  return out;
}

TemplateId template_for(RequestKind kind) {
  switch (kind) {
    case RequestKind::Propose: return TemplateId::ActionGen;
    case RequestKind::Verify: return TemplateId::Verification;
    case RequestKind::ValidateSelect: return TemplateId::ValidateSelect;
    case RequestKind::ValidateProcess: return TemplateId::ValidateProcess;
    case RequestKind::ValidateJudge: return TemplateId::ValidateJudge;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown request kind");
}

PromptContext prompt_context(const PolicyRequest& r) {
  auto need_states = [&](size_t n) {
    if (r.states.size() < n) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string(to_string(r.kind)) + " needs at least " + std::to_string(n) + " state(s)");
    }
  };
  auto need_task = [&] {
    if (!r.task) throw Error(ErrorCode::InvalidArgument, std::string(to_string(r.kind)) + " needs a task");
  };
  PromptContext ctx;
  switch (r.kind) {
    case RequestKind::Propose:
      need_states(1);
      ctx["history_info_prompt"] = format_history(r.history);
      ctx["domtree"] = r.states.back().dom_text;
      break;
    case RequestKind::Verify: {
      need_states(2);
      std::string names;
      for (const auto& n : r.element_names) names += (names.empty() ? "" : "; ") + n;
      if (names.empty() && !r.history.empty()) names = format_element_names(r.history.back());
      ctx["interact_element_names"] = names;
      break;
    }
    case RequestKind::ValidateSelect: {
      need_states(1);
      std::vector<std::string> names;
      for (const auto& t : r.tasks) names.push_back(t.name);
      ctx["tasks"] = python_list_repr(names);
      ctx["domtree"] = r.states.back().dom_text;
      break;
    }
    case RequestKind::ValidateProcess:
      need_states(1);
      need_task();
      ctx["task_text"] = r.task->name;
      ctx["domtree"] = r.states.back().dom_text;
      break;
    case RequestKind::ValidateJudge:
      need_task();
      ctx["task_text"] = r.task->name;
      break;
  }
  return ctx;
}

PromptAudit::PromptAudit(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void PromptAudit::record(RequestKind kind, const std::string& prompt, const std::string& response) {
  int n = ++counter_;
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%06d", n);
  std::string stem = std::string(prefix) + "-" + std::string(to_string(kind));
  write_file_atomic(dir_ / (stem + ".prompt.txt"), prompt);
  write_file_atomic(dir_ / (stem + ".response.txt"), response);
}

std::string Policy::exchange(const PolicyRequest& request) {
  std::string prompt = render_prompt(template_for(request.kind), prompt_context(request));
  std::string response = respond(request, prompt);
  if (audit_) audit_->record(request.kind, prompt, response);
  return response;
}

Proposal Policy::propose(const PolicyRequest& request) {
  if (request.kind != RequestKind::Propose) throw Error(ErrorCode::InvalidArgument, "propose needs a Propose request");
  AgentResponse parsed = parse_agent_response(exchange(request));
  Proposal p{std::move(parsed.sequences), parsed.completed, std::move(parsed.issues)};
  if (p.sequences.empty() && !p.completed) {
    std::string why = p.issues.empty() ? "no sequences" : p.issues.front().message;
    throw Error(ErrorCode::EmptyProposal, "reply holds no usable sequence: " + why);
  }
  return p;
}

VerificationVerdict Policy::verify(const PolicyRequest& request) {
  if (request.kind != RequestKind::Verify) throw Error(ErrorCode::InvalidArgument, "verify needs a Verify request");
  return parse_verification_response(exchange(request));
}

Proposal Policy::select(const PolicyRequest& request) {
  if (request.kind != RequestKind::ValidateSelect) {
    throw Error(ErrorCode::InvalidArgument, "select needs a ValidateSelect request");
  }
  AgentResponse parsed = parse_agent_response(exchange(request));
  return {std::move(parsed.sequences), parsed.completed, std::move(parsed.issues)};
}

Proposal Policy::process(const PolicyRequest& request) {
  if (request.kind != RequestKind::ValidateProcess) {
    throw Error(ErrorCode::InvalidArgument, "process needs a ValidateProcess request");
  }
  AgentResponse parsed = parse_agent_response(exchange(request));
  return {std::move(parsed.sequences), parsed.completed, std::move(parsed.issues)};
}

JudgeVerdict Policy::judge(const PolicyRequest& request) {
  if (request.kind != RequestKind::ValidateJudge) {
    throw Error(ErrorCode::InvalidArgument, "judge needs a ValidateJudge request");
  }
  return parse_judge_response(exchange(request));
}

std::unique_ptr<ReplayPolicy> ReplayPolicy::from_audit_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
    std::string name = e.path().filename().string();
    if (name.size() > 13 && name.compare(name.size() - 13, 13, ".response.txt") == 0) files.push_back(e.path());
  }
  if (ec) throw Error(ErrorCode::BackendFailure, "cannot list " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<std::string> replies;
  for (const auto& f : files) replies.push_back(read_file(f));
  return std::make_unique<ReplayPolicy>(std::move(replies));
}

size_t ReplayPolicy::remaining() const {
  std::lock_guard<std::mutex> lock(mu_);
  return responses_.size() - next_;
}

std::string ReplayPolicy::respond(const PolicyRequest& request, const std::string&) {
  std::lock_guard<std::mutex> lock(mu_);
  if (next_ >= responses_.size()) {
    throw Error(ErrorCode::BackendFailure,
                "replay exhausted at call " + std::to_string(next_ + 1) + " (" + std::string(to_string(request.kind)) + ")");
  }
  return responses_[next_++];
}

}  // namespace uiprobe
