#pragma once

// Decision backends. Every backend answers in the same marker text a hosted
// model would produce; the shared front end renders the prompt, records it
// and the raw reply in the audit directory when one is set, and parses the
// reply with the action grammar.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "uiprobe/action_dsl.hpp"
#include "uiprobe/env.hpp"
#include "uiprobe/prompts.hpp"
#include "uiprobe/task.hpp"

namespace uiprobe {

enum class RequestKind { Propose, Verify, ValidateSelect, ValidateProcess, ValidateJudge };

std::string_view to_string(RequestKind kind);

// One executed sequence as shown to a model: the sequence plus a description
// of each action's target element.
struct HistoryEntry {
  ActionSequence sequence;
  std::vector<StepDescriptor> steps;
  std::vector<std::string> descriptions;  // describe_element() per action

  bool operator==(const HistoryEntry&) const = default;
};

// Resolves each action of `seq` against the state it ran in: `states[i]` is
// the state before action i. Unknown ids describe as "#<id>".
HistoryEntry make_history_entry(const ActionSequence& seq, const std::vector<const UIState*>& states);

// "None" when empty, else one line per action:
//   click[3] button "Edit" (button|edit|//ul[@id='todo'])
std::string format_history(const std::vector<HistoryEntry>& history);

// "click button "Edit"; enter input "Name" = Ada" for the verification slot.
std::string format_element_names(const HistoryEntry& entry);

struct PolicyRequest {
  RequestKind kind = RequestKind::Propose;
  std::vector<UIState> states;  // chronological; Propose/Select/Process use the last
  std::vector<HistoryEntry> history;
  std::optional<Task> task;     // Process / Judge
  std::vector<Task> tasks;      // Select
  std::vector<std::string> element_names;  // Verify; filled from history.back() when empty
};

struct Proposal {
  std::vector<ActionSequence> sequences;
  bool completed = false;
  std::vector<ParseIssue> issues;
};

// Builds the template context for a request. Throws Error(InvalidArgument)
// when the request lacks what its kind needs.
TemplateId template_for(RequestKind kind);
PromptContext prompt_context(const PolicyRequest& request);

// Writes prompts/<nnnn>-<kind>.prompt.txt and .response.txt under a run
// directory. Safe to share across threads.
class PromptAudit {
 public:
  explicit PromptAudit(std::filesystem::path dir);
  void record(RequestKind kind, const std::string& prompt, const std::string& response);
  int count() const { return counter_.load(); }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::atomic<int> counter_{0};
};

class Policy {
 public:
  virtual ~Policy() = default;

  // Throws Error(BackendFailure) or Error(EmptyProposal) when the reply holds
  // neither a usable sequence nor the completion sentinel.
  Proposal propose(const PolicyRequest& request);
  // Throws Error(BackendFailure), Error(MissingVerdict), Error(MissingTerminate).
  VerificationVerdict verify(const PolicyRequest& request);
  // Stage 1 and 2 of task validation: sequences carry \task and \state markers.
  // An unparseable reply yields no sequences plus issues; never throws on parse.
  Proposal select(const PolicyRequest& request);
  Proposal process(const PolicyRequest& request);
  // Throws Error(MissingVerdict).
  JudgeVerdict judge(const PolicyRequest& request);

  void set_audit(std::shared_ptr<PromptAudit> audit) { audit_ = std::move(audit); }
  virtual std::string name() const = 0;

 protected:
  // Raw reply text for a rendered prompt. Throws Error(BackendFailure).
  virtual std::string respond(const PolicyRequest& request, const std::string& prompt) = 0;

 private:
  std::string exchange(const PolicyRequest& request);
  std::shared_ptr<PromptAudit> audit_;
};

// Deterministic stand-in that reads the annotated DOM instead of pixels.
class OraclePolicy : public Policy {
 public:
  std::string name() const override { return "oracle"; }

  // Exposed for tests: the structured decisions behind the text replies.
  static Proposal oracle_propose(const PolicyRequest& request);
  static VerificationVerdict oracle_verify(const PolicyRequest& request);
  static Proposal oracle_select(const PolicyRequest& request);
  static JudgeVerdict oracle_judge(const PolicyRequest& request);
  // Text typed into a field when no payload is given.
  static std::string sample_text(const DomNode& field);

 protected:
  std::string respond(const PolicyRequest& request, const std::string& prompt) override;
};

// Replays recorded replies in order. Single owner.
class ReplayPolicy : public Policy {
 public:
  explicit ReplayPolicy(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  // Reads the *.response.txt files of an audit directory in call order.
  static std::unique_ptr<ReplayPolicy> from_audit_dir(const std::filesystem::path& dir);
  std::string name() const override { return "replay"; }
  size_t remaining() const;

 protected:
  std::string respond(const PolicyRequest& request, const std::string& prompt) override;

 private:
  std::vector<std::string> responses_;
  size_t next_ = 0;
  mutable std::mutex mu_;
};

struct VlmConfig {
  std::string endpoint;  // http(s)://host:port/path of the chat completions route
  std::string model = "default";
  std::string api_key_env = "UIPROBE_API_KEY";
  double temperature = 0.0;
  int retries = 2;
  std::chrono::milliseconds backoff{200};  // doubled per retry
  std::chrono::milliseconds timeout{60000};
  int max_in_flight = 4;
};

struct ChatImage {
  std::string media_type;
  std::string bytes;
};

// Minimal chat-completions client: one user message carrying text plus
// base64 data-URL images; the reply is choices[0].message.content.
class VlmClient {
 public:
  explicit VlmClient(VlmConfig config);
  ~VlmClient();
  // Throws Error(BackendFailure) after the configured retries.
  std::string chat(const std::string& prompt, const std::vector<ChatImage>& images);
  const VlmConfig& config() const { return config_; }

 private:
  struct Gate;
  VlmConfig config_;
  std::unique_ptr<Gate> gate_;
};

nlohmann::json chat_request_body(const VlmConfig& config, const std::string& prompt,
                                 const std::vector<ChatImage>& images);

class VlmPolicy : public Policy {
 public:
  explicit VlmPolicy(VlmConfig config) : client_(std::move(config)) {}
  std::string name() const override { return "vlm"; }

 protected:
  std::string respond(const PolicyRequest& request, const std::string& prompt) override;

 private:
  VlmClient client_;
};

// Screenshots a request attaches, in order.
std::vector<ChatImage> request_images(const PolicyRequest& request);

// Local HTTP responder standing in for a hosted chat endpoint. Replies are
// looked up by sha256 of the prompt text; unmatched prompts go to the
// fallback, or get HTTP 404 when there is none.
class MockChatServer {
 public:
  using Fallback = std::function<std::optional<std::string>(const std::string& prompt, size_t image_count)>;

  MockChatServer();
  ~MockChatServer();

  void add_response(const std::string& prompt, std::string reply);
  void add_response_by_digest(const std::string& digest, std::string reply);
  void set_fallback(Fallback fallback);
  // Fail the next `n` requests with HTTP 503.
  void fail_next(int n);

  std::string endpoint() const;  // http://127.0.0.1:<port>/v1/chat/completions
  int request_count() const;
  std::vector<nlohmann::json> requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace uiprobe
