#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "uiprobe/hashing.hpp"
#include "uiprobe/policy.hpp"

namespace uiprobe {

using json = nlohmann::json;

struct MockChatServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  mutable std::mutex mu;
  std::map<std::string, std::string> replies;
  Fallback fallback;
  int failures = 0;
  std::vector<json> seen;
};

MockChatServer::MockChatServer() : impl_(std::make_unique<Impl>()) {
  Impl* impl = impl_.get();
  impl->server.Post("/v1/chat/completions", [impl](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    std::string prompt;
    size_t images = 0;
    if (body.is_object() && body.contains("messages") && !body["messages"].empty()) {
      const json& content = body["messages"].back().value("content", json());
      if (content.is_string()) {
        prompt = content.get<std::string>();
      } else if (content.is_array()) {
        for (const auto& part : content) {
          if (part.value("type", "") == "text") prompt += part.value("text", "");
          if (part.value("type", "") == "image_url") ++images;
        }
      }
    }
    std::optional<std::string> reply;
    Fallback fallback;
    {
      std::lock_guard<std::mutex> lock(impl->mu);
      impl->seen.push_back(body);
      if (impl->failures > 0) {
        --impl->failures;
        res.status = 503;
        res.set_content(R"({"error":"unavailable"})", "application/json");
        return;
      }
      auto it = impl->replies.find(sha256_hex(prompt));
      if (it != impl->replies.end()) reply = it->second;
      fallback = impl->fallback;
    }
    if (!reply && fallback) reply = fallback(prompt, images);
    if (!reply) {
      res.status = 404;
      res.set_content(R"({"error":"no canned reply"})", "application/json");
      return;
    }
    json out = {{"choices", json::array({{{"index", 0}, {"message", {{"role", "assistant"}, {"content", *reply}}}}})}};
    res.set_content(out.dump(), "application/json");
  });
  impl->port = impl->server.bind_to_any_port("127.0.0.1");
  if (impl->port <= 0) throw Error(ErrorCode::BackendFailure, "mock chat server could not bind");
  impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
  impl->server.wait_until_ready();
}

MockChatServer::~MockChatServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void MockChatServer::add_response(const std::string& prompt, std::string reply) {
  add_response_by_digest(sha256_hex(prompt), std::move(reply));
}

void MockChatServer::add_response_by_digest(const std::string& digest, std::string reply) {
  std::lock_guard<std::mutex> lock(impl_->mu);
  impl_->replies[digest] = std::move(reply);
}

void MockChatServer::set_fallback(Fallback fallback) {
  std::lock_guard<std::mutex> lock(impl_->mu);
  impl_->fallback = std::move(fallback);
}

void MockChatServer::fail_next(int n) {
  std::lock_guard<std::mutex> lock(impl_->mu);
  impl_->failures = n;
}

std::string MockChatServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1/chat/completions";
}

int MockChatServer::request_count() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return static_cast<int>(impl_->seen.size());
}

std::vector<json> MockChatServer::requests() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->seen;
}

}  // namespace uiprobe
