#include <cstdlib>
#include <semaphore>
#include <thread>

#include <httplib.h>

#include "uiprobe/hashing.hpp"
#include "uiprobe/policy.hpp"

namespace uiprobe {

using json = nlohmann::json;

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  size_t scheme = url.find("://");
  if (scheme == std::string::npos || (url.compare(0, scheme, "http") != 0 && url.compare(0, scheme, "https") != 0)) {
    throw Error(ErrorCode::InvalidArgument, "chat endpoint must be an http(s) URL: '" + url + "'");
  }
  size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string reply_text(const json& body) {
  const json& content = body.at("choices").at(0).at("message").at("content");
  if (content.is_string()) return content.get<std::string>();
  std::string out;
  for (const auto& part : content) {
    if (part.value("type", "") == "text") out += part.value("text", "");
  }
  return out;
}

}  // namespace

struct VlmClient::Gate {
  explicit Gate(int n) : slots(n) {}
  std::counting_semaphore<1024> slots;
};

VlmClient::VlmClient(VlmConfig config) : config_(std::move(config)) {
  if (config_.max_in_flight < 1 || config_.max_in_flight > 1024) {
    throw Error(ErrorCode::InvalidArgument, "max_in_flight must be in [1, 1024]");
  }
  if (config_.retries < 0) throw Error(ErrorCode::InvalidArgument, "retries must be >= 0");
  split_url(config_.endpoint);
  gate_ = std::make_unique<Gate>(config_.max_in_flight);
}

VlmClient::~VlmClient() = default;

json chat_request_body(const VlmConfig& config, const std::string& prompt, const std::vector<ChatImage>& images) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", prompt}});
  for (const auto& img : images) {
    content.push_back(
        {{"type", "image_url"},
         {"image_url", {{"url", "data:" + img.media_type + ";base64," + base64_encode(img.bytes)}}}});
  }
  return {{"model", config.model},
          {"temperature", config.temperature},
          {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
}

std::string VlmClient::chat(const std::string& prompt, const std::vector<ChatImage>& images) {
  Url url = split_url(config_.endpoint);
  std::string body = chat_request_body(config_, prompt, images).dump();
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  gate_->slots.acquire();
  struct Release {
    Gate* g;
    ~Release() { g->slots.release(); }
  } release{gate_.get()};

  std::string last_error;
  auto delay = config_.backoff;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client client(url.origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout).count() % 1000000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      // client errors other than throttling will not improve on retry
      if (res->status >= 400 && res->status < 500 && res->status != 429 && res->status != 408) break;
      continue;
    }
    try {
      return reply_text(json::parse(res->body));
    } catch (const std::exception& e) {
      last_error = std::string("bad reply body: ") + e.what();
    }
  }
  throw Error(ErrorCode::BackendFailure, "chat request to " + config_.endpoint + " failed: " + last_error);
}

std::vector<ChatImage> request_images(const PolicyRequest& request) {
  std::vector<ChatImage> out;
  auto add = [&](const UIState& s) { out.push_back({s.screenshot.media_type, s.image}); };
  switch (request.kind) {
    case RequestKind::Verify:
    case RequestKind::ValidateJudge:
      for (const auto& s : request.states) add(s);
      break;
    default:
      if (!request.states.empty()) add(request.states.back());
  }
  return out;
}

std::string VlmPolicy::respond(const PolicyRequest& request, const std::string& prompt) {
  return client_.chat(prompt, request_images(request));
}

}  // namespace uiprobe
