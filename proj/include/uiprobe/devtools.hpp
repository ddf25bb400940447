#pragma once

// Minimal client for the browser DevTools protocol: JSON commands over a
// WebSocket, used by the browser backend.

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "uiprobe/action_dsl.hpp"
#include "uiprobe/html.hpp"

namespace uiprobe::devtools {

struct WsUrl {
  std::string host;
  std::string port;
  std::string target;  // path + query
};

// Accepts ws://host[:port]/path. Throws Error(InvalidArgument).
WsUrl parse_ws_url(std::string_view url);

// Turns an endpoint setting into a page WebSocket URL. ws:// URLs pass
// through; http://host:port asks the browser's /json/list (or /json/new)
// for a page target. Throws Error(LoadFailure).
std::string resolve_page_url(const std::string& endpoint, std::chrono::milliseconds timeout);

class Client {
 public:
  Client();
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  // Throws Error(LoadFailure).
  void connect(const std::string& ws_url, std::chrono::milliseconds timeout);
  // Sends one command and waits for its reply, skipping events. Returns the
  // "result" member. Throws Error(ExecutionFailure) on protocol errors and
  // timeouts.
  nlohmann::json call(const std::string& method, const nlohmann::json& params, std::chrono::milliseconds timeout);
  // Runtime.evaluate with returnByValue; returns result.value.
  nlohmann::json evaluate(const std::string& expression, std::chrono::milliseconds timeout);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Page-side script returning the DOM as nested {t,n,a,h,c} objects (see
// document_from_tree).
extern const std::string_view kExtractScript;
inline constexpr std::string_view kExtractMarker = "/*uiprobe:extract*/";
inline constexpr std::string_view kDispatchMarker = "/*uiprobe:dispatch*/";
inline constexpr std::string_view kArgsBegin = "/*args*/";
inline constexpr std::string_view kArgsEnd = "/*end*/";

// Page-side script performing `action` on the element at `xpath`. Returns
// "ok" or a short failure reason.
std::string dispatch_script(const std::string& xpath, const Action& action);

// Tree node: {"t":"e","n":tag,"a":[[k,v],...],"h":hidden,"c":[...]} or
// {"t":"t","v":text}. Hidden elements get a hidden attribute.
html::Document document_from_tree(const nlohmann::json& tree);

}  // namespace uiprobe::devtools
