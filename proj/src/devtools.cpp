#include "uiprobe/devtools.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>

#include <thread>

#include "uiprobe/env.hpp"
#include "uiprobe/errors.hpp"
#include "uiprobe/hashing.hpp"

namespace uiprobe::devtools {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json = nlohmann::json;
using ms = std::chrono::milliseconds;

const std::string_view kExtractScript = R"JS(/*uiprobe:extract*/(() => {
  const skip = new Set(['script', 'style', 'head', 'meta', 'link', 'title', 'template', 'noscript']);
  const walk = (n) => {
    if (n.nodeType === Node.TEXT_NODE) return {t: 't', v: n.nodeValue};
    if (n.nodeType !== Node.ELEMENT_NODE) return null;
    const tag = n.tagName.toLowerCase();
    const a = [];
    for (const at of n.attributes) {
      if (at.name !== 'value' && at.name !== 'checked' && at.name !== 'selected') a.push([at.name, at.value]);
    }
    if (tag === 'input') {
      const type = (n.getAttribute('type') || 'text').toLowerCase();
      if (type === 'checkbox' || type === 'radio') {
        if (n.hasAttribute('value')) a.push(['value', n.getAttribute('value')]);
        if (n.checked) a.push(['checked', '']);
      } else {
        a.push(['value', n.value]);
      }
    } else if (n.hasAttribute('value')) {
      a.push(['value', n.getAttribute('value')]);
    }
    if (tag === 'option' && n.selected) a.push(['selected', '']);
    let h = false;
    if (!skip.has(tag) && tag !== 'html' && tag !== 'option' && tag !== 'optgroup') {
      const s = getComputedStyle(n);
      h = s.display === 'none' || s.visibility === 'hidden';
    }
    const c = [];
    if (tag === 'textarea') {
      c.push({t: 't', v: n.value});
    } else {
      for (const k of n.childNodes) {
        const r = walk(k);
        if (r) c.push(r);
      }
    }
    return {t: 'e', n: tag, a: a, h: h, c: c};
  };
  return walk(document.documentElement);
})())JS";

std::string dispatch_script(const std::string& xpath, const Action& action) {
  json args{{"xpath", xpath}, {"kind", std::string(to_string(action.kind))}, {"value", action.payload.value_or("")}};
  std::string out(kDispatchMarker);
  out += "(() => {\n  const args = ";
  out += kArgsBegin;
  out += args.dump();
  out += kArgsEnd;
  out += R"JS(;
  const el = document.evaluate(args.xpath, document, null, XPathResult.FIRST_ORDERED_NODE_TYPE, null).singleNodeValue;
  if (!el) return 'missing element';
  const fire = () => {
    el.dispatchEvent(new Event('input', {bubbles: true}));
    el.dispatchEvent(new Event('change', {bubbles: true}));
  };
  if (args.kind === 'click') {
    el.scrollIntoView({block: 'center'});
    el.click();
    return 'ok';
  }
  if (args.kind === 'enter') {
    if (!('value' in el) || el.tagName === 'SELECT' || el.tagName === 'BUTTON') return 'not a text field';
    el.focus();
    el.value = args.value;
    fire();
    return 'ok';
  }
  if (args.kind === 'select') {
    if (el.tagName !== 'SELECT') return 'not a select';
    const opt = Array.from(el.options).find(o => o.text.trim() === args.value || o.value === args.value);
    if (!opt) return 'no such option';
    el.value = opt.value;
    fire();
    return 'ok';
  }
  return 'unknown action';
})())JS";
  return out;
}

namespace {

std::unique_ptr<html::Node> node_from_tree(const json& j) {
  if (j.at("t") == "t") return html::make_text(j.at("v").get<std::string>());
  auto el = html::make_element(j.at("n").get<std::string>());
  for (const auto& kv : j.at("a")) el->set_attr(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
  if (j.value("h", false)) el->set_attr("hidden", "");
  for (const auto& c : j.at("c")) el->append(node_from_tree(c));
  return el;
}

}  // namespace

html::Document document_from_tree(const json& tree) {
  auto root = std::make_unique<html::Node>();
  root->type = html::NodeType::Document;
  auto top = node_from_tree(tree);
  if (!top->is_element("html")) {
    auto wrapper = html::make_element("html");
    auto body = html::make_element("body");
    body->append(std::move(top));
    wrapper->append(html::make_element("head"));
    wrapper->append(std::move(body));
    top = std::move(wrapper);
  }
  root->append(std::move(top));
  return html::Document(std::move(root));
}

WsUrl parse_ws_url(std::string_view url) {
  constexpr std::string_view scheme = "ws://";
  if (url.substr(0, scheme.size()) != scheme) {
    throw Error(ErrorCode::InvalidArgument, "not a ws:// URL: " + std::string(url));
  }
  std::string_view rest = url.substr(scheme.size());
  size_t slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  WsUrl out;
  out.target = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  size_t colon = authority.rfind(':');
  if (colon == std::string_view::npos) {
    out.host = std::string(authority);
    out.port = "80";
  } else {
    out.host = std::string(authority.substr(0, colon));
    out.port = std::string(authority.substr(colon + 1));
  }
  if (out.host.empty()) throw Error(ErrorCode::InvalidArgument, "missing host in " + std::string(url));
  return out;
}

std::string resolve_page_url(const std::string& endpoint, ms timeout) {
  if (endpoint.rfind("ws://", 0) == 0) return endpoint;
  if (endpoint.rfind("http://", 0) != 0) {
    throw Error(ErrorCode::LoadFailure, "unsupported DevTools endpoint '" + endpoint + "'");
  }
  httplib::Client http(endpoint);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  http.set_connection_timeout(secs.count(), usecs.count());
  http.set_read_timeout(secs.count(), usecs.count());
  auto pick = [](const httplib::Result& res) -> std::string {
    if (!res || res->status != 200) return {};
    json body = json::parse(res->body, nullptr, false);
    if (body.is_object()) body = json::array({body});
    if (!body.is_array()) return {};
    for (const auto& t : body) {
      if (t.is_object() && t.value("type", "") == "page" && t.contains("webSocketDebuggerUrl")) {
        return t.at("webSocketDebuggerUrl").get<std::string>();
      }
    }
    return {};
  };
  std::string url = pick(http.Get("/json/list"));
  if (url.empty()) url = pick(http.Put("/json/new?about:blank"));
  if (url.empty()) throw Error(ErrorCode::LoadFailure, "no page target at " + endpoint);
  return url;
}

struct Client::Impl {
  net::io_context ioc;
  websocket::stream<beast::tcp_stream> ws{ioc};
  int next_id = 1;
  bool open = false;

  // Runs the io_context until the started operation completes or the
  // deadline passes; on timeout the socket is cancelled.
  template <class Start>
  beast::error_code await(Start start, ms timeout) {
    bool done = false;
    beast::error_code result;
    start([&](beast::error_code ec) {
      result = ec;
      done = true;
    });
    ioc.restart();
    ioc.run_for(timeout);
    if (!done) {
      beast::get_lowest_layer(ws).socket().cancel();
      ioc.restart();
      ioc.run();
      return net::error::timed_out;
    }
    return result;
  }
};

Client::Client() : impl_(std::make_unique<Impl>()) {}

Client::~Client() {
  try {
    close();
  } catch (...) {
  }
}

void Client::connect(const std::string& ws_url, ms timeout) {
  WsUrl url;
  try {
    url = parse_ws_url(ws_url);
  } catch (const Error& e) {
    throw Error(ErrorCode::LoadFailure, e.what());
  }
  Impl& s = *impl_;
  tcp::resolver resolver(s.ioc);
  tcp::resolver::results_type endpoints;
  auto ec = s.await(
      [&](auto done) {
        resolver.async_resolve(url.host, url.port, [&, done](beast::error_code e, tcp::resolver::results_type r) {
          endpoints = r;
          done(e);
        });
      },
      timeout);
  if (ec) throw Error(ErrorCode::LoadFailure, "resolve " + url.host + ": " + ec.message());
  ec = s.await(
      [&](auto done) {
        beast::get_lowest_layer(s.ws).async_connect(
            endpoints, [done](beast::error_code e, const tcp::endpoint&) { done(e); });
      },
      timeout);
  if (ec) throw Error(ErrorCode::LoadFailure, "connect " + url.host + ":" + url.port + ": " + ec.message());
  s.ws.read_message_max(64 * 1024 * 1024);
  ec = s.await([&](auto done) { s.ws.async_handshake(url.host + ":" + url.port, url.target, done); }, timeout);
  if (ec) throw Error(ErrorCode::LoadFailure, "websocket handshake: " + ec.message());
  s.ws.text(true);
  s.open = true;
}

json Client::call(const std::string& method, const json& params, ms timeout) {
  Impl& s = *impl_;
  if (!s.open) throw Error(ErrorCode::ExecutionFailure, "DevTools connection is closed");
  int id = s.next_id++;
  std::string message = json{{"id", id}, {"method", method}, {"params", params}}.dump();
  auto deadline = std::chrono::steady_clock::now() + timeout;
  auto remaining = [&] {
    auto left = std::chrono::duration_cast<ms>(deadline - std::chrono::steady_clock::now());
    return std::max(left, ms(1));
  };
  auto ec = s.await(
      [&](auto done) {
        s.ws.async_write(net::buffer(message), [done](beast::error_code e, size_t) { done(e); });
      },
      remaining());
  if (ec) throw Error(ErrorCode::ExecutionFailure, method + ": send failed: " + ec.message());
  while (true) {
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Error(ErrorCode::ExecutionFailure, method + ": timed out");
    }
    beast::flat_buffer buffer;
    ec = s.await(
        [&](auto done) { s.ws.async_read(buffer, [done](beast::error_code e, size_t) { done(e); }); }, remaining());
    if (ec == net::error::timed_out) throw Error(ErrorCode::ExecutionFailure, method + ": timed out");
    if (ec) {
      s.open = false;
      throw Error(ErrorCode::ExecutionFailure, method + ": receive failed: " + ec.message());
    }
    json reply = json::parse(beast::buffers_to_string(buffer.data()), nullptr, false);
    if (!reply.is_object() || !reply.contains("id") || reply.at("id") != id) continue;  // event or stale reply
    if (reply.contains("error")) {
      throw Error(ErrorCode::ExecutionFailure, method + ": " + reply.at("error").value("message", "error"));
    }
    return reply.value("result", json::object());
  }
}

json Client::evaluate(const std::string& expression, ms timeout) {
  json result = call("Runtime.evaluate", {{"expression", expression}, {"returnByValue", true}}, timeout);
  if (result.contains("exceptionDetails")) {
    throw Error(ErrorCode::ExecutionFailure,
                "script error: " + result.at("exceptionDetails").value("text", std::string("exception")));
  }
  return result.contains("result") ? result.at("result").value("value", json()) : json();
}

void Client::close() {
  Impl& s = *impl_;
  if (!s.open) return;
  s.open = false;
  s.await([&](auto done) { s.ws.async_close(websocket::close_code::normal, done); }, ms(1000));
}

namespace {

class BrowserBackend : public Backend {
 public:
  explicit BrowserBackend(const EnvOptions& options) : options_(options) {}

  void load(const PageSource& source) override {
    if (options_.devtools_endpoint.empty()) throw Error(ErrorCode::LoadFailure, "no DevTools endpoint configured");
    std::string page_url = resolve_page_url(options_.devtools_endpoint, options_.action_timeout);
    client_.connect(page_url, options_.action_timeout);
    try {
      client_.call("Page.enable", json::object(), options_.action_timeout);
      std::string url = "data:text/html;base64," + base64_encode(source.read());
      json nav = client_.call("Page.navigate", {{"url", url}}, options_.action_timeout);
      if (nav.contains("errorText") && !nav.at("errorText").get<std::string>().empty()) {
        throw Error(ErrorCode::LoadFailure, "navigate: " + nav.at("errorText").get<std::string>());
      }
      wait_ready();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::LoadFailure) throw;
      throw Error(ErrorCode::LoadFailure, e.what());
    }
  }

  html::Document extract() override {
    json tree;
    try {
      tree = client_.evaluate(std::string(kExtractScript), options_.action_timeout);
    } catch (const Error& e) {
      throw Error(ErrorCode::CaptureFailure, e.what());
    }
    if (!tree.is_object()) throw Error(ErrorCode::CaptureFailure, "DOM extraction returned no tree");
    try {
      return document_from_tree(tree);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CaptureFailure, std::string("malformed DOM tree: ") + e.what());
    }
  }

  void dispatch(const DomNode& target, const Action& action) override {
    json outcome = client_.evaluate(dispatch_script(target.xpath, action), options_.action_timeout);
    if (!outcome.is_string() || outcome.get<std::string>() != "ok") {
      throw Error(ErrorCode::ExecutionFailure,
                  std::string(to_string(action.kind)) + " on " + target.xpath + ": " +
                      (outcome.is_string() ? outcome.get<std::string>() : outcome.dump()));
    }
    wait_ready();
  }

  std::string capture(const DomNode&) override {
    json shot;
    try {
      shot = client_.call("Page.captureScreenshot", {{"format", "png"}, {"captureBeyondViewport", true}},
                          options_.action_timeout);
      return base64_decode(shot.at("data").get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::CaptureFailure, e.what());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CaptureFailure, e.what());
    }
  }

  std::string media_type() const override { return "image/png"; }

 private:
  void wait_ready() {
    auto deadline = std::chrono::steady_clock::now() + options_.action_timeout;
    while (true) {
      json state;
      try {
        state = client_.evaluate("document.readyState", options_.action_timeout);
      } catch (const Error&) {
        // the page may be mid-navigation; retry until the deadline
      }
      if (state == "complete") return;
      if (std::chrono::steady_clock::now() >= deadline) {
        throw Error(ErrorCode::ExecutionFailure, "page did not finish loading");
      }
      std::this_thread::sleep_for(ms(50));
    }
  }

  EnvOptions options_;
  Client client_;
};

}  // namespace

}  // namespace uiprobe::devtools

namespace uiprobe {

std::unique_ptr<Backend> make_browser_backend(const EnvOptions& options) {
  return std::make_unique<devtools::BrowserBackend>(options);
}

}  // namespace uiprobe
