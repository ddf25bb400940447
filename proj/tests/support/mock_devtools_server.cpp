#include "support/mock_devtools_server.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <iostream>

#include "uiprobe/devtools.hpp"
#include "uiprobe/dom.hpp"
#include "uiprobe/env.hpp"
#include "uiprobe/hashing.hpp"

namespace uiprobe::testing {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json = nlohmann::json;

namespace {

json tree_of(const html::Node& n) {
  if (n.type == html::NodeType::Text) return {{"t", "t"}, {"v", n.text}};
  json attrs = json::array();
  for (const auto& [k, v] : n.attrs) attrs.push_back({k, v});
  json children = json::array();
  for (const auto& c : n.children) {
    if (c->type == html::NodeType::Element || c->type == html::NodeType::Text) children.push_back(tree_of(*c));
  }
  return {{"t", "e"}, {"n", n.name}, {"a", attrs}, {"h", false}, {"c", children}};
}

}  // namespace

struct MockDevToolsServer::Impl {
  Options options;
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::thread accept_thread;
  std::atomic<bool> stopping{false};
  mutable std::mutex mu;
  std::map<std::string, int> counts;
  std::vector<std::thread> sessions;
  std::vector<std::shared_ptr<tcp::socket>> sockets;

  void accept_loop() {
    while (!stopping) {
      auto socket = std::make_shared<tcp::socket>(ioc);
      beast::error_code ec;
      acceptor.accept(*socket, ec);
      if (ec) {
        if (ec == net::error::would_block || ec == net::error::try_again) {
          std::this_thread::sleep_for(std::chrono::milliseconds(5));
          continue;
        }
        if (stopping) return;
        continue;
      }
      socket->non_blocking(false);
      std::lock_guard<std::mutex> lock(mu);
      sockets.push_back(socket);
      sessions.emplace_back([this, socket] { serve(socket); });
    }
  }

  void count(const std::string& method) {
    std::lock_guard<std::mutex> lock(mu);
    ++counts[method];
  }

  void serve(std::shared_ptr<tcp::socket> socket) {
    try {
      beast::flat_buffer buffer;
      http::request<http::string_body> req;
      http::read(*socket, buffer, req);
      if (websocket::is_upgrade(req)) {
        websocket::stream<tcp::socket&> ws(*socket);
        ws.accept(req);
        serve_ws(ws);
        return;
      }
      count("HTTP " + std::string(req.target()));
      http::response<http::string_body> res{http::status::ok, req.version()};
      res.set(http::field::content_type, "application/json");
      if (req.target() == "/json/list" || req.target() == "/json") {
        json list = json::array();
        list.push_back({{"type", "page"},
                        {"id", "1"},
                        {"url", "about:blank"},
                        {"webSocketDebuggerUrl", "ws://127.0.0.1:" + std::to_string(acceptor.local_endpoint().port()) +
                                                     "/devtools/page/1"}});
        res.body() = list.dump();
      } else {
        res.result(http::status::not_found);
        res.body() = "{}";
      }
      res.prepare_payload();
      http::write(*socket, res);
    } catch (const std::exception&) {
      // client went away
    }
  }

  void serve_ws(websocket::stream<tcp::socket&>& ws) {
    std::unique_ptr<Backend> page;
    for (;;) {
      beast::flat_buffer buffer;
      beast::error_code ec;
      ws.read(buffer, ec);
      if (ec) return;
      json msg = json::parse(beast::buffers_to_string(buffer.data()), nullptr, false);
      if (!msg.is_object()) continue;
      int id = msg.value("id", 0);
      std::string method = msg.value("method", "");
      json params = msg.value("params", json::object());
      count(method);
      json reply{{"id", id}};
      auto send = [&](const json& j) {
        ws.text(true);
        ws.write(net::buffer(j.dump()));
      };
      try {
        if (method == "Page.enable") {
          reply["result"] = json::object();
        } else if (method == "Page.navigate") {
          std::string url = params.at("url");
          const std::string prefix = "data:text/html;base64,";
          if (url.rfind(prefix, 0) != 0) {
            reply["result"] = {{"errorText", "net::ERR_INVALID_URL"}};
          } else {
            page = make_simulator_backend();
            page->load(PageSource::from_html(base64_decode(url.substr(prefix.size())), "navigated"));
            reply["result"] = {{"frameId", "1"}};
            send({{"method", "Page.loadEventFired"}, {"params", {{"timestamp", 1}}}});
          }
        } else if (method == "Runtime.evaluate") {
          std::string expr = params.at("expression");
          if (expr == "document.readyState") {
            reply["result"] = {{"result", {{"type", "string"}, {"value", "complete"}}}};
          } else if (page && expr.rfind(devtools::kExtractMarker, 0) == 0) {
            html::Document doc = page->extract();
            reply["result"] = {{"result", {{"type", "object"}, {"value", tree_of(*doc.html())}}}};
          } else if (page && expr.rfind(devtools::kDispatchMarker, 0) == 0) {
            if (options.stall_on_dispatch) continue;
            size_t b = expr.find(devtools::kArgsBegin) + devtools::kArgsBegin.size();
            size_t e = expr.find(devtools::kArgsEnd, b);
            json args = json::parse(expr.substr(b, e - b));
            DomNode target;
            target.xpath = args.at("xpath");
            Action action;
            std::string kind = args.at("kind");
            action.kind = kind == "click" ? ActionKind::Click : kind == "enter" ? ActionKind::Enter : ActionKind::Select;
            if (action.kind != ActionKind::Click) action.payload = args.at("value").get<std::string>();
            std::string outcome = "ok";
            try {
              page->dispatch(target, action);
            } catch (const std::exception& ex) {
              outcome = ex.what();
            }
            reply["result"] = {{"result", {{"type", "string"}, {"value", outcome}}}};
          } else {
            reply["result"] = {{"result", {{"type", "undefined"}}},
                               {"exceptionDetails", {{"text", "Uncaught ReferenceError"}}}};
          }
        } else if (method == "Page.captureScreenshot") {
          std::string png = "\x89PNG\r\n\x1a\n";
          if (page) png += render_text(annotate_dom(page->extract()));
          reply["result"] = {{"data", base64_encode(png)}};
        } else {
          reply["error"] = {{"code", -32601}, {"message", "'" + method + "' wasn't found"}};
        }
      } catch (const std::exception& ex) {
        reply.erase("result");
        reply["error"] = {{"code", -32000}, {"message", ex.what()}};
      }
      send(reply);
    }
  }
};

MockDevToolsServer::MockDevToolsServer() : MockDevToolsServer(Options{}) {}

MockDevToolsServer::MockDevToolsServer(Options options) : impl_(std::make_unique<Impl>()) {
  impl_->options = options;
  tcp::endpoint ep(net::ip::make_address("127.0.0.1"), 0);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
  impl_->acceptor.non_blocking(true);
  port_ = impl_->acceptor.local_endpoint().port();
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

MockDevToolsServer::~MockDevToolsServer() {
  impl_->stopping = true;
  impl_->accept_thread.join();
  std::vector<std::thread> sessions;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    for (auto& s : impl_->sockets) {
      beast::error_code ec;
      s->shutdown(tcp::socket::shutdown_both, ec);
    }
    sessions.swap(impl_->sessions);
  }
  for (auto& t : sessions) t.join();
}

std::string MockDevToolsServer::http_endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

std::string MockDevToolsServer::ws_endpoint() const {
  return "ws://127.0.0.1:" + std::to_string(port_) + "/devtools/page/1";
}

std::map<std::string, int> MockDevToolsServer::method_counts() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->counts;
}

}  // namespace uiprobe::testing
