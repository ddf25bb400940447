#pragma once

// A stand-in for a browser's DevTools endpoint. It speaks the same
// WebSocket/JSON protocol as the browser backend expects and executes the
// page with the in-process simulator, recognising the backend's extraction
// and dispatch scripts by their markers.

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace uiprobe::testing {

class MockDevToolsServer {
 public:
  struct Options {
    bool stall_on_dispatch = false;  // never answer dispatch scripts
  };

  MockDevToolsServer();
  explicit MockDevToolsServer(Options options);
  ~MockDevToolsServer();

  unsigned short port() const { return port_; }
  std::string http_endpoint() const;  // http://127.0.0.1:<port>
  std::string ws_endpoint() const;    // ws://127.0.0.1:<port>/devtools/page/1

  // How many times each protocol method was received.
  std::map<std::string, int> method_counts() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  unsigned short port_ = 0;
};

}  // namespace uiprobe::testing
