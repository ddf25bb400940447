#pragma once

// Page environments: load a document, observe it as a UIState, and apply
// click/enter/select actions. The simulator runs in process over the HTML
// tree; the browser backend drives a remote browser over the DevTools
// protocol.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uiprobe/action_dsl.hpp"
#include "uiprobe/dom.hpp"
#include "uiprobe/errors.hpp"
#include "uiprobe/html.hpp"

namespace uiprobe {

enum class BackendKind { Simulator, Browser };

std::string_view to_string(BackendKind kind);
BackendKind backend_from_string(std::string_view name);  // "sim" | "simulator" | "browser"

struct PageSource {
  std::filesystem::path file;  // used when html is empty
  std::string html;
  std::string ref;             // name used in reports

  static PageSource from_file(const std::filesystem::path& path);
  static PageSource from_html(std::string html, std::string ref = "inline");
  // Reads the document bytes; throws Error(LoadFailure).
  std::string read() const;
};

struct EnvOptions {
  std::filesystem::path artifact_dir;  // screenshots are written under <dir>/screenshots when set
  std::string devtools_endpoint;       // ws://host:port/devtools/page/<id> or http://host:port
  std::chrono::milliseconds action_timeout{10000};
  AnnotateOptions annotate;
};

struct Screenshot {
  std::string path;        // relative, e.g. screenshots/<digest>.txt
  std::string digest;      // sha256 of the bytes
  std::string media_type;  // text/plain or image/png

  bool operator==(const Screenshot&) const = default;
};

struct UIState {
  std::string state_key;
  Screenshot screenshot;
  DomNode dom;
  std::string dom_text;  // serialize_dom(dom)
  int step_index = 0;
  std::string image;     // raw screenshot bytes; not persisted in graph files

  // Equality ignores the transient image bytes.
  bool operator==(const UIState& other) const {
    return state_key == other.state_key && screenshot == other.screenshot && dom == other.dom &&
           dom_text == other.dom_text && step_index == other.step_index;
  }
};

// Builds a UIState from an annotated tree and screenshot bytes.
UIState make_state(DomNode dom, std::string image, std::string media_type, int step_index);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual void load(const PageSource& source) = 0;
  // Current page as a document tree. Hidden elements carry a hidden attribute.
  virtual html::Document extract() = 0;
  // Dispatches `action` on the element at `target.xpath`.
  virtual void dispatch(const DomNode& target, const Action& action) = 0;
  // Screenshot bytes of the current page. `dom` is the annotated tree.
  virtual std::string capture(const DomNode& dom) = 0;
  virtual std::string media_type() const = 0;
};

std::unique_ptr<Backend> make_simulator_backend();
std::unique_ptr<Backend> make_browser_backend(const EnvOptions& options);

struct SequenceResult {
  std::vector<UIState> states;       // one per successfully applied action
  std::optional<Error> error;
  std::optional<size_t> failed_index;

  bool ok() const { return !error.has_value(); }
};

class EnvSession {
 public:
  // Throws Error(LoadFailure).
  static EnvSession load(const PageSource& source, BackendKind kind, const EnvOptions& options = {});
  static EnvSession load(const PageSource& source, std::unique_ptr<Backend> backend, BackendKind kind,
                         const EnvOptions& options = {});

  EnvSession(EnvSession&&) noexcept = default;
  EnvSession& operator=(EnvSession&&) noexcept = default;

  BackendKind backend() const { return kind_; }
  const PageSource& page_source() const { return source_; }
  const UIState& current() const { return current_; }
  const std::vector<ActionSequence>& history() const { return history_; }

  // Re-observes the page. Throws Error(CaptureFailure).
  UIState snapshot();
  // Throws Error(UnknownTarget) or Error(ExecutionFailure).
  UIState apply(const Action& action);
  SequenceResult run_sequence(const ActionSequence& seq);

 private:
  EnvSession(PageSource source, std::unique_ptr<Backend> backend, BackendKind kind, EnvOptions options);
  UIState observe(int step_index);

  PageSource source_;
  std::unique_ptr<Backend> backend_;
  BackendKind kind_;
  EnvOptions options_;
  UIState current_;
  std::vector<ActionSequence> history_;
};

// Writes the state's screenshot bytes to <dir>/<state.screenshot.path> if absent.
void store_screenshot(const UIState& state, const std::filesystem::path& dir);

}  // namespace uiprobe
