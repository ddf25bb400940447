#include "uiprobe/env.hpp"

#include <fstream>
#include <sstream>

#include "uiprobe/hashing.hpp"

namespace uiprobe {

std::string_view to_string(BackendKind kind) { return kind == BackendKind::Simulator ? "sim" : "browser"; }

BackendKind backend_from_string(std::string_view name) {
  if (name == "sim" || name == "simulator") return BackendKind::Simulator;
  if (name == "browser") return BackendKind::Browser;
  throw Error(ErrorCode::InvalidArgument, "unknown backend '" + std::string(name) + "'");
}

PageSource PageSource::from_file(const std::filesystem::path& path) {
  PageSource s;
  s.file = path;
  s.ref = path.string();
  return s;
}

PageSource PageSource::from_html(std::string html, std::string ref) {
  PageSource s;
  s.html = std::move(html);
  s.ref = std::move(ref);
  return s;
}

std::string PageSource::read() const {
  if (!html.empty() || file.empty()) return html;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::LoadFailure, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

UIState make_state(DomNode dom, std::string image, std::string media_type, int step_index) {
  UIState state;
  state.dom = std::move(dom);
  state.dom_text = serialize_dom(state.dom);
  state.state_key = sha256_hex(state.dom_text);
  state.screenshot.digest = sha256_hex(image);
  state.screenshot.media_type = std::move(media_type);
  state.screenshot.path = "screenshots/" + state.screenshot.digest +
                          (state.screenshot.media_type == "image/png" ? ".png" : ".txt");
  state.image = std::move(image);
  state.step_index = step_index;
  return state;
}

void store_screenshot(const UIState& state, const std::filesystem::path& dir) {
  auto path = dir / state.screenshot.path;
  if (std::filesystem::exists(path)) return;
  std::filesystem::create_directories(path.parent_path());
  // Write to a temporary name first; parallel sessions may race on the same digest.
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::string>{}(state.state_key + std::to_string(state.step_index)));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::CaptureFailure, "cannot write " + tmp.string());
    out << state.image;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) std::filesystem::remove(tmp, ec);
}

EnvSession::EnvSession(PageSource source, std::unique_ptr<Backend> backend, BackendKind kind, EnvOptions options)
    : source_(std::move(source)), backend_(std::move(backend)), kind_(kind), options_(std::move(options)) {}

EnvSession EnvSession::load(const PageSource& source, BackendKind kind, const EnvOptions& options) {
  auto backend = kind == BackendKind::Simulator ? make_simulator_backend() : make_browser_backend(options);
  return load(source, std::move(backend), kind, options);
}

EnvSession EnvSession::load(const PageSource& source, std::unique_ptr<Backend> backend, BackendKind kind,
                            const EnvOptions& options) {
  EnvSession session(source, std::move(backend), kind, options);
  try {
    session.backend_->load(source);
    session.current_ = session.observe(0);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::LoadFailure) throw;
    throw Error(ErrorCode::LoadFailure, source.ref + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::LoadFailure, source.ref + ": " + e.what());
  }
  return session;
}

UIState EnvSession::observe(int step_index) {
  try {
    html::Document doc = backend_->extract();
    DomNode dom = annotate_dom(doc, options_.annotate);
    std::string image = backend_->capture(dom);
    UIState state = make_state(std::move(dom), std::move(image), backend_->media_type(), step_index);
    if (!options_.artifact_dir.empty()) store_screenshot(state, options_.artifact_dir);
    return state;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::CaptureFailure, e.what());
  }
}

UIState EnvSession::snapshot() {
  current_ = observe(current_.step_index);
  return current_;
}

UIState EnvSession::apply(const Action& action) {
  validate_action(action);
  const DomNode* target = find_element(current_.dom, action.target);
  if (!target) {
    throw Error(ErrorCode::UnknownTarget, "no interactive element with id " + std::to_string(action.target) +
                                              " (page has " + std::to_string(interactive_count(current_.dom)) + ")");
  }
  try {
    backend_->dispatch(*target, action);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ExecutionFailure, e.what());
  }
  current_ = observe(current_.step_index + 1);
  return current_;
}

SequenceResult EnvSession::run_sequence(const ActionSequence& seq) {
  SequenceResult result;
  for (size_t i = 0; i < seq.actions.size(); ++i) {
    try {
      result.states.push_back(apply(seq.actions[i]));
    } catch (const Error& e) {
      result.error = e;
      result.failed_index = i;
      return result;
    }
  }
  history_.push_back(seq);
  return result;
}

}  // namespace uiprobe
