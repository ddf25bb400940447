#include "uiprobe/explorer.hpp"

namespace uiprobe::run_dir {

using json = nlohmann::json;

std::shared_ptr<PromptAudit> prepare(const std::filesystem::path& dir, Policy& policy) {
  std::error_code ec;
  std::filesystem::create_directories(dir / kScreenshots, ec);
  if (ec) throw Error(ErrorCode::SerializationFailure, "cannot create " + dir.string() + ": " + ec.message());
  auto audit = std::make_shared<PromptAudit>(dir / kPrompts);
  policy.set_audit(audit);
  return audit;
}

EnvOptions env_options(const std::filesystem::path& dir, EnvOptions base) {
  base.artifact_dir = dir;
  return base;
}

void save(const std::filesystem::path& dir, const ExploreResult& result) {
  export_graph(result.graph, dir / kGraph);
  json t = result.trace;
  write_file_atomic(dir / kTrace, t.dump(2) + "\n");
}

ExplorationTrace load_trace(const std::filesystem::path& path) {
  std::string text = read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::SchemaMismatch, path.string() + " is not JSON");
  try {
    return j.get<ExplorationTrace>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, path.string() + ": " + e.what());
  }
}

ExploreResult load(const std::filesystem::path& dir) {
  return {import_graph(dir / kGraph), load_trace(dir / kTrace)};
}

}  // namespace uiprobe::run_dir
