#pragma once

// Training-record exporters over finished exploration runs, plus JSON-lines
// I/O. Screenshots are referenced by their run-relative path.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "uiprobe/graph.hpp"

namespace uiprobe {

enum class RecordKind { ActionGen, Verification, UI2Code };

std::string_view to_string(RecordKind kind);
// Throws Error(SchemaMismatch).
RecordKind record_kind_from_string(std::string_view name);

struct DatasetRecord {
  RecordKind kind = RecordKind::ActionGen;
  nlohmann::json payload;

  bool operator==(const DatasetRecord&) const = default;
};

void to_json(nlohmann::json& j, const DatasetRecord& r);
void from_json(const nlohmann::json& j, DatasetRecord& r);

// One record per state the policy proposed from, in discovery order:
//   {state_key, screenshot, dom, history, gold}
// gold is the usable executed sequences in canonical DSL text, or the
// completion sentinel when none of them worked. Throws Error(IncompleteRun).
std::vector<DatasetRecord> export_action_dataset(const std::filesystem::path& run_dir);

// One record per verified sequence, in execution order:
//   {transition, before, sequence, after: [screenshot per action], r, terminate}
// where `transition` indexes the graph's transition list.
// Sequences that failed to execute were never verified and are skipped.
// Throws Error(IncompleteRun).
std::vector<DatasetRecord> export_verification_dataset(const std::filesystem::path& run_dir);

// Screenshots of every state (1-based, discovery order) and one operation
// item per usable transition; target wraps `code` in <think>/<answer>.
// Throws Error(EmptyGraph).
DatasetRecord export_ui2code_pairs(const InteractionGraph& graph, const std::string& code);

// Throws Error(SerializationFailure).
void write_jsonl(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);
// Throws Error(SerializationFailure) or Error(SchemaMismatch).
std::vector<DatasetRecord> read_jsonl(const std::filesystem::path& path);

}  // namespace uiprobe
