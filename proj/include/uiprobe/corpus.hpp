#pragma once

// Synthetic fixture pages built from stock widget templates. Each page comes
// with a manifest written from the template definition: its controls, the
// outcome every oracle-proposed sequence should have, and the user tasks it
// supports. An inert variant disables one control so validation has
// something to catch.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "uiprobe/graph.hpp"
#include "uiprobe/task.hpp"

namespace uiprobe {

struct ManifestElement {
  std::string signature;
  ActionKind kind = ActionKind::Click;
  std::string label;

  bool operator==(const ManifestElement&) const = default;
};

struct ManifestTransition {
  // Sequences that lead from the initial page to the source state.
  std::vector<std::vector<StepDescriptor>> prefix;
  std::vector<StepDescriptor> steps;
  Classification category = Classification::NonInteractive;
  std::vector<std::string> new_signatures;

  bool operator==(const ManifestTransition&) const = default;
};

struct FixtureManifest {
  std::string fixture_id;
  uint64_t seed = 0;
  std::vector<std::string> widgets;
  std::vector<ManifestElement> elements;
  std::vector<ManifestTransition> transitions;
  std::vector<Task> tasks;
  int predicted_step_count = 0;
  std::string inert_signature;  // empty for the faithful page

  bool operator==(const FixtureManifest&) const = default;
};

struct Fixture {
  std::string document;
  FixtureManifest manifest;
};

// counter, tabs, modal_form, dropdown_filter, searchable_list, todo,
// accordion, pagination, login_form, toggle_panel
const std::vector<std::string>& stock_widgets();

// Deterministic in (seed, widgets, inert). Throws Error(UnsupportedWidget)
// for an unknown or empty widget list. With `inert` the first widget's
// designated control loses its behaviour; the manifest keeps the faithful
// expectations and names the disabled control.
Fixture synth_fixture(uint64_t seed, const std::vector<std::string>& widgets, bool inert = false);

// Structural problems: unlisted step targets, bad step counts, unnamed tasks.
std::vector<std::string> check_manifest(const FixtureManifest& m);

// fixtures/<id>/{page.html, manifest.json}; with `inert_variants` also
// <id>-inert/. Returns the fixture directories written.
std::vector<std::filesystem::path> write_corpus(const std::filesystem::path& dir, uint64_t seed,
                                                bool inert_variants = true);

// Throws Error(SerializationFailure) or Error(SchemaMismatch).
FixtureManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const FixtureManifest& m, const std::filesystem::path& path);

void to_json(nlohmann::json& j, const ManifestElement& e);
void from_json(const nlohmann::json& j, ManifestElement& e);
void to_json(nlohmann::json& j, const ManifestTransition& t);
void from_json(const nlohmann::json& j, ManifestTransition& t);
void to_json(nlohmann::json& j, const FixtureManifest& m);
void from_json(const nlohmann::json& j, FixtureManifest& m);

}  // namespace uiprobe
