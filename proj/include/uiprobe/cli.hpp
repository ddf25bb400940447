#pragma once

// Command-line entry point: synth, explore, validate, eval-agent,
// eval-pipeline, export. Exit codes: 0 success, 1 domain error, 2 usage.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "uiprobe/env.hpp"
#include "uiprobe/explorer.hpp"
#include "uiprobe/metrics.hpp"
#include "uiprobe/policy.hpp"

namespace uiprobe {

struct RunConfig {
  std::string backend = "sim";
  std::string devtools;            // browser backend endpoint
  std::string policy = "oracle";   // oracle | vlm | replay
  std::string endpoint;            // vlm chat route
  std::string model = "default";
  std::string api_key_env = "UIPROBE_API_KEY";
  std::string replay_dir;          // audit directory to replay
  ExploreBudget budget;
  int round_cap = 5;
  int parallelism = 4;
  PipelineWeights weights;
  std::string out;

  // Throws Error(InvalidArgument).
  void validate() const;
};

// Throws Error(InvalidArgument) for an unknown policy or missing settings.
std::unique_ptr<Policy> make_policy(const RunConfig& config);

// argv-style arguments without the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uiprobe
