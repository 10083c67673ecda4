#pragma once

#include "decolab/io.hpp"
#include "decolab/scenarios.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace decolab {

constexpr std::uint64_t kDefaultSeed = 1;

struct CommandOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's "seed"
  std::filesystem::path out_dir = "out";
  std::optional<std::string> scenario;  // frames only: overrides the config's "scenario"
};

struct CommandOutcome {
  std::string command;
  std::vector<Assertion> assertions;
  Json summary;
  std::vector<std::string> files;  // relative to the output directory
  std::string table;               // human-readable summary

  bool passed() const;
  void check(const std::string& name, double expected, double actual, double tol);
  void check_range(const std::string& name, double lo, double hi, double actual);
  void check_at_least(const std::string& name, double lo, double actual);
  void check_true(const std::string& name, bool condition);
};

CommandOutcome cmd_localize(const Json& config, const CommandOptions& opts);
CommandOutcome cmd_collapse(const Json& config, const CommandOptions& opts);
CommandOutcome cmd_unravel(const Json& config, const CommandOptions& opts);
CommandOutcome cmd_frames(const Json& config, const CommandOptions& opts);
CommandOutcome cmd_scales(const Json& config, const CommandOptions& opts);

// Dispatches by name; writes failures.json into the output directory when an assertion fails.
CommandOutcome run_command(const std::string& name, const Json& config, const CommandOptions& opts);
Json failure_report(const CommandOutcome& outcome);

}  // namespace decolab
