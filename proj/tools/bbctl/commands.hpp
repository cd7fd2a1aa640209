#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bangbang/config.hpp"

namespace bbctl {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kRuntimeError = 3,
  kNonConvergence = 4,
};

// Command-line values that override the config file (after BBCTL_ variables).
struct Options {
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::optional<long long> budget;
  std::optional<int> episodes;
  std::optional<int> jobs;
  std::string teacher;
  std::string head;
  std::string checkpoint;
  std::string kind;
  std::vector<std::string> inputs;
};

// File, then environment, then flags. Unknown keys are rejected.
bangbang::Config resolve_config(const std::string& command, const Options& opts);

// Every key the tool understands.
std::vector<std::string> known_keys();

void cmd_train(const bangbang::Config& cfg, std::ostream& log);
void cmd_distill(const bangbang::Config& cfg, std::ostream& log);
void cmd_oracle(const bangbang::Config& cfg, std::ostream& log);
void cmd_disturb(const bangbang::Config& cfg, std::ostream& log);
void cmd_analyze(const bangbang::Config& cfg, std::ostream& log);

// Full entry point: parses argv, runs the subcommand and maps exceptions to
// exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bbctl
