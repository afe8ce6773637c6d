#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace tubeq::cli {

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<Format> format;
  std::optional<int> grid;
  std::optional<std::string> energy;  // number or "auto"
};

/// Applies command-line overrides on top of the parsed config.
void apply_overrides(RunConfig& cfg, const Overrides& o);

struct RunResult {
  std::string summary_line;
  std::vector<std::string> files;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand; module failures propagate as tubeq::Error.
RunResult run(const std::string& subcommand, const RunConfig& cfg);

/// exit status for command-line usage errors; module errors use ErrorKind values
constexpr int kUsageExit = 64;

/// Full command-line entry point; returns the process exit status.
int main_entry(int argc, char** argv);

}  // namespace tubeq::cli
