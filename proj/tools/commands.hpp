#pragma once

#include <memory>
#include <vector>

#include <CLI11.hpp>

#include "run_support.hpp"

namespace deidkit::cli {

struct RunContext {
  Provenance provenance;
  KeyValueConfig config;
  /// Directory relative paths in the config file are resolved against.
  std::filesystem::path config_dir;
};

class Command {
 public:
  virtual ~Command() = default;
  CLI::App* app = nullptr;
  CommonOptions common;
  /// Returns the process exit code.
  virtual int run(const RunContext& ctx) = 0;
};

/// Registers score, cire, icd, surrogate, sample-fps, correlate and serve.
std::vector<std::unique_ptr<Command>> register_commands(CLI::App& app);

}  // namespace deidkit::cli
