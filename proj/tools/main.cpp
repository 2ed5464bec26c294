#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "deidkit/errors.hpp"

using namespace deidkit;
using namespace deidkit::cli;

namespace {

enum Exit { kOk = 0, kInput = 2, kBackend = 3 };

void parse(CLI::App& app, std::vector<std::string> args) {
  app.clear();
  std::reverse(args.begin(), args.end());
  app.parse(args);
}

Command* selected(const std::vector<std::unique_ptr<Command>>& cmds) {
  for (const auto& c : cmds) {
    if (c->app->parsed()) return c.get();
  }
  return nullptr;
}

/// `run.<flag> = value` entries become `--<flag>=value` after the user's arguments, and the
/// last occurrence of an option wins.
std::vector<std::string> config_overrides(const Command& cmd, const KeyValueConfig& cfg) {
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.with_prefix("run.")) {
    const CLI::Option* opt = cmd.app->get_option_no_throw("--" + key);
    if (opt == nullptr || !opt->get_configurable()) {
      throw InputError("config key run." + key + " is not a flag of '" + cmd.app->get_name() + "'");
    }
    extra.push_back("--" + key + "=" + value);
  }
  return extra;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation toolkit for clinical text de-identification", "deidkit"};
  app.set_version_flag("--version", std::string(DEIDKIT_VERSION));
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  auto cmds = register_commands(app);

  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    parse(app, args);
    Command* cmd = selected(cmds);
    RunContext ctx;
    ctx.config = load_config(cmd->common);
    if (!cmd->common.config_path.empty()) {
      ctx.config_dir = std::filesystem::path(cmd->common.config_path).parent_path();
      auto full = args;
      for (auto& e : config_overrides(*cmd, ctx.config)) full.push_back(std::move(e));
      parse(app, full);
    }
    ctx.provenance = {DEIDKIT_VERSION, cmd->common.seed, config_hash(*cmd->app, ctx.config)};
    return cmd->run(ctx);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  } catch (const BackendError& e) {
    std::cerr << "deidkit: backend error: " << e.what() << '\n';
    return kBackend;
  } catch (const InputError& e) {
    std::cerr << "deidkit: input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "deidkit: error: " << e.what() << '\n';
    return kInput;
  }
}
