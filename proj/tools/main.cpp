#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "uscrl/error.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kPrecondition = 3, kRuntime = 4 };

}  // namespace

int main(int argc, char** argv) {
  using namespace uscrl;
  CLI::App app{"Supervised contrastive representation learning toolkit"};
  app.set_version_flag("--version", USCRL_VERSION);
  app.require_subcommand(1);

  cli::GlobalOptions opts;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config, "JSON config file")->required();
    cmd->add_option("--out", opts.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", seed, "override the config seed(s)");
    cmd->add_option("--jobs", opts.jobs, "parallel jobs")->check(CLI::PositiveNumber);
  };

  std::function<void(const cli::GlobalOptions&)> action;
  auto sub = [&](CLI::App* parent, const char* name, const char* help,
                 void (*fn)(const cli::GlobalOptions&)) {
    auto* cmd = parent->add_subcommand(name, help);
    add_common(cmd);
    cmd->callback([&action, fn] { action = fn; });
    return cmd;
  };
  sub(&app, "sample", "materialize a tuple set as JSON lines", cli::cmd_sample);
  sub(&app, "estimate", "evaluate a risk estimator for a model", cli::cmd_estimate);
  sub(&app, "bounds", "evaluate generalization bounds", cli::cmd_bounds);
  sub(&app, "train", "train a representation model", cli::cmd_train);
  auto* exp = app.add_subcommand("experiment", "run an experiment protocol");
  exp->require_subcommand(1);
  sub(exp, "regimes", "compare tuple regimes", cli::cmd_experiment_regimes);
  sub(exp, "complexity", "sample-complexity search", cli::cmd_experiment_complexity);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  for (const auto* cmd : app.get_subcommands()) {
    const auto* leaf = cmd->get_subcommands().empty() ? cmd : cmd->get_subcommands().front();
    if (leaf->count("--seed") > 0) opts.seed = seed;
  }

  try {
    action(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kConfig;
  } catch (const SizeError& e) {
    std::cerr << "size error: " << e.what() << " (exact count " << e.exact_count() << ")\n";
    return kPrecondition;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
