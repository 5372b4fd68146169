#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "jdrisk_app/commands.hpp"
#include "jdrisk_app/config.hpp"

int main(int argc, char** argv) {
  using namespace jdrisk::app;

  CLI::App app{"Risk-constrained consumption and investment under jump-diffusions"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::string negjump;
  bool force = false;
  bool dump_config = false;
  std::string strategy_path;

  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Solve for the optimal strategy; writes strategy.csv and report.csv"},
      {"certify", "Check the inactive-constraint conditions; writes certificate.csv"},
      {"simulate", "Simulate wealth under the optimal strategy; writes ensemble.csv"},
      {"verify", "Run analytic and Monte Carlo checks; writes verify.csv"},
      {"compare", "Optimal policy with and without jumps; writes compare.csv"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--paths", paths, "Monte Carlo paths (overrides [run] paths)");
    sub->add_option("--seed", seed, "Random seed (overrides [run] seed)");
    sub->add_option("--negjump-method", negjump, "Negative-jump adjustment")
        ->check(CLI::IsMember({"off", "paper", "thinning"}));
    sub->add_flag("--force", force, "Proceed when a sufficient condition fails");
    if (std::string(name) == "solve") sub->add_flag("--dump-config", dump_config, "Also write config.ini");
    if (std::string(name) == "verify")
      sub->add_option("--strategy", strategy_path, "Verify this strategy.csv instead of solving")
          ->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  CommandOptions opt;
  try {
    opt.config = load_config(config_path);
    if (paths) opt.config.paths = *paths;
    if (seed) opt.config.seed = *seed;
    if (!negjump.empty()) opt.config.risk.negjump_mode = parse_negjump_mode(negjump);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitInput;
  }
  if (opt.config.paths == 0) {
    std::cerr << "config error: paths must be positive\n";
    return kExitInput;
  }
  opt.out = out_dir;
  opt.force = force;
  opt.dump_config = dump_config;
  if (!strategy_path.empty()) opt.strategy_file = strategy_path;

  return dispatch(app.get_subcommands().front()->get_name(), opt, std::cerr);
}
