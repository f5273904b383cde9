#include "netgame/config.hpp"
#include "netgame/experiment.hpp"
#include "netgame/io.hpp"

#include <CLI11.hpp>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"netgame: proximal dynamics and equilibrium seeking in network games"};

  std::string config_path;
  std::string out_dir;
  std::string mode_override;
  std::int64_t seed_override = -1;
  bool quiet = false;
  bool dump_only = false;

  app.add_option("--config", config_path, "experiment config (.json or .toml)")->required();
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed_override, "single seed (overrides config seed list)");
  app.add_option("--mode", mode_override, "mode (overrides config)");
  app.add_flag("--quiet", quiet, "suppress progress output");
  app.add_flag("--dump-config", dump_only, "print the canonical JSON for the config and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    netgame::ExperimentConfig config = netgame::parse_config(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed_override >= 0) config.seeds = {static_cast<std::uint64_t>(seed_override)};
    if (!mode_override.empty()) config.mode = netgame::mode_from_name(mode_override);
    if (quiet) config.quiet = true;

    if (dump_only) {
      std::cout << netgame::dump_config(config).dump(2) << "\n";
      return 0;
    }
    return netgame::run_experiment(config);
  } catch (const std::exception& err) {
    std::cerr << "netgame: " << err.what() << "\n";
    return 1;
  }
}
