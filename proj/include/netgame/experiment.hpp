#pragma once

#include "netgame/config.hpp"
#include "netgame/dynamics.hpp"

#include <string>
#include <vector>

namespace netgame {

/// Builds the proximal maps declared by a config.
std::vector<ProximalMap> build_maps(const std::vector<MapSpec>& specs);

/// Runs the configured experiment, writing trajectory CSVs and JSON
/// summaries under config.out_dir (one file set per seed). Seeds run in
/// parallel up to the NETGAME_THREADS cap. Returns the process exit code:
/// zero on success (non-convergence is diagnostic, reported in the
/// summary), nonzero on I/O or configuration failures.
int run_experiment(const ExperimentConfig& config);

}  // namespace netgame
