#pragma once

#include "netgame/dynamics.hpp"
#include "netgame/types.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace netgame {

/// Full-precision (17 significant digit) decimal text for a double.
std::string format_full(double v);

/// Reads a rectangular CSV of reals (no header). Communication matrices are
/// N rows of N comma-separated values.
Mat read_csv_matrix(const std::string& path);

void write_csv_matrix(const std::string& path, const Mat& m);

/// Long-format trajectory export with header
/// iteration,agent,component,value; multiplier rows use agent = "sigma".
void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec, int block_size);

/// Two-column series (step, value) with the given value header.
void write_series_csv(const std::string& path, const std::string& value_name,
                      const std::vector<std::int64_t>& steps, const std::vector<double>& values);

/// Per-step activation log for asynchronous runs:
/// step,active_agent,residual (residual blank when not sampled that step).
void write_async_csv(const std::string& path, const TrajectoryRecord& rec,
                     const std::vector<int>& active_agents);

nlohmann::json certificate_json(const Certificate& cert);

/// Converged flag, iterations, final residual, certificate.
nlohmann::json summary_json(const TrajectoryRecord& rec);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace netgame
