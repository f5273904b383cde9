#pragma once

#include "netgame/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace netgame {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode {
  sync,
  async_updates,
  timevarying,
  gnwe,
  demo_fj,
  demo_degroot,
  demo_lasso,
  validate_graph,
};

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

/// Declarative description of one agent's proximal map.
struct MapSpec {
  std::string kind;  // box | identity | fj | l1 | least_squares_l1
  int dim = 0;       // explicit dimension for boxless kinds
  Vec lo, hi;        // optional box
  bool has_box = false;
  Vec anchor;
  double stubbornness = 1.0;
  double tau = 0.0;
  Mat data;
  Vec observations;
  double inner_tol = 1e-10;

  bool operator==(const MapSpec&) const = default;
};

struct AsyncSection {
  std::vector<double> probs;  // empty: uniform
  int max_delay = 0;
  double psi = 1.0;
  std::string delay_model = "uniform_random";
  int window = 20;

  bool operator==(const AsyncSection&) const = default;
};

struct GnweSection {
  Mat coupling;  // dense C (or E when equalities = true)
  Vec rhs;
  bool equalities = false;
  std::optional<double> gamma;

  bool operator==(const GnweSection&) const = default;
};

struct DemoSection {
  int agents = 10;
  int topics = 3;
  double sigma_max = 1.13;
  std::vector<double> sigma_grid;  // lasso; empty: single sigma_max
  double tau = 1.0;
  int rows = 100;
  int dim = 6;

  bool operator==(const DemoSection&) const = default;
};

struct ExperimentConfig {
  Mode mode = Mode::sync;
  std::string out_dir = ".";
  std::vector<std::uint64_t> seeds = {1};
  double tol = 1e-9;
  std::int64_t max_iter = 100000;
  std::int64_t store_every = 1;
  bool quiet = false;

  std::optional<Mat> matrix;
  std::vector<Mat> matrices;
  std::vector<int> signal;
  std::int64_t random_signal_length = 0;

  std::vector<MapSpec> maps;
  std::optional<Vec> x0;
  bool x0_random = false;  // draw x0 per seed inside the boxes

  std::optional<double> relaxation;
  AsyncSection async;
  std::optional<GnweSection> gnwe;
  DemoSection demo;

  std::vector<std::string> warnings;  // cross-field advisories from parsing

  bool operator==(const ExperimentConfig& other) const;
};

/// Loads and validates a config; format chosen by extension (.json, or
/// .toml for the documented TOML subset). Parse errors name the offending
/// field and the expected type. Cross-field issues (e.g. an async delay
/// above the admissible bound) become warnings, not errors.
ExperimentConfig parse_config(const std::string& path);

ExperimentConfig parse_config_json(const nlohmann::json& j);

/// Canonical JSON for a config; parse_config_json(dump_config(c)) == c.
nlohmann::json dump_config(const ExperimentConfig& config);

/// Parses the supported TOML subset (key = value, [section] tables, strings,
/// numbers, booleans, nested arrays, # comments) into JSON.
nlohmann::json toml_subset_to_json(const std::string& text);

}  // namespace netgame
