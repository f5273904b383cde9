#include "netgame/experiment.hpp"

#include "netgame/async.hpp"
#include "netgame/gnwe.hpp"
#include "netgame/io.hpp"
#include "netgame/models.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace netgame {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int thread_cap() {
  if (const char* env = std::getenv("NETGAME_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs `job(seed_index)` for every seed, at most `cap` at a time.
void for_each_seed(std::size_t n_seeds, const std::function<void(std::size_t)>& job) {
  const int cap = std::min<int>(thread_cap(), static_cast<int>(n_seeds));
  if (cap <= 1) {
    for (std::size_t i = 0; i < n_seeds; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::mutex error_mutex;
  std::exception_ptr first_error;
  for (int t = 0; t < cap; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n_seeds; i = next.fetch_add(1)) {
        try {
          job(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string seed_prefix(const ExperimentConfig& config, std::uint64_t seed) {
  return (fs::path(config.out_dir) / ("seed" + std::to_string(seed) + "_")).string();
}

double elapsed_s(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - from).count();
}

json run_summary(const ExperimentConfig& config, std::uint64_t seed, const TrajectoryRecord& rec,
                 double wall_time) {
  json j = summary_json(rec);
  j["seed"] = seed;
  j["mode"] = mode_name(config.mode);
  j["wall_time_s"] = wall_time;
  if (!config.warnings.empty()) j["warnings"] = config.warnings;
  return j;
}

Vec resolve_x0(const ExperimentConfig& config, const std::vector<ProximalMap>& maps, Rng& rng) {
  Eigen::Index total = 0;
  for (const auto& m : maps) total += m.state_dim;
  if (config.x0) {
    if (config.x0->size() != total) throw ConfigError("field 'x0': length does not match N*n");
    return *config.x0;
  }
  Vec x0(total);
  Eigen::Index at = 0;
  for (const auto& m : maps) {
    for (int c = 0; c < m.state_dim; ++c, ++at) {
      const double lo = m.has_box && std::isfinite(m.lo[c]) ? m.lo[c] : 0.0;
      const double hi = m.has_box && std::isfinite(m.hi[c]) ? m.hi[c] : 1.0;
      x0[at] = config.x0_random ? rng.uniform(lo, hi) : 0.5 * (lo + hi);
    }
  }
  return x0;
}

int mode_validate_graph(const ExperimentConfig& config) {
  const ValidationReport report = validate_standing_assumption(*config.matrix);
  json j;
  j["passed"] = report.passed;
  json clauses = json::array();
  for (const auto& c : report.clauses) {
    json cj;
    cj["name"] = c.name;
    cj["passed"] = c.passed;
    cj["offending"] = c.offending;
    clauses.push_back(cj);
    if (!config.quiet)
      std::cout << (c.passed ? "pass " : "FAIL ") << c.name
                << (c.offending.empty() ? "" : " (indices listed in report)") << "\n";
  }
  j["clauses"] = clauses;
  write_json((fs::path(config.out_dir) / "validation.json").string(), j);
  return 0;
}

int mode_sync(const ExperimentConfig& config) {
  json seeds_summary = json::array();
  std::mutex summary_mutex;
  for_each_seed(config.seeds.size(), [&](std::size_t idx) {
    const std::uint64_t seed = config.seeds[idx];
    const auto start = std::chrono::steady_clock::now();
    Rng rng(seed);
    std::vector<ProximalMap> maps = build_maps(config.maps);
    GameSpec game(std::move(maps), RowStochasticMatrix(*config.matrix));
    const Vec x0 = resolve_x0(config, game.maps, rng);

    RunOptions opts;
    opts.tol = config.tol;
    opts.max_iter = config.max_iter;
    opts.relaxation = config.relaxation;
    opts.store_every = config.store_every;
    const TrajectoryRecord rec = run_sync(game, x0, opts);

    const std::string prefix = seed_prefix(config, seed);
    write_trajectory_csv(prefix + "trajectory.csv", rec, game.state_dim());
    write_series_csv(prefix + "residuals.csv", "residual", rec.residual_steps, rec.residuals);
    const json j = run_summary(config, seed, rec, elapsed_s(start));
    write_json(prefix + "summary.json", j);
    std::scoped_lock lock(summary_mutex);
    seeds_summary.push_back(j);
  });
  json top;
  top["config"] = dump_config(config);
  top["runs"] = seeds_summary;
  write_json((fs::path(config.out_dir) / "summary.json").string(), top);
  return 0;
}

AsyncConfig async_from_section(const AsyncSection& section, int n_agents) {
  AsyncConfig ac;
  ac.activation_probs = section.probs.empty()
                            ? std::vector<double>(static_cast<std::size_t>(n_agents), 1.0 / n_agents)
                            : section.probs;
  ac.max_delay = section.max_delay;
  ac.psi = section.psi;
  if (section.delay_model == "fixed") {
    ac.delay_model = DelayModel::fixed;
    ac.fixed_delay = section.max_delay;
  } else if (section.delay_model == "adversarial_max") {
    ac.delay_model = DelayModel::adversarial_max;
  } else {
    ac.delay_model = DelayModel::uniform_random;
  }
  return ac;
}

int mode_async(const ExperimentConfig& config) {
  json seeds_summary = json::array();
  std::mutex summary_mutex;
  for_each_seed(config.seeds.size(), [&](std::size_t idx) {
    const std::uint64_t seed = config.seeds[idx];
    const auto start = std::chrono::steady_clock::now();
    Rng rng(seed);
    GameSpec game(build_maps(config.maps), RowStochasticMatrix(*config.matrix));
    const Vec x0 = resolve_x0(config, game.maps, rng);
    const AsyncConfig ac = async_from_section(config.async, game.n_agents());

    AsyncRunOptions opts;
    opts.tol = config.tol;
    opts.max_iter = config.max_iter;
    opts.window = config.async.window;
    opts.store_every = config.store_every;
    const TrajectoryRecord rec = run_async(game, x0, ac, seed, opts);

    const std::string prefix = seed_prefix(config, seed);
    write_async_csv(prefix + "async.csv", rec, rec.active_agents);
    write_trajectory_csv(prefix + "trajectory.csv", rec, game.state_dim());
    const json j = run_summary(config, seed, rec, elapsed_s(start));
    write_json(prefix + "summary.json", j);
    std::scoped_lock lock(summary_mutex);
    seeds_summary.push_back(j);
  });
  json top;
  top["config"] = dump_config(config);
  top["runs"] = seeds_summary;
  write_json((fs::path(config.out_dir) / "summary.json").string(), top);
  return 0;
}

int mode_timevarying(const ExperimentConfig& config) {
  json seeds_summary = json::array();
  std::mutex summary_mutex;
  for_each_seed(config.seeds.size(), [&](std::size_t idx) {
    const std::uint64_t seed = config.seeds[idx];
    const auto start = std::chrono::steady_clock::now();
    Rng rng(seed);
    std::vector<RowStochasticMatrix> mats;
    mats.reserve(config.matrices.size());
    for (const Mat& m : config.matrices) mats.emplace_back(m);
    MatrixSet set(std::move(mats));
    std::vector<ProximalMap> maps = build_maps(config.maps);
    const Vec x0 = resolve_x0(config, maps, rng);

    std::vector<int> signal = config.signal;
    if (signal.empty()) {
      const std::int64_t len = config.random_signal_length > 0 ? config.random_signal_length : 1000;
      signal.reserve(static_cast<std::size_t>(len));
      for (std::int64_t k = 0; k < len; ++k)
        signal.push_back(static_cast<int>(rng.uniform_int(0, static_cast<int>(set.matrices.size()) - 1)));
    }

    RunOptions opts;
    opts.tol = config.tol;
    opts.max_iter = config.max_iter;
    opts.store_every = config.store_every;
    const TrajectoryRecord rec = run_tv(maps, set, signal, x0, opts);

    const int n = maps.front().state_dim;
    const std::string prefix = seed_prefix(config, seed);
    write_trajectory_csv(prefix + "trajectory.csv", rec, n);
    write_series_csv(prefix + "residuals.csv", "residual", rec.residual_steps, rec.residuals);
    const json j = run_summary(config, seed, rec, elapsed_s(start));
    write_json(prefix + "summary.json", j);
    std::scoped_lock lock(summary_mutex);
    seeds_summary.push_back(j);
  });
  json top;
  top["config"] = dump_config(config);
  top["runs"] = seeds_summary;
  write_json((fs::path(config.out_dir) / "summary.json").string(), top);
  return 0;
}

json params_json(const GnweParams& params) {
  json j;
  j["gamma"] = params.gamma;
  j["beta"] = params.beta;
  j["alpha"] = std::vector<double>(params.alpha.data(), params.alpha.data() + params.alpha.size());
  j["delta"] = std::vector<double>(params.delta.data(), params.delta.data() + params.delta.size());
  return j;
}

int mode_gnwe(const ExperimentConfig& config) {
  json seeds_summary = json::array();
  std::mutex summary_mutex;
  for_each_seed(config.seeds.size(), [&](std::size_t idx) {
    const std::uint64_t seed = config.seeds[idx];
    const auto start = std::chrono::steady_clock::now();
    Rng rng(seed);
    GameSpec game(build_maps(config.maps), RowStochasticMatrix(*config.matrix));
    const GnweSection& section = *config.gnwe;
    const CouplingConstraints constraints =
        section.equalities
            ? CouplingConstraints::equalities_from_dense(section.coupling, section.rhs, game.n_agents())
            : CouplingConstraints::from_dense(section.coupling, section.rhs, game.n_agents());

    const Vec q = game.matrix.pf_vector();
    const Vec alpha = q / q.sum();
    const GnweParams params = feasible_params(game.matrix, constraints, alpha, section.gamma);

    Vec x0 = config.x0 || config.x0_random ? resolve_x0(config, game.maps, rng)
                                           : block_prox(game.maps, Vec::Zero(game.stacked_dim()));
    const Vec sigma0 = Vec::Zero(constraints.n_constraints());

    GnweRunOptions opts;
    opts.tol = config.tol;
    opts.max_iter = config.max_iter;
    opts.store_every = config.store_every;
    const TrajectoryRecord rec = run_prox_gnwe(game, constraints, params, x0, sigma0, opts);

    const std::string prefix = seed_prefix(config, seed);
    write_trajectory_csv(prefix + "trajectory.csv", rec, game.state_dim());
    write_series_csv(prefix + "violations.csv", "violation", rec.violation_steps, rec.violations);
    write_series_csv(prefix + "residuals.csv", "update_norm", rec.residual_steps, rec.residuals);
    json j = run_summary(config, seed, rec, elapsed_s(start));
    j["params"] = params_json(params);
    write_json(prefix + "summary.json", j);
    std::scoped_lock lock(summary_mutex);
    seeds_summary.push_back(j);
  });
  json top;
  top["config"] = dump_config(config);
  top["runs"] = seeds_summary;
  write_json((fs::path(config.out_dir) / "summary.json").string(), top);
  return 0;
}

int mode_demo_fj(const ExperimentConfig& config) {
  json seeds_summary = json::array();
  std::mutex summary_mutex;
  for_each_seed(config.seeds.size(), [&](std::size_t idx) {
    const std::uint64_t seed = config.seeds[idx];
    const auto start = std::chrono::steady_clock::now();
    Rng rng(seed);
    const int n_agents = config.demo.agents;
    const int topics = config.demo.topics;

    RowStochasticMatrix matrix(random_row_stochastic(rng, n_agents, 0.6, 0.9));
    FjProfile profile;
    profile.topics = topics;
    profile.initial_opinions = rng.uniform_vec(static_cast<Eigen::Index>(n_agents) * topics, 0.0, 1.0);
    for (int i = 0; i < n_agents; ++i) profile.stubbornness.push_back(i < n_agents / 2 ? 0.5 : 0.1);
    GameSpec game = build_friedkin_johnsen(profile, matrix);

    RunOptions sync_opts;
    sync_opts.tol = config.tol;
    sync_opts.max_iter = config.max_iter;
    const TrajectoryRecord sync_rec = run_sync(game, profile.initial_opinions, sync_opts);
    const std::string prefix = seed_prefix(config, seed);
    write_series_csv(prefix + "sync_residuals.csv", "residual", sync_rec.residual_steps,
                     sync_rec.residuals);

    const double a_floor = matrix.min_self_loop();
    const double bound = delay_bound(n_agents, 1.0 / n_agents, a_floor);
    const int admissible = std::max(0, static_cast<int>(std::ceil(bound)) - 1);

    // Scenario list from the opinion-dynamics comparison: uniform/no delay,
    // skewed/no delay, uniform with an admissible delay, uniform with a
    // large delay beyond the bound.
    struct Scenario {
      std::string name;
      std::vector<double> probs;
      int max_delay;
    };
    std::vector<double> skewed(static_cast<std::size_t>(n_agents));
    for (auto& p : skewed) p = 0.02 + rng.uniform();
    skewed[0] = 2.0;  // one dominant agent makes the distribution clearly non-uniform
    double sum = 0.0;
    for (double p : skewed) sum += p;
    for (auto& p : skewed) p /= sum;

    const std::vector<double> uniform(static_cast<std::size_t>(n_agents), 1.0 / n_agents);
    const std::vector<Scenario> scenarios = {
        {"A1", uniform, 0}, {"A2", skewed, 0}, {"A3", uniform, admissible}, {"A4", uniform, 50}};

    json scenario_summary = json::object();
    for (const auto& sc : scenarios) {
      AsyncConfig ac;
      ac.activation_probs = sc.probs;
      ac.max_delay = sc.max_delay;
      AsyncRunOptions opts;
      opts.tol = config.tol;
      opts.max_iter = config.max_iter * n_agents;
      const TrajectoryRecord rec = run_async(game, profile.initial_opinions, ac, seed, opts);
      write_series_csv(prefix + "async_" + sc.name + "_residuals.csv", "residual", rec.residual_steps,
                       rec.residuals);
      json sj = summary_json(rec);
      sj["max_delay"] = sc.max_delay;
      if (sync_rec.converged && !sync_rec.iterates.empty() && !rec.iterates.empty())
        sj["gap_to_sync_limit"] =
            (rec.iterates.back() - sync_rec.iterates.back()).lpNorm<Eigen::Infinity>();
      scenario_summary[sc.name] = sj;
    }

    json j = run_summary(config, seed, sync_rec, elapsed_s(start));
    j["async_scenarios"] = scenario_summary;
    j["delay_bound"] = bound;
    write_json(prefix + "summary.json", j);
    std::scoped_lock lock(summary_mutex);
    seeds_summary.push_back(j);
  });
  json top;
  top["config"] = dump_config(config);
  top["runs"] = seeds_summary;
  write_json((fs::path(config.out_dir) / "summary.json").string(), top);
  return 0;
}

int mode_demo_degroot(const ExperimentConfig& config) {
  json seeds_summary = json::array();
  std::mutex summary_mutex;
  for_each_seed(config.seeds.size(), [&](std::size_t idx) {
    const std::uint64_t seed = config.seeds[idx];
    const auto start = std::chrono::steady_clock::now();
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const DegrootTvInstance instance = make_degroot_tv_instance(seed);
    std::vector<RowStochasticMatrix> mats;
    for (const Mat& m : instance.matrices) mats.emplace_back(m);
    DegrootGame game = build_degroot_bounded(instance.boxes, std::move(mats));

    std::vector<int> signal;
    for (int k = 0; k < 1000; ++k)
      signal.push_back(static_cast<int>(rng.uniform_int(0, static_cast<int>(instance.matrices.size()) - 1)));

    Vec x0(instance.boxes.size());
    for (std::size_t i = 0; i < instance.boxes.size(); ++i)
      x0[static_cast<Eigen::Index>(i)] = rng.uniform(instance.boxes[i].first, instance.boxes[i].second);

    RunOptions opts;
    opts.tol = config.tol;
    opts.max_iter = config.max_iter;
    const TrajectoryRecord rec = run_tv(game.maps, game.matrices, signal, x0, opts);

    const std::string prefix = seed_prefix(config, seed);
    write_trajectory_csv(prefix + "opinions.csv", rec, 1);
    write_series_csv(prefix + "residuals.csv", "residual", rec.residual_steps, rec.residuals);
    json j = run_summary(config, seed, rec, elapsed_s(start));
    if (!rec.iterates.empty()) {
      const Vec& final = rec.iterates.back();
      j["final_state"] = std::vector<double>(final.data(), final.data() + final.size());
    }
    write_json(prefix + "summary.json", j);
    std::scoped_lock lock(summary_mutex);
    seeds_summary.push_back(j);
  });
  json top;
  top["config"] = dump_config(config);
  top["runs"] = seeds_summary;
  write_json((fs::path(config.out_dir) / "summary.json").string(), top);
  return 0;
}

int mode_demo_lasso(const ExperimentConfig& config) {
  std::vector<double> grid = config.demo.sigma_grid;
  if (grid.empty()) grid = {config.demo.sigma_max};

  json runs = json::array();
  std::mutex summary_mutex;
  for_each_seed(config.seeds.size(), [&](std::size_t idx) {
    const std::uint64_t seed = config.seeds[idx];
    for (double sigma_max : grid) {
      const auto start = std::chrono::steady_clock::now();
      const LassoSynthesis synth = make_lasso_synthesis(config.demo.agents, config.demo.dim,
                                                        config.demo.rows, sigma_max, config.demo.tau, seed);
      LassoGame lasso = build_distributed_lasso(synth.instance, synth.matrix);
      // Fair-split multiplier weights (see the gnwe mode for the PF-weighted
      // variant): keeps the consensus fit free of multiplier bias.
      const Vec alpha = Vec::Constant(config.demo.agents, 1.0 / config.demo.agents);
      const GnweParams params = feasible_params(lasso.game.matrix, lasso.constraints, alpha);

      GnweRunOptions opts;
      opts.tol = config.tol;
      opts.max_iter = config.max_iter;
      opts.store_every = std::max<std::int64_t>(config.store_every, 25);
      const TrajectoryRecord rec =
          run_prox_gnwe(lasso.game, lasso.constraints, params, Vec::Zero(lasso.game.stacked_dim()),
                        Vec::Zero(lasso.constraints.n_constraints()), opts);

      std::ostringstream tag;
      tag << "seed" << seed << "_sigma" << sigma_max << "_";
      const std::string prefix = (fs::path(config.out_dir) / tag.str()).string();
      write_series_csv(prefix + "violations.csv", "violation", rec.violation_steps, rec.violations);

      const std::vector<double> mse =
          mse_curve(rec.iterates, synth.instance.stacked_data(), synth.y_clean, true);
      write_series_csv(prefix + "mse.csv", "normalized_mse", rec.iterate_steps, mse);

      json j = run_summary(config, seed, rec, elapsed_s(start));
      j["sigma_max"] = sigma_max;
      j["params"] = params_json(params);
      j["final_mse"] = mse.empty() ? 0.0 : mse.back();
      write_json(prefix + "summary.json", j);
      std::scoped_lock lock(summary_mutex);
      runs.push_back(j);
    }
  });
  json top;
  top["config"] = dump_config(config);
  top["runs"] = runs;
  write_json((fs::path(config.out_dir) / "summary.json").string(), top);
  return 0;
}

}  // namespace

std::vector<ProximalMap> build_maps(const std::vector<MapSpec>& specs) {
  std::vector<ProximalMap> maps;
  maps.reserve(specs.size());
  for (const MapSpec& spec : specs) {
    if (spec.kind == "box") {
      maps.push_back(make_box_map(spec.lo, spec.hi));
    } else if (spec.kind == "identity") {
      maps.push_back(make_identity_map(spec.dim));
    } else if (spec.kind == "fj") {
      maps.push_back(make_fj_map(spec.anchor, spec.stubbornness, spec.lo, spec.hi));
    } else if (spec.kind == "l1") {
      maps.push_back(spec.has_box ? make_l1_map(spec.tau, spec.lo, spec.hi)
                                  : make_l1_map(spec.dim, spec.tau));
    } else if (spec.kind == "least_squares_l1") {
      ProximalMap m = make_least_squares_l1_map(spec.data, spec.observations, spec.tau, spec.inner_tol);
      if (spec.has_box) {
        m.lo = spec.lo;
        m.hi = spec.hi;
        m.has_box = true;
      }
      maps.push_back(std::move(m));
    } else {
      throw ConfigError("build_maps: unknown map kind '" + spec.kind + "'");
    }
  }
  return maps;
}

int run_experiment(const ExperimentConfig& config) {
  try {
    fs::create_directories(config.out_dir);
    if (!config.quiet)
      for (const std::string& w : config.warnings) std::cerr << "warning: " << w << "\n";
    switch (config.mode) {
      case Mode::validate_graph: return mode_validate_graph(config);
      case Mode::sync: return mode_sync(config);
      case Mode::async_updates: return mode_async(config);
      case Mode::timevarying: return mode_timevarying(config);
      case Mode::gnwe: return mode_gnwe(config);
      case Mode::demo_fj: return mode_demo_fj(config);
      case Mode::demo_degroot: return mode_demo_degroot(config);
      case Mode::demo_lasso: return mode_demo_lasso(config);
    }
    std::cerr << "run_experiment: unhandled mode\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "run_experiment: " << err.what() << "\n";
    return 1;
  }
}

}  // namespace netgame
