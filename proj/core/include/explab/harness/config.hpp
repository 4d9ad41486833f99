#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace explab::harness {

enum class Experiment { kLinreg, kRegret, kLqr, kBanditCls, kOracleCheck };

std::string_view to_string(Experiment experiment);
/// Accepts snake_case names and the CLI spelling "bandit-cls" / "oracle-check".
Experiment parse_experiment(std::string_view name);

/// Task parameters; which keys are accepted depends on the experiment (see README).
struct TaskConfig {
  std::vector<std::int64_t> dims;
  std::vector<std::int64_t> horizons;
  std::int64_t budget = 0;
  std::int64_t eval_every = 1024;
  std::int64_t eval_every_iterations = 10;
  std::int64_t n_train = 0;
  std::int64_t n_test = 0;
  double noise_std = 1e-3;
  double epsilon = 0.15;
  std::int64_t max_rounds = 1000000;
  double predictor_radius = 1.0;
  double feature_radius = 1.0;
  double target_bound = 1.0;
  std::int64_t latent_rank = 2;
  std::int64_t patience = 1;
  std::int64_t state_dim = 20;
  double tolerance = 0.05;
  double control_cost = 1e-3;
  double noise_scale = 1e-4;
  double target_rho = 0.95;
  std::string system_file;
  std::int64_t num_classes = 4;
  double separation = 3.0;
  std::int64_t n_systems = 100;
  std::int64_t max_dim = 5;
  std::int64_t max_horizon = 20;
  std::int64_t n_policies = 1000;
};

using HyperParams = std::map<std::string, double>;

struct ExperimentConfig {
  Experiment experiment = Experiment::kLinreg;
  std::vector<std::string> algorithms;
  std::vector<std::uint64_t> seeds;
  int workers = 1;
  std::string output_dir = "out";
  TaskConfig task;
  /// algorithm name -> overrides of its defaults
  std::map<std::string, HyperParams> hyperparameters;

  /// Throws ConfigError on bad pairings, empty or repeated seeds, out-of-range values.
  void validate() const;
  /// Override from the config, or `fallback`.
  double hyper(const std::string& algorithm, const std::string& key, double fallback) const;
};

/// Defaults for one experiment: 10 seeds (0..9), the experiment's default algorithms.
ExperimentConfig default_config(Experiment experiment);

/// Strict parse: unknown keys anywhere are ConfigError. Missing keys take defaults.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Canonical JSON with every resolved field, keys sorted.
std::string config_to_json(const ExperimentConfig& config);

/// Algorithms accepted by an experiment.
const std::vector<std::string>& allowed_algorithms(Experiment experiment);

}  // namespace explab::harness
