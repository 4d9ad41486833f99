#include "explab/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "explab/errors.hpp"

namespace explab::harness {

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  switch (config.experiment) {
    case Experiment::kLinreg:
      return run_linreg_experiment(config);
    case Experiment::kRegret:
      return run_regret_experiment(config);
    case Experiment::kLqr:
      return run_lqr_experiment(config);
    case Experiment::kBanditCls:
      return run_bandit_classification(config);
    case Experiment::kOracleCheck:
      return run_oracle_check(config);
  }
  throw ConfigError("unknown experiment");
}

namespace {

// 0 -> d=10 row, 1 -> d=100, 2 -> d=1000.
int table_row(Index d) {
  const double l = std::log10(static_cast<double>(std::max<Index>(d, 1)));
  if (l < 1.5) return 0;
  if (l < 2.5) return 1;
  return 2;
}

}  // namespace

double linreg_reinforce_lr(Index d) {
  static const double lr[] = {0.08, 0.03, 0.01};
  return lr[table_row(d)];
}

double linreg_sgd_lr(Index d) { return d <= 100 ? 0.1 : 0.01; }

ArsConfig linreg_ars_config(Index d) {
  ArsConfig c;
  c.variant = ArsVariant::kV2t;
  switch (table_row(d)) {
    case 0:
      c.step_size = 0.03, c.n_directions = 10, c.n_top = 10, c.perturbation = 0.03;
      break;
    case 1:
      c.step_size = 0.03, c.n_directions = 10, c.n_top = 10, c.perturbation = 0.02;
      break;
    default:
      c.step_size = 0.03, c.n_directions = 200, c.n_top = 200, c.perturbation = 0.03;
      break;
  }
  return c;
}

ArsConfig lqr_ars_config() {
  ArsConfig c;
  c.variant = ArsVariant::kV1t;
  c.step_size = 0.02;
  c.n_directions = 20;
  c.n_top = 10;
  c.perturbation = 0.02;
  return c;
}

double lqr_reinforce_lr() { return 0.01; }

int lqr_reinforce_batch() { return 10; }

std::vector<std::int64_t> regret_horizon_grid(const std::vector<std::int64_t>& horizons,
                                              std::int64_t max_rounds) {
  std::set<std::int64_t> grid(horizons.begin(), horizons.end());
  for (int k = 0;; ++k) {
    const auto T = static_cast<std::int64_t>(std::llround(100.0 * std::pow(10.0, 0.5 * k)));
    if (T >= max_rounds) break;
    grid.insert(T);
  }
  grid.insert(max_rounds);
  return {grid.begin(), grid.end()};
}

}  // namespace explab::harness
