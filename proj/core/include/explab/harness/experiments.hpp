#pragma once

#include <cstdint>
#include <string>

#include "explab/ars.hpp"
#include "explab/harness/config.hpp"
#include "explab/harness/output.hpp"
#include "explab/numeric.hpp"

namespace explab::harness {

ExperimentResult run_experiment(const ExperimentConfig& config);

ExperimentResult run_linreg_experiment(const ExperimentConfig& config);
ExperimentResult run_regret_experiment(const ExperimentConfig& config);
ExperimentResult run_lqr_experiment(const ExperimentConfig& config);
ExperimentResult run_bandit_classification(const ExperimentConfig& config);
ExperimentResult run_oracle_check(const ExperimentConfig& config);

/// Published defaults for the regression task, keyed on the input dimension. Dimensions between
/// the tabulated ones (10, 100, 1000) use the nearest entry on a log scale.
double linreg_reinforce_lr(Index d);
double linreg_sgd_lr(Index d);
ArsConfig linreg_ars_config(Index d);

/// Defaults for the LQR task, tuned on seeds 1000-1002 (disjoint from the evaluation seeds).
ArsConfig lqr_ars_config();
double lqr_reinforce_lr();
int lqr_reinforce_batch();

/// Regret runs: horizons of the samples-to-epsilon grid (half decades from 100 to max_rounds,
/// plus max_rounds) merged with the bound-check horizons.
std::vector<std::int64_t> regret_horizon_grid(const std::vector<std::int64_t>& horizons,
                                              std::int64_t max_rounds);

}  // namespace explab::harness
