#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "explab/harness/experiments.hpp"
#include "explab/lqr_env.hpp"

namespace explab::harness {

namespace {

struct OracleRow {
  Index d = 0;
  Index H = 0;
  double optimal = 0.0;
  double best = 0.0;
};

OracleRow check_system(const TaskConfig& task, std::uint64_t seed, std::int64_t index) {
  RngStream rng = rng_derive(seed, {"oracle", index});
  OracleRow row;
  row.d = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(task.max_dim)));
  row.H = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(task.max_horizon)));
  const double rho = 0.1 + 0.89 * rng.uniform();
  const LqrSystem system = gen_lqr_system(row.d, rng.next_u64(), rho, 0.0);
  row.optimal = riccati_optimal(system, row.H).optimal_cost;
  row.best = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k < task.n_policies; ++k) {
    const double scale = std::pow(10.0, -2.0 + 3.0 * rng.uniform());
    const RealVector w = scale * sample_normal(row.d, rng);
    row.best = std::min(row.best, deterministic_cost(system, w, row.H));
  }
  return row;
}

}  // namespace

ExperimentResult run_oracle_check(const ExperimentConfig& config) {
  config.validate();
  const TaskConfig& task = config.task;
  const auto n = static_cast<std::size_t>(task.n_systems);
  std::vector<OracleRow> rows(config.seeds.size() * n);
  run_cells(rows.size(), config.workers, [&](std::size_t i) {
    rows[i] = check_system(task, config.seeds[i / n], static_cast<std::int64_t>(i % n));
  });

  ExperimentResult result;
  result.experiment = "oracle_check";
  Table table{"oracle.csv",
              {"seed", "system", "d", "H", "optimal_cost", "best_policy_cost", "ratio", "dominates"},
              {}};
  const std::string group = "max_dim=" + std::to_string(task.max_dim);
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const OracleRow& r = rows[s * n + i];
      const double ratio = r.best / r.optimal;
      min_ratio = std::min(min_ratio, ratio);
      table.rows.push_back({std::to_string(config.seeds[s]), std::to_string(i), std::to_string(r.d),
                            std::to_string(r.H), format_double(r.optimal), format_double(r.best),
                            format_double(ratio),
                            r.best >= r.optimal * (1.0 - 1e-12) ? "true" : "false"});
    }
    result.curve.push_back({"random_policy", group, config.seeds[s],
                            task.n_systems * task.n_policies, "min_cost_ratio", min_ratio});
  }
  result.summary = summarize(result.curve);
  result.tables = {table};
  return result;
}

}  // namespace explab::harness
