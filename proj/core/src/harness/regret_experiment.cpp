#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "explab/data_env.hpp"
#include "explab/harness/experiments.hpp"
#include "explab/online_linreg.hpp"

namespace explab::harness {

namespace {

struct RunRow {
  std::int64_t T;
  double regret;
  double bound_rhs;
};

std::vector<RunRow> run_cell(const ExperimentConfig& config, LearnerKind kind, Index d,
                             std::uint64_t seed, const std::vector<std::int64_t>& grid) {
  const TaskConfig& task = config.task;
  const BoundsConfig bounds =
      BoundsConfig::from_radii(task.predictor_radius, task.feature_radius, task.target_bound);
  RegretStreamOptions options;
  options.latent_rank = static_cast<Index>(task.latent_rank);
  options.noise_std = task.noise_std;
  const Index p = d + 1;  // bias + d features
  RegretStream stream(p, bounds, derive_seed(seed, {"regret", "stream", d}), options);
  std::vector<RunRow> rows;
  RealVector x(p);
  for (const std::int64_t T : grid) {
    stream.reset();
    RngStream rng = rng_derive(seed, {"regret", to_string(kind), d, T});
    LinearPredictor pred = LinearPredictor::zeros(p);
    RegretLedger ledger(p);
    ScheduleParams schedule = theorem_schedule(kind, bounds, p, 1, T);
    for (std::int64_t t = 1; t <= T; ++t) {
      const double y = stream.next(x);
      if (kind == LearnerKind::kOgd) schedule = theorem_schedule(kind, bounds, p, t, T);
      ledger.record(play_round(kind, pred, x, y, schedule, rng, bounds, t));
    }
    const RegretResult r = empirical_regret(ledger, bounds, kind, p, T);
    rows.push_back({T, r.regret, r.bound_rhs});
  }
  return rows;
}

}  // namespace

ExperimentResult run_regret_experiment(const ExperimentConfig& config) {
  config.validate();
  const TaskConfig& task = config.task;
  const std::vector<std::int64_t> grid = regret_horizon_grid(task.horizons, task.max_rounds);
  struct Cell {
    std::string alg;
    Index d;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& alg : config.algorithms) {
    for (const auto d : task.dims) {
      for (const auto seed : config.seeds) cells.push_back({alg, static_cast<Index>(d), seed});
    }
  }
  std::vector<std::vector<RunRow>> runs(cells.size());
  run_cells(cells.size(), config.workers, [&](std::size_t i) {
    runs[i] = run_cell(config, parse_learner_kind(cells[i].alg), cells[i].d, cells[i].seed, grid);
  });

  ExperimentResult result;
  result.experiment = "regret";
  Table regret{"regret.csv", {"kind", "d", "T", "seed", "regret", "bound_rhs", "within_bound"}, {}};
  Table eps{"regret_eps.csv", {"kind", "d", "seed", "epsilon", "samples", "censored"}, {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const std::string group = "d=" + std::to_string(c.d);
    std::vector<std::pair<std::int64_t, double>> series;
    for (const RunRow& r : runs[i]) {
      const double avg = r.regret / static_cast<double>(r.T);
      result.curve.push_back({c.alg, group, c.seed, r.T, "avg_regret", avg});
      series.emplace_back(r.T, avg);
      regret.rows.push_back({c.alg, std::to_string(c.d), std::to_string(r.T), std::to_string(c.seed),
                             format_double(r.regret), format_double(r.bound_rhs),
                             r.regret <= r.bound_rhs ? "true" : "false"});
    }
    const auto hit = samples_to_threshold(
        series, [&](double v) { return v <= task.epsilon; }, static_cast<int>(task.patience));
    eps.rows.push_back({c.alg, std::to_string(c.d), std::to_string(c.seed),
                        format_double(task.epsilon), hit ? std::to_string(*hit) : "censored",
                        hit ? "false" : "true"});
  }
  result.summary = summarize(result.curve);
  result.tables = {regret, eps};
  return result;
}

}  // namespace explab::harness
