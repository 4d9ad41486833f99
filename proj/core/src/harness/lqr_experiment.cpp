#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "explab/ars.hpp"
#include "explab/errors.hpp"
#include "explab/harness/experiments.hpp"
#include "explab/lqr_env.hpp"
#include "explab/policy_gradient.hpp"

namespace explab::harness {

namespace {

class LqrArsTask final : public ArsTask {
 public:
  LqrArsTask(const LqrSystem& system, Index H, double optimal_cost)
      : system_(system), H_(H), optimal_(optimal_cost) {}

  Index param_dim() const override { return system_.dim(); }
  Index input_dim() const override { return system_.dim(); }
  std::int64_t samples_per_evaluation() const override { return H_; }

  double reward(const RealVector& params, const RunningMoments&, RunningMoments*,
                RngStream& rng) const override {
    const LinearGaussianPolicy policy{params, 0.0};
    return -rollout_policy(system_, policy, H_, rng, {false, true}).total_cost;
  }

  double metric(const RealVector& params, const RunningMoments&) const override {
    return deterministic_cost(system_, params, H_) / optimal_;
  }

 private:
  const LqrSystem& system_;
  Index H_;
  double optimal_;
};

std::int64_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || std::floor(v) != v) throw ConfigError(std::string(what) + " must be a positive integer");
  return static_cast<std::int64_t>(v);
}

std::vector<CurvePoint> run_cell(const ExperimentConfig& config, const LqrSystem& system,
                                 const std::string& alg, Index H, std::uint64_t seed) {
  const TaskConfig& task = config.task;
  const double optimal = riccati_optimal(system, H).optimal_cost;
  RngStream init_rng = rng_derive(seed, {"lqr", "init"});
  const LinearGaussianPolicy init = init_unstable_policy(system, init_rng);
  RngStream rng = rng_derive(seed, {"lqr", alg, H});
  const std::string group = "H=" + std::to_string(H);
  std::vector<CurvePoint> out;
  auto record = [&](std::int64_t samples, double ratio) {
    out.push_back({alg, group, seed, samples, "cost_ratio", ratio});
  };

  if (alg == "ars_v1t") {
    ArsConfig ars = lqr_ars_config();
    ars.step_size = config.hyper(alg, "step_size", ars.step_size);
    ars.n_directions = static_cast<int>(as_count(config.hyper(alg, "n_directions", ars.n_directions), "n_directions"));
    ars.n_top = static_cast<int>(as_count(config.hyper(alg, "n_top", ars.n_top), "n_top"));
    ars.perturbation = config.hyper(alg, "perturbation", ars.perturbation);
    LqrArsTask ars_task(system, H, optimal);
    ArsTrainOptions train;
    train.budget = task.budget;
    train.eval_every = task.eval_every_iterations * 2 * ars.n_directions * H;
    const ArsTrainResult result = ars_train(ars_task, ars, init.w, train, rng);
    for (const auto& cp : result.curve) record(cp.samples, cp.value);
    return out;
  }
  if (alg != "reinforce") throw ConfigError("lqr: unsupported algorithm '" + alg + "'");

  const double lr = config.hyper(alg, "lr", lqr_reinforce_lr());
  const std::int64_t batch = as_count(config.hyper(alg, "batch", lqr_reinforce_batch()), "batch");
  const bool cost_to_go = config.hyper(alg, "use_cost_to_go", 1.0) != 0.0;
  const Index d = system.dim();
  RealVector theta(d + 1);
  theta.head(d) = init.w;
  theta[d] = init.log_std;
  AdamConfig adam_config;
  adam_config.lr = lr;
  AdamState adam = AdamState::zeros(d + 1, adam_config);
  const std::int64_t cost = batch * H;
  std::int64_t samples = 0;
  std::int64_t iteration = 0;
  record(0, deterministic_cost(system, theta.head(d), H) / optimal);
  std::vector<Trajectory> trajs(static_cast<std::size_t>(batch));
  while (samples + cost <= task.budget) {
    const LinearGaussianPolicy policy{theta.head(d), theta[d]};
    for (auto& traj : trajs) traj = rollout_policy(system, policy, H, rng, {true, true});
    const GradientEstimate g = reinforce_trajectory_grad(trajs, policy, cost_to_go);
    if (!g.g.allFinite()) throw NumericalError("reinforce: non-finite gradient");
    adam_step(adam, theta, g.g);
    samples += cost;
    ++iteration;
    if (iteration % task.eval_every_iterations == 0) {
      record(samples, deterministic_cost(system, theta.head(d), H) / optimal);
    }
  }
  if (out.back().samples != samples) {
    record(samples, deterministic_cost(system, theta.head(d), H) / optimal);
  }
  return out;
}

}  // namespace

ExperimentResult run_lqr_experiment(const ExperimentConfig& config) {
  config.validate();
  const TaskConfig& task = config.task;
  std::vector<LqrSystem> systems;
  for (const auto seed : config.seeds) {
    if (!task.system_file.empty()) {
      systems.push_back(load_lqr_system(task.system_file));
    } else {
      systems.push_back(gen_lqr_system(static_cast<Index>(task.state_dim),
                                       derive_seed(seed, {"lqr", "system"}), task.target_rho,
                                       task.noise_scale, task.control_cost));
    }
  }
  struct Cell {
    std::string alg;
    Index H;
    std::size_t seed_index;
  };
  std::vector<Cell> cells;
  for (const auto& alg : config.algorithms) {
    for (const auto H : task.horizons) {
      for (std::size_t s = 0; s < config.seeds.size(); ++s) {
        cells.push_back({alg, static_cast<Index>(H), s});
      }
    }
  }
  std::vector<std::vector<CurvePoint>> curves(cells.size());
  run_cells(cells.size(), config.workers, [&](std::size_t i) {
    const Cell& c = cells[i];
    curves[i] = run_cell(config, systems[c.seed_index], c.alg, c.H, config.seeds[c.seed_index]);
  });

  ExperimentResult result;
  result.experiment = "lqr";
  Table table{"lqr.csv", {"H", "alg", "seed", "samples", "success"}, {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::vector<std::pair<std::int64_t, double>> series;
    for (const auto& p : curves[i]) series.emplace_back(p.samples, p.value);
    const auto hit = samples_to_threshold(
        series, [&](double v) { return v <= 1.0 + task.tolerance; }, static_cast<int>(task.patience));
    table.rows.push_back({std::to_string(cells[i].H), cells[i].alg,
                          std::to_string(config.seeds[cells[i].seed_index]),
                          hit ? std::to_string(*hit) : "censored", hit ? "true" : "false"});
    result.curve.insert(result.curve.end(), curves[i].begin(), curves[i].end());
  }
  result.summary = summarize(result.curve);
  result.tables = {table};
  return result;
}

}  // namespace explab::harness
