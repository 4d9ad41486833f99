#include <cmath>
#include <string>
#include <vector>

#include "explab/ars.hpp"
#include "explab/data_env.hpp"
#include "explab/errors.hpp"
#include "explab/harness/experiments.hpp"
#include "explab/policy_gradient.hpp"

namespace explab::harness {

namespace {

/// Bias column untouched, the rest whitened by the running statistics.
RealMatrix normalize_features(const RealMatrix& X, const RunningMoments& moments) {
  if (moments.count() < 2) return X;
  const RealVector sd = moments.stddev().cwiseMax(1e-8);
  RealMatrix out = X;
  const Index d = X.cols() - 1;
  out.rightCols(d).rowwise() -= moments.mean().transpose();
  out.rightCols(d) = out.rightCols(d).array().rowwise() / sd.transpose().array();
  return out;
}

class LinregArsTask final : public ArsTask {
 public:
  LinregArsTask(const RegressionProblem& problem, std::int64_t minibatch)
      : problem_(problem), cursor_(problem), minibatch_(minibatch) {}

  Index param_dim() const override { return problem_.param_dim(); }
  Index input_dim() const override { return problem_.dim(); }
  std::int64_t samples_per_evaluation() const override { return minibatch_; }

  void begin_iteration(std::int64_t, RngStream&) override {
    batch_ = cursor_.next(static_cast<Index>(minibatch_));
  }

  double reward(const RealVector& params, const RunningMoments& normalizer,
                RunningMoments* visited, RngStream&) const override {
    if (visited != nullptr) {
      for (Index i = 0; i < batch_.size(); ++i) {
        visited->push(batch_.X.row(i).tail(problem_.dim()).transpose());
      }
    }
    const RealMatrix Xn = normalize_features(batch_.X, normalizer);
    return -(Xn * params - batch_.y).squaredNorm() / static_cast<double>(batch_.size());
  }

  double metric(const RealVector& params, const RunningMoments& normalizer) const override {
    const Dataset& test = problem_.test();
    const RealMatrix Xn = normalize_features(test.X, normalizer);
    return (Xn * params - test.y).squaredNorm() / static_cast<double>(test.size());
  }

 private:
  const RegressionProblem& problem_;
  SampleCursor cursor_;
  std::int64_t minibatch_;
  Dataset batch_;
};

struct Recorder {
  std::vector<CurvePoint>& out;
  const std::string& algorithm;
  std::string group;
  std::uint64_t seed;
  std::int64_t eval_every;
  std::int64_t next_eval;
  std::int64_t last = -1;

  void record(std::int64_t samples, double value) {
    out.push_back({algorithm, group, seed, samples, "test_mse", value});
    last = samples;
  }
  void maybe(std::int64_t samples, const std::function<double()>& value) {
    if (samples < next_eval) return;
    while (next_eval <= samples) next_eval += eval_every;
    record(samples, value());
  }
  void finish(std::int64_t samples, const std::function<double()>& value) {
    if (last != samples) record(samples, value());
  }
};

std::int64_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || std::floor(v) != v) throw ConfigError(std::string(what) + " must be a positive integer");
  return static_cast<std::int64_t>(v);
}

std::vector<CurvePoint> run_cell(const ExperimentConfig& config, const std::string& alg, Index d,
                                 std::uint64_t seed) {
  const TaskConfig& task = config.task;
  LinregOptions options;
  options.noise_std = task.noise_std;
  const RegressionProblem problem(d, std::max<std::int64_t>(task.budget, 1), task.n_test,
                                  derive_seed(seed, {"linreg", "problem", d}), options);
  RngStream rng = rng_derive(seed, {"linreg", alg, d});
  const Index p = problem.param_dim();
  const std::int64_t budget = task.budget;

  std::vector<CurvePoint> out;
  Recorder rec{out, alg, "d=" + std::to_string(d), seed, task.eval_every, task.eval_every};
  RealVector w = RealVector::Zero(p);
  auto mse = [&] { return eval_test_mse(w, problem); };

  if (alg == "ars_v2t") {
    ArsConfig ars = linreg_ars_config(d);
    ars.step_size = config.hyper(alg, "step_size", ars.step_size);
    ars.n_directions = static_cast<int>(as_count(config.hyper(alg, "n_directions", ars.n_directions), "n_directions"));
    ars.n_top = static_cast<int>(as_count(config.hyper(alg, "n_top", ars.n_top), "n_top"));
    ars.perturbation = config.hyper(alg, "perturbation", ars.perturbation);
    const std::int64_t minibatch = as_count(config.hyper(alg, "minibatch", 64), "minibatch");
    LinregArsTask ars_task(problem, minibatch);
    ArsTrainOptions train;
    train.budget = budget;
    train.eval_every = task.eval_every;
    const ArsTrainResult result = ars_train(ars_task, ars, w, train, rng);
    for (const auto& cp : result.curve) rec.record(cp.samples, cp.value);
    return out;
  }

  SampleCursor cursor(problem);
  std::int64_t samples = 0;
  rec.record(0, mse());

  if (alg == "supervised_sgd") {
    const double lr = config.hyper(alg, "lr", linreg_sgd_lr(d));
    const double momentum = config.hyper(alg, "momentum", 0.0);
    const std::int64_t batch = as_count(config.hyper(alg, "batch", 64), "batch");
    RealVector velocity = RealVector::Zero(p);
    while (samples + batch <= budget) {
      const Dataset b = cursor.next(static_cast<Index>(batch));
      const RealVector grad = (2.0 / static_cast<double>(batch)) * (b.X.transpose() * (b.X * w - b.y));
      sgd_momentum_step(w, velocity, grad, lr, momentum);
      samples += batch;
      rec.maybe(samples, mse);
    }
  } else if (alg == "supervised_newton") {
    // Newton step from the current iterate on the batch objective; the ridge keeps
    // under-determined batches (batch < d + 1) from moving along unobserved directions.
    const double ridge = config.hyper(alg, "ridge", 1e-6);
    const std::int64_t batch = as_count(config.hyper(alg, "batch", 64), "batch");
    while (samples + batch <= budget) {
      const Dataset b = cursor.next(static_cast<Index>(batch));
      w += newton_ls_step(b.X, b.y - b.X * w, ridge);
      samples += batch;
      rec.maybe(samples, mse);
    }
  } else if (alg == "reinforce" || alg == "natural_reinforce") {
    const bool natural = alg == "natural_reinforce";
    const double lr = config.hyper(alg, "lr", natural ? 2.0 : linreg_reinforce_lr(d));
    const double beta = config.hyper(alg, "beta", 0.5);
    const double damping = config.hyper(alg, "damping", 1e-6);
    const std::int64_t batch = as_count(config.hyper(alg, "batch", 512), "batch");
    AdamConfig adam_config;
    adam_config.lr = lr;
    AdamState adam = AdamState::zeros(p, adam_config);
    std::int64_t t = 0;
    while (samples + batch <= budget) {
      const Dataset b = cursor.next(static_cast<Index>(batch));
      const RealVector mean = b.X * w;
      RealVector sampled(b.size());
      for (Index i = 0; i < b.size(); ++i) sampled[i] = mean[i] + beta * rng.normal();
      const RealVector rewards = -(b.y - sampled).array().square().matrix();
      const GradientEstimate g = reinforce_gaussian_grad(b.X, sampled, rewards, w, beta);
      ++t;
      if (natural) {
        const GradientEstimate ng = natural_grad(b.X, g, beta, damping);
        w += (lr / std::sqrt(static_cast<double>(t))) * ng.g;
      } else {
        adam_step(adam, w, -g.g);
      }
      if (!w.allFinite()) throw NumericalError(alg + ": parameters became non-finite");
      samples += batch;
      rec.maybe(samples, mse);
    }
  } else {
    throw ConfigError("linreg: unsupported algorithm '" + alg + "'");
  }
  rec.finish(samples, mse);
  return out;
}

}  // namespace

ExperimentResult run_linreg_experiment(const ExperimentConfig& config) {
  config.validate();
  struct Cell {
    std::string alg;
    Index d;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& alg : config.algorithms) {
    for (const auto d : config.task.dims) {
      for (const auto seed : config.seeds) cells.push_back({alg, static_cast<Index>(d), seed});
    }
  }
  std::vector<std::vector<CurvePoint>> curves(cells.size());
  run_cells(cells.size(), config.workers, [&](std::size_t i) {
    curves[i] = run_cell(config, cells[i].alg, cells[i].d, cells[i].seed);
  });
  ExperimentResult result;
  result.experiment = "linreg";
  for (auto& c : curves) result.curve.insert(result.curve.end(), c.begin(), c.end());
  result.summary = summarize(result.curve);
  return result;
}

}  // namespace explab::harness
