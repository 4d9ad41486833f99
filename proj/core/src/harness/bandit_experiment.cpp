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

RealMatrix with_bias(const RealMatrix& X) {
  RealMatrix out(X.rows(), X.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(X.cols()) = X;
  return out;
}

RealMatrix normalize_features(const RealMatrix& Xb, const RunningMoments& moments) {
  if (moments.count() < 2) return Xb;
  const RealVector sd = moments.stddev().cwiseMax(1e-8);
  RealMatrix out = Xb;
  const Index d = Xb.cols() - 1;
  out.rightCols(d).rowwise() -= moments.mean().transpose();
  out.rightCols(d) = out.rightCols(d).array().rowwise() / sd.transpose().array();
  return out;
}

double accuracy(const RealMatrix& theta, const RealMatrix& Xb, const std::vector<int>& labels) {
  const RealMatrix logits = Xb * theta.transpose();
  int correct = 0;
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    logits.row(i).maxCoeff(&best);
    correct += static_cast<int>(best) == labels[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

struct Batch {
  RealMatrix Xb;
  std::vector<int> labels;
};

Batch draw_batch(const ClassificationProblem& prob, const RealMatrix& train_b, Index n,
                 RngStream& rng) {
  Batch b;
  b.Xb.resize(n, train_b.cols());
  b.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto idx = static_cast<Index>(rng.below(static_cast<std::uint64_t>(train_b.rows())));
    b.Xb.row(i) = train_b.row(idx);
    b.labels[static_cast<std::size_t>(i)] = prob.train_labels[static_cast<std::size_t>(idx)];
  }
  return b;
}

class BanditArsTask final : public ArsTask {
 public:
  BanditArsTask(const ClassificationProblem& prob, const RealMatrix& train_b,
                const RealMatrix& test_b, std::int64_t minibatch)
      : prob_(prob), train_b_(train_b), test_b_(test_b), minibatch_(minibatch) {}

  Index param_dim() const override { return prob_.num_classes * (prob_.dim + 1); }
  Index input_dim() const override { return prob_.dim; }
  std::int64_t samples_per_evaluation() const override { return minibatch_; }

  void begin_iteration(std::int64_t, RngStream& rng) override {
    batch_ = draw_batch(prob_, train_b_, static_cast<Index>(minibatch_), rng);
  }

  double reward(const RealVector& params, const RunningMoments& normalizer,
                RunningMoments* visited, RngStream&) const override {
    if (visited != nullptr) {
      for (Index i = 0; i < batch_.Xb.rows(); ++i) visited->push(batch_.Xb.row(i).tail(prob_.dim).transpose());
    }
    const RealMatrix theta = unflatten_gradient(params, prob_.num_classes, prob_.dim + 1);
    // Mean of +1 / -1 rewards = 2 * accuracy - 1.
    return 2.0 * accuracy(theta, normalize_features(batch_.Xb, normalizer), batch_.labels) - 1.0;
  }

  double metric(const RealVector& params, const RunningMoments& normalizer) const override {
    const RealMatrix theta = unflatten_gradient(params, prob_.num_classes, prob_.dim + 1);
    return accuracy(theta, normalize_features(test_b_, normalizer), prob_.test_labels);
  }

 private:
  const ClassificationProblem& prob_;
  const RealMatrix& train_b_;
  const RealMatrix& test_b_;
  std::int64_t minibatch_;
  Batch batch_;
};

std::int64_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || std::floor(v) != v) throw ConfigError(std::string(what) + " must be a positive integer");
  return static_cast<std::int64_t>(v);
}

std::vector<CurvePoint> run_cell(const ExperimentConfig& config, const std::string& alg, Index d,
                                 std::uint64_t seed) {
  const TaskConfig& task = config.task;
  const int K = static_cast<int>(task.num_classes);
  const ClassificationProblem prob =
      gen_blobs_classification(K, d, task.n_train, task.n_test, task.separation,
                               derive_seed(seed, {"bandit", "problem", d}));
  const RealMatrix train_b = with_bias(prob.train_x);
  const RealMatrix test_b = with_bias(prob.test_x);
  RngStream rng = rng_derive(seed, {"bandit", alg, d});
  const std::string group = "d=" + std::to_string(d);
  std::vector<CurvePoint> out;
  auto record = [&](std::int64_t samples, double value) {
    out.push_back({alg, group, seed, samples, "test_accuracy", value});
  };

  if (alg == "ars_v1t" || alg == "ars_v2t") {
    ArsConfig ars;
    ars.variant = alg == "ars_v1t" ? ArsVariant::kV1t : ArsVariant::kV2t;
    ars.step_size = config.hyper(alg, "step_size", 0.02);
    ars.n_directions = static_cast<int>(as_count(config.hyper(alg, "n_directions", 50), "n_directions"));
    ars.n_top = static_cast<int>(as_count(config.hyper(alg, "n_top", 20), "n_top"));
    ars.perturbation = config.hyper(alg, "perturbation", 0.03);
    const std::int64_t minibatch = as_count(config.hyper(alg, "minibatch", 64), "minibatch");
    BanditArsTask ars_task(prob, train_b, test_b, minibatch);
    ArsTrainOptions train;
    train.budget = task.budget;
    train.eval_every = task.eval_every;
    const ArsTrainResult result =
        ars_train(ars_task, ars, RealVector::Zero(ars_task.param_dim()), train, rng);
    for (const auto& cp : result.curve) record(cp.samples, cp.value);
    return out;
  }

  SoftmaxPolicy policy{RealMatrix::Zero(K, d + 1)};
  std::int64_t samples = 0;
  std::int64_t next_eval = task.eval_every;
  auto maybe_record = [&] {
    if (samples < next_eval) return;
    while (next_eval <= samples) next_eval += task.eval_every;
    record(samples, accuracy(policy.theta, test_b, prob.test_labels));
  };
  record(0, accuracy(policy.theta, test_b, prob.test_labels));

  if (alg == "supervised_sgd") {
    const double lr = config.hyper(alg, "lr", 0.01);
    const double momentum = config.hyper(alg, "momentum", 0.5);
    const std::int64_t batch = as_count(config.hyper(alg, "batch", 64), "batch");
    if (samples + batch <= task.budget) {
      // Least-squares fit of one-hot targets on the first batch as the starting point.
      const Batch b = draw_batch(prob, train_b, static_cast<Index>(batch), rng);
      for (int k = 0; k < K; ++k) {
        RealVector target(b.Xb.rows());
        for (Index i = 0; i < target.size(); ++i) target[i] = b.labels[static_cast<std::size_t>(i)] == k ? 1.0 : 0.0;
        policy.theta.row(k) = newton_ls_step(b.Xb, target, 1e-6).transpose();
      }
      samples += batch;
      maybe_record();
    }
    RealVector params = Eigen::Map<RealVector>(policy.theta.data(), policy.theta.size());
    RealVector velocity = RealVector::Zero(params.size());
    while (samples + batch <= task.budget) {
      const Batch b = draw_batch(prob, train_b, static_cast<Index>(batch), rng);
      // Cross-entropy gradient = -(REINFORCE gradient with the true label and reward 1).
      const RealVector ones = RealVector::Ones(b.Xb.rows());
      const GradientEstimate g = reinforce_categorical_grad(b.Xb, b.labels, ones, policy);
      sgd_momentum_step(params, velocity, -g.g, lr, momentum);
      policy.theta = unflatten_gradient(params, K, d + 1);
      samples += batch;
      maybe_record();
    }
  } else if (alg == "reinforce") {
    const double lr = config.hyper(alg, "lr", 0.001);
    const std::int64_t batch = as_count(config.hyper(alg, "batch", 512), "batch");
    AdamConfig adam_config;
    adam_config.lr = lr;
    RealVector params = RealVector::Zero(policy.theta.size());
    AdamState adam = AdamState::zeros(params.size(), adam_config);
    while (samples + batch <= task.budget) {
      const Batch b = draw_batch(prob, train_b, static_cast<Index>(batch), rng);
      std::vector<int> sampled(b.labels.size());
      RealVector rewards(b.Xb.rows());
      for (Index i = 0; i < b.Xb.rows(); ++i) {
        const int k = policy.sample(b.Xb.row(i).transpose(), rng);
        sampled[static_cast<std::size_t>(i)] = k;
        rewards[i] = classification_reward(k, b.labels[static_cast<std::size_t>(i)]);
      }
      const GradientEstimate g = reinforce_categorical_grad(b.Xb, sampled, rewards, policy);
      adam_step(adam, params, -g.g);
      policy.theta = unflatten_gradient(params, K, d + 1);
      samples += batch;
      maybe_record();
    }
  } else {
    throw ConfigError("bandit_cls: unsupported algorithm '" + alg + "'");
  }
  if (out.back().samples != samples) record(samples, accuracy(policy.theta, test_b, prob.test_labels));
  return out;
}

}  // namespace

ExperimentResult run_bandit_classification(const ExperimentConfig& config) {
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
  result.experiment = "bandit_cls";
  for (auto& c : curves) result.curve.insert(result.curve.end(), c.begin(), c.end());
  result.summary = summarize(result.curve);
  return result;
}

}  // namespace explab::harness
