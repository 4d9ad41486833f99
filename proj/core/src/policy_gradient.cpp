#include "explab/policy_gradient.hpp"

#include <cmath>
#include <stdexcept>

#include "explab/errors.hpp"

namespace explab {

GradientEstimate GradientEstimate::from(RealVector g, GradientMeta meta) {
  GradientEstimate est;
  est.norm = g.norm();
  est.g = std::move(g);
  est.meta = std::move(meta);
  return est;
}

GradientEstimate reinforce_gaussian_grad(const RealMatrix& X, const RealVector& sampled,
                                         const RealVector& rewards, const RealVector& w,
                                         double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("reinforce_gaussian_grad: beta must be > 0");
  if (X.rows() == 0) throw std::invalid_argument("reinforce_gaussian_grad: empty batch");
  require_dim(X.cols(), w.size(), "reinforce_gaussian_grad");
  require_dim(sampled.size(), X.rows(), "reinforce_gaussian_grad");
  require_dim(rewards.size(), X.rows(), "reinforce_gaussian_grad");
  const RealVector weights =
      rewards.cwiseProduct(sampled - X * w) / (beta * beta * static_cast<double>(X.rows()));
  GradientMeta meta;
  meta.delta = beta;
  return GradientEstimate::from(X.transpose() * weights, std::move(meta));
}

RealVector SoftmaxPolicy::probabilities(const RealVector& x) const {
  require_dim(x.size(), theta.cols(), "SoftmaxPolicy");
  RealVector logits = theta * x;
  logits.array() -= logits.maxCoeff();
  RealVector p = logits.array().exp();
  return p / p.sum();
}

int SoftmaxPolicy::sample(const RealVector& x, RngStream& rng) const {
  const RealVector p = probabilities(x);
  const double u = rng.uniform();
  double acc = 0.0;
  for (Index k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(p.size() - 1);
}

int SoftmaxPolicy::predict(const RealVector& x) const {
  Index best = 0;
  (theta * x).maxCoeff(&best);
  return static_cast<int>(best);
}

GradientEstimate reinforce_categorical_grad(const RealMatrix& X, const std::vector<int>& labels,
                                            const RealVector& rewards,
                                            const SoftmaxPolicy& policy) {
  const Index n = X.rows();
  if (n == 0) throw std::invalid_argument("reinforce_categorical_grad: empty batch");
  require_dim(static_cast<Index>(labels.size()), n, "reinforce_categorical_grad");
  require_dim(rewards.size(), n, "reinforce_categorical_grad");
  require_dim(X.cols(), policy.theta.cols(), "reinforce_categorical_grad");
  const int K = policy.num_classes();
  // Row i of `coef` holds r_i (onehot(k_i) - p(x_i)) / N.
  RealMatrix coef(n, K);
  for (Index i = 0; i < n; ++i) {
    const int k = labels[static_cast<std::size_t>(i)];
    if (k < 0 || k >= K) throw std::invalid_argument("reinforce_categorical_grad: label out of range");
    RealVector p = policy.probabilities(X.row(i).transpose());
    p = -p;
    p[k] += 1.0;
    coef.row(i) = (rewards[i] / static_cast<double>(n)) * p.transpose();
  }
  const RealMatrix grad = coef.transpose() * X;  // K x (d + 1)
  return GradientEstimate::from(Eigen::Map<const RealVector>(grad.data(), grad.size()));
}

RealMatrix unflatten_gradient(const RealVector& g, Index rows, Index cols) {
  require_dim(g.size(), rows * cols, "unflatten_gradient");
  return Eigen::Map<const RealMatrix>(g.data(), rows, cols);
}

GradientEstimate natural_grad(const RealMatrix& X, const GradientEstimate& g, double beta,
                              double damping) {
  if (X.rows() == 0) throw std::invalid_argument("natural_grad: empty batch");
  if (!(beta > 0.0)) throw std::invalid_argument("natural_grad: beta must be > 0");
  require_dim(X.cols(), g.g.size(), "natural_grad");
  RealMatrix F(X.cols(), X.cols());
  F.setZero();
  F.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(),
                                               1.0 / (static_cast<double>(X.rows()) * beta * beta));
  F.triangularView<Eigen::StrictlyUpper>() = F.transpose();
  GradientEstimate out = GradientEstimate::from(solve_linear_system(F, g.g, damping), g.meta);
  return out;
}

GradientEstimate reinforce_trajectory_grad(const std::vector<Trajectory>& trajectories,
                                           const LinearGaussianPolicy& policy,
                                           bool use_cost_to_go) {
  if (trajectories.empty()) throw std::invalid_argument("reinforce_trajectory_grad: empty batch");
  const Index d = policy.w.size();
  const double var = std::exp(2.0 * policy.log_std);
  RealVector g = RealVector::Zero(d + 1);
  GradientMeta meta;
  for (const Trajectory& traj : trajectories) {
    require_dim(traj.states.rows(), d, "reinforce_trajectory_grad");
    meta.objectives.push_back(traj.total_cost);
    meta.capped = meta.capped || traj.truncated;
    double consumed = 0.0;
    for (Index t = 0; t < traj.valid_steps; ++t) {
      const double weight = use_cost_to_go ? traj.total_cost - consumed : traj.total_cost;
      consumed += traj.costs[t];
      const auto x = traj.states.col(t);
      const double resid = traj.actions[t] - policy.w.dot(x);
      g.head(d).noalias() += (weight * resid / var) * x;
      g[d] += weight * (resid * resid / var - 1.0);
    }
  }
  g /= static_cast<double>(trajectories.size());
  return GradientEstimate::from(std::move(g), std::move(meta));
}

GradientEstimate action_space_rl_grad(const LqrSystem& system, const RealVector& w, double delta,
                                      Index H, RngStream& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("action_space_rl_grad: delta must be > 0");
  const LinearGaussianPolicy policy{w, 0.0};
  const Trajectory base = rollout_policy(system, policy, H, rng, {false, false});
  GradientMeta meta;
  meta.delta = delta;
  meta.direction = sample_unit_sphere(H, rng);
  if (base.truncated) {
    meta.capped = true;
    meta.objectives.push_back(kCostCap);
    return GradientEstimate::from(RealVector::Zero(w.size()), std::move(meta));
  }
  const RealVector perturbed = base.actions + delta * meta.direction;
  const Trajectory replay = rollout_open_loop(system, perturbed, rng, false);
  meta.capped = replay.truncated;
  meta.objectives.push_back(replay.total_cost);
  const double scale = static_cast<double>(H) * replay.total_cost / delta;
  RealVector g = scale * (base.states * meta.direction);
  return GradientEstimate::from(std::move(g), std::move(meta));
}

GradientEstimate param_space_rl_grad(const LqrSystem& system, const RealVector& w, double delta,
                                     Index H, RngStream& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("param_space_rl_grad: delta must be > 0");
  require_dim(w.size(), system.dim(), "param_space_rl_grad");
  GradientMeta meta;
  meta.delta = delta;
  meta.direction = sample_unit_sphere(w.size(), rng);
  const double J = deterministic_cost(system, w + delta * meta.direction, H);
  meta.capped = J >= kCostCap;
  meta.objectives.push_back(J);
  RealVector g = (static_cast<double>(w.size()) * J / delta) * meta.direction;
  return GradientEstimate::from(std::move(g), std::move(meta));
}

double smoothed_objective_mc(const ScalarObjective& objective, const RealVector& w, double delta,
                             std::int64_t n_samples, RngStream& rng) {
  if (n_samples < 1) throw std::invalid_argument("smoothed_objective_mc: n_samples must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("smoothed_objective_mc: delta must be > 0");
  double sum = 0.0;
  RealVector probe(w.size());
  for (std::int64_t i = 0; i < n_samples; ++i) {
    probe = w + delta * sample_unit_ball(w.size(), rng);
    sum += objective(probe);
  }
  return sum / static_cast<double>(n_samples);
}

}  // namespace explab
