#pragma once

// Score-function (REINFORCE) and random-search gradient estimators. Everything returned here
// follows the ascent convention on rewards, except the trajectory estimators for LQR which are
// documented as descent directions on cost.

#include <cstdint>
#include <functional>
#include <vector>

#include "explab/lqr_env.hpp"
#include "explab/numeric.hpp"
#include "explab/rng.hpp"

namespace explab {

struct GradientMeta {
  double delta = 0.0;
  RealVector direction;             // u_H (action space) or u_d (parameter space)
  std::vector<double> objectives;   // raw objective values that produced the estimate
  bool capped = false;
};

struct GradientEstimate {
  RealVector g;
  double norm = 0.0;
  GradientMeta meta;

  static GradientEstimate from(RealVector g, GradientMeta meta = {});
};

struct GaussianPolicyParams {
  RealVector w;
  double log_std = 0.0;
  double beta = 0.5;  // exploration std of the one-step regression policy
};

/// Ascent gradient of (1/N) sum_i r_i log N(yhat_i; w^T x_i, beta^2):
/// (1/N) sum_i r_i (yhat_i - w^T x_i) / beta^2 x_i. Rows of X are samples.
GradientEstimate reinforce_gaussian_grad(const RealMatrix& X, const RealVector& sampled,
                                         const RealVector& rewards, const RealVector& w,
                                         double beta);

/// Linear softmax policy over K classes; rows of theta act on [1; x].
struct SoftmaxPolicy {
  RealMatrix theta;  // K x (d + 1)

  int num_classes() const { return static_cast<int>(theta.rows()); }
  /// `x` already carries the leading 1.
  RealVector probabilities(const RealVector& x) const;
  int sample(const RealVector& x, RngStream& rng) const;
  int predict(const RealVector& x) const;
};

/// Ascent gradient of (1/N) sum_i r_i log softmax_{k_i}(theta x_i), flattened column-major
/// (use unflatten_gradient to recover the K x (d + 1) matrix). Rows of X carry the leading 1.
GradientEstimate reinforce_categorical_grad(const RealMatrix& X, const std::vector<int>& labels,
                                            const RealVector& rewards,
                                            const SoftmaxPolicy& policy);

RealMatrix unflatten_gradient(const RealVector& g, Index rows, Index cols);

/// Solves (X^T X / (N beta^2) + damping I) x = g.
GradientEstimate natural_grad(const RealMatrix& X, const GradientEstimate& g, double beta,
                              double damping = 1e-6);

/// Descent gradient of expected cost over (w, log_std), stacked as [w; log_std].
/// Each step's score is weighted by the cost-to-go (default) or by the total cost.
GradientEstimate reinforce_trajectory_grad(const std::vector<Trajectory>& trajectories,
                                           const LinearGaussianPolicy& policy,
                                           bool use_cost_to_go = true);

/// Action-space estimator: roll out a = w^T x without noise, perturb the whole action sequence
/// by delta u_H (u_H on the H-sphere), replay it open loop and return (H J / delta) X u_H.
GradientEstimate action_space_rl_grad(const LqrSystem& system, const RealVector& w, double delta,
                                      Index H, RngStream& rng);

/// Parameter-space estimator: (d J(w + delta u_d) / delta) u_d with one deterministic rollout.
GradientEstimate param_space_rl_grad(const LqrSystem& system, const RealVector& w, double delta,
                                     Index H, RngStream& rng);

using ScalarObjective = std::function<double(const RealVector&)>;

/// Monte-Carlo estimate of E_{v ~ unit ball}[objective(w + delta v)].
double smoothed_objective_mc(const ScalarObjective& objective, const RealVector& w, double delta,
                             std::int64_t n_samples, RngStream& rng);

}  // namespace explab
