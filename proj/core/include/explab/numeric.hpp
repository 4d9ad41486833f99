#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace explab {

using Index = Eigen::Index;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Throws DimensionError unless `a == b`.
void require_dim(Index a, Index b, const char* what);

/// Euclidean projection onto {v : ||v||_2 <= radius}.
RealVector project_l2_ball(const RealVector& v, double radius);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  RealVector m;
  RealVector v;
  std::int64_t t = 0;
  AdamConfig config;

  static AdamState zeros(Index dim, AdamConfig config);
};

/// Bias-corrected ADAM descent step: params move against `grad`.
void adam_step(AdamState& state, RealVector& params, const RealVector& grad);

/// velocity <- momentum * velocity + grad; params <- params - lr * velocity.
void sgd_momentum_step(RealVector& params, RealVector& velocity, const RealVector& grad,
                       double lr, double momentum);

/// argmin_w ||X w - y||^2 + ridge ||w||^2 via the normal equations.
/// Rows of `X` are samples. Throws NumericalError when the system is rank deficient.
RealVector newton_ls_step(const RealMatrix& X, const RealVector& y, double ridge);

/// Welford running mean / second central moment. Variance uses the population convention.
class RunningMoments {
 public:
  RunningMoments() = default;
  explicit RunningMoments(Index dim);

  void push(const RealVector& x);
  /// Chan et al. pairwise merge; equals pushing other's samples after ours.
  void merge(const RunningMoments& other);

  std::int64_t count() const { return count_; }
  Index dim() const { return mean_.size(); }
  bool empty() const { return count_ == 0; }
  const RealVector& mean() const { return mean_; }
  const RealVector& m2() const { return m2_; }
  RealVector variance() const;
  RealVector stddev() const;

 private:
  std::int64_t count_ = 0;
  RealVector mean_;
  RealVector m2_;
};

/// Spectral radius from Gelfand's formula rho = lim ||A^k||^{1/k}, evaluated by repeated
/// squaring with renormalization (Frobenius norm) until successive estimates agree to `tol`
/// relative. Works for complex dominant pairs where power iteration stalls.
double spectral_radius(const RealMatrix& A, double tol = 1e-12);

/// Solves (F + damping I) x = g by Cholesky; on failure retries once with 10 * damping.
RealVector solve_linear_system(const RealMatrix& F, const RealVector& g, double damping);

}  // namespace explab
