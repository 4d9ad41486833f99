#include "explab/numeric.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "explab/errors.hpp"

namespace explab {

void require_dim(Index a, Index b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(msg.str());
  }
}

RealVector project_l2_ball(const RealVector& v, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_l2_ball: radius must be positive");
  const double n = v.norm();
  if (n <= radius) return v;
  return v * (radius / n);
}

AdamState AdamState::zeros(Index dim, AdamConfig config) {
  return AdamState{RealVector::Zero(dim), RealVector::Zero(dim), 0, config};
}

void adam_step(AdamState& state, RealVector& params, const RealVector& grad) {
  require_dim(params.size(), grad.size(), "adam_step");
  require_dim(state.m.size(), grad.size(), "adam_step");
  require_dim(state.v.size(), grad.size(), "adam_step");
  const AdamConfig& c = state.config;
  ++state.t;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grad;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(state.t);
  const double corr1 = 1.0 - std::pow(c.beta1, t);
  const double corr2 = 1.0 - std::pow(c.beta2, t);
  params.array() -=
      c.lr * (state.m.array() / corr1) / ((state.v.array() / corr2).sqrt() + c.eps);
}

void sgd_momentum_step(RealVector& params, RealVector& velocity, const RealVector& grad,
                       double lr, double momentum) {
  require_dim(params.size(), grad.size(), "sgd_momentum_step");
  require_dim(velocity.size(), grad.size(), "sgd_momentum_step");
  velocity = momentum * velocity + grad;
  params -= lr * velocity;
}

RealVector newton_ls_step(const RealMatrix& X, const RealVector& y, double ridge) {
  if (X.rows() == 0) throw std::invalid_argument("newton_ls_step: empty batch");
  require_dim(X.rows(), y.size(), "newton_ls_step");
  if (ridge < 0.0) throw std::invalid_argument("newton_ls_step: ridge must be >= 0");
  RealMatrix normal = X.transpose() * X;
  normal.diagonal().array() += ridge;
  const RealVector rhs = X.transpose() * y;
  Eigen::ColPivHouseholderQR<RealMatrix> qr(normal);
  qr.setThreshold(1e-12);
  if (qr.rank() < normal.rows()) {
    throw NumericalError("newton_ls_step: normal equations are rank deficient");
  }
  return qr.solve(rhs);
}

RunningMoments::RunningMoments(Index dim)
    : mean_(RealVector::Zero(dim)), m2_(RealVector::Zero(dim)) {}

void RunningMoments::push(const RealVector& x) {
  if (count_ == 0 && mean_.size() == 0) {
    mean_ = RealVector::Zero(x.size());
    m2_ = RealVector::Zero(x.size());
  }
  require_dim(mean_.size(), x.size(), "RunningMoments::push");
  ++count_;
  const RealVector delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_.array() += delta.array() * (x - mean_).array();
}

void RunningMoments::merge(const RunningMoments& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  require_dim(mean_.size(), other.mean_.size(), "RunningMoments::merge");
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const RealVector delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  m2_ += other.m2_ + delta.cwiseAbs2() * (na * nb / n);
  count_ += other.count_;
}

RealVector RunningMoments::variance() const {
  if (count_ == 0) return RealVector::Zero(mean_.size());
  return (m2_ / static_cast<double>(count_)).cwiseMax(0.0);
}

RealVector RunningMoments::stddev() const { return variance().cwiseSqrt(); }

double spectral_radius(const RealMatrix& A, double tol) {
  if (A.rows() != A.cols()) throw DimensionError("spectral_radius: matrix must be square");
  if (A.size() == 0) return 0.0;
  // B_j = A^(2^j) / s_j with ||B_j||_F = 1; log rho_j = log(s_j) / 2^j.
  double norm = A.norm();
  if (norm == 0.0) return 0.0;
  RealMatrix B = A / norm;
  double log_scale = std::log(norm);
  double power = 1.0;
  double estimate = norm;
  constexpr int kMaxSquarings = 200;
  for (int j = 0; j < kMaxSquarings; ++j) {
    RealMatrix sq = B * B;
    const double sq_norm = sq.norm();
    if (sq_norm == 0.0 || !std::isfinite(sq_norm)) return 0.0;  // nilpotent
    B = sq / sq_norm;
    log_scale = 2.0 * log_scale + std::log(sq_norm);
    power *= 2.0;
    const double next = std::exp(log_scale / power);
    if (std::abs(next - estimate) <= tol * std::max(next, std::numeric_limits<double>::min())) {
      return next;
    }
    estimate = next;
  }
  return estimate;
}

RealVector solve_linear_system(const RealMatrix& F, const RealVector& g, double damping) {
  if (F.rows() != F.cols()) throw DimensionError("solve_linear_system: matrix must be square");
  require_dim(F.rows(), g.size(), "solve_linear_system");
  if (damping < 0.0) throw std::invalid_argument("solve_linear_system: damping must be >= 0");
  for (const double d : {damping, 10.0 * damping}) {
    RealMatrix M = F;
    M.diagonal().array() += d;
    Eigen::LLT<RealMatrix> llt(M);
    if (llt.info() == Eigen::Success) {
      RealVector x = llt.solve(g);
      if (x.allFinite()) return x;
    }
  }
  throw NumericalError("solve_linear_system: matrix is not positive definite");
}

}  // namespace explab
