#include "explab/online_linreg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "explab/errors.hpp"

namespace explab {

BoundsConfig BoundsConfig::from_radii(double predictor_radius, double feature_radius,
                                      double target_bound) {
  BoundsConfig b;
  b.predictor_radius = predictor_radius;
  b.feature_radius = feature_radius;
  b.target_bound = target_bound;
  b.residual_bound = predictor_radius * feature_radius + target_bound;
  b.lipschitz = b.residual_bound * feature_radius;
  b.validate();
  return b;
}

void BoundsConfig::validate() const {
  if (!(predictor_radius > 0.0 && feature_radius > 0.0 && target_bound > 0.0 &&
        residual_bound > 0.0 && lipschitz > 0.0)) {
    throw std::invalid_argument("BoundsConfig: all constants must be strictly positive");
  }
}

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kOgd:
      return "ogd";
    case LearnerKind::kBgd:
      return "bgd";
    case LearnerKind::kActionRs:
      return "action_rs";
  }
  return "unknown";
}

LearnerKind parse_learner_kind(std::string_view name) {
  if (name == "ogd") return LearnerKind::kOgd;
  if (name == "bgd") return LearnerKind::kBgd;
  if (name == "action_rs" || name == "action") return LearnerKind::kActionRs;
  throw std::invalid_argument("unknown learner kind: " + std::string(name));
}

ScheduleParams theorem_schedule(LearnerKind kind, const BoundsConfig& bounds, Index d,
                                std::int64_t t, std::int64_t T) {
  const double W = bounds.predictor_radius;
  const double X = bounds.feature_radius;
  const double C = bounds.residual_bound;
  const double L = bounds.lipschitz;
  switch (kind) {
    case LearnerKind::kOgd: {
      if (t < 1) throw std::invalid_argument("theorem_schedule: ogd needs t >= 1");
      return {W / (C * X * std::sqrt(static_cast<double>(t))), 0.0};
    }
    case LearnerKind::kBgd: {
      if (T < 1) throw std::invalid_argument("theorem_schedule: bgd needs T >= 1");
      const double Td = static_cast<double>(T);
      const double dd = static_cast<double>(d);
      const double spread = C * C + X * X;
      const double delta = std::pow(Td, -0.25) * std::sqrt(W * dd * spread / (2.0 * L));
      return {W * delta / (dd * spread * std::sqrt(Td)), delta};
    }
    case LearnerKind::kActionRs: {
      if (T < 1) throw std::invalid_argument("theorem_schedule: action_rs needs T >= 1");
      const double Td = static_cast<double>(T);
      const double spread = C * C + 1.0;
      const double delta = std::pow(Td, -0.25) * std::sqrt(W * spread * X / (2.0 * C));
      return {W * delta / (spread * X * std::sqrt(Td)), delta};
    }
  }
  throw std::invalid_argument("theorem_schedule: unknown learner kind");
}

double theorem_regret_bound(LearnerKind kind, const BoundsConfig& bounds, Index d,
                            std::int64_t T) {
  const double W = bounds.predictor_radius;
  const double X = bounds.feature_radius;
  const double C = bounds.residual_bound;
  const double L = bounds.lipschitz;
  const double Td = static_cast<double>(T);
  switch (kind) {
    case LearnerKind::kOgd:
      return W * C * X * std::sqrt(Td);
    case LearnerKind::kBgd:
      return std::sqrt(W * static_cast<double>(d) * (C * C + X * X) * L) * std::pow(Td, 0.75);
    case LearnerKind::kActionRs:
      return std::sqrt(W * (C * C + 1.0) * X * C) * std::pow(Td, 0.75);
  }
  throw std::invalid_argument("theorem_regret_bound: unknown learner kind");
}

double SquareLossRound::loss_at(const RealVector& w) {
  require_dim(w.size(), x_.size(), "SquareLossRound");
  ++queries_;
  last_prediction_ = w.dot(x_);
  const double r = last_prediction_ - y_;
  return r * r;
}

double SquareLossRound::loss_at(double prediction) {
  ++queries_;
  last_prediction_ = prediction;
  const double r = prediction - y_;
  return r * r;
}

RoundRecord ogd_step(LinearPredictor& pred, const RealVector& x, double y, double lr,
                     const BoundsConfig& bounds) {
  require_dim(pred.w.size(), x.size(), "ogd_step");
  if (!(lr > 0.0)) throw std::invalid_argument("ogd_step: learning rate must be positive");
  RoundRecord rec;
  rec.x = x;
  rec.y = y;
  rec.feature_bound_violated = x.norm() > bounds.feature_radius * (1.0 + 1e-12);
  rec.prediction = pred.w.dot(x);
  const double residual = rec.prediction - y;
  rec.loss = residual * residual;
  // Half-gradient convention: the factor 2 lives in the learning rate.
  pred.w = project_l2_ball(pred.w - lr * residual * x, bounds.predictor_radius);
  return rec;
}

RoundRecord bgd_param_step(LinearPredictor& pred, ParameterLossOracle& oracle, double lr,
                           double delta, const RealVector& u, const BoundsConfig& bounds) {
  require_dim(pred.w.size(), u.size(), "bgd_param_step");
  if (!(delta > 0.0)) throw std::invalid_argument("bgd_param_step: delta must be positive");
  RoundRecord rec;
  rec.sphere_direction = u;
  rec.loss = oracle.loss_at(pred.w + delta * u);
  const double d = static_cast<double>(pred.w.size());
  pred.w = project_l2_ball(pred.w - lr * (rec.loss * d / delta) * u, bounds.predictor_radius);
  return rec;
}

RoundRecord bgd_param_step(LinearPredictor& pred, ParameterLossOracle& oracle, double lr,
                           double delta, RngStream& rng, const BoundsConfig& bounds) {
  const RealVector u = sample_unit_sphere(pred.w.size(), rng);
  return bgd_param_step(pred, oracle, lr, delta, u, bounds);
}

RoundRecord action_space_step(LinearPredictor& pred, PredictionLossOracle& oracle, double lr,
                              double delta, int sign, const BoundsConfig& bounds) {
  if (!(delta > 0.0)) throw std::invalid_argument("action_space_step: delta must be positive");
  if (sign != 1 && sign != -1) throw std::invalid_argument("action_space_step: sign must be +-1");
  const RealVector& x = oracle.context();
  require_dim(pred.w.size(), x.size(), "action_space_step");
  RoundRecord rec;
  rec.sign = sign;
  rec.feature_bound_violated = x.norm() > bounds.feature_radius * (1.0 + 1e-12);
  rec.prediction = pred.w.dot(x) + delta * sign;
  rec.loss = oracle.loss_at(rec.prediction);
  pred.w = project_l2_ball(pred.w - lr * (rec.loss * sign / delta) * x, bounds.predictor_radius);
  return rec;
}

RoundRecord action_space_step(LinearPredictor& pred, PredictionLossOracle& oracle, double lr,
                              double delta, RngStream& rng, const BoundsConfig& bounds) {
  return action_space_step(pred, oracle, lr, delta, rng.sign(), bounds);
}

RoundRecord play_round(LearnerKind kind, LinearPredictor& pred, const RealVector& x, double y,
                       const ScheduleParams& schedule, RngStream& rng, const BoundsConfig& bounds,
                       std::int64_t t) {
  RoundRecord rec;
  switch (kind) {
    case LearnerKind::kOgd:
      rec = ogd_step(pred, x, y, schedule.learning_rate, bounds);
      break;
    case LearnerKind::kBgd: {
      SquareLossRound oracle(x, y);
      rec = bgd_param_step(pred, oracle, schedule.learning_rate, schedule.delta, rng, bounds);
      rec.prediction = oracle.last_prediction();
      rec.feature_bound_violated = x.norm() > bounds.feature_radius * (1.0 + 1e-12);
      break;
    }
    case LearnerKind::kActionRs: {
      SquareLossRound oracle(x, y);
      rec = action_space_step(pred, oracle, schedule.learning_rate, schedule.delta, rng, bounds);
      break;
    }
  }
  rec.t = t;
  rec.x = x;
  rec.y = y;
  return rec;
}

LeastSquaresStats::LeastSquaresStats(Index dim, Index block_rows)
    : gram_(RealMatrix::Zero(dim, dim)),
      moment_(RealVector::Zero(dim)),
      pending_x_(block_rows, dim),
      pending_y_(block_rows) {
  if (block_rows < 1) throw std::invalid_argument("LeastSquaresStats: block_rows must be >= 1");
}

void LeastSquaresStats::add(const RealVector& x, double y) {
  require_dim(x.size(), gram_.rows(), "LeastSquaresStats::add");
  pending_x_.row(pending_) = x.transpose();
  pending_y_[pending_] = y;
  ++pending_;
  ++count_;
  if (pending_ == pending_x_.rows()) flush();
}

void LeastSquaresStats::flush() const {
  if (pending_ == 0) return;
  const auto Xb = pending_x_.topRows(pending_);
  const auto yb = pending_y_.head(pending_);
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(Xb.transpose());
  moment_.noalias() += Xb.transpose() * yb;
  sum_y2_ += yb.squaredNorm();
  pending_ = 0;
}

const RealMatrix& LeastSquaresStats::gram() const {
  flush();
  gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  return gram_;
}

const RealVector& LeastSquaresStats::moment() const {
  flush();
  return moment_;
}

double LeastSquaresStats::sum_y2() const {
  flush();
  return sum_y2_;
}

double LeastSquaresStats::sum_squared_loss(const RealVector& w) const {
  require_dim(w.size(), dim(), "LeastSquaresStats::sum_squared_loss");
  const RealMatrix& G = gram();
  const double value = w.dot(G * w) - 2.0 * w.dot(moment_) + sum_y2_;
  return std::max(value, 0.0);
}

LinearPredictor best_in_hindsight(const LeastSquaresStats& stats, double radius) {
  if (stats.count() == 0) throw std::invalid_argument("best_in_hindsight: no rounds");
  if (!(radius > 0.0)) throw std::invalid_argument("best_in_hindsight: radius must be positive");
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(stats.gram());
  if (eig.info() != Eigen::Success) throw NumericalError("best_in_hindsight: eigensolver failed");
  const RealVector lambda = eig.eigenvalues().cwiseMax(0.0);
  const RealVector c = eig.eigenvectors().transpose() * stats.moment();
  const double cutoff = 1e-10 * std::max(lambda.maxCoeff(), 1e-300);

  auto solution = [&](double mu) {
    RealVector coeff(lambda.size());
    for (Index i = 0; i < lambda.size(); ++i) {
      const double denom = lambda[i] + mu;
      coeff[i] = (mu == 0.0 && lambda[i] <= cutoff) ? 0.0 : c[i] / denom;
    }
    return RealVector(eig.eigenvectors() * coeff);
  };

  RealVector w = solution(0.0);
  if (w.norm() <= radius) return {w};

  // ||w(mu)|| decreases monotonically in mu; ||w(mu)|| <= ||c|| / mu brackets the root.
  double lo = 0.0;
  double hi = c.norm() / radius;
  RealVector w_hi = solution(hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const RealVector w_mid = solution(mid);
    if (w_mid.norm() > radius) {
      lo = mid;
    } else {
      hi = mid;
      w_hi = w_mid;
    }
    if (std::abs(w_hi.norm() - radius) <= 1e-10 * radius || hi - lo <= 1e-300) break;
  }
  return {w_hi};
}

LinearPredictor best_in_hindsight(const RealMatrix& X, const RealVector& y, double radius) {
  require_dim(X.rows(), y.size(), "best_in_hindsight");
  LeastSquaresStats stats(X.cols());
  for (Index i = 0; i < X.rows(); ++i) stats.add(X.row(i).transpose(), y[i]);
  return best_in_hindsight(stats, radius);
}

RegretLedger::RegretLedger(Index dim, bool keep_records)
    : stats_(dim), keep_records_(keep_records) {}

void RegretLedger::record(const RoundRecord& round) {
  if (!(round.loss >= 0.0)) throw std::invalid_argument("RegretLedger: loss must be >= 0");
  stats_.add(round.x, round.y);
  cumulative_loss_ += round.loss;
  if (keep_records_) records_.push_back(round);
}

const LinearPredictor& RegretLedger::comparator(double radius) {
  if (comparator_rounds_ != rounds() || comparator_radius_ != radius) {
    comparator_ = best_in_hindsight(stats_, radius);
    comparator_rounds_ = rounds();
    comparator_radius_ = radius;
  }
  return comparator_;
}

RegretResult empirical_regret(RegretLedger& ledger, const BoundsConfig& bounds, LearnerKind kind,
                              Index d, std::int64_t T) {
  if (ledger.rounds() == 0) throw std::invalid_argument("empirical_regret: empty ledger");
  const LinearPredictor& best = ledger.comparator(bounds.predictor_radius);
  RegretResult out;
  out.regret = ledger.cumulative_loss() - ledger.stats().sum_squared_loss(best.w);
  out.bound_rhs = theorem_regret_bound(kind, bounds, d, T);
  return out;
}

}  // namespace explab
