#pragma once

// Online linear regression under three feedback models:
//   * full information (OGD): the learner sees x_t and y_t;
//   * bandit (random search in parameter space): only the scalar loss of the
//     predictor it proposes;
//   * linear contextual bandit (random search in action space): x_t, then the
//     scalar loss of its own perturbed prediction, never y_t.
//
// Loss is l_t(w) = (w^T x_t - y_t)^2 and the feasible set is the L2 ball of
// radius W (BoundsConfig::predictor_radius).

#include <cstdint>
#include <string_view>
#include <vector>

#include "explab/numeric.hpp"
#include "explab/rng.hpp"

namespace explab {

/// Problem constants: ||w|| <= W, ||x|| <= X, |y| <= Y, |w^T x - y| <= C, Lipschitz L.
struct BoundsConfig {
  double predictor_radius = 1.0;  // W
  double feature_radius = 1.0;    // X
  double target_bound = 1.0;      // Y
  double residual_bound = 2.0;    // C
  double lipschitz = 2.0;         // L

  /// C = W X + Y and L = (W X + Y) X.
  static BoundsConfig from_radii(double predictor_radius, double feature_radius,
                                 double target_bound);
  void validate() const;
};

enum class LearnerKind { kOgd, kBgd, kActionRs };

std::string_view to_string(LearnerKind kind);
/// Accepts "ogd", "bgd", "action_rs". Throws std::invalid_argument otherwise.
LearnerKind parse_learner_kind(std::string_view name);

struct LinearPredictor {
  RealVector w;

  static LinearPredictor zeros(Index dim) { return {RealVector::Zero(dim)}; }
  double predict(const RealVector& x) const { return w.dot(x); }
};

struct RoundRecord {
  std::int64_t t = 0;
  RealVector x;
  double y = 0.0;
  double prediction = 0.0;
  double loss = 0.0;
  RealVector sphere_direction;  // BGD only
  int sign = 0;                 // action-space only
  bool feature_bound_violated = false;
};

struct ScheduleParams {
  double learning_rate = 0.0;
  double delta = 0.0;
};

/// Learning rate and perturbation size under which the regret bounds below hold.
///   ogd:       mu_t = W / (C X sqrt(t)),                     delta = 0
///   bgd:       mu   = W delta / (d (C^2 + X^2) sqrt(T)),     delta = T^{-1/4} sqrt(W d (C^2 + X^2) / 2L)
///   action_rs: mu   = W delta / ((C^2 + 1) X sqrt(T)),       delta = T^{-1/4} sqrt(W (C^2 + 1) X / 2C)
ScheduleParams theorem_schedule(LearnerKind kind, const BoundsConfig& bounds, Index d,
                                std::int64_t t, std::int64_t T);

/// Right-hand side of the matching regret bound: W C X sqrt(T), sqrt(W d (C^2+X^2) L) T^{3/4},
/// sqrt(W (C^2+1) X C) T^{3/4}.
double theorem_regret_bound(LearnerKind kind, const BoundsConfig& bounds, Index d,
                            std::int64_t T);

/// Bandit feedback: the loss of a whole predictor, nothing else.
class ParameterLossOracle {
 public:
  virtual ~ParameterLossOracle() = default;
  virtual double loss_at(const RealVector& w) = 0;
};

/// Contextual-bandit feedback: the context up front, then the loss of one prediction.
class PredictionLossOracle {
 public:
  virtual ~PredictionLossOracle() = default;
  virtual const RealVector& context() const = 0;
  virtual double loss_at(double prediction) = 0;
};

/// Square loss for one round; serves both feedback interfaces and remembers the last query.
class SquareLossRound final : public ParameterLossOracle, public PredictionLossOracle {
 public:
  SquareLossRound(const RealVector& x, double y) : x_(x), y_(y) {}

  double loss_at(const RealVector& w) override;
  const RealVector& context() const override { return x_; }
  double loss_at(double prediction) override;

  int queries() const { return queries_; }
  double last_prediction() const { return last_prediction_; }

 private:
  const RealVector& x_;
  double y_;
  int queries_ = 0;
  double last_prediction_ = 0.0;
};

/// Full-information step: w' = P_W(w - mu (w^T x - y) x).
RoundRecord ogd_step(LinearPredictor& pred, const RealVector& x, double y, double lr,
                     const BoundsConfig& bounds);

/// Parameter-space random search with a caller-chosen unit direction `u`.
/// Plays w + delta u, observes l, steps w' = P_W(w - mu (l d / delta) u).
RoundRecord bgd_param_step(LinearPredictor& pred, ParameterLossOracle& oracle, double lr,
                           double delta, const RealVector& u, const BoundsConfig& bounds);
/// Same, with u drawn uniformly from the unit sphere.
RoundRecord bgd_param_step(LinearPredictor& pred, ParameterLossOracle& oracle, double lr,
                           double delta, RngStream& rng, const BoundsConfig& bounds);

/// Action-space random search with a caller-chosen sign e in {-1, +1}.
/// Predicts w^T x + delta e, observes l, steps w' = P_W(w - mu (l e / delta) x).
RoundRecord action_space_step(LinearPredictor& pred, PredictionLossOracle& oracle, double lr,
                              double delta, int sign, const BoundsConfig& bounds);
RoundRecord action_space_step(LinearPredictor& pred, PredictionLossOracle& oracle, double lr,
                              double delta, RngStream& rng, const BoundsConfig& bounds);

/// One full round of the chosen learner on (x, y), with the record filled in from the
/// feedback oracle (x, y and the reported prediction included).
RoundRecord play_round(LearnerKind kind, LinearPredictor& pred, const RealVector& x, double y,
                       const ScheduleParams& schedule, RngStream& rng, const BoundsConfig& bounds,
                       std::int64_t t);

/// Sufficient statistics of a least-squares problem (X^T X, X^T y, sum y^2), accumulated in
/// row blocks so long streams stay cheap.
class LeastSquaresStats {
 public:
  explicit LeastSquaresStats(Index dim, Index block_rows = 256);

  void add(const RealVector& x, double y);

  Index dim() const { return gram_.rows(); }
  std::int64_t count() const { return count_; }
  const RealMatrix& gram() const;
  const RealVector& moment() const;
  double sum_y2() const;
  /// sum_t (w^T x_t - y_t)^2 from the statistics.
  double sum_squared_loss(const RealVector& w) const;

 private:
  void flush() const;

  mutable RealMatrix gram_;
  mutable RealVector moment_;
  mutable double sum_y2_ = 0.0;
  mutable RealMatrix pending_x_;
  mutable RealVector pending_y_;
  mutable Index pending_ = 0;
  std::int64_t count_ = 0;
};

/// argmin_{||w|| <= radius} sum_t (w^T x_t - y_t)^2. Uses the minimum-norm least-squares
/// solution when it is feasible, otherwise bisects the Lagrange multiplier until ||w|| hits the
/// radius to 1e-9 relative.
LinearPredictor best_in_hindsight(const LeastSquaresStats& stats, double radius);
/// Rows of `X` are the rounds' features.
LinearPredictor best_in_hindsight(const RealMatrix& X, const RealVector& y, double radius);

/// Round-by-round loss accounting against the best fixed predictor in hindsight.
class RegretLedger {
 public:
  explicit RegretLedger(Index dim, bool keep_records = false);

  void record(const RoundRecord& round);

  std::int64_t rounds() const { return stats_.count(); }
  double cumulative_loss() const { return cumulative_loss_; }
  const LeastSquaresStats& stats() const { return stats_; }
  const std::vector<RoundRecord>& records() const { return records_; }
  /// Cached until the next record() or a different radius.
  const LinearPredictor& comparator(double radius);

 private:
  LeastSquaresStats stats_;
  bool keep_records_;
  std::vector<RoundRecord> records_;
  double cumulative_loss_ = 0.0;
  LinearPredictor comparator_;
  double comparator_radius_ = -1.0;
  std::int64_t comparator_rounds_ = -1;
};

struct RegretResult {
  double regret = 0.0;
  double bound_rhs = 0.0;
};

RegretResult empirical_regret(RegretLedger& ledger, const BoundsConfig& bounds, LearnerKind kind,
                              Index d, std::int64_t T);

}  // namespace explab
