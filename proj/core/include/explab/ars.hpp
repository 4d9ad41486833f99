#pragma once

// Augmented random search, V1-t (raw inputs) and V2-t (inputs whitened by running statistics),
// with top-b direction selection and reward-std step scaling.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "explab/numeric.hpp"
#include "explab/rng.hpp"

namespace explab {

enum class ArsVariant { kV1t, kV2t };

std::string_view to_string(ArsVariant variant);

struct ArsConfig {
  double step_size = 0.02;   // alpha
  int n_directions = 8;      // N
  int n_top = 8;             // b
  double perturbation = 0.03;  // nu
  ArsVariant variant = ArsVariant::kV1t;

  void validate() const;
};

struct ArsState {
  RealVector w;
  RunningMoments moments;
  std::int64_t iteration = 0;
};

/// (x - mean) / max(std, 1e-8) entrywise; x unchanged while fewer than two inputs were seen.
RealVector normalize_input(const RealVector& x, const RunningMoments& moments);

/// Reward of one parameter vector. `normalizer` holds the frozen statistics for this iteration;
/// when `visited` is non-null the evaluation records the raw inputs it saw there.
using ArsReward = std::function<double(const RealVector& params, const RunningMoments& normalizer,
                                       RunningMoments* visited, RngStream& rng)>;

struct ArsDiagnostics {
  bool degenerate = false;  // reward std below 1e-12, no update
  bool aborted = false;     // non-finite reward
  double reward_std = 0.0;
  double mean_reward = 0.0;
  double max_reward = 0.0;
  int evaluations = 0;
  std::string error;
};

/// One iteration. Each direction k draws its perturbation and its two evaluation streams from
/// streams derived from a single key taken from `rng`, so results do not depend on `workers`.
/// `evaluate` must be safe to call concurrently when workers > 1.
ArsDiagnostics ars_iteration(const ArsReward& evaluate, ArsState& state, const ArsConfig& config,
                             RngStream& rng, int workers = 1);

/// What ars_train needs from a task.
class ArsTask {
 public:
  virtual ~ArsTask() = default;

  virtual Index param_dim() const = 0;
  /// Samples charged per reward evaluation (minibatch size, or H for a rollout).
  virtual std::int64_t samples_per_evaluation() const = 0;
  /// Called before every iteration, e.g. to draw the shared minibatch.
  virtual void begin_iteration(std::int64_t iteration, RngStream& rng) { (void)iteration; (void)rng; }
  virtual double reward(const RealVector& params, const RunningMoments& normalizer,
                        RunningMoments* visited, RngStream& rng) const = 0;
  /// Checkpoint metric with frozen statistics.
  virtual double metric(const RealVector& params, const RunningMoments& normalizer) const = 0;
  /// Dimension of the inputs that V2-t normalizes.
  virtual Index input_dim() const = 0;
};

struct CheckpointValue {
  std::int64_t samples = 0;
  double value = 0.0;
};

struct ArsTrainOptions {
  std::int64_t budget = 0;
  std::int64_t eval_every = 1024;
  int workers = 1;
  /// Stops training after the checkpoint for which it returns true.
  std::function<bool(const CheckpointValue&)> stop;
};

struct ArsTrainResult {
  std::vector<CheckpointValue> curve;
  ArsState state;
  std::int64_t samples = 0;
  int degenerate_iterations = 0;
};

/// Runs iterations while the next one fits in the budget; checkpoints at 0, whenever another
/// `eval_every` samples have been consumed, and after the last iteration.
ArsTrainResult ars_train(ArsTask& task, const ArsConfig& config, const RealVector& w0,
                         const ArsTrainOptions& options, RngStream& rng);

}  // namespace explab
