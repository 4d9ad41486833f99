#pragma once

// Synthetic regression / classification data and the bounded feature stream used by the
// regret experiments.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "explab/numeric.hpp"
#include "explab/online_linreg.hpp"
#include "explab/rng.hpp"

namespace explab {

/// Rows are samples.
struct Dataset {
  RealMatrix X;
  RealVector y;

  Index size() const { return X.rows(); }
};

struct LinregOptions {
  double noise_std = 1e-3;
  /// Columns of the covariance factor G; 0 means full rank (G is d x d).
  Index latent_rank = 0;
  Index chunk_rows = 1024;
};

/// y = w_true^T [1; z] + eps, z ~ N(0, G G^T / d), eps ~ N(0, noise_std^2).
/// Training rows are an unbounded stream produced in fixed-size chunks, each chunk from its own
/// derived stream, so any prefix is reproducible without generating the rest.
class RegressionProblem {
 public:
  RegressionProblem(Index d, std::int64_t n_train, std::int64_t n_test, std::uint64_t seed,
                    const LinregOptions& options = {});

  /// Feature count without the bias; parameter vectors have dim() + 1 entries.
  Index dim() const { return d_; }
  Index param_dim() const { return d_ + 1; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t n_train() const { return n_train_; }
  double noise_std() const { return options_.noise_std; }
  Index chunk_rows() const { return options_.chunk_rows; }

  const RealVector& true_weights() const { return w_true_; }
  const RealMatrix& covariance_factor() const { return factor_; }
  RealMatrix covariance() const { return factor_ * factor_.transpose(); }
  const Dataset& test() const { return test_; }

  /// Rows [chunk * chunk_rows, (chunk + 1) * chunk_rows) of the training stream.
  Dataset train_chunk(std::int64_t chunk) const;
  /// The first `n` training rows.
  Dataset train_prefix(std::int64_t n) const;

 private:
  Dataset draw(Index n, RngStream& rng) const;

  Index d_;
  std::int64_t n_train_;
  std::uint64_t seed_;
  LinregOptions options_;
  RealVector w_true_;
  RealMatrix factor_;
  Dataset test_;
};

RegressionProblem gen_linreg(Index d, std::int64_t n_train, std::int64_t n_test,
                             std::uint64_t seed, const LinregOptions& options = {});

/// Sequential reader over a problem's training stream.
class SampleCursor {
 public:
  explicit SampleCursor(const RegressionProblem& problem) : problem_(&problem) {}

  /// Next `n` rows; the cursor advances by n.
  Dataset next(Index n);
  std::int64_t consumed() const { return consumed_; }

 private:
  const RegressionProblem* problem_;
  Dataset chunk_;
  std::int64_t chunk_index_ = -1;
  std::int64_t consumed_ = 0;
};

double eval_test_mse(const RealVector& w, const RegressionProblem& problem);
double eval_test_mse(const LinearPredictor& pred, const RegressionProblem& problem);
double mean_squared_error(const RealVector& w, const Dataset& data);

/// Writes `split,index,y,x0..xd` rows: the first `n_train` training rows, then the test set.
void write_dataset_csv(std::ostream& out, const RegressionProblem& problem, std::int64_t n_train);

struct ClassificationProblem {
  int num_classes = 0;
  Index dim = 0;
  double separation = 0.0;
  RealMatrix centers;  // num_classes x dim
  RealMatrix train_x;  // rows are samples
  std::vector<int> train_labels;
  RealMatrix test_x;
  std::vector<int> test_labels;
};

/// Centers ~ N(0, separation^2 I), points = center + N(0, I). Labels cycle 0..K-1 so every class
/// appears in the training set.
ClassificationProblem gen_blobs_classification(int num_classes, Index d, std::int64_t n_train,
                                               std::int64_t n_test, double separation,
                                               std::uint64_t seed);

/// +1 for a correct label, -1 otherwise.
double classification_reward(int predicted_label, int true_label);

/// Feature/target stream for regret runs: x = [1; F s] with a low-rank factor F, rescaled so
/// ||x|| <= feature_radius, y = w_ref^T x + noise clipped to the target bound. The reference
/// predictor sits inside the feasible ball so the comparator is not pinned to the boundary.
struct RegretStreamOptions {
  Index latent_rank = 2;
  double reference_fraction = 0.8;
  double noise_std = 1e-3;
};

class RegretStream {
 public:
  RegretStream(Index d, const BoundsConfig& bounds, std::uint64_t seed,
               const RegretStreamOptions& options = {});

  Index dim() const { return d_; }
  const RealVector& reference() const { return reference_; }
  /// Fills x (resized to dim()) and returns y.
  double next(RealVector& x);
  /// Restarts the stream from its first sample.
  void reset();

 private:
  Index d_;
  BoundsConfig bounds_;
  RegretStreamOptions options_;
  std::uint64_t seed_;
  RealMatrix factor_;  // (d - 1) x rank
  RealVector reference_;
  RngStream rng_;
  RealVector latent_;
};

}  // namespace explab
