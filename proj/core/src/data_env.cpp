#include "explab/data_env.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "explab/errors.hpp"

namespace explab {

namespace {

RealMatrix normal_matrix(Index rows, Index cols, RngStream& rng) {
  RealMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

}  // namespace

RegressionProblem::RegressionProblem(Index d, std::int64_t n_train, std::int64_t n_test,
                                     std::uint64_t seed, const LinregOptions& options)
    : d_(d), n_train_(n_train), seed_(seed), options_(options) {
  if (d < 1) throw std::invalid_argument("gen_linreg: d must be >= 1");
  if (n_train < 1 || n_test < 1) throw std::invalid_argument("gen_linreg: sizes must be >= 1");
  if (options.noise_std < 0.0) throw std::invalid_argument("gen_linreg: noise_std must be >= 0");
  if (options.chunk_rows < 1) throw std::invalid_argument("gen_linreg: chunk_rows must be >= 1");
  const Index rank = options.latent_rank > 0 ? options.latent_rank : d;

  RngStream model_rng = rng_derive(seed, {"linreg", "model"});
  w_true_ = sample_normal(d + 1, model_rng);
  factor_ = normal_matrix(d, rank, model_rng) / std::sqrt(static_cast<double>(d));

  RngStream test_rng = rng_derive(seed, {"linreg", "test"});
  test_ = draw(static_cast<Index>(n_test), test_rng);
}

Dataset RegressionProblem::draw(Index n, RngStream& rng) const {
  const Index rank = factor_.cols();
  const RealMatrix S = normal_matrix(n, rank, rng);
  Dataset out;
  out.X.resize(n, d_ + 1);
  out.X.col(0).setOnes();
  out.X.rightCols(d_).noalias() = S * factor_.transpose();
  out.y.noalias() = out.X * w_true_;
  for (Index i = 0; i < n; ++i) out.y[i] += options_.noise_std * rng.normal();
  return out;
}

Dataset RegressionProblem::train_chunk(std::int64_t chunk) const {
  if (chunk < 0) throw std::invalid_argument("train_chunk: negative chunk index");
  RngStream rng = rng_derive(seed_, {"linreg", "train", chunk});
  return draw(options_.chunk_rows, rng);
}

Dataset RegressionProblem::train_prefix(std::int64_t n) const {
  SampleCursor cursor(*this);
  return cursor.next(static_cast<Index>(n));
}

RegressionProblem gen_linreg(Index d, std::int64_t n_train, std::int64_t n_test,
                             std::uint64_t seed, const LinregOptions& options) {
  return RegressionProblem(d, n_train, n_test, seed, options);
}

Dataset SampleCursor::next(Index n) {
  if (n < 0) throw std::invalid_argument("SampleCursor::next: negative count");
  const Index p = problem_->param_dim();
  const Index rows = problem_->chunk_rows();
  Dataset out;
  out.X.resize(n, p);
  out.y.resize(n);
  Index filled = 0;
  while (filled < n) {
    const std::int64_t chunk = consumed_ / rows;
    if (chunk != chunk_index_) {
      chunk_ = problem_->train_chunk(chunk);
      chunk_index_ = chunk;
    }
    const Index offset = static_cast<Index>(consumed_ % rows);
    const Index take = std::min(n - filled, rows - offset);
    out.X.middleRows(filled, take) = chunk_.X.middleRows(offset, take);
    out.y.segment(filled, take) = chunk_.y.segment(offset, take);
    filled += take;
    consumed_ += take;
  }
  return out;
}

double mean_squared_error(const RealVector& w, const Dataset& data) {
  require_dim(w.size(), data.X.cols(), "mean_squared_error");
  if (data.size() == 0) throw std::invalid_argument("mean_squared_error: empty dataset");
  return (data.X * w - data.y).squaredNorm() / static_cast<double>(data.size());
}

double eval_test_mse(const RealVector& w, const RegressionProblem& problem) {
  return mean_squared_error(w, problem.test());
}

double eval_test_mse(const LinearPredictor& pred, const RegressionProblem& problem) {
  return eval_test_mse(pred.w, problem);
}

void write_dataset_csv(std::ostream& out, const RegressionProblem& problem, std::int64_t n_train) {
  const Index p = problem.param_dim();
  out << "split,index,y";
  for (Index j = 0; j < p; ++j) out << ",x" << j;
  out << '\n';
  const auto precision = out.precision(17);
  auto emit = [&](const char* split, const Dataset& data) {
    for (Index i = 0; i < data.size(); ++i) {
      out << split << ',' << i << ',' << data.y[i];
      for (Index j = 0; j < p; ++j) out << ',' << data.X(i, j);
      out << '\n';
    }
  };
  emit("train", problem.train_prefix(n_train));
  emit("test", problem.test());
  out.precision(precision);
}

ClassificationProblem gen_blobs_classification(int num_classes, Index d, std::int64_t n_train,
                                               std::int64_t n_test, double separation,
                                               std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("gen_blobs_classification: K must be >= 2");
  if (d < 1) throw std::invalid_argument("gen_blobs_classification: d must be >= 1");
  if (separation < 0.0) throw std::invalid_argument("gen_blobs_classification: separation < 0");
  if (n_train < num_classes || n_test < 1) {
    throw std::invalid_argument("gen_blobs_classification: n_train must be >= K, n_test >= 1");
  }
  ClassificationProblem prob;
  prob.num_classes = num_classes;
  prob.dim = d;
  prob.separation = separation;
  RngStream center_rng = rng_derive(seed, {"blobs", "centers"});
  prob.centers = separation * normal_matrix(num_classes, d, center_rng);

  auto fill = [&](std::int64_t n, RealMatrix& X, std::vector<int>& labels, const char* split) {
    RngStream rng = rng_derive(seed, {"blobs", split});
    X.resize(n, d);
    labels.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      const int k = static_cast<int>(i % num_classes);
      labels[static_cast<std::size_t>(i)] = k;
      for (Index j = 0; j < d; ++j) X(i, j) = prob.centers(k, j) + rng.normal();
    }
  };
  fill(n_train, prob.train_x, prob.train_labels, "train");
  fill(n_test, prob.test_x, prob.test_labels, "test");
  return prob;
}

double classification_reward(int predicted_label, int true_label) {
  return predicted_label == true_label ? 1.0 : -1.0;
}

RegretStream::RegretStream(Index d, const BoundsConfig& bounds, std::uint64_t seed,
                           const RegretStreamOptions& options)
    : d_(d), bounds_(bounds), options_(options), seed_(seed), rng_(0) {
  if (d < 1) throw std::invalid_argument("RegretStream: d must be >= 1");
  bounds.validate();
  const Index rank = std::min<Index>(std::max<Index>(options.latent_rank, 1), std::max<Index>(d - 1, 0));
  RngStream model_rng = rng_derive(seed, {"regret", "model"});
  const double scale = d > 1 ? 1.0 / std::sqrt(static_cast<double>(d - 1)) : 0.0;
  factor_ = normal_matrix(d - 1, rank, model_rng) * scale;

  RealVector v = sample_normal(rank + 1, model_rng);
  reference_.resize(d);
  reference_[0] = v[0];
  if (d > 1) reference_.tail(d - 1) = factor_ * v.tail(rank);
  const double norm = reference_.norm();
  if (norm > 0.0) reference_ *= options.reference_fraction * bounds.predictor_radius / norm;
  latent_.resize(rank);
  reset();
}

void RegretStream::reset() { rng_ = rng_derive(seed_, {"regret", "stream"}); }

double RegretStream::next(RealVector& x) {
  x.resize(d_);
  x[0] = 1.0;
  if (d_ > 1) {
    for (Index i = 0; i < latent_.size(); ++i) latent_[i] = rng_.normal();
    x.tail(d_ - 1).noalias() = factor_ * latent_;
  }
  const double norm = x.norm();
  if (norm > bounds_.feature_radius) x *= bounds_.feature_radius / norm;
  const double y = reference_.dot(x) + options_.noise_std * rng_.normal();
  return std::clamp(y, -bounds_.target_bound, bounds_.target_bound);
}

}  // namespace explab
