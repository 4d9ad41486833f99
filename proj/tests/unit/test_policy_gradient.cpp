#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "explab/errors.hpp"
#include "explab/policy_gradient.hpp"

using namespace explab;

namespace {

RealVector vec(std::initializer_list<double> values) {
  RealVector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

LqrSystem scalar_system(double a, double b, double r, double x1) {
  LqrSystem s;
  s.A = RealMatrix::Constant(1, 1, a);
  s.B = RealVector::Constant(1, b);
  s.Q = RealMatrix::Identity(1, 1);
  s.R = r;
  s.noise_scale = 0.0;
  s.x1 = RealVector::Constant(1, x1);
  return s;
}

// Exact expected cost of a linear Gaussian policy without process noise, from the mean and
// covariance of the state.
double expected_cost(const LqrSystem& s, const RealVector& w, double log_std, Index H) {
  const double var = std::exp(2.0 * log_std);
  const RealMatrix M = s.A + s.B * w.transpose();
  RealVector m = s.x1;
  RealMatrix S = RealMatrix::Zero(s.dim(), s.dim());
  double total = 0.0;
  for (Index t = 0; t < H; ++t) {
    total += m.dot(s.Q * m) + (s.Q * S).trace();
    const double am = w.dot(m);
    total += s.R * (am * am + w.dot(S * w) + var);
    m = M * m;
    S = M * S * M.transpose() + var * s.B * s.B.transpose();
  }
  return total;
}

}  // namespace

TEST_SUITE("policy_gradient") {

TEST_CASE("gradient estimate stores its norm") {
  const GradientEstimate g = GradientEstimate::from(vec({3, 4}));
  CHECK(g.norm == 5.0);
  CHECK(std::abs(g.norm - g.g.norm()) <= 1e-12);
}

TEST_CASE("gaussian score gradient by hand") {
  RealMatrix X(1, 1);
  X << 1.0;
  const GradientEstimate g = reinforce_gaussian_grad(X, vec({1.0}), vec({1.0}), vec({0.0}), 0.5);
  CHECK(g.g[0] == doctest::Approx(4.0).epsilon(1e-15));

  RealMatrix Z(3, 2);
  Z << 1, 2, 3, 4, 5, 6;
  const RealVector w = vec({0.5, -1});
  const GradientEstimate zero = reinforce_gaussian_grad(Z, Z * w, vec({1, 2, 3}), w, 0.3);
  CHECK(zero.g.norm() == 0.0);
  CHECK_THROWS_AS(reinforce_gaussian_grad(X, vec({1}), vec({1}), vec({0}), 0.0),
                  std::invalid_argument);
  CHECK_THROWS(reinforce_gaussian_grad(X, vec({1, 2}), vec({1}), vec({0}), 0.5));
}

TEST_CASE("gaussian score has zero mean under constant reward") {
  RngStream rng(1);
  const Index n = 100000;
  const Index d = 3;
  const double beta = 0.5;
  RealMatrix X(n, d);
  RealVector sampled(n);
  const RealVector w = vec({0.2, -0.1, 0.4});
  for (Index i = 0; i < n; ++i) {
    X.row(i) = sample_normal(d, rng).transpose();
    sampled[i] = X.row(i).dot(w) + beta * rng.normal();
  }
  const GradientEstimate g = reinforce_gaussian_grad(X, sampled, RealVector::Ones(n), w, beta);
  for (Index j = 0; j < d; ++j) {
    // Per-sample term eps x_j / beta has variance E[x_j^2] / beta^2.
    const double se = std::sqrt(X.col(j).squaredNorm() / static_cast<double>(n)) / beta /
                      std::sqrt(static_cast<double>(n));
    CHECK(std::abs(g.g[j]) <= 3.0 * se);
  }
}

TEST_CASE("softmax policy") {
  SoftmaxPolicy p{RealMatrix::Zero(3, 2)};
  const RealVector probs = p.probabilities(vec({1.0, 2.0}));
  CHECK(std::abs(probs.sum() - 1.0) <= 1e-12);
  CHECK(probs[0] == doctest::Approx(1.0 / 3.0));
  RngStream rng(2);
  p.theta(1, 1) = 5.0;
  CHECK(p.predict(vec({1.0, 2.0})) == 1);
  for (int i = 0; i < 50; ++i) {
    const int k = p.sample(vec({1.0, 0.3}), rng);
    CHECK((k >= 0 && k < 3));
  }
  p.theta.setConstant(400.0);
  p.theta(2, 0) = 1200.0;
  CHECK(std::abs(p.probabilities(vec({1.0, 1.0})).sum() - 1.0) <= 1e-12);
}

TEST_CASE("categorical score gradient by hand") {
  SoftmaxPolicy p{RealMatrix::Zero(2, 1)};
  RealMatrix X(1, 1);
  X << 1.0;
  const GradientEstimate g = reinforce_categorical_grad(X, {0}, vec({1.0}), p);
  const RealMatrix G = unflatten_gradient(g.g, 2, 1);
  CHECK(G(0, 0) == doctest::Approx(0.5));
  CHECK(G(1, 0) == doctest::Approx(-0.5));

  SoftmaxPolicy sure{RealMatrix::Zero(3, 2)};
  sure.theta(1, 0) = 1000.0;
  RealMatrix Z(2, 2);
  Z << 1, 0.5, 1, -0.5;
  const RealMatrix S = unflatten_gradient(reinforce_categorical_grad(Z, {1, 1}, vec({2.0, -3.0}), sure).g, 3, 2);
  CHECK(S.row(1).norm() == 0.0);

  const GradientEstimate none = reinforce_categorical_grad(Z, {0, 2}, vec({0.0, 0.0}), sure);
  CHECK(none.g.norm() == 0.0);
  CHECK_THROWS(reinforce_categorical_grad(Z, {0, 3}, vec({1.0, 1.0}), sure));
  CHECK_THROWS(reinforce_categorical_grad(Z, {0, -1}, vec({1.0, 1.0}), sure));
}

TEST_CASE("categorical score has zero mean under constant reward") {
  RngStream rng(3);
  SoftmaxPolicy p{RealMatrix::Zero(3, 3)};
  p.theta << 0.2, -0.5, 0.1, 0.0, 0.3, 0.3, -0.4, 0.0, 0.2;
  const Index n = 100000;
  RealMatrix X(n, 3);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    RealVector x(3);
    x << 1.0, rng.normal(), rng.normal();
    X.row(i) = x.transpose();
    labels[static_cast<std::size_t>(i)] = p.sample(x, rng);
  }
  const RealVector g = reinforce_categorical_grad(X, labels, RealVector::Ones(n), p).g;
  // Each entry averages terms bounded by |x_j|, so its standard error is at most
  // sqrt(E[x_j^2] / n) <= sqrt(1 / n) after accounting for the unit-variance features.
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < g.size(); ++j) CHECK(std::abs(g[j]) <= 3.0 * se);
}

TEST_CASE("natural gradient") {
  const Index d = 4;
  RealMatrix white = std::sqrt(static_cast<double>(d)) * RealMatrix::Identity(d, d);
  const GradientEstimate g = GradientEstimate::from(vec({1, -2, 0.5, 3}));
  const double damping = 1e-6;
  const GradientEstimate n = natural_grad(white, g, 1.0, damping);
  CHECK((n.g - g.g).norm() <= 10.0 * damping * g.g.norm());

  RealMatrix e1 = RealMatrix::Zero(5, 2);
  e1.col(0).setOnes();
  const GradientEstimate h = natural_grad(e1, GradientEstimate::from(vec({2, 3})), 1.0, 0.01);
  CHECK(h.g[0] == doctest::Approx(2.0 / 1.01).epsilon(1e-12));
  CHECK(h.g[1] == doctest::Approx(3.0 / 0.01).epsilon(1e-12));

  RngStream rng(4);
  RealMatrix X(30, 3);
  for (Index j = 0; j < 3; ++j) X.col(j) = sample_normal(30, rng);
  const GradientEstimate a = natural_grad(X, GradientEstimate::from(vec({1, 2, 3})), 0.5);
  const GradientEstimate b = natural_grad(X, GradientEstimate::from(vec({2, 4, 6})), 0.5);
  CHECK((b.g - 2.0 * a.g).norm() <= 1e-10 * b.g.norm());
}

TEST_CASE("trajectory score gradient edge cases") {
  LqrSystem s = gen_lqr_system(2, 1);
  const LinearGaussianPolicy p{vec({0.1, -0.2}), -0.3};
  CHECK_THROWS(reinforce_trajectory_grad({}, p));

  RngStream rng(5);
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 4; ++i) {
    Trajectory t = rollout_policy(s, p, 5, rng);
    t.costs.setZero();
    t.total_cost = 0.0;
    trajs.push_back(t);
  }
  CHECK(reinforce_trajectory_grad(trajs, p).g.norm() == 0.0);
  CHECK(reinforce_trajectory_grad(trajs, p, false).g.norm() == 0.0);
}

TEST_CASE("one-step trajectory gradient is the gaussian score gradient") {
  const LqrSystem s = gen_lqr_system(3, 2);
  const LinearGaussianPolicy p{vec({0.1, 0.0, -0.3}), std::log(0.7)};
  RngStream rng(6);
  std::vector<Trajectory> trajs;
  RealMatrix X(8, 3);
  RealVector sampled(8);
  RealVector cost(8);
  for (Index i = 0; i < 8; ++i) {
    trajs.push_back(rollout_policy(s, p, 1, rng));
    X.row(i) = trajs.back().states.col(0).transpose();
    sampled[i] = trajs.back().actions[0];
    cost[i] = trajs.back().total_cost;
  }
  const RealVector traj = reinforce_trajectory_grad(trajs, p).g;
  const RealVector one_step = reinforce_gaussian_grad(X, sampled, -cost, p.w, 0.7).g;
  REQUIRE(traj.size() == 4);
  CHECK((traj.head(3) + one_step).norm() <= 1e-12 * (1.0 + one_step.norm()));
}

TEST_CASE("trajectory score gradient matches the exact expected-cost gradient") {
  LqrSystem s = gen_lqr_system(2, 7);
  s.noise_scale = 0.0;
  const Index H = 3;
  const LinearGaussianPolicy p{vec({-0.3, 0.2}), std::log(0.5)};

  RealVector exact(3);
  const double h = 1e-6;
  for (Index j = 0; j < 2; ++j) {
    RealVector wp = p.w;
    RealVector wm = p.w;
    wp[j] += h;
    wm[j] -= h;
    exact[j] = (expected_cost(s, wp, p.log_std, H) - expected_cost(s, wm, p.log_std, H)) / (2 * h);
  }
  exact[2] = (expected_cost(s, p.w, p.log_std + h, H) - expected_cost(s, p.w, p.log_std - h, H)) / (2 * h);

  RngStream rng(8);
  const int batches = 100;
  const int per_batch = 10000;
  RealVector mean = RealVector::Zero(3);
  std::vector<Trajectory> trajs(per_batch);
  for (int b = 0; b < batches; ++b) {
    for (auto& t : trajs) t = rollout_policy(s, p, H, rng, {true, false});
    mean += reinforce_trajectory_grad(trajs, p).g;
  }
  mean /= batches;
  CHECK((mean - exact).norm() <= 0.02 * exact.norm());
}

TEST_CASE("action-space estimator algebra") {
  const LqrSystem s = gen_lqr_system(3, 3);
  const RealVector w = vec({0.05, -0.02, 0.01});
  RngStream a(9);
  RngStream b(9);
  const GradientEstimate g1 = action_space_rl_grad(s, w, 0.01, 6, a);
  const GradientEstimate g2 = action_space_rl_grad(s, w, 0.02, 6, b);
  CHECK(g1.meta.direction == g2.meta.direction);
  CHECK(std::abs(g1.meta.direction.norm() - 1.0) <= 1e-12);

  RngStream c(1);
  LqrSystem quiet = s;
  quiet.noise_scale = 0.0;
  const Trajectory base = rollout_policy(quiet, {w, 0.0}, 6, c, {false, false});
  for (const GradientEstimate* g : {&g1, &g2}) {
    REQUIRE(g->meta.objectives.size() >= 1);
    const double J = g->meta.objectives.back();
    const RealVector expect = (6.0 * J / g->meta.delta) * (base.states * g->meta.direction);
    CHECK((g->g - expect).norm() <= 1e-12 * expect.norm());
    CHECK(g->norm == doctest::Approx(6.0 * std::abs(J) / g->meta.delta *
                                     (base.states * g->meta.direction).norm()));
  }

  LqrSystem still = s;
  still.x1.setZero();
  RngStream d(2);
  CHECK(action_space_rl_grad(still, w, 0.01, 5, d).g.norm() == 0.0);

  RngStream e(3);
  const GradientEstimate one = action_space_rl_grad(s, w, 0.1, 1, e);
  const double J1 = one.meta.objectives.back();
  CHECK((one.g - (J1 / 0.1) * one.meta.direction[0] * s.x1).norm() <= 1e-12 * one.g.norm());
  CHECK_THROWS(action_space_rl_grad(s, w, 0.0, 5, e));
}

TEST_CASE("action-space estimator is unbiased for the open-loop gradient") {
  // x2 = x1 + a1, J = x1^2 + R a1^2 + x2^2 + R a2^2; at w = 0 the actions are zero, so
  // dJ/da = (2 x2, 0) and the chain rule through the states gives X dJ/da = 2 x1 x2 = 2.
  const LqrSystem s = scalar_system(1.0, 1.0, 1e-3, 1.0);
  const RealVector w = vec({0.0});
  RngStream rng(10);
  const int n = 1000000;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += action_space_rl_grad(s, w, 0.5, 2, rng).g[0];
  mean /= n;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("parameter-space estimator algebra") {
  const LqrSystem s = gen_lqr_system(4, 5);
  const RealVector w = vec({0.01, 0.02, -0.01, 0.0});
  RngStream a(4);
  RngStream b(4);
  const GradientEstimate g1 = param_space_rl_grad(s, w, 0.01, 8, a);
  const GradientEstimate g2 = param_space_rl_grad(s, w, 0.03, 8, b);
  CHECK(g1.meta.direction == g2.meta.direction);
  for (const GradientEstimate* g : {&g1, &g2}) {
    const double J = g->meta.objectives.back();
    CHECK(J == doctest::Approx(deterministic_cost(s, w + g->meta.delta * g->meta.direction, 8)));
    CHECK(g->norm == doctest::Approx(4.0 * std::abs(J) / g->meta.delta).epsilon(1e-12));
    CHECK((g->g - (4.0 * J / g->meta.delta) * g->meta.direction).norm() <= 1e-12 * g->norm);
  }
  LqrSystem still = s;
  still.x1.setZero();
  RngStream c(5);
  CHECK(param_space_rl_grad(still, w, 0.01, 8, c).g.norm() == 0.0);
  CHECK_THROWS(param_space_rl_grad(s, w, -1.0, 8, c));
}

TEST_CASE("smoothed objective") {
  RngStream rng(11);
  const ScalarObjective constant = [](const RealVector&) { return 3.5; };
  CHECK(smoothed_objective_mc(constant, vec({1, 2}), 0.3, 100, rng) == doctest::Approx(3.5));

  const Index d = 5;
  const RealVector x = vec({0.5, -1.0, 0.25, 2.0, 0.0});
  const double y = 0.7;
  const ScalarObjective quad = [&](const RealVector& w) {
    const double r = w.dot(x) - y;
    return r * r;
  };
  const RealVector w = vec({0.1, 0.2, 0.3, -0.4, 0.5});
  const double delta = 0.4;
  const std::int64_t n = 200000;
  RngStream probe = rng;
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = quad(w + delta * sample_unit_ball(d, probe));
    sum += v;
    sum2 += v * v;
  }
  const double sd = std::sqrt(sum2 / n - (sum / n) * (sum / n));
  const double analytic = quad(w) + delta * delta * x.squaredNorm() / (d + 2.0);
  const double mc = smoothed_objective_mc(quad, w, delta, n, rng);
  CHECK(std::abs(mc - analytic) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));

  const double small = 1e-3;
  const double lip = 2.0 * (std::abs(w.dot(x) - y) + small * x.norm()) * x.norm();
  CHECK(std::abs(smoothed_objective_mc(quad, w, small, 1000, rng) - quad(w)) <= lip * small);
  CHECK_THROWS(smoothed_objective_mc(quad, w, 0.0, 10, rng));
  CHECK_THROWS(smoothed_objective_mc(quad, w, 0.1, 0, rng));
}

}  // TEST_SUITE
