#pragma once

// Finite-horizon LQR: x_{t+1} = A x_t + B a_t + xi_t, cost sum_t x_t^T Q x_t + R a_t^2,
// scalar control, fixed initial state.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "explab/numeric.hpp"
#include "explab/rng.hpp"

namespace explab {

/// Per-step cost cap. Once a step's cost is non-finite or exceeds it, the simulation stops and
/// that step and every later one are charged exactly kCostCap, so earlier blow-ups cost more.
inline constexpr double kCostCap = 1e12;

struct LqrSystem {
  RealMatrix A;
  RealVector B;
  RealMatrix Q;
  double R = 1e-3;
  double noise_scale = 1e-4;  // xi ~ N(0, c I)
  RealVector x1;
  std::uint64_t seed = 0;

  Index dim() const { return A.rows(); }
  void validate() const;
};

/// A ~ N(0, 1) rescaled to spectral radius `target_rho`, B ~ N(0, I), Q = I, x1 ~ N(0, I).
LqrSystem gen_lqr_system(Index d, std::uint64_t seed, double target_rho = 0.95,
                         double noise_scale = 1e-4, double control_cost = 1e-3);

/// Block-diagonal extension of `core` to dimension d: extra states start at zero, evolve with
/// target_rho * I and receive no control, so every policy costs the same as on `core`.
LqrSystem embed_lqr_system(const LqrSystem& core, Index d, double pad_rho = 0.5);

struct LinearGaussianPolicy {
  RealVector w;
  double log_std = 0.0;

  double action_std() const;
};

/// Returns (w, log_std = 0) whose closed loop A + B w^T has spectral radius above one. The
/// direction is Gaussian; its scale starts at 1 / (||B|| ||v||) and grows by sqrt(2) until the
/// loop is unstable. Throws NumericalError when that fails (B = 0, for example).
LinearGaussianPolicy init_unstable_policy(const LqrSystem& system, RngStream& rng);

struct Trajectory {
  RealMatrix states;  // d x H, column t is x_{t+1}; zero after truncation
  RealVector actions;
  RealVector costs;
  double total_cost = 0.0;
  bool truncated = false;
  Index valid_steps = 0;  // steps actually simulated

  Index horizon() const { return actions.size(); }
};

struct RolloutOptions {
  bool stochastic_policy = true;
  bool stochastic_noise = true;
};

Trajectory rollout_policy(const LqrSystem& system, const LinearGaussianPolicy& policy, Index H,
                          RngStream& rng, const RolloutOptions& options = {});

/// Plays `actions` verbatim, ignoring the states.
Trajectory rollout_open_loop(const LqrSystem& system, const RealVector& actions, RngStream& rng,
                             bool stochastic_noise = true);

/// Cost of the deterministic policy a = w^T x with no process noise. Allocation free.
double deterministic_cost(const LqrSystem& system, const RealVector& w, Index H);

/// Time-varying feedback a_t = -K_t x_t with no process noise.
Trajectory rollout_time_varying(const LqrSystem& system, const std::vector<RealVector>& gains);

struct RiccatiSolution {
  std::vector<RealVector> gains;  // K_1..K_H (row vectors stored as columns); a_t = -K_t x_t
  RealMatrix P1;
  double optimal_cost = 0.0;
};

RiccatiSolution riccati_optimal(const LqrSystem& system, Index H);

struct CostStats {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean / population std of the total cost over `episodes` rollouts. With `deterministic` the
/// mean action is played without noise once and std is 0.
CostStats eval_policy_cost(const LqrSystem& system, const LinearGaussianPolicy& policy, Index H,
                           int episodes, RngStream& rng, bool deterministic);

/// Recomputes sum_t x_t^T Q x_t + R a_t^2 from the stored states and actions (capped steps
/// contribute kCostCap each).
double recompute_cost(const LqrSystem& system, const Trajectory& traj);

std::string lqr_system_to_json(const LqrSystem& system);
LqrSystem lqr_system_from_json(const std::string& text);
void save_lqr_system(const LqrSystem& system, const std::string& path);
LqrSystem load_lqr_system(const std::string& path);

}  // namespace explab
