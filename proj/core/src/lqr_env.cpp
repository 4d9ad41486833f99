#include "explab/lqr_env.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "explab/errors.hpp"

namespace explab {

void LqrSystem::validate() const {
  const Index d = A.rows();
  if (d < 1 || A.cols() != d) throw DimensionError("LqrSystem: A must be square and non-empty");
  require_dim(B.size(), d, "LqrSystem B");
  require_dim(x1.size(), d, "LqrSystem x1");
  if (Q.rows() != d || Q.cols() != d) throw DimensionError("LqrSystem: Q must be d x d");
  if (!(R > 0.0)) throw std::invalid_argument("LqrSystem: R must be positive");
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("LqrSystem: noise scale must be >= 0");
}

LqrSystem gen_lqr_system(Index d, std::uint64_t seed, double target_rho, double noise_scale,
                         double control_cost) {
  if (d < 1) throw std::invalid_argument("gen_lqr_system: d must be >= 1");
  if (!(target_rho > 0.0)) throw std::invalid_argument("gen_lqr_system: target_rho must be > 0");
  RngStream rng = rng_derive(seed, {"lqr", "system"});
  LqrSystem sys;
  sys.A.resize(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) sys.A(i, j) = rng.normal();
  }
  double rho = spectral_radius(sys.A);
  while (rho == 0.0) {
    for (Index j = 0; j < d; ++j) {
      for (Index i = 0; i < d; ++i) sys.A(i, j) = rng.normal();
    }
    rho = spectral_radius(sys.A);
  }
  sys.A *= target_rho / rho;
  sys.B = sample_normal(d, rng);
  sys.Q = RealMatrix::Identity(d, d);
  sys.R = control_cost;
  sys.noise_scale = noise_scale;
  sys.x1 = sample_normal(d, rng);
  sys.seed = seed;
  sys.validate();
  return sys;
}

LqrSystem embed_lqr_system(const LqrSystem& core, Index d, double pad_rho) {
  core.validate();
  const Index k = core.dim();
  if (d < k) throw std::invalid_argument("embed_lqr_system: target dimension below core");
  LqrSystem sys;
  sys.A = RealMatrix::Zero(d, d);
  sys.A.topLeftCorner(k, k) = core.A;
  if (d > k) sys.A.bottomRightCorner(d - k, d - k).diagonal().setConstant(pad_rho);
  sys.B = RealVector::Zero(d);
  sys.B.head(k) = core.B;
  sys.Q = RealMatrix::Identity(d, d);
  sys.Q.topLeftCorner(k, k) = core.Q;
  sys.R = core.R;
  sys.noise_scale = core.noise_scale;
  sys.x1 = RealVector::Zero(d);
  sys.x1.head(k) = core.x1;
  sys.seed = core.seed;
  return sys;
}

double LinearGaussianPolicy::action_std() const { return std::exp(log_std); }

LinearGaussianPolicy init_unstable_policy(const LqrSystem& system, RngStream& rng) {
  system.validate();
  const double b_norm = system.B.norm();
  if (b_norm == 0.0) throw NumericalError("init_unstable_policy: B = 0, closed loop is always A");
  const RealVector v = sample_normal(system.dim(), rng);
  double scale = 1.0 / (b_norm * v.norm());
  for (int step = 0; step < 80; ++step) {
    const RealMatrix closed = system.A + system.B * (scale * v).transpose();
    if (spectral_radius(closed) > 1.0) return {scale * v, 0.0};
    scale *= std::sqrt(2.0);
  }
  throw NumericalError("init_unstable_policy: no unstable scale found");
}

namespace {

double state_cost(const LqrSystem& sys, const RealVector& x) { return x.dot(sys.Q * x); }

bool overflows(double cost) { return !std::isfinite(cost) || cost > kCostCap; }

void truncate_from(Trajectory& traj, Index t) {
  traj.truncated = true;
  const Index H = traj.horizon();
  traj.states.rightCols(H - t).setZero();
  traj.actions.tail(H - t).setZero();
  traj.costs.tail(H - t).setConstant(kCostCap);
  traj.total_cost += static_cast<double>(H - t) * kCostCap;
}

template <typename ActionFn>
Trajectory simulate(const LqrSystem& sys, Index H, RngStream& rng, bool stochastic_noise,
                    ActionFn&& action) {
  if (H < 1) throw std::invalid_argument("rollout: H must be >= 1");
  const Index d = sys.dim();
  Trajectory traj;
  traj.states = RealMatrix::Zero(d, H);
  traj.actions = RealVector::Zero(H);
  traj.costs = RealVector::Zero(H);
  RealVector x = sys.x1;
  RealVector next(d);
  const double noise_std = std::sqrt(sys.noise_scale);
  for (Index t = 0; t < H; ++t) {
    const double a = action(t, x);
    const double cost = state_cost(sys, x) + sys.R * a * a;
    if (overflows(cost)) {
      truncate_from(traj, t);
      break;
    }
    traj.states.col(t) = x;
    traj.actions[t] = a;
    traj.costs[t] = cost;
    traj.total_cost += cost;
    traj.valid_steps = t + 1;
    if (t + 1 == H) break;
    next.noalias() = sys.A * x;
    next += a * sys.B;
    if (stochastic_noise && noise_std > 0.0) {
      for (Index i = 0; i < d; ++i) next[i] += noise_std * rng.normal();
    }
    x.swap(next);
  }
  return traj;
}

}  // namespace

Trajectory rollout_policy(const LqrSystem& system, const LinearGaussianPolicy& policy, Index H,
                          RngStream& rng, const RolloutOptions& options) {
  require_dim(policy.w.size(), system.dim(), "rollout_policy");
  const double sd = policy.action_std();
  return simulate(system, H, rng, options.stochastic_noise, [&](Index, const RealVector& x) {
    double a = policy.w.dot(x);
    if (options.stochastic_policy) a += sd * rng.normal();
    return a;
  });
}

Trajectory rollout_open_loop(const LqrSystem& system, const RealVector& actions, RngStream& rng,
                             bool stochastic_noise) {
  return simulate(system, actions.size(), rng, stochastic_noise,
                  [&](Index t, const RealVector&) { return actions[t]; });
}

double deterministic_cost(const LqrSystem& system, const RealVector& w, Index H) {
  require_dim(w.size(), system.dim(), "deterministic_cost");
  if (H < 1) throw std::invalid_argument("deterministic_cost: H must be >= 1");
  const RealMatrix closed = system.A + system.B * w.transpose();
  RealVector x = system.x1;
  RealVector next(x.size());
  double total = 0.0;
  for (Index t = 0; t < H; ++t) {
    const double a = w.dot(x);
    const double cost = state_cost(system, x) + system.R * a * a;
    if (overflows(cost)) return total + static_cast<double>(H - t) * kCostCap;
    total += cost;
    if (t + 1 == H) break;
    next.noalias() = closed * x;
    x.swap(next);
  }
  return total;
}

Trajectory rollout_time_varying(const LqrSystem& system, const std::vector<RealVector>& gains) {
  RngStream unused(0);
  return simulate(system, static_cast<Index>(gains.size()), unused, false,
                  [&](Index t, const RealVector& x) { return -gains[static_cast<std::size_t>(t)].dot(x); });
}

RiccatiSolution riccati_optimal(const LqrSystem& system, Index H) {
  system.validate();
  if (H < 1) throw std::invalid_argument("riccati_optimal: H must be >= 1");
  const Index d = system.dim();
  RiccatiSolution sol;
  sol.gains.assign(static_cast<std::size_t>(H), RealVector::Zero(d));
  RealMatrix P = system.Q;
  for (Index t = H - 2; t >= 0; --t) {
    const RealVector PB = P * system.B;
    const double denom = system.R + system.B.dot(PB);
    const RealVector K = (system.A.transpose() * PB) / denom;  // K^T stored as a column
    const RealMatrix closed = system.A - system.B * K.transpose();
    RealMatrix next = system.Q + system.R * K * K.transpose() + closed.transpose() * P * closed;
    P = 0.5 * (next + next.transpose());
    sol.gains[static_cast<std::size_t>(t)] = K;
  }
  sol.P1 = P;
  sol.optimal_cost = system.x1.dot(P * system.x1);
  return sol;
}

CostStats eval_policy_cost(const LqrSystem& system, const LinearGaussianPolicy& policy, Index H,
                           int episodes, RngStream& rng, bool deterministic) {
  if (episodes < 1) throw std::invalid_argument("eval_policy_cost: episodes must be >= 1");
  if (deterministic) return {deterministic_cost(system, policy.w, H), 0.0};
  RunningMoments moments(1);
  RealVector value(1);
  for (int e = 0; e < episodes; ++e) {
    value[0] = rollout_policy(system, policy, H, rng).total_cost;
    moments.push(value);
  }
  return {moments.mean()[0], moments.stddev()[0]};
}

double recompute_cost(const LqrSystem& system, const Trajectory& traj) {
  double total = static_cast<double>(traj.horizon() - traj.valid_steps) * kCostCap;
  for (Index t = 0; t < traj.valid_steps; ++t) {
    const RealVector x = traj.states.col(t);
    total += state_cost(system, x) + system.R * traj.actions[t] * traj.actions[t];
  }
  return total;
}

std::string lqr_system_to_json(const LqrSystem& system) {
  system.validate();
  const Index d = system.dim();
  if (!system.Q.isIdentity(0.0)) {
    throw std::invalid_argument("lqr_system_to_json: only Q = identity is serializable");
  }
  nlohmann::ordered_json j;
  j["d"] = d;
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(d * d));
  for (Index i = 0; i < d; ++i) {
    for (Index k = 0; k < d; ++k) a.push_back(system.A(i, k));
  }
  j["A"] = a;
  j["B"] = std::vector<double>(system.B.data(), system.B.data() + d);
  j["Q"] = "identity";
  j["R"] = system.R;
  j["c"] = system.noise_scale;
  j["x1"] = std::vector<double>(system.x1.data(), system.x1.data() + d);
  j["seed"] = system.seed;
  return j.dump(2);
}

LqrSystem lqr_system_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("LQR system JSON: ") + e.what());
  }
  static const char* kKeys[] = {"d", "A", "B", "Q", "R", "c", "x1", "seed"};
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || item.key() == k;
    if (!known) throw ConfigError("LQR system JSON: unknown key '" + item.key() + "'");
  }
  try {
    LqrSystem sys;
    const Index d = j.at("d").get<Index>();
    if (d < 1) throw ConfigError("LQR system JSON: d must be >= 1");
    const auto a = j.at("A").get<std::vector<double>>();
    const auto b = j.at("B").get<std::vector<double>>();
    const auto x1 = j.at("x1").get<std::vector<double>>();
    if (static_cast<Index>(a.size()) != d * d || static_cast<Index>(b.size()) != d ||
        static_cast<Index>(x1.size()) != d) {
      throw ConfigError("LQR system JSON: array sizes do not match d");
    }
    if (j.at("Q").get<std::string>() != "identity") {
      throw ConfigError("LQR system JSON: Q must be \"identity\"");
    }
    sys.A.resize(d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index k = 0; k < d; ++k) sys.A(i, k) = a[static_cast<std::size_t>(i * d + k)];
    }
    sys.B = Eigen::Map<const RealVector>(b.data(), d);
    sys.x1 = Eigen::Map<const RealVector>(x1.data(), d);
    sys.Q = RealMatrix::Identity(d, d);
    sys.R = j.at("R").get<double>();
    sys.noise_scale = j.at("c").get<double>();
    sys.seed = j.at("seed").get<std::uint64_t>();
    sys.validate();
    return sys;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("LQR system JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("LQR system JSON: ") + e.what());
  }
}

void save_lqr_system(const LqrSystem& system, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << lqr_system_to_json(system) << '\n';
}

LqrSystem load_lqr_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return lqr_system_from_json(buf.str());
}

}  // namespace explab
