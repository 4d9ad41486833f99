#include "explab/ars.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "explab/errors.hpp"

namespace explab {

std::string_view to_string(ArsVariant variant) {
  return variant == ArsVariant::kV1t ? "ars_v1t" : "ars_v2t";
}

void ArsConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("ArsConfig: step_size must be > 0");
  if (!(perturbation > 0.0)) throw std::invalid_argument("ArsConfig: perturbation must be > 0");
  if (n_directions < 1) throw std::invalid_argument("ArsConfig: n_directions must be >= 1");
  if (n_top < 1 || n_top > n_directions) {
    throw std::invalid_argument("ArsConfig: n_top must be in [1, n_directions]");
  }
}

RealVector normalize_input(const RealVector& x, const RunningMoments& moments) {
  if (moments.count() < 2) return x;
  require_dim(x.size(), moments.dim(), "normalize_input");
  const RealVector sd = moments.stddev().cwiseMax(1e-8);
  return (x - moments.mean()).cwiseQuotient(sd);
}

namespace {

struct DirectionResult {
  RealVector delta;
  double plus = 0.0;
  double minus = 0.0;
  RunningMoments visited;
};

void run_direction(const ArsReward& evaluate, const ArsState& state, const ArsConfig& config,
                   std::uint64_t key, int k, bool record, DirectionResult& out) {
  RngStream dir_rng = rng_derive(key, {"direction", k});
  out.delta = sample_normal(state.w.size(), dir_rng);
  RngStream plus_rng = rng_derive(key, {"evaluate", k, 1});
  RngStream minus_rng = rng_derive(key, {"evaluate", k, -1});
  RunningMoments* visited = nullptr;
  if (record) {
    out.visited = RunningMoments(state.moments.dim());
    visited = &out.visited;
  }
  out.plus = evaluate(state.w + config.perturbation * out.delta, state.moments, visited, plus_rng);
  out.minus = evaluate(state.w - config.perturbation * out.delta, state.moments, visited, minus_rng);
}

}  // namespace

ArsDiagnostics ars_iteration(const ArsReward& evaluate, ArsState& state, const ArsConfig& config,
                             RngStream& rng, int workers) {
  config.validate();
  const int N = config.n_directions;
  const bool record = config.variant == ArsVariant::kV2t;
  const std::uint64_t key = rng.next_u64();
  std::vector<DirectionResult> results(static_cast<std::size_t>(N));

  workers = std::clamp(workers, 1, N);
  if (workers == 1) {
    for (int k = 0; k < N; ++k) {
      run_direction(evaluate, state, config, key, k, record, results[static_cast<std::size_t>(k)]);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int id = 0; id < workers; ++id) {
      pool.emplace_back([&, id] {
        try {
          for (int k = id; k < N; k += workers) {
            run_direction(evaluate, state, config, key, k, record,
                          results[static_cast<std::size_t>(k)]);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(id)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  ArsDiagnostics diag;
  diag.evaluations = 2 * N;
  double sum = 0.0;
  diag.max_reward = -std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    if (!std::isfinite(r.plus) || !std::isfinite(r.minus)) {
      diag.aborted = true;
      diag.error = "non-finite reward";
      return diag;
    }
    sum += r.plus + r.minus;
    diag.max_reward = std::max({diag.max_reward, r.plus, r.minus});
  }
  diag.mean_reward = sum / (2.0 * N);

  std::vector<int> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ra = results[static_cast<std::size_t>(a)];
    const auto& rb = results[static_cast<std::size_t>(b)];
    return std::max(ra.plus, ra.minus) > std::max(rb.plus, rb.minus);
  });
  const int b = config.n_top;

  double mean = 0.0;
  for (int i = 0; i < b; ++i) {
    const auto& r = results[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    mean += r.plus + r.minus;
  }
  mean /= 2.0 * b;
  double var = 0.0;
  for (int i = 0; i < b; ++i) {
    const auto& r = results[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    var += (r.plus - mean) * (r.plus - mean) + (r.minus - mean) * (r.minus - mean);
  }
  diag.reward_std = std::sqrt(var / (2.0 * b));

  if (record) {
    for (const auto& r : results) state.moments.merge(r.visited);
  }
  ++state.iteration;

  if (diag.reward_std < 1e-12) {
    diag.degenerate = true;
    return diag;
  }
  RealVector step = RealVector::Zero(state.w.size());
  for (int i = 0; i < b; ++i) {
    const auto& r = results[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    step += (r.plus - r.minus) * r.delta;
  }
  state.w += (config.step_size / (b * diag.reward_std)) * step;
  return diag;
}

ArsTrainResult ars_train(ArsTask& task, const ArsConfig& config, const RealVector& w0,
                         const ArsTrainOptions& options, RngStream& rng) {
  config.validate();
  require_dim(w0.size(), task.param_dim(), "ars_train");
  if (options.budget < 0) throw std::invalid_argument("ars_train: budget must be >= 0");
  if (options.eval_every < 1) throw std::invalid_argument("ars_train: eval_every must be >= 1");

  ArsTrainResult result;
  result.state.w = w0;
  result.state.moments = RunningMoments(task.input_dim());
  const std::int64_t cost = 2LL * config.n_directions * task.samples_per_evaluation();

  auto checkpoint = [&] {
    CheckpointValue cp{result.samples, task.metric(result.state.w, result.state.moments)};
    result.curve.push_back(cp);
    return options.stop && options.stop(cp);
  };

  if (checkpoint()) return result;
  std::int64_t next_eval = options.eval_every;
  const ArsReward evaluate = [&task](const RealVector& params, const RunningMoments& normalizer,
                                     RunningMoments* visited, RngStream& r) {
    return task.reward(params, normalizer, visited, r);
  };
  while (result.samples + cost <= options.budget) {
    task.begin_iteration(result.state.iteration, rng);
    const ArsDiagnostics diag = ars_iteration(evaluate, result.state, config, rng, options.workers);
    if (diag.aborted) throw NumericalError("ars_train: " + diag.error);
    if (diag.degenerate) ++result.degenerate_iterations;
    result.samples += cost;
    if (result.samples >= next_eval) {
      while (next_eval <= result.samples) next_eval += options.eval_every;
      if (checkpoint()) return result;
    }
  }
  if (result.curve.back().samples != result.samples) checkpoint();
  return result;
}

}  // namespace explab
