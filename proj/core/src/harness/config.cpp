#include "explab/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "explab/errors.hpp"

namespace explab::harness {

using Json = nlohmann::json;

std::string_view to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::kLinreg:
      return "linreg";
    case Experiment::kRegret:
      return "regret";
    case Experiment::kLqr:
      return "lqr";
    case Experiment::kBanditCls:
      return "bandit_cls";
    case Experiment::kOracleCheck:
      return "oracle_check";
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view name) {
  if (name == "linreg") return Experiment::kLinreg;
  if (name == "regret") return Experiment::kRegret;
  if (name == "lqr") return Experiment::kLqr;
  if (name == "bandit_cls" || name == "bandit-cls") return Experiment::kBanditCls;
  if (name == "oracle_check" || name == "oracle-check") return Experiment::kOracleCheck;
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

namespace {

enum Mask : unsigned {
  kLin = 1u << 0,
  kReg = 1u << 1,
  kLqrM = 1u << 2,
  kBan = 1u << 3,
  kOra = 1u << 4,
};

unsigned mask_of(Experiment e) {
  switch (e) {
    case Experiment::kLinreg:
      return kLin;
    case Experiment::kRegret:
      return kReg;
    case Experiment::kLqr:
      return kLqrM;
    case Experiment::kBanditCls:
      return kBan;
    case Experiment::kOracleCheck:
      return kOra;
  }
  return 0;
}

using Field = std::variant<std::int64_t TaskConfig::*, double TaskConfig::*,
                           std::vector<std::int64_t> TaskConfig::*, std::string TaskConfig::*>;

struct TaskKey {
  const char* name;
  unsigned experiments;
  Field field;
};

const std::vector<TaskKey>& task_keys() {
  static const std::vector<TaskKey> keys = {
      {"dims", kLin | kReg | kBan, &TaskConfig::dims},
      {"horizons", kReg | kLqrM, &TaskConfig::horizons},
      {"budget", kLin | kLqrM | kBan, &TaskConfig::budget},
      {"eval_every", kLin | kBan, &TaskConfig::eval_every},
      {"eval_every_iterations", kLqrM, &TaskConfig::eval_every_iterations},
      {"n_train", kBan, &TaskConfig::n_train},
      {"n_test", kLin | kBan, &TaskConfig::n_test},
      {"noise_std", kLin | kReg, &TaskConfig::noise_std},
      {"epsilon", kReg, &TaskConfig::epsilon},
      {"max_rounds", kReg, &TaskConfig::max_rounds},
      {"predictor_radius", kReg, &TaskConfig::predictor_radius},
      {"feature_radius", kReg, &TaskConfig::feature_radius},
      {"target_bound", kReg, &TaskConfig::target_bound},
      {"latent_rank", kReg, &TaskConfig::latent_rank},
      {"patience", kReg | kLqrM, &TaskConfig::patience},
      {"state_dim", kLqrM, &TaskConfig::state_dim},
      {"tolerance", kLqrM, &TaskConfig::tolerance},
      {"control_cost", kLqrM, &TaskConfig::control_cost},
      {"noise_scale", kLqrM, &TaskConfig::noise_scale},
      {"target_rho", kLqrM, &TaskConfig::target_rho},
      {"system_file", kLqrM, &TaskConfig::system_file},
      {"num_classes", kBan, &TaskConfig::num_classes},
      {"separation", kBan, &TaskConfig::separation},
      {"n_systems", kOra, &TaskConfig::n_systems},
      {"max_dim", kOra, &TaskConfig::max_dim},
      {"max_horizon", kOra, &TaskConfig::max_horizon},
      {"n_policies", kOra, &TaskConfig::n_policies},
  };
  return keys;
}

const std::map<std::string, std::set<std::string>>& hyper_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"supervised_sgd", {"lr", "batch", "momentum"}},
      {"supervised_newton", {"batch", "ridge"}},
      {"reinforce", {"lr", "batch", "beta", "use_cost_to_go"}},
      {"natural_reinforce", {"lr", "batch", "beta", "damping"}},
      {"ogd", {}},
      {"bgd", {}},
      {"action_rs", {}},
      {"ars_v1t", {"step_size", "n_directions", "n_top", "perturbation", "minibatch"}},
      {"ars_v2t", {"step_size", "n_directions", "n_top", "perturbation", "minibatch"}},
  };
  return keys;
}

std::int64_t as_int(const Json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  }
  throw ConfigError(where + ": expected an integer");
}

double as_double(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

void set_task_field(TaskConfig& task, const TaskKey& key, const Json& v) {
  const std::string where = std::string("task.") + key.name;
  std::visit(
      [&](auto member) {
        using T = std::decay_t<decltype(task.*member)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          task.*member = as_int(v, where);
        } else if constexpr (std::is_same_v<T, double>) {
          task.*member = as_double(v, where);
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (!v.is_string()) throw ConfigError(where + ": expected a string");
          task.*member = v.get<std::string>();
        } else {
          if (!v.is_array()) throw ConfigError(where + ": expected an array of integers");
          std::vector<std::int64_t> out;
          for (const auto& item : v) out.push_back(as_int(item, where));
          task.*member = out;
        }
      },
      key.field);
}

Json task_field_json(const TaskConfig& task, const TaskKey& key) {
  return std::visit([&](auto member) { return Json(task.*member); }, key.field);
}

}  // namespace

const std::vector<std::string>& allowed_algorithms(Experiment experiment) {
  static const std::map<Experiment, std::vector<std::string>> table = {
      {Experiment::kLinreg,
       {"supervised_sgd", "supervised_newton", "reinforce", "natural_reinforce", "ars_v2t"}},
      {Experiment::kRegret, {"ogd", "bgd", "action_rs"}},
      {Experiment::kLqr, {"reinforce", "ars_v1t"}},
      {Experiment::kBanditCls, {"supervised_sgd", "reinforce", "ars_v1t", "ars_v2t"}},
      {Experiment::kOracleCheck, {}},
  };
  return table.at(experiment);
}

ExperimentConfig default_config(Experiment experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  for (std::uint64_t s = 0; s < 10; ++s) c.seeds.push_back(s);
  TaskConfig& t = c.task;
  switch (experiment) {
    case Experiment::kLinreg:
      c.algorithms = {"supervised_sgd", "reinforce", "natural_reinforce", "ars_v2t"};
      t.dims = {10};
      t.budget = 100000;
      t.n_test = 10000;
      break;
    case Experiment::kRegret:
      c.algorithms = {"ogd", "bgd", "action_rs"};
      t.dims = {10, 100};
      t.horizons = {100, 1000, 10000};
      break;
    case Experiment::kLqr:
      c.algorithms = {"ars_v1t", "reinforce"};
      t.horizons = {10, 20};
      t.budget = 2000000;
      break;
    case Experiment::kBanditCls:
      c.algorithms = {"supervised_sgd", "reinforce", "ars_v2t"};
      t.dims = {10};
      t.budget = 100000;
      t.n_train = 20000;
      t.n_test = 2000;
      break;
    case Experiment::kOracleCheck:
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  const auto& allowed = allowed_algorithms(experiment);
  if (experiment != Experiment::kOracleCheck && algorithms.empty()) {
    throw ConfigError("algorithms must not be empty");
  }
  std::set<std::string> seen_alg;
  for (const auto& a : algorithms) {
    if (std::find(allowed.begin(), allowed.end(), a) == allowed.end()) {
      throw ConfigError("algorithm '" + a + "' is not valid for experiment '" +
                        std::string(to_string(experiment)) + "'");
    }
    if (!seen_alg.insert(a).second) throw ConfigError("algorithm '" + a + "' listed twice");
  }
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  std::set<std::uint64_t> seen(seeds.begin(), seeds.end());
  if (seen.size() != seeds.size()) throw ConfigError("seeds must be distinct");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  for (const auto& [alg, params] : hyperparameters) {
    const auto it = hyper_keys().find(alg);
    if (it == hyper_keys().end()) throw ConfigError("hyperparameters: unknown algorithm '" + alg + "'");
    for (const auto& [key, value] : params) {
      if (!it->second.count(key)) {
        throw ConfigError("hyperparameters." + alg + ": unknown key '" + key + "'");
      }
      if (!std::isfinite(value)) throw ConfigError("hyperparameters." + alg + "." + key + " not finite");
    }
  }

  const TaskConfig& t = task;
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  auto positive_list = [&](const std::vector<std::int64_t>& v, const char* msg) {
    need(!v.empty(), msg);
    for (auto x : v) need(x >= 1, msg);
  };
  switch (experiment) {
    case Experiment::kLinreg:
      positive_list(t.dims, "task.dims must be a non-empty list of positive integers");
      need(t.budget >= 0, "task.budget must be >= 0");
      need(t.eval_every >= 1, "task.eval_every must be >= 1");
      need(t.n_test >= 1, "task.n_test must be >= 1");
      need(t.noise_std >= 0.0, "task.noise_std must be >= 0");
      break;
    case Experiment::kRegret:
      positive_list(t.dims, "task.dims must be a non-empty list of positive integers");
      positive_list(t.horizons, "task.horizons must be a non-empty list of positive integers");
      need(t.max_rounds >= 1, "task.max_rounds must be >= 1");
      need(t.epsilon > 0.0, "task.epsilon must be > 0");
      need(t.predictor_radius > 0.0 && t.feature_radius > 0.0 && t.target_bound > 0.0,
           "task radii must be > 0");
      need(t.latent_rank >= 1, "task.latent_rank must be >= 1");
      need(t.patience >= 1, "task.patience must be >= 1");
      need(t.noise_std >= 0.0, "task.noise_std must be >= 0");
      break;
    case Experiment::kLqr:
      positive_list(t.horizons, "task.horizons must be a non-empty list of positive integers");
      need(t.budget >= 0, "task.budget must be >= 0");
      need(t.eval_every_iterations >= 1, "task.eval_every_iterations must be >= 1");
      need(t.state_dim >= 1, "task.state_dim must be >= 1");
      need(t.tolerance >= 0.0, "task.tolerance must be >= 0");
      need(t.control_cost > 0.0, "task.control_cost must be > 0");
      need(t.noise_scale >= 0.0, "task.noise_scale must be >= 0");
      need(t.target_rho > 0.0 && t.target_rho < 1.0, "task.target_rho must be in (0, 1)");
      need(t.patience >= 1, "task.patience must be >= 1");
      break;
    case Experiment::kBanditCls:
      positive_list(t.dims, "task.dims must be a non-empty list of positive integers");
      need(t.num_classes >= 2, "task.num_classes must be >= 2");
      need(t.separation >= 0.0, "task.separation must be >= 0");
      need(t.n_train >= t.num_classes, "task.n_train must be >= num_classes");
      need(t.n_test >= 1, "task.n_test must be >= 1");
      need(t.budget >= 0, "task.budget must be >= 0");
      need(t.eval_every >= 1, "task.eval_every must be >= 1");
      break;
    case Experiment::kOracleCheck:
      need(t.n_systems >= 1, "task.n_systems must be >= 1");
      need(t.max_dim >= 1, "task.max_dim must be >= 1");
      need(t.max_horizon >= 1, "task.max_horizon must be >= 1");
      need(t.n_policies >= 1, "task.n_policies must be >= 1");
      break;
  }
}

double ExperimentConfig::hyper(const std::string& algorithm, const std::string& key,
                               double fallback) const {
  const auto it = hyperparameters.find(algorithm);
  if (it == hyperparameters.end()) return fallback;
  const auto jt = it->second.find(key);
  return jt == it->second.end() ? fallback : jt->second;
}

ExperimentConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> top = {"experiment", "algorithms",      "seeds",
                                            "master_seed", "n_seeds",        "workers",
                                            "output_dir",  "task",           "hyperparameters"};
  for (const auto& item : j.items()) {
    if (!top.count(item.key())) throw ConfigError("unknown key '" + item.key() + "'");
  }
  if (!j.contains("experiment") || !j["experiment"].is_string()) {
    throw ConfigError("config needs a string 'experiment'");
  }
  ExperimentConfig c = default_config(parse_experiment(j["experiment"].get<std::string>()));

  if (j.contains("algorithms")) {
    if (!j["algorithms"].is_array()) throw ConfigError("algorithms: expected an array");
    c.algorithms.clear();
    for (const auto& a : j["algorithms"]) {
      if (!a.is_string()) throw ConfigError("algorithms: expected strings");
      c.algorithms.push_back(a.get<std::string>());
    }
  }
  if (j.contains("seeds") && (j.contains("master_seed") || j.contains("n_seeds"))) {
    throw ConfigError("give either 'seeds' or 'master_seed'/'n_seeds', not both");
  }
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array()) throw ConfigError("seeds: expected an array");
    c.seeds.clear();
    for (const auto& s : j["seeds"]) {
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
        throw ConfigError("seeds: expected non-negative integers");
      }
      c.seeds.push_back(s.get<std::uint64_t>());
    }
  } else if (j.contains("master_seed") || j.contains("n_seeds")) {
    std::uint64_t base = 0;
    if (j.contains("master_seed")) {
      if (!j["master_seed"].is_number_integer() || j["master_seed"].get<std::int64_t>() < 0) {
        throw ConfigError("master_seed: expected a non-negative integer");
      }
      base = j["master_seed"].get<std::uint64_t>();
    }
    const std::int64_t n = j.contains("n_seeds") ? as_int(j["n_seeds"], "n_seeds") : 10;
    if (n < 1) throw ConfigError("n_seeds must be >= 1");
    c.seeds.clear();
    for (std::int64_t i = 0; i < n; ++i) c.seeds.push_back(base + static_cast<std::uint64_t>(i));
  }
  if (j.contains("workers")) c.workers = static_cast<int>(as_int(j["workers"], "workers"));
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("output_dir: expected a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("task")) {
    if (!j["task"].is_object()) throw ConfigError("task: expected an object");
    const unsigned m = mask_of(c.experiment);
    for (const auto& item : j["task"].items()) {
      const auto& keys = task_keys();
      const auto it = std::find_if(keys.begin(), keys.end(), [&](const TaskKey& k) {
        return item.key() == k.name && (k.experiments & m);
      });
      if (it == keys.end()) {
        throw ConfigError("task: unknown key '" + item.key() + "' for experiment '" +
                          std::string(to_string(c.experiment)) + "'");
      }
      set_task_field(c.task, *it, item.value());
    }
  }
  if (j.contains("hyperparameters")) {
    if (!j["hyperparameters"].is_object()) throw ConfigError("hyperparameters: expected an object");
    for (const auto& alg : j["hyperparameters"].items()) {
      if (!alg.value().is_object()) {
        throw ConfigError("hyperparameters." + alg.key() + ": expected an object");
      }
      HyperParams params;
      for (const auto& kv : alg.value().items()) {
        params[kv.key()] = as_double(kv.value(), "hyperparameters." + alg.key() + "." + kv.key());
      }
      c.hyperparameters[alg.key()] = params;
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& config) {
  Json j = Json::object();
  j["experiment"] = std::string(to_string(config.experiment));
  j["algorithms"] = config.algorithms;
  j["seeds"] = config.seeds;
  j["workers"] = config.workers;
  j["output_dir"] = config.output_dir;
  Json task = Json::object();
  const unsigned m = mask_of(config.experiment);
  for (const auto& key : task_keys()) {
    if (key.experiments & m) task[key.name] = task_field_json(config.task, key);
  }
  j["task"] = task;
  Json hyper = Json::object();
  for (const auto& [alg, params] : config.hyperparameters) hyper[alg] = params;
  j["hyperparameters"] = hyper;
  return j.dump(2);
}

}  // namespace explab::harness
