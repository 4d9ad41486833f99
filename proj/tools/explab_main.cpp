#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "explab/errors.hpp"
#include "explab/harness/config.hpp"
#include "explab/harness/experiments.hpp"
#include "explab/harness/output.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_seeds;
  std::optional<int> workers;
  std::vector<std::string> algorithms;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run(explab::harness::Experiment experiment, const Options& opt) {
  using namespace explab::harness;
  ExperimentConfig config = opt.config_path.empty() ? default_config(experiment)
                                                    : load_config(opt.config_path);
  if (config.experiment != experiment) {
    throw explab::ConfigError("config describes experiment '" +
                              std::string(to_string(config.experiment)) + "', not '" +
                              std::string(to_string(experiment)) + "'");
  }
  if (opt.seed || opt.n_seeds) {
    const std::uint64_t base = opt.seed ? *opt.seed : config.seeds.front();
    const int n = opt.n_seeds ? *opt.n_seeds : static_cast<int>(config.seeds.size());
    if (n < 1) throw explab::ConfigError("--seeds must be >= 1");
    config.seeds.clear();
    for (int i = 0; i < n; ++i) config.seeds.push_back(base + static_cast<std::uint64_t>(i));
  }
  if (opt.workers) config.workers = *opt.workers;
  if (!opt.algorithms.empty()) config.algorithms = opt.algorithms;
  if (!opt.out_dir.empty()) config.output_dir = opt.out_dir;
  config.validate();

  const ExperimentResult result = run_experiment(config);
  const std::string extra = config.task.system_file.empty() ? "" : read_file(config.task.system_file);
  write_outputs(config, result, config.output_dir, extra);
  std::cout << "wrote " << result.curve.size() << " curve rows to " << config.output_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using explab::harness::Experiment;
  CLI::App app{"explab: exploration in action space vs parameter space experiments"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  int n_seeds = 0;
  int workers = 0;

  const std::vector<std::pair<std::string, Experiment>> commands = {
      {"linreg", Experiment::kLinreg},
      {"regret", Experiment::kRegret},
      {"lqr", Experiment::kLqr},
      {"bandit-cls", Experiment::kBanditCls},
      {"oracle-check", Experiment::kOracleCheck},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, experiment] : commands) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", opt.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed (first of the consecutive seeds)");
    sub->add_option("--seeds", n_seeds, "number of seeds")->check(CLI::PositiveNumber);
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--alg", opt.algorithms, "algorithms, comma separated")->delimiter(',');
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    if (subs[i]->count("--seed")) opt.seed = seed;
    if (subs[i]->count("--seeds")) opt.n_seeds = n_seeds;
    if (subs[i]->count("--workers")) opt.workers = workers;
    try {
      return run(commands[i].second, opt);
    } catch (const explab::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const explab::NumericalError& e) {
      std::cerr << "numerical failure: " << e.what() << "\n";
      return 3;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
