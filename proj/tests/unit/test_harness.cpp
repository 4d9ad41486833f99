#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "explab/errors.hpp"
#include "explab/harness/config.hpp"
#include "explab/harness/experiments.hpp"
#include "explab/harness/output.hpp"

using namespace explab;
using namespace explab::harness;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

const Table& table_named(const ExperimentResult& r, const std::string& name) {
  for (const auto& t : r.tables) {
    if (t.file_name == name) return t;
  }
  throw std::runtime_error("missing table " + name);
}

std::int64_t first_at_least(const ExperimentResult& r, const std::string& alg, std::uint64_t seed,
                            double level) {
  std::vector<std::pair<std::int64_t, double>> series;
  for (const auto& p : r.curve) {
    if (p.algorithm == alg && p.seed == seed) series.emplace_back(p.samples, p.value);
  }
  const auto hit = samples_to_threshold(series, [&](double v) { return v >= level; }, 1);
  return hit ? *hit : std::numeric_limits<std::int64_t>::max();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("samples to threshold") {
  const std::vector<std::pair<std::int64_t, double>> curve = {{100, 0.5}, {200, 0.09}, {300, 0.08}};
  const auto below = [](double v) { return v <= 0.1; };
  CHECK(samples_to_threshold(curve, below, 2) == std::optional<std::int64_t>(200));
  CHECK(samples_to_threshold(curve, below, 1) == std::optional<std::int64_t>(200));
  CHECK_FALSE(samples_to_threshold(curve, below, 3).has_value());
  CHECK_FALSE(samples_to_threshold(curve, [](double v) { return v < 0.0; }, 1).has_value());
  const std::vector<std::pair<std::int64_t, double>> bumpy = {{1, 0.0}, {2, 1.0}, {3, 0.0}, {4, 0.0}};
  CHECK(samples_to_threshold(bumpy, [](double v) { return v == 0.0; }, 1) == std::optional<std::int64_t>(1));
  CHECK(samples_to_threshold(bumpy, [](double v) { return v == 0.0; }, 2) == std::optional<std::int64_t>(3));
  CHECK_THROWS(samples_to_threshold({}, below, 1));
  CHECK_THROWS(samples_to_threshold(curve, below, 0));
}

TEST_CASE("summary statistics") {
  std::vector<CurvePoint> one = {{"a", "d=1", 0, 10, "m", 4.0}};
  auto rows = summarize(one);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].std == 0.0);
  CHECK(rows[0].n_seeds == 1);

  std::vector<CurvePoint> two = {{"a", "d=1", 0, 10, "m", 1.0}, {"a", "d=1", 1, 10, "m", 3.0}};
  rows = summarize(two);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean == 2.0);
  CHECK(rows[0].std == 1.0);
  CHECK(rows[0].n_seeds == 2);

  std::vector<CurvePoint> ragged = {{"a", "g", 0, 10, "m", 1.0}, {"a", "g", 1, 20, "m", 3.0}};
  CHECK_THROWS(summarize(ragged));
}

TEST_CASE("content hash matches git") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("double formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e22, 0.0}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("csv writers") {
  const std::vector<CurvePoint> curve = {{"ogd", "d=10", 3, 100, "avg_regret", 0.25}};
  CHECK(curve_csv("regret", curve) ==
        "experiment,algorithm,seed,samples,metric,value\nregret,ogd,3,100,avg_regret[d=10],0.25\n");
  const std::vector<SummaryRow> rows = {{"ogd", "d=10", 100, 0.25, 0.0, 1}};
  CHECK(summary_csv("regret", rows) ==
        "experiment,algorithm,group,samples,mean,std,n_seeds\nregret,ogd,d=10,100,0.25,0,1\n");
  CHECK(table_csv({"t.csv", {"a", "b"}, {{"1", "2"}}}) == "a,b\n1,2\n");
}

TEST_CASE("worker pool runs every cell and reports the first failure") {
  std::vector<int> hits(37, 0);
  run_cells(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_WITH(run_cells(10, 3,
                              [](std::size_t i) {
                                if (i == 4 || i == 7) throw std::runtime_error("cell " + std::to_string(i));
                              }),
                    "cell 4");
}

TEST_CASE("default configurations are valid and round trip") {
  for (Experiment e : {Experiment::kLinreg, Experiment::kRegret, Experiment::kLqr,
                       Experiment::kBanditCls, Experiment::kOracleCheck}) {
    const ExperimentConfig c = default_config(e);
    CHECK_NOTHROW(c.validate());
    CHECK(c.seeds.size() == 10);
    const std::string text = config_to_json(c);
    CHECK(config_to_json(parse_config(text)) == text);
    CHECK(parse_experiment(to_string(e)) == e);
  }
  CHECK(parse_experiment("bandit-cls") == Experiment::kBanditCls);
  CHECK(parse_experiment("oracle-check") == Experiment::kOracleCheck);
}

TEST_CASE("strict configuration parsing") {
  CHECK_NOTHROW(parse_config(R"({"experiment": "linreg", "task": {"dims": [5]}})"));
  CHECK_THROWS_AS(parse_config(R"({"experiment": "linreg", "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "linreg", "task": {"horizons": [5]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "linreg", "task": {"budget": "many"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "linreg", "algorithms": ["ogd"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "linreg", "seeds": [1, 1]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "linreg", "seeds": []})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "linreg", "seeds": [1], "n_seeds": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "linreg",
                                   "hyperparameters": {"reinforce": {"momentum": 0.5}}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "chess"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"task": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1, 2"), ConfigError);

  const ExperimentConfig c = parse_config(R"({"experiment": "lqr", "master_seed": 100, "n_seeds": 3,
      "algorithms": ["reinforce"], "hyperparameters": {"reinforce": {"lr": 0.5}}})");
  CHECK(c.seeds == std::vector<std::uint64_t>{100, 101, 102});
  CHECK(c.hyper("reinforce", "lr", 1.0) == 0.5);
  CHECK(c.hyper("reinforce", "batch", 7.0) == 7.0);
}

TEST_CASE("published regression defaults") {
  CHECK(linreg_reinforce_lr(10) == 0.08);
  CHECK(linreg_reinforce_lr(100) == 0.03);
  CHECK(linreg_reinforce_lr(1000) == 0.01);
  CHECK(linreg_sgd_lr(10) == 0.1);
  CHECK(linreg_sgd_lr(100) == 0.1);
  CHECK(linreg_sgd_lr(1000) == 0.01);
  const ArsConfig a10 = linreg_ars_config(10);
  CHECK(a10.step_size == 0.03);
  CHECK(a10.n_directions == 10);
  CHECK(a10.n_top == 10);
  CHECK(a10.perturbation == 0.03);
  CHECK(a10.variant == ArsVariant::kV2t);
  CHECK(linreg_ars_config(100).perturbation == 0.02);
  const ArsConfig a1000 = linreg_ars_config(1000);
  CHECK(a1000.n_directions == 200);
  CHECK(a1000.n_top == 200);
  CHECK(a1000.perturbation == 0.03);
  const ArsConfig lqr = lqr_ars_config();
  CHECK(lqr.variant == ArsVariant::kV1t);
  CHECK_NOTHROW(lqr.validate());
}

TEST_CASE("regret horizon grid") {
  const auto grid = regret_horizon_grid({100, 1000, 10000}, 100000);
  CHECK(grid == std::vector<std::int64_t>{100, 316, 1000, 3162, 10000, 31623, 100000});
  const auto extra = regret_horizon_grid({50}, 1000);
  CHECK(extra.front() == 50);
  CHECK(extra.back() == 1000);
}

TEST_CASE("zero budget keeps only the initial checkpoint") {
  ExperimentConfig c = default_config(Experiment::kLinreg);
  c.seeds = {0, 1};
  c.task.budget = 0;
  c.task.n_test = 100;
  const ExperimentResult r = run_experiment(c);
  CHECK(r.curve.size() == c.algorithms.size() * 2);
  for (const auto& p : r.curve) CHECK(p.samples == 0);
  CHECK(r.summary.size() == c.algorithms.size());
}

TEST_CASE("unreachable lqr budget is censored") {
  ExperimentConfig c = default_config(Experiment::kLqr);
  c.seeds = {0, 1};
  c.task.budget = 0;
  c.task.state_dim = 4;
  const ExperimentResult r = run_experiment(c);
  const Table& t = table_named(r, "lqr.csv");
  CHECK(t.header == std::vector<std::string>{"H", "alg", "seed", "samples", "success"});
  CHECK(t.rows.size() == 2 * 2 * 2);
  for (const auto& row : t.rows) {
    CHECK(row[3] == "censored");
    CHECK(row[4] == "false");
  }
}

TEST_CASE("summary rows are recomputed exactly from curve rows") {
  ExperimentConfig c = default_config(Experiment::kLinreg);
  c.algorithms = {"supervised_sgd", "supervised_newton", "ars_v2t"};
  c.seeds = {4, 5, 6};
  c.task.dims = {3, 5};
  c.task.budget = 3000;
  c.task.eval_every = 1000;
  c.task.n_test = 200;
  const ExperimentResult r = run_experiment(c);
  const auto curve = parse_csv(curve_csv("linreg", r.curve));
  const auto summary = parse_csv(summary_csv("linreg", r.summary));
  REQUIRE(curve.size() > 1);
  for (const auto& row : curve) CHECK(row.size() == 6);
  for (const auto& row : summary) CHECK(row.size() == 7);

  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> groups;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const std::string label = curve[i][4];
    const std::string group = label.substr(label.find('[') + 1, label.size() - label.find('[') - 2);
    groups[{curve[i][1], group, curve[i][3]}].push_back(std::stod(curve[i][5]));
  }
  CHECK(summary.size() - 1 == groups.size());
  std::set<std::pair<std::string, std::string>> alg_groups;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    const auto& row = summary[i];
    alg_groups.insert({row[1], row[2]});
    const auto& values = groups.at({row[1], row[2], row[3]});
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    CHECK(row[4] == format_double(mean));
    CHECK(row[5] == format_double(std::sqrt(ss / static_cast<double>(values.size()))));
    CHECK(row[6] == "3");
  }
  CHECK(alg_groups.size() == c.algorithms.size() * c.task.dims.size());
}

TEST_CASE("full information beats bandit feedback on separated blobs") {
  ExperimentConfig c = default_config(Experiment::kBanditCls);
  c.algorithms = {"supervised_sgd", "reinforce", "ars_v2t"};
  c.seeds = {0, 1, 2};
  c.task.separation = 10.0;
  c.task.budget = 20000;
  c.task.eval_every = 32;
  c.task.n_train = 5000;
  c.task.n_test = 1000;
  const ExperimentResult r = run_experiment(c);
  for (std::uint64_t seed : c.seeds) {
    const std::int64_t sup = first_at_least(r, "supervised_sgd", seed, 0.95);
    CHECK(sup < std::numeric_limits<std::int64_t>::max());
    CHECK(sup < first_at_least(r, "reinforce", seed, 0.95));
    CHECK(sup < first_at_least(r, "ars_v2t", seed, 0.95));
  }
}

TEST_CASE("indistinguishable classes stay at chance") {
  ExperimentConfig c = default_config(Experiment::kBanditCls);
  c.algorithms = {"supervised_sgd", "reinforce", "ars_v2t"};
  c.seeds = {0, 1};
  c.task.num_classes = 2;
  c.task.separation = 0.0;
  c.task.budget = 10000;
  c.task.eval_every = 2000;
  c.task.n_train = 4000;
  c.task.n_test = 4000;
  const ExperimentResult r = run_experiment(c);
  for (const auto& p : r.curve) CHECK(std::abs(p.value - 0.5) <= 0.05);
}

TEST_CASE("oracle check rows") {
  ExperimentConfig c = default_config(Experiment::kOracleCheck);
  c.seeds = {3};
  c.task.n_systems = 10;
  c.task.n_policies = 50;
  const ExperimentResult r = run_experiment(c);
  const Table& t = table_named(r, "oracle.csv");
  CHECK(t.rows.size() == 10);
  for (const auto& row : t.rows) CHECK(row.back() == "true");
}

TEST_CASE("output directory contents") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "explab_unit_outputs";
  fs::remove_all(dir);
  ExperimentConfig c = default_config(Experiment::kOracleCheck);
  c.seeds = {1, 2};
  c.task.n_systems = 3;
  c.task.n_policies = 10;
  const ExperimentResult r = run_experiment(c);
  write_outputs(c, r, dir.string());
  for (const char* f : {"curve.csv", "summary.csv", "meta.json", "oracle.csv"}) CHECK(fs::exists(dir / f));
  std::ifstream in(dir / "meta.json");
  const nlohmann::json meta = nlohmann::json::parse(in);
  CHECK(meta.at("inputs_hash").get<std::string>().size() == 40);
  CHECK(meta.at("config").at("experiment") == "oracle_check");

  // Worker count and destination do not enter the hash.
  ExperimentConfig moved = c;
  moved.workers = 3;
  const fs::path other = dir / "other";
  write_outputs(moved, r, other.string());
  std::ifstream in2(other / "meta.json");
  CHECK(nlohmann::json::parse(in2).at("inputs_hash") == meta.at("inputs_hash"));
  fs::remove_all(dir);
}

}  // TEST_SUITE
