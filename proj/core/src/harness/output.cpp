#include "explab/harness/output.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <openssl/evp.h>

#include <json.hpp>

#include "explab/errors.hpp"

namespace explab::harness {

std::string CurvePoint::metric_label() const {
  return group.empty() ? metric : metric + "[" + group + "]";
}

std::optional<std::int64_t> samples_to_threshold(
    const std::vector<std::pair<std::int64_t, double>>& series,
    const std::function<bool(double)>& satisfied, int patience) {
  if (series.empty()) throw std::invalid_argument("samples_to_threshold: empty curve");
  if (patience < 1) throw std::invalid_argument("samples_to_threshold: patience must be >= 1");
  const std::size_t need = static_cast<std::size_t>(patience);
  std::size_t run = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    run = satisfied(series[i].second) ? run + 1 : 0;
    if (run == need) return series[i + 1 - need].first;
  }
  return std::nullopt;
}

std::vector<SummaryRow> summarize(const std::vector<CurvePoint>& curve) {
  // (algorithm, group, metric) -> seed -> series, preserving first-seen order.
  using Key = std::tuple<std::string, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::map<std::uint64_t, std::vector<const CurvePoint*>>> groups;
  for (const auto& p : curve) {
    Key key{p.algorithm, p.group, p.metric};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second[p.seed].push_back(&p);
  }
  std::vector<SummaryRow> rows;
  for (const auto& key : order) {
    const auto& by_seed = groups.at(key);
    const auto& first = by_seed.begin()->second;
    for (const auto& [seed, series] : by_seed) {
      bool same = series.size() == first.size();
      for (std::size_t i = 0; same && i < series.size(); ++i) {
        same = series[i]->samples == first[i]->samples;
      }
      if (!same) {
        throw std::runtime_error("summarize: checkpoint grids differ within group " +
                                 std::get<0>(key) + "/" + std::get<1>(key));
      }
    }
    const double n = static_cast<double>(by_seed.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
      double sum = 0.0;
      for (const auto& entry : by_seed) sum += entry.second[i]->value;
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto& entry : by_seed) {
        const double dv = entry.second[i]->value - mean;
        ss += dv * dv;
      }
      SummaryRow row;
      row.algorithm = std::get<0>(key);
      row.group = std::get<1>(key);
      row.samples = first[i]->samples;
      row.mean = mean;
      row.std = std::sqrt(ss / n);
      row.n_seeds = static_cast<int>(by_seed.size());
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("git_blob_hash: EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("git_blob_hash: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string curve_csv(const std::string& experiment, const std::vector<CurvePoint>& curve) {
  std::string out = "experiment,algorithm,seed,samples,metric,value\n";
  for (const auto& p : curve) {
    out += experiment + ',' + p.algorithm + ',' + std::to_string(p.seed) + ',' +
           std::to_string(p.samples) + ',' + p.metric_label() + ',' + format_double(p.value) + '\n';
  }
  return out;
}

std::string summary_csv(const std::string& experiment, const std::vector<SummaryRow>& rows) {
  std::string out = "experiment,algorithm,group,samples,mean,std,n_seeds\n";
  for (const auto& r : rows) {
    out += experiment + ',' + r.algorithm + ',' + r.group + ',' + std::to_string(r.samples) + ',' +
           format_double(r.mean) + ',' + format_double(r.std) + ',' + std::to_string(r.n_seeds) +
           '\n';
  }
  return out;
}

std::string table_csv(const Table& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                   const std::string& dir, const std::string& extra_inputs) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  write_file(root / "curve.csv", curve_csv(result.experiment, result.curve));
  write_file(root / "summary.csv", summary_csv(result.experiment, result.summary));
  std::vector<std::string> files = {"curve.csv", "summary.csv"};
  for (const auto& t : result.tables) {
    write_file(root / t.file_name, table_csv(t));
    files.push_back(t.file_name);
  }

  // Worker count and output location do not change results, so they stay out of the hash.
  nlohmann::json resolved = nlohmann::json::parse(config_to_json(config));
  nlohmann::json hashed = resolved;
  hashed.erase("workers");
  hashed.erase("output_dir");
  nlohmann::json meta;
  meta["config"] = resolved;
  meta["inputs_hash"] = git_blob_hash(hashed.dump() + extra_inputs);
  meta["files"] = files;
  meta["generator"] = "explab 0.1.0";
  write_file(root / "meta.json", meta.dump(2) + "\n");
}

void run_cells(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          if (failed.load()) return;
          const std::size_t i = next.fetch_add(1);
          if (i >= n) return;
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed.store(true);
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace explab::harness
