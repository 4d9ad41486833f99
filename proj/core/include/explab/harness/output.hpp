#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "explab/harness/config.hpp"

namespace explab::harness {

struct CurvePoint {
  std::string algorithm;
  std::string group;  // "d=10", "H=20", ...
  std::uint64_t seed = 0;
  std::int64_t samples = 0;
  std::string metric;
  double value = 0.0;

  /// Written to the metric column as "metric[group]".
  std::string metric_label() const;
};

struct SummaryRow {
  std::string algorithm;
  std::string group;
  std::int64_t samples = 0;
  double mean = 0.0;
  double std = 0.0;  // population convention
  int n_seeds = 0;
};

/// A plain CSV table written next to curve.csv.
struct Table {
  std::string file_name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<CurvePoint> curve;
  std::vector<SummaryRow> summary;
  std::vector<Table> tables;
};

/// First sample count at which `satisfied` holds and keeps holding for the next patience - 1
/// checkpoints. nullopt means censored. The series must be sorted by samples.
std::optional<std::int64_t> samples_to_threshold(
    const std::vector<std::pair<std::int64_t, double>>& series,
    const std::function<bool(double)>& satisfied, int patience);

/// Per (algorithm, group, metric) and checkpoint: mean and population std across seeds.
/// Throws std::runtime_error when the seeds of one group do not share a checkpoint grid.
std::vector<SummaryRow> summarize(const std::vector<CurvePoint>& curve);

/// "%.17g" formatting.
std::string format_double(double value);

/// SHA-1 of "blob <size>\0<content>", hex encoded (what `git hash-object` prints).
std::string git_blob_hash(std::string_view content);

std::string curve_csv(const std::string& experiment, const std::vector<CurvePoint>& curve);
std::string summary_csv(const std::string& experiment, const std::vector<SummaryRow>& rows);
std::string table_csv(const Table& table);

/// Writes curve.csv, summary.csv, the extra tables and meta.json into `dir` (created if
/// missing). `extra_inputs` are hashed together with the resolved config.
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                   const std::string& dir, const std::string& extra_inputs = "");

/// Runs fn(0..n-1) on `workers` threads. Cells must write only to their own slots; the first
/// exception by cell index is rethrown after all workers stop.
void run_cells(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace explab::harness
