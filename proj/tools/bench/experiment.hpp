#pragma once

// Monte-Carlo study of accuracy versus speed for the four greedy solvers on
// random FMCW radar scenes, swept over grid density N* = N_1 = N_2.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fcomp/radar.hpp"
#include "fcomp/solver.hpp"

namespace fcomp::bench {

/// Invalid experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable file (CLI exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
  radar::RadarConfig radar;
  std::size_t targets = 5;
  std::vector<std::size_t> grid_sizes{16, 32, 64, 128};
  std::vector<Algorithm> algorithms{Algorithm::Omp, Algorithm::Fomp, Algorithm::Comp,
                                    Algorithm::Fcomp};
  std::size_t trials = 200;
  std::uint64_t base_seed = 1;
  double noise_sigma = 0.0;
  /// Minimum pairwise target distance, in resolution cells.
  double min_separation = 2.0;
  /// Place targets exactly on grid nodes (per N*) instead of uniformly.
  bool on_grid = false;
  /// Run trials on worker threads; stage timings are then not captured.
  bool parallel = false;
  std::filesystem::path output_dir = "results";
  bool svg = false;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

nlohmann::json to_json(const ExperimentSpec& spec);
/// Missing keys keep their defaults; unknown keys and bad values raise ConfigError.
ExperimentSpec spec_from_json(const nlohmann::json& doc);
ExperimentSpec load_spec(const std::filesystem::path& path);

struct TrialRecord {
  Algorithm algorithm = Algorithm::Fcomp;
  std::size_t n_star = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  StageTimings timing;
  std::size_t misses = 0;
  std::size_t k = 0;
  std::vector<double> distances;
  /// FNV-1a hash of the measurement tensor fed to the solver.
  std::uint64_t measurement_checksum = 0;
};

/// Seed of the scene stream for one trial.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial) noexcept;

std::uint64_t checksum(const ComplexTensor& t) noexcept;

using EventLog = std::function<void(const std::string&)>;

/// One scene per (N*, trial), shared by every requested algorithm. Records are
/// ordered by N*, then trial, then the spec's algorithm order.
std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec, const EventLog& log = {});

struct SummaryRow {
  Algorithm algorithm = Algorithm::Fcomp;
  std::size_t n_star = 0;
  std::size_t trials = 0;
  double miss_rate = 0.0;
  double miss_ci95 = 0.0;
  double time_median_ns = 0.0;
  double time_mean_ns = 0.0;
};

/// Aggregates per (algorithm, N*): miss rate = total misses / (K * trials)
/// with a normal-approximation 95% interval, and total solve-time statistics.
std::vector<SummaryRow> summarize(std::span<const TrialRecord> records);

inline constexpr const char* kRawCsvHeader =
    "algo,n_star,trial,seed,time_total_ns,time_select_ns,time_refit_ns,time_correct_ns,misses,k";
inline constexpr const char* kSummaryCsvHeader =
    "algo,n_star,trials,miss_rate,miss_ci95,time_median_ns,time_mean_ns";

void write_raw_csv(const std::filesystem::path& path, std::span<const TrialRecord> records);
std::vector<TrialRecord> read_raw_csv(const std::filesystem::path& path);
void write_summary_csv(const std::filesystem::path& path, std::span<const SummaryRow> rows);

/// Two static line charts (time and miss rate versus N*, log-scaled N* axis).
std::string render_time_chart(std::span<const SummaryRow> rows);
std::string render_miss_chart(std::span<const SummaryRow> rows);

struct OutputPaths {
  std::filesystem::path raw_csv;
  std::filesystem::path summary_csv;
  std::filesystem::path manifest;
  std::filesystem::path pairing_csv;
  std::vector<std::filesystem::path> charts;
};

/// Writes raw.csv, summary.csv, manifest.json, pairing.csv (per-trial measurement
/// checksums) and, when spec.svg is set, time.svg and miss_rate.svg into
/// spec.output_dir.
OutputPaths emit_outputs(std::span<const TrialRecord> records, std::span<const SummaryRow> summary,
                         const ExperimentSpec& spec);

}  // namespace fcomp::bench
