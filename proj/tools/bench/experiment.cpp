#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace fcomp::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxSceneAttempts = 100;

const json& require_object(const json& doc, const char* what) {
  if (!doc.is_object()) throw ConfigError(fmt::format("{} must be a JSON object", what));
  return doc;
}

template <typename T>
T read_field(const json& doc, const char* key, T fallback) {
  const auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
  }
}

void reject_unknown(const json& doc, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : doc.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
    if (!ok) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

void finish_write(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

struct TrialInput {
  std::uint64_t seed = 0;
  radar::Scene scene;
  ComplexTensor measurement;
};

TrialInput make_trial_input(const ExperimentSpec& spec, const SeparableGrid& grid, std::size_t trial,
                            const EventLog& log) {
  std::uint64_t seed = trial_seed(spec.base_seed, trial);
  for (std::size_t attempt = 0; attempt < kMaxSceneAttempts; ++attempt) {
    std::mt19937_64 rng(seed);
    try {
      radar::Scene scene =
          spec.on_grid
              ? radar::generate_on_grid_scene(
                    spec.targets, spec.radar, grid,
                    static_cast<std::size_t>(std::ceil(spec.min_separation)), rng)
              : radar::generate_random_scene(spec.targets, spec.radar,
                                             radar::default_scene_bounds(spec.radar),
                                             spec.min_separation, rng);
      scene.noise_sigma = spec.noise_sigma;
      ComplexTensor y = radar::synthesize_measurement(scene, spec.radar, rng);
      return {seed, std::move(scene), std::move(y)};
    } catch (const radar::InfeasibleSceneError& e) {
      const std::uint64_t next = seed + 0x9E3779B97F4A7C15ULL;
      if (log) {
        log(fmt::format("trial {}: infeasible scene with seed {} ({}); retrying with seed {}", trial,
                        seed, e.what(), next));
      }
      seed = next;
    }
  }
  throw ConfigError(fmt::format("trial {}: no feasible scene after {} reseeds", trial,
                                kMaxSceneAttempts));
}

struct SolverSet {
  const InterpolatedDictionary* factorized = nullptr;
  const DenseDictionary* dense = nullptr;

  SparseSolution solve(Algorithm algo, const ComplexTensor& y, std::size_t k) const {
    switch (algo) {
      case Algorithm::Fcomp: return fcomp(y, *factorized, k);
      case Algorithm::Fomp: return fomp(y, *factorized, k);
      case Algorithm::Comp: return comp(y, *dense, k);
      case Algorithm::Omp: return omp(y, *dense, k);
    }
    throw std::logic_error("unknown algorithm");
  }
};

TrialRecord score_trial(Algorithm algo, std::size_t n_star, std::size_t trial,
                        const TrialInput& input, const SparseSolution& sol,
                        const radar::RadarConfig& cfg, bool keep_timing) {
  std::vector<radar::RangeVelocity> estimates;
  estimates.reserve(sol.components.size());
  for (const Component& c : sol.components) {
    const double speed = c.parameters[1];
    estimates.push_back({radar::decouple_range(c.parameters[0], speed, cfg), speed});
  }
  radar::MissEvaluation eval = radar::evaluate_misses(estimates, input.scene, cfg);

  TrialRecord rec;
  rec.algorithm = algo;
  rec.n_star = n_star;
  rec.trial = trial;
  rec.seed = input.seed;
  if (keep_timing) rec.timing = sol.timing;
  rec.misses = eval.misses;
  rec.k = input.scene.targets.size();
  rec.distances = std::move(eval.distances);
  rec.measurement_checksum = checksum(input.measurement);
  return rec;
}

std::string format_double(double x) { return fmt::format("{}", x); }

}  // namespace

// --- spec -----------------------------------------------------------------------

void ExperimentSpec::validate() const {
  try {
    radar.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (targets < 1) throw ConfigError("targets per trial must be at least 1");
  if (grid_sizes.empty()) throw ConfigError("grid_sizes must not be empty");
  for (std::size_t n : grid_sizes) {
    if (n < 2) throw ConfigError(fmt::format("grid size {} is below the minimum of 2", n));
    if (targets > n * n) throw ConfigError(fmt::format("grid size {} has fewer nodes than targets", n));
  }
  if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
  if (!(min_separation >= 0.0)) throw ConfigError("min_separation must be non-negative");
}

json to_json(const ExperimentSpec& spec) {
  json algos = json::array();
  for (Algorithm a : spec.algorithms) algos.push_back(std::string(to_string(a)));
  return json{
      {"radar",
       {{"bandwidth_hz", spec.radar.bandwidth},
        {"carrier_hz", spec.radar.carrier},
        {"sample_period_s", spec.radar.sample_period},
        {"samples_per_chirp", spec.radar.samples_per_chirp},
        {"chirp_count", spec.radar.chirp_count},
        {"speed_of_light", spec.radar.speed_of_light}}},
      {"targets", spec.targets},
      {"grid_sizes", spec.grid_sizes},
      {"algorithms", algos},
      {"trials", spec.trials},
      {"base_seed", spec.base_seed},
      {"noise_sigma", spec.noise_sigma},
      {"min_separation", spec.min_separation},
      {"on_grid", spec.on_grid},
      {"parallel", spec.parallel},
      {"output_dir", spec.output_dir.string()},
      {"svg", spec.svg},
  };
}

ExperimentSpec spec_from_json(const json& doc) {
  require_object(doc, "experiment config");
  reject_unknown(doc,
                 {"radar", "targets", "grid_sizes", "algorithms", "trials", "base_seed",
                  "noise_sigma", "min_separation", "on_grid", "parallel", "output_dir", "svg", "run"},
                 "experiment config");
  ExperimentSpec spec;
  if (const auto it = doc.find("radar"); it != doc.end()) {
    const json& r = require_object(*it, "radar");
    reject_unknown(r,
                   {"bandwidth_hz", "carrier_hz", "sample_period_s", "samples_per_chirp",
                    "chirp_count", "speed_of_light"},
                   "radar");
    auto& cfg = spec.radar;
    cfg.bandwidth = read_field(r, "bandwidth_hz", cfg.bandwidth);
    cfg.carrier = read_field(r, "carrier_hz", cfg.carrier);
    cfg.sample_period = read_field(r, "sample_period_s", cfg.sample_period);
    cfg.samples_per_chirp = read_field(r, "samples_per_chirp", cfg.samples_per_chirp);
    cfg.chirp_count = read_field(r, "chirp_count", cfg.chirp_count);
    cfg.speed_of_light = read_field(r, "speed_of_light", cfg.speed_of_light);
  }
  spec.targets = read_field(doc, "targets", spec.targets);
  spec.grid_sizes = read_field(doc, "grid_sizes", spec.grid_sizes);
  if (const auto it = doc.find("algorithms"); it != doc.end()) {
    const auto names = read_field<std::vector<std::string>>(doc, "algorithms", {});
    spec.algorithms.clear();
    for (const auto& name : names) {
      const auto algo = parse_algorithm(name);
      if (!algo) throw ConfigError(fmt::format("unknown algorithm '{}'", name));
      spec.algorithms.push_back(*algo);
    }
  }
  spec.trials = read_field(doc, "trials", spec.trials);
  spec.base_seed = read_field(doc, "base_seed", spec.base_seed);
  spec.noise_sigma = read_field(doc, "noise_sigma", spec.noise_sigma);
  spec.min_separation = read_field(doc, "min_separation", spec.min_separation);
  spec.on_grid = read_field(doc, "on_grid", spec.on_grid);
  spec.parallel = read_field(doc, "parallel", spec.parallel);
  spec.output_dir = read_field(doc, "output_dir", spec.output_dir.string());
  spec.svg = read_field(doc, "svg", spec.svg);
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return spec_from_json(doc);
}

// --- running --------------------------------------------------------------------

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial) noexcept {
  return base_seed ^ static_cast<std::uint64_t>(trial);
}

std::uint64_t checksum(const ComplexTensor& t) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(t.data().data());
  const std::size_t n = t.size() * sizeof(Complex);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec, const EventLog& log) {
  spec.validate();
  const std::size_t n_algos = spec.algorithms.size();
  const bool want_dense = std::any_of(spec.algorithms.begin(), spec.algorithms.end(), [](Algorithm a) {
    return a == Algorithm::Omp || a == Algorithm::Comp;
  });
  const bool want_dense_taylor =
      std::find(spec.algorithms.begin(), spec.algorithms.end(), Algorithm::Comp) !=
      spec.algorithms.end();
  const bool keep_timing = !spec.parallel;

  std::vector<TrialRecord> records;
  records.reserve(spec.grid_sizes.size() * spec.trials * n_algos);

  for (std::size_t n_star : spec.grid_sizes) {
    const InterpolatedDictionary dict = radar::make_dictionary(spec.radar, n_star, n_star);
    std::optional<DenseDictionary> dense;
    if (want_dense) {
      dense.emplace(dict, want_dense_taylor ? AtomSet::Taylor : AtomSet::ValueOnly);
    }
    const SolverSet solvers{&dict, dense ? &*dense : nullptr};

    std::vector<TrialRecord> block(spec.trials * n_algos);
    auto run_trial = [&](std::size_t trial) {
      const TrialInput input = make_trial_input(spec, dict.grid(), trial, log);
      for (std::size_t a = 0; a < n_algos; ++a) {
        const Algorithm algo = spec.algorithms[a];
        const SparseSolution sol = solvers.solve(algo, input.measurement, spec.targets);
        block[trial * n_algos + a] =
            score_trial(algo, n_star, trial, input, sol, spec.radar, keep_timing);
      }
    };

    if (spec.parallel) {
      const std::size_t workers =
          std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), spec.trials));
      std::atomic<std::size_t> next{0};
      std::mutex error_mutex;
      std::exception_ptr error;
      {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
          pool.emplace_back([&] {
            for (std::size_t t = next++; t < spec.trials; t = next++) {
              try {
                run_trial(t);
              } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
              }
            }
          });
        }
      }
      if (error) std::rethrow_exception(error);
    } else {
      // One untimed warm-up solve per algorithm on the first trial's measurement.
      const TrialInput warm = make_trial_input(spec, dict.grid(), 0, {});
      for (Algorithm algo : spec.algorithms) (void)solvers.solve(algo, warm.measurement, spec.targets);
      for (std::size_t t = 0; t < spec.trials; ++t) run_trial(t);
    }

    for (auto& rec : block) records.push_back(std::move(rec));
    if (log) log(fmt::format("N*={}: {} trials x {} algorithms done", n_star, spec.trials, n_algos));
  }
  return records;
}

// --- summaries ----------------------------------------------------------------------

std::vector<SummaryRow> summarize(std::span<const TrialRecord> records) {
  struct Acc {
    std::size_t trials = 0;
    std::size_t misses = 0;
    std::size_t targets = 0;
    std::vector<double> times;
  };
  std::map<std::pair<int, std::size_t>, Acc> groups;
  for (const TrialRecord& r : records) {
    Acc& acc = groups[{static_cast<int>(r.algorithm), r.n_star}];
    ++acc.trials;
    acc.misses += r.misses;
    acc.targets += r.k;
    acc.times.push_back(static_cast<double>(r.timing.total_ns()));
  }

  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, acc] : groups) {
    SummaryRow row;
    row.algorithm = static_cast<Algorithm>(key.first);
    row.n_star = key.second;
    row.trials = acc.trials;
    if (acc.targets > 0) {
      const double n = static_cast<double>(acc.targets);
      row.miss_rate = static_cast<double>(acc.misses) / n;
      row.miss_ci95 = 1.96 * std::sqrt(row.miss_rate * (1.0 - row.miss_rate) / n);
    }
    auto& t = acc.times;
    std::sort(t.begin(), t.end());
    const std::size_t mid = t.size() / 2;
    row.time_median_ns = t.size() % 2 == 1 ? t[mid] : 0.5 * (t[mid - 1] + t[mid]);
    double sum = 0.0;
    for (double x : t) sum += x;
    row.time_mean_ns = sum / static_cast<double>(t.size());
    rows.push_back(row);
  }
  return rows;
}

// --- CSV --------------------------------------------------------------------------

void write_raw_csv(const fs::path& path, std::span<const TrialRecord> records) {
  auto out = open_for_write(path);
  out << kRawCsvHeader << '\n';
  for (const TrialRecord& r : records) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(r.algorithm), r.n_star, r.trial,
                       r.seed, r.timing.total_ns(), r.timing.select_ns, r.timing.refit_ns,
                       r.timing.correct_ns, r.misses, r.k);
  }
  finish_write(out, path);
}

namespace {

template <typename T>
T parse_number(std::string_view field, const fs::path& path, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw IoError(fmt::format("{}:{}: malformed number '{}'", path.string(), line, field));
  }
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<TrialRecord> read_raw_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw IoError(fmt::format("'{}' is empty", path.string()));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRawCsvHeader) {
    throw IoError(fmt::format("'{}' does not start with the raw trial header", path.string()));
  }
  std::vector<TrialRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) {
      throw IoError(fmt::format("{}:{}: expected 10 fields, found {}", path.string(), line_no, f.size()));
    }
    TrialRecord r;
    const auto algo = parse_algorithm(f[0]);
    if (!algo) throw IoError(fmt::format("{}:{}: unknown algorithm '{}'", path.string(), line_no, f[0]));
    r.algorithm = *algo;
    r.n_star = parse_number<std::size_t>(f[1], path, line_no);
    r.trial = parse_number<std::size_t>(f[2], path, line_no);
    r.seed = parse_number<std::uint64_t>(f[3], path, line_no);
    r.timing.select_ns = parse_number<std::int64_t>(f[5], path, line_no);
    r.timing.refit_ns = parse_number<std::int64_t>(f[6], path, line_no);
    r.timing.correct_ns = parse_number<std::int64_t>(f[7], path, line_no);
    if (parse_number<std::int64_t>(f[4], path, line_no) != r.timing.total_ns()) {
      throw IoError(fmt::format("{}:{}: total time is not the sum of the stage times", path.string(),
                                line_no));
    }
    r.misses = parse_number<std::size_t>(f[8], path, line_no);
    r.k = parse_number<std::size_t>(f[9], path, line_no);
    records.push_back(std::move(r));
  }
  return records;
}

void write_summary_csv(const fs::path& path, std::span<const SummaryRow> rows) {
  auto out = open_for_write(path);
  out << kSummaryCsvHeader << '\n';
  for (const SummaryRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", to_string(r.algorithm), r.n_star, r.trials,
                       format_double(r.miss_rate), format_double(r.miss_ci95),
                       format_double(r.time_median_ns), format_double(r.time_mean_ns));
  }
  finish_write(out, path);
}

// --- outputs ------------------------------------------------------------------------

OutputPaths emit_outputs(std::span<const TrialRecord> records, std::span<const SummaryRow> summary,
                         const ExperimentSpec& spec) {
  std::error_code ec;
  fs::create_directories(spec.output_dir, ec);
  if (ec) {
    throw IoError(fmt::format("cannot create output directory '{}': {}", spec.output_dir.string(),
                              ec.message()));
  }

  OutputPaths paths;
  paths.raw_csv = spec.output_dir / "raw.csv";
  paths.summary_csv = spec.output_dir / "summary.csv";
  paths.manifest = spec.output_dir / "manifest.json";
  paths.pairing_csv = spec.output_dir / "pairing.csv";

  write_raw_csv(paths.raw_csv, records);
  write_summary_csv(paths.summary_csv, summary);

  {
    json manifest = to_json(spec);
    manifest["run"] = {{"records", records.size()},
                       {"seed_rule", "trial seed = base_seed xor trial index"},
                       {"timing_captured", !spec.parallel}};
    auto out = open_for_write(paths.manifest);
    out << manifest.dump(2) << '\n';
    finish_write(out, paths.manifest);
  }

  {
    auto out = open_for_write(paths.pairing_csv);
    out << "n_star,trial,seed,measurement_checksum\n";
    std::optional<std::pair<std::size_t, std::size_t>> last;
    for (const TrialRecord& r : records) {
      const std::pair key{r.n_star, r.trial};
      if (last && *last == key) continue;
      last = key;
      out << fmt::format("{},{},{},{:016x}\n", r.n_star, r.trial, r.seed, r.measurement_checksum);
    }
    finish_write(out, paths.pairing_csv);
  }

  if (spec.svg) {
    const std::pair<const char*, std::string> charts[] = {
        {"time.svg", render_time_chart(summary)},
        {"miss_rate.svg", render_miss_chart(summary)},
    };
    for (const auto& [name, body] : charts) {
      const fs::path p = spec.output_dir / name;
      auto out = open_for_write(p);
      out << body;
      finish_write(out, p);
      paths.charts.push_back(p);
    }
  }
  return paths;
}

}  // namespace fcomp::bench
