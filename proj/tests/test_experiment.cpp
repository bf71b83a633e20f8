#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "bench/experiment.hpp"

using namespace fcomp;
using namespace fcomp::bench;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("fcomp-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

ExperimentSpec small_spec(const fs::path& out) {
  ExperimentSpec s;
  s.targets = 2;
  s.grid_sizes = {8, 16};
  s.trials = 4;
  s.output_dir = out;
  return s;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FCOMP_BENCH_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ExperimentSpec, DefaultsMatchTheDocumentedSweep) {
  const ExperimentSpec s;
  EXPECT_EQ(s.targets, 5u);
  EXPECT_EQ(s.grid_sizes, (std::vector<std::size_t>{16, 32, 64, 128}));
  EXPECT_EQ(s.algorithms.size(), 4u);
  EXPECT_EQ(s.noise_sigma, 0.0);
  EXPECT_NO_THROW(s.validate());
}

TEST(ExperimentSpec, InvalidValuesAreConfigErrors) {
  ExperimentSpec s;
  s.trials = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = ExperimentSpec{};
  s.grid_sizes = {1};
  EXPECT_THROW(s.validate(), ConfigError);
  s = ExperimentSpec{};
  s.noise_sigma = -1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = ExperimentSpec{};
  s.radar.bandwidth = -5.0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(ExperimentSpec, JsonRoundTrip) {
  ExperimentSpec s;
  s.targets = 3;
  s.grid_sizes = {16, 48};
  s.algorithms = {Algorithm::Fcomp, Algorithm::Omp};
  s.trials = 17;
  s.base_seed = 99;
  s.noise_sigma = 0.25;
  s.radar.carrier = 77e9;
  s.svg = true;
  const ExperimentSpec back = spec_from_json(to_json(s));
  EXPECT_EQ(to_json(back), to_json(s));
}

TEST(ExperimentSpec, JsonRejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW((void)spec_from_json(nlohmann::json{{"trails", 3}}), ConfigError);
  EXPECT_THROW((void)spec_from_json(nlohmann::json{{"radar", {{"bw", 1.0}}}}), ConfigError);
  EXPECT_THROW((void)spec_from_json(nlohmann::json{{"trials", "many"}}), ConfigError);
  EXPECT_THROW((void)spec_from_json(nlohmann::json{{"algorithms", {"lasso"}}}), ConfigError);
  EXPECT_THROW((void)spec_from_json(nlohmann::json::array()), ConfigError);
}

TEST(ExperimentSpec, LoadSpecDistinguishesMissingAndMalformedFiles) {
  TempDir dir;
  EXPECT_THROW((void)load_spec(dir.path() / "absent.json"), IoError);
  std::ofstream(dir.path() / "bad.json") << "{ not json";
  EXPECT_THROW((void)load_spec(dir.path() / "bad.json"), ConfigError);
}

TEST(TrialSeed, IsBaseSeedXorTrial) {
  EXPECT_EQ(trial_seed(1, 0), 1u);
  EXPECT_EQ(trial_seed(1, 1), 0u);
  EXPECT_EQ(trial_seed(0xF0, 0x0F), 0xFFu);
}

TEST(RunExperiment, IsDeterministicForFixedSeeds) {
  TempDir dir;
  const auto a = run_experiment(small_spec(dir.path()));
  const auto b = run_experiment(small_spec(dir.path()));
  ASSERT_EQ(a.size(), 2u * 4u * 4u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].algorithm, b[i].algorithm);
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_EQ(a[i].misses, b[i].misses);
    EXPECT_EQ(a[i].distances, b[i].distances);
    EXPECT_EQ(a[i].measurement_checksum, b[i].measurement_checksum);
  }
}

TEST(RunExperiment, AllAlgorithmsSeeTheSameMeasurement) {
  TempDir dir;
  const auto recs = run_experiment(small_spec(dir.path()));
  for (std::size_t i = 0; i < recs.size(); i += 4) {
    for (std::size_t a = 1; a < 4; ++a) {
      EXPECT_EQ(recs[i + a].measurement_checksum, recs[i].measurement_checksum);
      EXPECT_EQ(recs[i + a].trial, recs[i].trial);
      EXPECT_EQ(recs[i + a].n_star, recs[i].n_star);
    }
  }
}

TEST(RunExperiment, ParallelMatchesSerialExceptTiming) {
  TempDir dir;
  ExperimentSpec serial = small_spec(dir.path());
  ExperimentSpec parallel = serial;
  parallel.parallel = true;
  const auto a = run_experiment(serial);
  const auto b = run_experiment(parallel);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].misses, b[i].misses);
    EXPECT_EQ(a[i].measurement_checksum, b[i].measurement_checksum);
    EXPECT_EQ(b[i].timing.total_ns(), 0);
  }
}

TEST(RunExperiment, OnGridScenesAreRecoveredWithoutMisses) {
  TempDir dir;
  ExperimentSpec s = small_spec(dir.path());
  s.on_grid = true;
  s.grid_sizes = {16};
  for (const auto& r : run_experiment(s)) EXPECT_EQ(r.misses, 0u) << to_string(r.algorithm);
}

TEST(Summarize, AggregatesMissRateIntervalAndTimes) {
  std::vector<TrialRecord> recs;
  const std::int64_t times[] = {100, 300, 200, 1000};
  const std::size_t misses[] = {0, 1, 2, 1};
  for (std::size_t t = 0; t < 4; ++t) {
    TrialRecord r;
    r.algorithm = Algorithm::Fcomp;
    r.n_star = 16;
    r.trial = t;
    r.timing.select_ns = times[t];
    r.misses = misses[t];
    r.k = 5;
    recs.push_back(r);
  }
  const auto rows = summarize(recs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].trials, 4u);
  EXPECT_DOUBLE_EQ(rows[0].miss_rate, 4.0 / 20.0);
  EXPECT_NEAR(rows[0].miss_ci95, 1.96 * std::sqrt(0.2 * 0.8 / 20.0), 1e-15);
  EXPECT_DOUBLE_EQ(rows[0].time_median_ns, 250.0);
  EXPECT_DOUBLE_EQ(rows[0].time_mean_ns, 400.0);
}

TEST(Summarize, GroupsByAlgorithmAndGridSize) {
  std::vector<TrialRecord> recs(6);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].algorithm = i % 2 ? Algorithm::Omp : Algorithm::Fcomp;
    recs[i].n_star = i < 4 ? 16 : 32;
    recs[i].k = 1;
  }
  const auto rows = summarize(recs);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].algorithm, Algorithm::Omp);
  EXPECT_EQ(rows[0].n_star, 16u);
  EXPECT_EQ(rows[0].trials, 2u);
}

TEST(Outputs, FilesHeadersAndManifest) {
  TempDir dir;
  const ExperimentSpec spec = small_spec(dir.path() / "out");
  const auto recs = run_experiment(spec);
  const auto paths = emit_outputs(recs, summarize(recs), spec);
  EXPECT_EQ(first_line(paths.raw_csv),
            "algo,n_star,trial,seed,time_total_ns,time_select_ns,time_refit_ns,time_correct_ns,misses,k");
  EXPECT_EQ(first_line(paths.summary_csv),
            "algo,n_star,trials,miss_rate,miss_ci95,time_median_ns,time_mean_ns");
  EXPECT_TRUE(paths.charts.empty());
  EXPECT_FALSE(fs::exists(spec.output_dir / "time.svg"));

  const auto manifest = nlohmann::json::parse(slurp(paths.manifest));
  EXPECT_EQ(to_json(spec_from_json(manifest)), to_json(spec));
  EXPECT_EQ(manifest["run"]["records"], recs.size());

  // One pairing line per (N*, trial).
  std::ifstream pairing(paths.pairing_csv);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(pairing, line)) ++lines;
  EXPECT_EQ(lines, 1u + 2u * 4u);
}

TEST(Outputs, SvgChartsOnRequest) {
  TempDir dir;
  ExperimentSpec spec = small_spec(dir.path());
  spec.svg = true;
  spec.trials = 2;
  const auto recs = run_experiment(spec);
  const auto paths = emit_outputs(recs, summarize(recs), spec);
  ASSERT_EQ(paths.charts.size(), 2u);
  for (const auto& p : paths.charts) {
    const std::string body = slurp(p);
    EXPECT_EQ(body.rfind("<svg", 0), 0u);
    EXPECT_NE(body.find("polyline"), std::string::npos);
  }
}

TEST(RawCsv, RoundTripsThroughSummarize) {
  TempDir dir;
  const ExperimentSpec spec = small_spec(dir.path());
  const auto recs = run_experiment(spec);
  write_raw_csv(dir.path() / "raw.csv", recs);
  const auto back = read_raw_csv(dir.path() / "raw.csv");
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].algorithm, recs[i].algorithm);
    EXPECT_EQ(back[i].seed, recs[i].seed);
    EXPECT_EQ(back[i].timing.total_ns(), recs[i].timing.total_ns());
    EXPECT_EQ(back[i].misses, recs[i].misses);
  }
  const auto a = summarize(recs);
  const auto b = summarize(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].miss_rate, b[i].miss_rate);
    EXPECT_EQ(a[i].time_median_ns, b[i].time_median_ns);
  }
}

TEST(RawCsv, MalformedInputIsAnIoError) {
  TempDir dir;
  const fs::path p = dir.path() / "raw.csv";
  std::ofstream(p) << "algo,n_star\n";
  EXPECT_THROW((void)read_raw_csv(p), IoError);
  std::ofstream(p) << kRawCsvHeader << "\nfcomp,16,0,1,10,5,5,1,0,5\n";
  EXPECT_THROW((void)read_raw_csv(p), IoError);
  std::ofstream(p) << kRawCsvHeader << "\nfcomp,16,0,1,10,5,4,1,x,5\n";
  EXPECT_THROW((void)read_raw_csv(p), IoError);
  EXPECT_THROW((void)read_raw_csv(dir.path() / "absent.csv"), IoError);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const std::string out = (dir.path() / "cli").string();
  EXPECT_EQ(run_cli("run --grid-sizes 8 --trials 2 --targets 2 --out " + out), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "raw.csv"));
  EXPECT_EQ(run_cli("summarize --in " + out + "/raw.csv --out " + out + "/again.csv"), 0);
  EXPECT_EQ(slurp(fs::path(out) / "again.csv"), slurp(fs::path(out) / "summary.csv"));

  EXPECT_EQ(run_cli("run --algos lasso --out " + out), 2);
  EXPECT_EQ(run_cli("run --trials 0 --out " + out), 2);
  EXPECT_EQ(run_cli("run --no-such-flag"), 2);
  EXPECT_EQ(run_cli("run --config " + (dir.path() / "absent.json").string()), 3);
  EXPECT_EQ(run_cli("summarize --in " + (dir.path() / "absent.csv").string() + " --out x.csv"), 3);
}
