#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcsbl/io.hpp"
#include "pcsbl/solver.hpp"

namespace pcsbl {

// One benchmark protocol. Fields not used by a given kind are ignored.
struct ExperimentConfig {
  std::string kind;  // success-sweep | runtime-sweep | patch-2d
  int n = 200;
  int k = 40;
  int t = 6;
  std::vector<double> m_over_n = {0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<int> n_grid = {200, 400, 800};
  double m_fraction = 0.4;  // runtime sweep measurement ratio
  int rows = 16;            // patch grid
  int cols = 16;
  int m = 80;               // patch measurement count
  double snr_db = std::numeric_limits<double>::infinity();
  int trials = 50;
  int warmup = 1;  // leading trials excluded from runtime summaries
  std::uint64_t seed = 1;
  std::vector<std::string> algorithms;  // empty: per-kind default set
  std::map<std::string, SolverConfig> solvers;  // per-algorithm overrides
  std::string out_dir = ".";
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

struct TrialRecord {
  std::string algorithm;
  int n = 0;
  int m = 0;
  double m_over_n = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;  // base of the trial's generator seeds
  double nmse = 0.0;
  bool success = false;
  double wall_time_s = 0.0;
  int iterations = 0;  // outer rounds
  std::string note;    // diagnostic when the solver failed
};

// All algorithms within a trial share the operator, signal, and noise draw,
// so cross-algorithm comparisons are paired.
std::vector<TrialRecord> run_success_sweep(const ExperimentConfig& cfg);
std::vector<TrialRecord> run_runtime_sweep(const ExperimentConfig& cfg);
std::vector<TrialRecord> run_patch_bench(const ExperimentConfig& cfg);

struct SuccessPoint {
  std::string algorithm;
  double m_over_n = 0.0;
  double success_rate = 0.0;
  double mean_nmse = 0.0;
  double mean_time_s = 0.0;
  int trials = 0;
};

struct RuntimePoint {
  std::string algorithm;
  int n = 0;
  int m = 0;
  double median_time_s = 0.0;
  double mean_time_s = 0.0;
  int trials = 0;  // after warm-up removal
};

struct PatchPoint {
  std::string algorithm;
  double median_nmse = 0.0;
  double mean_nmse = 0.0;
  double mean_time_s = 0.0;
  int trials = 0;
};

std::vector<SuccessPoint> summarize_success(
    const std::vector<TrialRecord>& records);
std::vector<RuntimePoint> summarize_runtime(
    const std::vector<TrialRecord>& records, int warmup);
std::vector<PatchPoint> summarize_patch(
    const std::vector<TrialRecord>& records);

CsvTable records_to_table(const std::vector<TrialRecord>& records);
CsvTable success_summary_table(const std::vector<SuccessPoint>& points);
CsvTable runtime_summary_table(const std::vector<RuntimePoint>& points);
CsvTable patch_summary_table(const std::vector<PatchPoint>& points);

// Runs the configured experiment and writes records.csv, summary.csv, and
// summary.json into cfg.out_dir.
void run_experiment(const ExperimentConfig& cfg);

// Worker count: PCSBL_THREADS when set to a positive integer, otherwise the
// hardware concurrency.
int thread_count();

// Runs fn(0..count-1) across up to `threads` workers; rethrows the first
// exception after all workers finish.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace pcsbl
