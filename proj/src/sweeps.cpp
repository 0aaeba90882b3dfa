#include "pcsbl/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "pcsbl/coupling.hpp"
#include "pcsbl/oracle.hpp"
#include "pcsbl/rng.hpp"
#include "pcsbl/serialize.hpp"
#include "pcsbl/signals.hpp"

namespace pcsbl {

namespace {

constexpr double kNoiselessGammaFreeze = 1e8;

const std::vector<std::string>& default_algorithms(const std::string& kind) {
  static const std::vector<std::string> success = {"pcsbl-gamp", "pcsbl-em",
                                                   "sbl"};
  static const std::vector<std::string> runtime = {"pcsbl-gamp", "pcsbl-em"};
  static const std::vector<std::string> patch = {"pcsbl-gamp", "sbl"};
  if (kind == "success-sweep") return success;
  if (kind == "runtime-sweep") return runtime;
  if (kind == "patch-2d") return patch;
  throw std::invalid_argument("experiment config: unknown kind '" + kind +
                              "'");
}

SolverConfig algorithm_config(const ExperimentConfig& cfg,
                              const std::string& algorithm, bool noiseless,
                              int n) {
  SolverConfig sc;
  auto it = cfg.solvers.find(algorithm);
  if (it != cfg.solvers.end()) sc = it->second;
  if (algorithm == "sbl") sc.beta = 0.0;
  if (noiseless && sc.gamma_fixed <= 0) sc.gamma_fixed = kNoiselessGammaFreeze;
  // The success gate is nmse <= 1e-6 on unit-norm signals, so the inner stop
  // threshold must sit well below it; the dimension-free default (1e-8 n)
  // does not.
  if (noiseless && sc.inner.epsilon <= 0) sc.inner.epsilon = 1e-12 * n;
  return sc;
}

RecoveryReport dispatch_solve(const std::string& algorithm,
                              const SensingOperator& op,
                              const Eigen::VectorXd& y,
                              const NeighborGraph& graph,
                              const SolverConfig& sc) {
  if (algorithm == "pcsbl-em") return pcsbl_em_solve(op, y, graph, sc);
  if (algorithm == "pcsbl-gamp" || algorithm == "sbl")
    return pcsbl_gamp_solve(op, y, graph, sc);
  throw std::invalid_argument("unknown algorithm '" + algorithm + "'");
}

std::string sanitize_note(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

// One (operator, signal, noise) draw solved by every algorithm in turn.
void run_shared_trial(const ExperimentConfig& cfg, int n, int m,
                      const NeighborGraph& graph, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y, bool noiseless,
                      std::uint64_t trial_seed, int trial,
                      const SensingOperator& op,
                      std::vector<TrialRecord>& out) {
  const auto& algorithms =
      cfg.algorithms.empty() ? default_algorithms(cfg.kind) : cfg.algorithms;
  for (const auto& algorithm : algorithms) {
    TrialRecord rec;
    rec.algorithm = algorithm;
    rec.n = n;
    rec.m = m;
    rec.m_over_n = static_cast<double>(m) / n;
    rec.trial = trial;
    rec.seed = trial_seed;
    try {
      const SolverConfig sc = algorithm_config(cfg, algorithm, noiseless, n);
      const RecoveryReport rep = dispatch_solve(algorithm, op, y, graph, sc);
      rec.nmse = nmse(x, rep.x_hat);
      rec.success = rec.nmse <= kSuccessNmse;
      rec.wall_time_s = rep.wall_time_s;
      rec.iterations = rep.outer_iterations;
    } catch (const std::exception& e) {
      // a failed solve counts as an unsuccessful trial, not an abort
      rec.nmse = 1.0;
      rec.success = false;
      rec.note = sanitize_note(e.what());
    }
    out.push_back(std::move(rec));
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("experiment config: expected a JSON object");
  static const std::set<std::string> allowed = {
      "kind",  "n",     "k",      "t",       "m_over_n", "n_grid",
      "m_fraction", "rows", "cols", "m",     "snr_db",   "trials",
      "warmup", "seed", "algorithms", "solvers", "out_dir"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("experiment config: unknown key '" +
                                  it.key() + "'");

  ExperimentConfig cfg;
  cfg.kind = j.at("kind").get<std::string>();
  default_algorithms(cfg.kind);  // validates the kind
  cfg.n = j.value("n", cfg.n);
  cfg.k = j.value("k", cfg.k);
  cfg.t = j.value("t", cfg.t);
  if (j.contains("m_over_n"))
    cfg.m_over_n = j["m_over_n"].get<std::vector<double>>();
  if (j.contains("n_grid")) cfg.n_grid = j["n_grid"].get<std::vector<int>>();
  cfg.m_fraction = j.value("m_fraction", cfg.m_fraction);
  cfg.rows = j.value("rows", cfg.rows);
  cfg.cols = j.value("cols", cfg.cols);
  cfg.m = j.value("m", cfg.m);
  if (j.contains("snr_db")) {
    if (j["snr_db"].is_null())
      cfg.snr_db = std::numeric_limits<double>::infinity();
    else
      cfg.snr_db = j["snr_db"].get<double>();
  }
  cfg.trials = j.value("trials", cfg.trials);
  cfg.warmup = j.value("warmup", cfg.warmup);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("algorithms"))
    cfg.algorithms = j["algorithms"].get<std::vector<std::string>>();
  if (j.contains("solvers")) {
    if (!j["solvers"].is_object())
      throw std::invalid_argument("experiment config: solvers must map "
                                  "algorithm names to solver configs");
    for (auto it = j["solvers"].begin(); it != j["solvers"].end(); ++it)
      cfg.solvers[it.key()] = solver_config_from_json(it.value());
  }
  cfg.out_dir = j.value("out_dir", cfg.out_dir);

  if (cfg.k > cfg.n || cfg.t > cfg.k || cfg.t < 1)
    throw std::invalid_argument("experiment config: need 1 <= t <= k <= n");
  if (cfg.trials < 1)
    throw std::invalid_argument("experiment config: trials must be >= 1");
  if (cfg.warmup < 0)
    throw std::invalid_argument("experiment config: warmup must be >= 0");
  for (std::size_t i = 0; i < cfg.m_over_n.size(); ++i) {
    const double r = cfg.m_over_n[i];
    if (r <= 0 || r > 1 || (i > 0 && r <= cfg.m_over_n[i - 1]))
      throw std::invalid_argument(
          "experiment config: m_over_n must be strictly increasing in (0,1]");
  }
  for (const auto& name :
       cfg.algorithms.empty() ? default_algorithms(cfg.kind) : cfg.algorithms)
    if (name != "pcsbl-gamp" && name != "pcsbl-em" && name != "sbl")
      throw std::invalid_argument("experiment config: unknown algorithm '" +
                                  name + "'");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(load_json(path));
}

std::vector<TrialRecord> run_success_sweep(const ExperimentConfig& cfg) {
  const bool noiseless = std::isinf(cfg.snr_db);
  const NeighborGraph graph = NeighborGraph::chain(cfg.n);
  const int points = static_cast<int>(cfg.m_over_n.size());

  std::vector<std::vector<TrialRecord>> cells(
      static_cast<std::size_t>(points) * cfg.trials);
  parallel_for(points * cfg.trials, thread_count(), [&](int idx) {
    const int p = idx / cfg.trials;
    const int trial = idx % cfg.trials;
    const int m = static_cast<int>(std::lround(cfg.m_over_n[p] * cfg.n));
    const std::uint64_t op_seed = seed_mix(cfg.seed, p, trial, 0);
    const std::uint64_t sig_seed = seed_mix(cfg.seed, p, trial, 1);
    const std::uint64_t noise_seed = seed_mix(cfg.seed, p, trial, 2);
    const auto sensing =
        SensingOperator::gaussian_dense(m, cfg.n, op_seed, true);
    const Eigen::VectorXd x = gen_block_sparse(cfg.n, cfg.k, cfg.t, sig_seed);
    const Eigen::VectorXd z = sensing.apply(x);
    const Eigen::VectorXd y =
        noiseless ? z : add_noise(z, cfg.snr_db, noise_seed).y;
    run_shared_trial(cfg, cfg.n, m, graph, x, y, noiseless, sig_seed, trial,
                     sensing, cells[idx]);
  });

  std::vector<TrialRecord> records;
  for (auto& cell : cells)
    for (auto& rec : cell) records.push_back(std::move(rec));
  return records;
}

std::vector<TrialRecord> run_runtime_sweep(const ExperimentConfig& cfg) {
  const bool noiseless = std::isinf(cfg.snr_db);
  std::vector<TrialRecord> records;
  // timing runs stay sequential regardless of the thread setting
  for (std::size_t p = 0; p < cfg.n_grid.size(); ++p) {
    const int n = cfg.n_grid[p];
    const int m = static_cast<int>(std::lround(cfg.m_fraction * n));
    const NeighborGraph graph = NeighborGraph::chain(n);
    for (int trial = 0; trial < cfg.warmup + cfg.trials; ++trial) {
      const std::uint64_t op_seed = seed_mix(cfg.seed, p, trial, 0);
      const std::uint64_t sig_seed = seed_mix(cfg.seed, p, trial, 1);
      const std::uint64_t noise_seed = seed_mix(cfg.seed, p, trial, 2);
      const auto sensing = SensingOperator::gaussian_dense(m, n, op_seed, true);
      const Eigen::VectorXd x = gen_block_sparse(n, cfg.k, cfg.t, sig_seed);
      const Eigen::VectorXd z = sensing.apply(x);
      const Eigen::VectorXd y =
          noiseless ? z : add_noise(z, cfg.snr_db, noise_seed).y;
      run_shared_trial(cfg, n, m, graph, x, y, noiseless, sig_seed, trial,
                       sensing, records);
    }
  }
  return records;
}

std::vector<TrialRecord> run_patch_bench(const ExperimentConfig& cfg) {
  const bool noiseless = std::isinf(cfg.snr_db);
  const int n = cfg.rows * cfg.cols;
  if (cfg.m < 1 || cfg.m > n)
    throw std::invalid_argument("patch bench: need 1 <= m <= rows*cols");
  const NeighborGraph graph = NeighborGraph::lattice(cfg.rows, cfg.cols);

  std::vector<std::vector<TrialRecord>> cells(cfg.trials);
  parallel_for(cfg.trials, thread_count(), [&](int trial) {
    const std::uint64_t op_seed = seed_mix(cfg.seed, 0, trial, 0);
    const std::uint64_t sig_seed = seed_mix(cfg.seed, 0, trial, 1);
    const std::uint64_t noise_seed = seed_mix(cfg.seed, 0, trial, 2);
    const auto sensing = SensingOperator::gaussian_dense(cfg.m, n, op_seed, true);
    const Eigen::VectorXd x = gen_patch_2d(cfg.rows, cfg.cols, sig_seed);
    const Eigen::VectorXd z = sensing.apply(x);
    const Eigen::VectorXd y =
        noiseless ? z : add_noise(z, cfg.snr_db, noise_seed).y;
    run_shared_trial(cfg, n, cfg.m, graph, x, y, noiseless, sig_seed, trial,
                     sensing, cells[trial]);
  });

  std::vector<TrialRecord> records;
  for (auto& cell : cells)
    for (auto& rec : cell) records.push_back(std::move(rec));
  return records;
}

std::vector<SuccessPoint> summarize_success(
    const std::vector<TrialRecord>& records) {
  std::map<std::pair<std::string, double>, std::vector<const TrialRecord*>>
      groups;
  for (const auto& rec : records)
    groups[{rec.algorithm, rec.m_over_n}].push_back(&rec);
  std::vector<SuccessPoint> points;
  for (const auto& [key, recs] : groups) {
    SuccessPoint pt;
    pt.algorithm = key.first;
    pt.m_over_n = key.second;
    pt.trials = static_cast<int>(recs.size());
    for (const auto* r : recs) {
      pt.success_rate += r->success ? 1.0 : 0.0;
      pt.mean_nmse += r->nmse;
      pt.mean_time_s += r->wall_time_s;
    }
    pt.success_rate /= pt.trials;
    pt.mean_nmse /= pt.trials;
    pt.mean_time_s /= pt.trials;
    points.push_back(std::move(pt));
  }
  return points;
}

std::vector<RuntimePoint> summarize_runtime(
    const std::vector<TrialRecord>& records, int warmup) {
  std::map<std::pair<std::string, int>, std::vector<const TrialRecord*>>
      groups;
  for (const auto& rec : records)
    if (rec.trial >= warmup) groups[{rec.algorithm, rec.n}].push_back(&rec);
  std::vector<RuntimePoint> points;
  for (const auto& [key, recs] : groups) {
    RuntimePoint pt;
    pt.algorithm = key.first;
    pt.n = key.second;
    pt.m = recs.front()->m;
    pt.trials = static_cast<int>(recs.size());
    std::vector<double> times;
    for (const auto* r : recs) {
      times.push_back(r->wall_time_s);
      pt.mean_time_s += r->wall_time_s;
    }
    pt.mean_time_s /= pt.trials;
    pt.median_time_s = median(std::move(times));
    points.push_back(std::move(pt));
  }
  return points;
}

std::vector<PatchPoint> summarize_patch(
    const std::vector<TrialRecord>& records) {
  std::map<std::string, std::vector<const TrialRecord*>> groups;
  for (const auto& rec : records) groups[rec.algorithm].push_back(&rec);
  std::vector<PatchPoint> points;
  for (const auto& [name, recs] : groups) {
    PatchPoint pt;
    pt.algorithm = name;
    pt.trials = static_cast<int>(recs.size());
    std::vector<double> nmses;
    for (const auto* r : recs) {
      nmses.push_back(r->nmse);
      pt.mean_nmse += r->nmse;
      pt.mean_time_s += r->wall_time_s;
    }
    pt.mean_nmse /= pt.trials;
    pt.mean_time_s /= pt.trials;
    pt.median_nmse = median(std::move(nmses));
    points.push_back(std::move(pt));
  }
  return points;
}

CsvTable records_to_table(const std::vector<TrialRecord>& records) {
  CsvTable t;
  t.header = {"algorithm", "n",       "m",           "m_over_n",
              "trial",     "seed",    "nmse",        "success",
              "wall_time_s", "iterations", "note"};
  for (const auto& r : records)
    t.rows.push_back({r.algorithm, std::to_string(r.n), std::to_string(r.m),
                      format_double(r.m_over_n), std::to_string(r.trial),
                      std::to_string(r.seed), format_double(r.nmse),
                      r.success ? "1" : "0", format_double(r.wall_time_s),
                      std::to_string(r.iterations), r.note});
  return t;
}

CsvTable success_summary_table(const std::vector<SuccessPoint>& points) {
  CsvTable t;
  t.header = {"algorithm", "m_over_n", "success_rate",
              "mean_nmse", "mean_time_s", "trials"};
  for (const auto& p : points)
    t.rows.push_back({p.algorithm, format_double(p.m_over_n),
                      format_double(p.success_rate), format_double(p.mean_nmse),
                      format_double(p.mean_time_s), std::to_string(p.trials)});
  return t;
}

CsvTable runtime_summary_table(const std::vector<RuntimePoint>& points) {
  CsvTable t;
  t.header = {"algorithm", "n", "m", "median_time_s", "mean_time_s", "trials"};
  for (const auto& p : points)
    t.rows.push_back({p.algorithm, std::to_string(p.n), std::to_string(p.m),
                      format_double(p.median_time_s),
                      format_double(p.mean_time_s), std::to_string(p.trials)});
  return t;
}

CsvTable patch_summary_table(const std::vector<PatchPoint>& points) {
  CsvTable t;
  t.header = {"algorithm", "median_nmse", "mean_nmse", "mean_time_s",
              "trials"};
  for (const auto& p : points)
    t.rows.push_back({p.algorithm, format_double(p.median_nmse),
                      format_double(p.mean_nmse), format_double(p.mean_time_s),
                      std::to_string(p.trials)});
  return t;
}

void run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  std::vector<TrialRecord> records;
  CsvTable summary;
  nlohmann::json meta;
  meta["kind"] = cfg.kind;
  meta["seed"] = cfg.seed;
  meta["trials"] = cfg.trials;

  if (cfg.kind == "success-sweep") {
    records = run_success_sweep(cfg);
    const auto points = summarize_success(records);
    summary = success_summary_table(points);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : points)
      arr.push_back({{"algorithm", p.algorithm},
                     {"m_over_n", p.m_over_n},
                     {"success_rate", p.success_rate},
                     {"mean_nmse", p.mean_nmse},
                     {"mean_time_s", p.mean_time_s},
                     {"trials", p.trials}});
    meta["points"] = std::move(arr);
  } else if (cfg.kind == "runtime-sweep") {
    records = run_runtime_sweep(cfg);
    const auto points = summarize_runtime(records, cfg.warmup);
    summary = runtime_summary_table(points);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : points)
      arr.push_back({{"algorithm", p.algorithm},
                     {"n", p.n},
                     {"m", p.m},
                     {"median_time_s", p.median_time_s},
                     {"mean_time_s", p.mean_time_s},
                     {"trials", p.trials}});
    meta["points"] = std::move(arr);
  } else if (cfg.kind == "patch-2d") {
    records = run_patch_bench(cfg);
    const auto points = summarize_patch(records);
    summary = patch_summary_table(points);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : points)
      arr.push_back({{"algorithm", p.algorithm},
                     {"median_nmse", p.median_nmse},
                     {"mean_nmse", p.mean_nmse},
                     {"mean_time_s", p.mean_time_s},
                     {"trials", p.trials}});
    meta["points"] = std::move(arr);
  } else {
    throw std::invalid_argument("run_experiment: unknown kind '" + cfg.kind +
                                "'");
  }

  write_csv_table((fs::path(cfg.out_dir) / "records.csv").string(),
                  records_to_table(records));
  write_csv_table((fs::path(cfg.out_dir) / "summary.csv").string(), summary);
  save_json((fs::path(cfg.out_dir) / "summary.json").string(), meta);
}

int thread_count() {
  if (const char* env = std::getenv("PCSBL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::min(threads, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pcsbl
