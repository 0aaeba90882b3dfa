#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcsbl/coupling.hpp"
#include "pcsbl/io.hpp"
#include "pcsbl/oracle.hpp"
#include "pcsbl/serialize.hpp"
#include "pcsbl/signals.hpp"
#include "pcsbl/solver.hpp"
#include "pcsbl/sweeps.hpp"

namespace {

struct SenseArgs {
  std::string signal_path;
  std::string image_path;
  std::string operator_path;
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  std::string out_y;
  std::string out_operator;
};

struct RecoverArgs {
  std::string y_path;
  std::string operator_path;
  std::string solver_path;
  std::string algorithm = "pcsbl-gamp";
  int rows = 0;
  int cols = 0;
  std::string out_x;
  std::string out_report;
  std::string out_image;
};

int run_sense(const SenseArgs& args) {
  if (args.signal_path.empty() == args.image_path.empty())
    throw std::invalid_argument("sense: give exactly one of --signal, --image");

  const pcsbl::SensingOperator op = pcsbl::load_operator(args.operator_path);
  Eigen::VectorXd x;
  if (!args.signal_path.empty()) {
    x = pcsbl::read_vector_csv(args.signal_path);
  } else {
    x = pcsbl::vectorize(pcsbl::read_pgm(args.image_path));
  }
  if (x.size() != op.cols())
    throw std::invalid_argument("sense: signal length " +
                                std::to_string(x.size()) +
                                " does not match operator columns " +
                                std::to_string(op.cols()));

  const Eigen::VectorXd z = op.apply(x);
  const auto noisy = pcsbl::add_noise(z, args.snr_db, args.seed);
  pcsbl::write_vector_csv(args.out_y, noisy.y);
  if (!args.out_operator.empty()) pcsbl::save_operator(args.out_operator, op);

  nlohmann::json out;
  out["m"] = op.rows();
  out["n"] = op.cols();
  out["sigma2"] = noisy.sigma2;
  std::cout << out.dump() << '\n';
  return 0;
}

int run_recover(const RecoverArgs& args) {
  if ((args.rows > 0) != (args.cols > 0))
    throw std::invalid_argument("recover: --rows and --cols come together");
  if (!args.out_image.empty() && args.rows == 0)
    throw std::invalid_argument("recover: --out-image needs --rows/--cols");

  const pcsbl::SensingOperator op = pcsbl::load_operator(args.operator_path);
  const Eigen::VectorXd y = pcsbl::read_vector_csv(args.y_path);
  pcsbl::SolverConfig cfg;
  if (!args.solver_path.empty())
    cfg = pcsbl::load_solver_config(args.solver_path);
  if (args.algorithm == "sbl") cfg.beta = 0.0;

  pcsbl::NeighborGraph graph =
      args.rows > 0 ? pcsbl::NeighborGraph::lattice(args.rows, args.cols)
                    : pcsbl::NeighborGraph::chain(op.cols());
  if (graph.size() != op.cols())
    throw std::invalid_argument("recover: rows*cols != operator columns");

  pcsbl::RecoveryReport rep;
  if (args.algorithm == "pcsbl-em") {
    rep = pcsbl::pcsbl_em_solve(op, y, graph, cfg);
  } else if (args.algorithm == "pcsbl-gamp" || args.algorithm == "sbl") {
    rep = pcsbl::pcsbl_gamp_solve(op, y, graph, cfg);
  } else {
    throw std::invalid_argument("recover: unknown algorithm '" +
                                args.algorithm + "'");
  }

  pcsbl::write_vector_csv(args.out_x, rep.x_hat);
  if (!args.out_report.empty())
    pcsbl::save_json(args.out_report, pcsbl::report_to_json(rep));
  if (!args.out_image.empty())
    pcsbl::write_pgm(args.out_image,
                     pcsbl::unvectorize(rep.x_hat, args.rows, args.cols));

  nlohmann::json out;
  out["converged"] = rep.converged;
  out["outer_iterations"] = rep.outer_iterations;
  out["wall_time_s"] = rep.wall_time_s;
  std::cout << out.dump() << '\n';
  return 0;
}

int run_bench(const std::string& expected_kind, const std::string& config_path,
              const std::string& out_dir) {
  pcsbl::ExperimentConfig cfg = pcsbl::load_experiment_config(config_path);
  if (cfg.kind != expected_kind)
    throw std::invalid_argument("config kind '" + cfg.kind +
                                "' does not match this command (expected '" +
                                expected_kind + "')");
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  pcsbl::run_experiment(cfg);
  std::cout << nlohmann::json{{"out_dir", cfg.out_dir}}.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-sparse signal recovery toolkit"};
  app.require_subcommand(1);

  SenseArgs sense_args;
  auto* sense = app.add_subcommand(
      "sense", "Apply a sensing operator to a signal, optionally with noise");
  sense->add_option("--signal", sense_args.signal_path, "input signal CSV");
  sense->add_option("--image", sense_args.image_path, "input image PGM");
  sense->add_option("--operator", sense_args.operator_path,
                    "operator descriptor JSON")
      ->required();
  sense->add_option("--snr-db", sense_args.snr_db,
                    "measurement SNR in dB; omit for noiseless");
  sense->add_option("--seed", sense_args.seed, "noise seed");
  sense->add_option("--out-y", sense_args.out_y, "output measurement CSV")
      ->required();
  sense->add_option("--out-operator", sense_args.out_operator,
                    "echo the operator descriptor JSON here");

  RecoverArgs recover_args;
  auto* recover =
      app.add_subcommand("recover", "Recover a signal from measurements");
  recover->add_option("--y", recover_args.y_path, "measurement CSV")
      ->required();
  recover->add_option("--operator", recover_args.operator_path,
                      "operator descriptor JSON")
      ->required();
  recover->add_option("--solver", recover_args.solver_path,
                      "solver config JSON (defaults when omitted)");
  recover->add_option("--algorithm", recover_args.algorithm,
                      "pcsbl-gamp (default), pcsbl-em, or sbl");
  recover->add_option("--rows", recover_args.rows,
                      "grid rows for 2-D coupling");
  recover->add_option("--cols", recover_args.cols,
                      "grid columns for 2-D coupling");
  recover->add_option("--out-x", recover_args.out_x, "output estimate CSV")
      ->required();
  recover->add_option("--out-report", recover_args.out_report,
                      "output report JSON");
  recover->add_option("--out-image", recover_args.out_image,
                      "output estimate PGM (2-D runs)");

  std::string config_path;
  std::string out_dir;
  auto add_bench = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", config_path, "experiment config JSON")
        ->required();
    cmd->add_option("--out-dir", out_dir, "override the config output dir");
    return cmd;
  };
  auto* bench_success =
      add_bench("bench-success", "Success rate vs measurement ratio");
  auto* bench_runtime =
      add_bench("bench-runtime", "Wall time vs signal length");
  auto* bench_patch = add_bench("bench-patch", "2-D patch recovery quality");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
    return e.get_exit_code();
  }

  try {
    if (sense->parsed()) return run_sense(sense_args);
    if (recover->parsed()) return run_recover(recover_args);
    if (bench_success->parsed())
      return run_bench("success-sweep", config_path, out_dir);
    if (bench_runtime->parsed())
      return run_bench("runtime-sweep", config_path, out_dir);
    if (bench_patch->parsed())
      return run_bench("patch-2d", config_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
