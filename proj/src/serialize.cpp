#include "pcsbl/serialize.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "pcsbl/io.hpp"

namespace pcsbl {

namespace {

void reject_unknown_keys(const nlohmann::json& j,
                         const std::set<std::string>& allowed,
                         const std::string& what) {
  if (!j.is_object())
    throw std::invalid_argument(what + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument(what + ": unknown key '" + it.key() + "'");
}

std::string kind_name(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::kDense: return "dense";
    case OperatorKind::kKronecker: return "kronecker";
    case OperatorKind::kHadamard: return "hadamard";
  }
  throw std::logic_error("unreachable operator kind");
}

OperatorKind kind_from_name(const std::string& name) {
  if (name == "dense") return OperatorKind::kDense;
  if (name == "kronecker") return OperatorKind::kKronecker;
  if (name == "hadamard") return OperatorKind::kHadamard;
  throw std::invalid_argument("operator descriptor: unknown kind '" + name +
                              "'");
}

}  // namespace

nlohmann::json descriptor_to_json(const OperatorDescriptor& d) {
  nlohmann::json j;
  j["kind"] = kind_name(d.kind);
  j["m"] = d.m;
  j["n"] = d.n;
  if (d.seeded) j["seed"] = d.seed;
  if (d.kind != OperatorKind::kHadamard)
    j["normalize_columns"] = d.normalize_columns;
  if (d.kind == OperatorKind::kKronecker) {
    j["b_rows"] = d.b_rows;
    j["b_cols"] = d.b_cols;
    j["reps"] = d.reps;
  }
  if (!d.csv_path.empty()) j["csv_path"] = d.csv_path;
  return j;
}

OperatorDescriptor descriptor_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j,
                      {"kind", "m", "n", "seed", "normalize_columns", "b_rows",
                       "b_cols", "reps", "csv_path"},
                      "operator descriptor");
  OperatorDescriptor d;
  d.kind = kind_from_name(j.at("kind").get<std::string>());
  if (j.contains("seed")) {
    d.seed = j["seed"].get<std::uint64_t>();
    d.seeded = true;
  }
  d.normalize_columns = j.value("normalize_columns", false);
  d.csv_path = j.value("csv_path", std::string());
  if (d.kind == OperatorKind::kKronecker) {
    d.b_rows = j.at("b_rows").get<int>();
    d.b_cols = j.at("b_cols").get<int>();
    d.reps = j.at("reps").get<int>();
    d.m = j.value("m", d.b_rows * d.reps);
    d.n = j.value("n", d.b_cols * d.reps);
  } else {
    d.m = j.at("m").get<int>();
    d.n = j.at("n").get<int>();
  }
  return d;
}

SensingOperator operator_from_descriptor(const OperatorDescriptor& d) {
  switch (d.kind) {
    case OperatorKind::kDense:
      if (d.seeded)
        return SensingOperator::gaussian_dense(d.m, d.n, d.seed,
                                               d.normalize_columns);
      if (!d.csv_path.empty()) {
        Eigen::MatrixXd a = read_matrix_csv(d.csv_path);
        if (a.rows() != d.m || a.cols() != d.n)
          throw std::invalid_argument(
              "operator descriptor: CSV dims disagree with m, n");
        return SensingOperator::dense(std::move(a));
      }
      throw std::invalid_argument(
          "operator descriptor: dense kind needs a seed or a csv_path");
    case OperatorKind::kKronecker:
      if (!d.seeded)
        throw std::invalid_argument(
            "operator descriptor: kronecker kind needs a seed");
      return SensingOperator::kronecker_gaussian(d.b_rows, d.b_cols, d.reps,
                                                 d.seed, d.normalize_columns);
    case OperatorKind::kHadamard:
      if (!d.seeded)
        throw std::invalid_argument(
            "operator descriptor: hadamard kind needs a seed");
      return SensingOperator::subsampled_hadamard(d.m, d.n, d.seed);
  }
  throw std::logic_error("unreachable operator kind");
}

SensingOperator load_operator(const std::string& path) {
  return operator_from_descriptor(descriptor_from_json(load_json(path)));
}

void save_operator(const std::string& path, const SensingOperator& op) {
  save_json(path, descriptor_to_json(op.descriptor()));
}

nlohmann::json solver_config_to_json(const SolverConfig& cfg) {
  nlohmann::json j;
  j["a"] = cfg.a;
  j["b"] = cfg.b;
  j["c"] = cfg.c;
  j["d"] = cfg.d;
  j["beta"] = cfg.beta;
  j["alpha_init"] = cfg.alpha_init;
  if (cfg.gamma_fixed > 0)
    j["gamma_fixed"] = cfg.gamma_fixed;
  else if (cfg.gamma_init > 0)
    j["gamma_init"] = cfg.gamma_init;
  j["inner"] = {{"epsilon", cfg.inner.epsilon},
                {"k_max", cfg.inner.k_max},
                {"damping", cfg.inner.damping}};
  j["outer"] = {{"tol", cfg.outer_tol}, {"t_max", cfg.outer_t_max}};
  if (cfg.cold_start) j["cold_start"] = true;
  if (!cfg.trace_path.empty()) j["trace_path"] = cfg.trace_path;
  return j;
}

SolverConfig solver_config_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j,
                      {"a", "b", "c", "d", "beta", "alpha_init", "gamma_init",
                       "gamma_fixed", "inner", "outer", "trace_path",
                       "cold_start"},
                      "solver config");
  if (j.contains("gamma_init") && j.contains("gamma_fixed"))
    throw std::invalid_argument(
        "solver config: gamma_init and gamma_fixed are mutually exclusive");
  SolverConfig cfg;
  cfg.a = j.value("a", cfg.a);
  cfg.b = j.value("b", cfg.b);
  cfg.c = j.value("c", cfg.c);
  cfg.d = j.value("d", cfg.d);
  cfg.beta = j.value("beta", cfg.beta);
  cfg.alpha_init = j.value("alpha_init", cfg.alpha_init);
  cfg.gamma_init = j.value("gamma_init", cfg.gamma_init);
  cfg.gamma_fixed = j.value("gamma_fixed", cfg.gamma_fixed);
  if (j.contains("inner")) {
    const auto& inner = j["inner"];
    reject_unknown_keys(inner, {"epsilon", "k_max", "damping"},
                        "solver config inner");
    cfg.inner.epsilon = inner.value("epsilon", cfg.inner.epsilon);
    cfg.inner.k_max = inner.value("k_max", cfg.inner.k_max);
    cfg.inner.damping = inner.value("damping", cfg.inner.damping);
  }
  if (j.contains("outer")) {
    const auto& outer = j["outer"];
    reject_unknown_keys(outer, {"tol", "t_max"}, "solver config outer");
    cfg.outer_tol = outer.value("tol", cfg.outer_tol);
    cfg.outer_t_max = outer.value("t_max", cfg.outer_t_max);
  }
  cfg.cold_start = j.value("cold_start", false);
  cfg.trace_path = j.value("trace_path", std::string());
  check_solver_config(cfg);
  return cfg;
}

SolverConfig load_solver_config(const std::string& path) {
  return solver_config_from_json(load_json(path));
}

nlohmann::json report_to_json(const RecoveryReport& rep) {
  nlohmann::json j;
  j["converged"] = rep.converged;
  j["outer_iterations"] = rep.outer_iterations;
  j["inner_iterations_total"] = rep.inner_iterations_total;
  j["wall_time_s"] = rep.wall_time_s;
  j["gamma"] = rep.hyper.gamma;
  j["beta"] = rep.hyper.beta;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& row : rep.trace)
    trace.push_back(
        {{"t", row.t}, {"dx_sq", row.dx_sq}, {"gamma", row.gamma}});
  j["trace"] = std::move(trace);
  return j;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void save_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace pcsbl
