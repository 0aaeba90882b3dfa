#pragma once

#include <string>

#include "json.hpp"
#include "pcsbl/linop.hpp"
#include "pcsbl/solver.hpp"

namespace pcsbl {

// Operator descriptors travel as JSON so experiments can be replayed; seeded
// kinds rebuild bit-identically, dense kinds may instead point at a CSV file.
nlohmann::json descriptor_to_json(const OperatorDescriptor& d);
OperatorDescriptor descriptor_from_json(const nlohmann::json& j);
SensingOperator operator_from_descriptor(const OperatorDescriptor& d);

SensingOperator load_operator(const std::string& path);
void save_operator(const std::string& path, const SensingOperator& op);

// Solver settings: {a,b,c,d,beta,alpha_init,gamma_init|gamma_fixed,
// inner:{epsilon,k_max,damping},outer:{tol,t_max},trace_path,cold_start}.
// Every key is optional; unknown keys are rejected.
nlohmann::json solver_config_to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const nlohmann::json& j);
SolverConfig load_solver_config(const std::string& path);

nlohmann::json report_to_json(const RecoveryReport& rep);

nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

}  // namespace pcsbl
