#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chj/epsilon_model.hpp"
#include "chj/grid.hpp"
#include "chj/multiplier.hpp"
#include "chj/sl_route.hpp"

namespace chj {

void write_field_csv(const std::string& path, const Field& field);
/// Columns t (step midpoint), I, residual, iterations.
void write_path_csv(const std::string& path, const MultiplierPath& p);
/// Columns endpoint, t_end, x_end, s, gamma, gamma_dot (empty on the last row).
void write_trajectories_csv(const std::string& path, const std::vector<Trajectory>& trajs);
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace chj
