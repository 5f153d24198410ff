#include "io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "chj/errors.hpp"

namespace chj {

namespace {

std::ofstream open(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

void write_field_csv(const std::string& path, const Field& field) {
  auto out = open(path);
  out << "x,u\n";
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    out << num(field.grid.node(i)) << ',' << num(field.values[i]) << '\n';
  }
}

void write_path_csv(const std::string& path, const MultiplierPath& p) {
  auto out = open(path);
  out << "t,I,residual,iterations\n";
  for (std::size_t n = 0; n < p.size(); ++n) {
    out << num(p.midpoint(n)) << ',' << num(p.values[n]) << ',' << num(p.residuals[n]) << ','
        << p.iterations[n] << '\n';
  }
}

void write_trajectories_csv(const std::string& path, const std::vector<Trajectory>& trajs) {
  auto out = open(path);
  out << "endpoint,t_end,x_end,s,gamma,gamma_dot\n";
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const auto& tr = trajs[k];
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      out << k << ',' << num(tr.t()) << ',' << num(tr.endpoint()) << ',' << num(tr.times[i])
          << ',' << num(tr.positions[i]) << ',';
      if (i < tr.velocities.size()) out << num(tr.velocities[i]);
      out << '\n';
    }
  }
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
  auto out = open(path);
  out << "eps,l1_I,sup_min_u,linf_u,order_I,order_u\n";
  for (const auto& r : rows) {
    out << num(r.eps) << ',' << num(r.l1_I) << ',' << num(r.sup_min_u) << ',' << num(r.linf_u)
        << ',' << num(r.order_I) << ',' << num(r.order_u) << '\n';
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open(path);
  out << j.dump(2) << '\n';
}

}  // namespace chj
