#include "chj/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "chj/errors.hpp"

namespace chj {

GridSpec GridSpec::uniform(double lo, double hi, int n_cells) {
  if (!(hi > lo)) throw ConfigError(fmt::format("grid bounds [{}, {}] are empty", lo, hi));
  if (n_cells < 2) throw ConfigError(fmt::format("grid needs >= 2 cells, got {}", n_cells));
  return GridSpec{lo, hi, n_cells};
}

std::size_t GridSpec::nearest(double x) const {
  const double s = std::round((x - lo) / h());
  if (s <= 0.0) return 0;
  if (s >= n_cells) return static_cast<std::size_t>(n_cells);
  return static_cast<std::size_t>(s);
}

Field Field::sample(const GridSpec& grid, const std::function<double(double)>& f,
                    double time) {
  Field out{grid, std::vector<double>(grid.n_nodes()), time};
  for (std::size_t i = 0; i < grid.n_nodes(); ++i) out.values[i] = f(grid.node(i));
  return out;
}

double Field::min() const { return values[argmin()]; }

std::size_t Field::argmin() const {
  return static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
}

double Field::max() const { return *std::max_element(values.begin(), values.end()); }

double interpolate_unchecked(const Field& field, double x) {
  const GridSpec& g = field.grid;
  const double s = (x - g.lo) / g.h();
  auto i = static_cast<std::ptrdiff_t>(std::floor(s));
  i = std::clamp<std::ptrdiff_t>(i, 0, g.n_cells - 1);
  const double t = s - static_cast<double>(i);
  const auto k = static_cast<std::size_t>(i);
  if (t <= 0.0) return field.values[k];
  if (t >= 1.0) return field.values[k + 1];
  return (1.0 - t) * field.values[k] + t * field.values[k + 1];
}

double interpolate(const Field& field, double x) {
  if (!field.grid.contains(x)) {
    throw DomainError(fmt::format("x = {} outside grid [{}, {}]", x, field.grid.lo,
                                  field.grid.hi));
  }
  return interpolate_unchecked(field, x);
}

// ---------------------------------------------------------------------------

InitialData InitialData::quadratic_well(double center, double scale) {
  return {fmt::format("quadratic-well(center={}, scale={})", center, scale),
          [=](double x) { return scale * (x - center) * (x - center); }, 0.0};
}

InitialData InitialData::shifted_well(double center, double scale) {
  auto g = quadratic_well(center, scale);
  g.name = fmt::format("shifted-well(center={}, scale={})", center, scale);
  return g;
}

InitialData InitialData::double_well(double left, double right, double offset) {
  return {fmt::format("double-well(left={}, right={}, offset={})", left, right, offset),
          [=](double x) {
            return std::min((x - left) * (x - left), (x - right) * (x - right) + offset);
          },
          0.0};
}

InitialData InitialData::soft_well(double center, double scale) {
  return {fmt::format("soft-well(center={}, scale={})", center, scale),
          [=](double x) {
            const double y = x - center;
            return scale * (std::sqrt(1.0 + y * y) - 1.0);
          },
          0.0};
}

InitialData InitialData::tabulated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open table '{}'", path));
  auto xs = std::make_shared<std::vector<double>>();
  auto ys = std::make_shared<std::vector<double>>();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x = 0.0;
    double y = 0.0;
    if (!(ss >> x)) continue;
    if (!(ss >> y)) throw ConfigError(fmt::format("{}:{}: expected two columns", path, line_no));
    if (!xs->empty() && !(x > xs->back())) {
      throw ConfigError(fmt::format("{}:{}: abscissae must be strictly increasing", path, line_no));
    }
    xs->push_back(x);
    ys->push_back(y);
  }
  if (xs->size() < 2) throw ConfigError(fmt::format("{}: need at least two rows", path));
  auto f = [xs, ys](double x) {
    const auto& a = *xs;
    const auto& b = *ys;
    std::size_t i = 0;
    if (x <= a.front()) {
      i = 0;
    } else if (x >= a.back()) {
      i = a.size() - 2;
    } else {
      i = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) - 1;
    }
    const double s = (b[i + 1] - b[i]) / (a[i + 1] - a[i]);
    return b[i] + s * (x - a[i]);
  };
  return {fmt::format("tabulated({})", path), f, 0.0};
}

double locate_argmin(const InitialData& g) {
  constexpr double span = 64.0;
  constexpr int n = 1 << 16;
  double best_x = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double x = -span + 2.0 * span * i / n;
    const double v = g(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  // golden-section polish on the neighbouring cells
  double a = best_x - 2.0 * span / n;
  double b = best_x + 2.0 * span / n;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double c = b - r * (b - a);
    const double d = a + r * (b - a);
    if (g(c) <= g(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  const double polished = 0.5 * (a + b);
  return g(polished) <= best ? polished : best_x;
}

double far_minimum(const InitialData& g, double center, double r, double cap) {
  double m = std::numeric_limits<double>::infinity();
  double step = 1.0 / 64.0;
  for (double s = r; s <= cap; s += step) {
    m = std::min({m, g(center + s), g(center - s)});
    if (s > r + 16.0) step *= 1.05;
  }
  return m;
}

double estimate_growth_constant(const ModelSpec& model, double I_lo, double I_hi,
                                double x_lo, double x_hi) {
  constexpr int n = 129;
  double C = 0.0;
  for (int a = 0; a < n; ++a) {
    const double I = I_lo + (I_hi - I_lo) * a / (n - 1);
    for (int b = 0; b < n; ++b) {
      const double x = x_lo + (x_hi - x_lo) * b / (n - 1);
      C = std::max({C, model.hamiltonian_value(I, x, 1.0),
                    model.hamiltonian_value(I, x, -1.0)});
    }
  }
  return C;
}

double lower_bound_value(const std::function<double(double)>& far_min,
                         double radius, double C, double t) {
  return std::min(0.5 * radius, far_min(0.5 * radius)) - C * t;
}

TruncationResult truncate_domain(const InitialData& g, const ModelSpec& model,
                                 double T, const TruncationParams& params) {
  TruncationResult out;
  double c = locate_argmin(g);
  // Remove sampling noise so that symmetric data give symmetric boxes.
  const double snapped = std::round(c / params.alignment) * params.alignment;
  if (std::abs(snapped - c) < 1e-6 && g(snapped) <= g(c) + 1e-12) c = snapped;
  out.center = c;

  auto far_min = [&](double r) { return far_minimum(g, c, r, params.radius_cap); };

  const double dr = params.alignment;
  for (double rho = dr; rho <= params.radius_cap; rho += dr) {
    const double C = estimate_growth_constant(model, params.I_lo, params.I_hi,
                                              c - rho, c + rho);
    const double lb = lower_bound_value(far_min, rho, C, T);
    if (lb >= params.margin) {
      out.radius = rho;
      out.growth_constant = C;
      break;
    }
    // Coarser search once far out; g growth is checked against the cap.
    if (rho > 256.0) rho += 16.0 * dr;
  }
  if (out.radius <= 0.0) {
    throw ConfigError(fmt::format(
        "initial data '{}' is not coercive enough within radius cap {}: the "
        "lower bound never exceeds margin {}",
        g.name, params.radius_cap, params.margin));
  }

  // Pad so that the guaranteed-interior region sits >= safety*5 cells inside.
  const double pad_fraction = 10.0 * params.safety / params.n_cells;
  if (pad_fraction >= 1.0) {
    throw ConfigError("too few cells for the requested boundary safety buffer");
  }
  double W = out.radius / (1.0 - pad_fraction);
  W = std::ceil(W / params.alignment - 1e-12) * params.alignment;
  out.grid = GridSpec::uniform(c - W, c + W, params.n_cells);
  return out;
}

}  // namespace chj
