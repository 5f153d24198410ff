#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "chj/model.hpp"

namespace chj {

/// Uniform 1-d grid on [lo, hi] with n_cells cells (n_cells + 1 nodes).
struct GridSpec {
  double lo = -1.0;
  double hi = 1.0;
  int n_cells = 64;

  static GridSpec uniform(double lo, double hi, int n_cells);

  double h() const { return (hi - lo) / n_cells; }
  std::size_t n_nodes() const { return static_cast<std::size_t>(n_cells) + 1; }
  double node(std::size_t i) const { return lo + h() * static_cast<double>(i); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  /// Index of the node nearest to x (clamped).
  std::size_t nearest(double x) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Nodal values of u(t, .) on a grid.
struct Field {
  GridSpec grid;
  std::vector<double> values;
  double time = 0.0;

  static Field sample(const GridSpec& grid, const std::function<double(double)>& f,
                      double time = 0.0);

  double min() const;
  std::size_t argmin() const;
  double max() const;
};

/// Piecewise-linear interpolation. Throws DomainError outside the grid.
double interpolate(const Field& field, double x);

/// Interpolation without the bounds check; x must lie in the grid.
double interpolate_unchecked(const Field& field, double x);

/// Initial data g with a name for reports. `shift` is subtracted so that
/// min g = 0 on the grid.
struct InitialData {
  std::string name;
  std::function<double(double)> raw;
  double shift = 0.0;

  double operator()(double x) const { return raw(x) - shift; }

  static InitialData quadratic_well(double center = 0.0, double scale = 1.0);
  static InitialData shifted_well(double center = 3.0, double scale = 1.0);
  /// min((x - left)^2, (x - right)^2 + offset)
  static InitialData double_well(double left = -1.0, double right = 1.0,
                                 double offset = 0.2);
  /// scale * (sqrt(1 + (x - center)^2) - 1); Lipschitz with constant `scale`.
  static InitialData soft_well(double center = 0.0, double scale = 1.0);
  /// Two-column table, linear between samples and linear extrapolation
  /// with the end slopes outside.
  static InitialData tabulated(const std::string& path);
};

/// Location of the minimum of g by dense sampling over [-64, 64].
double locate_argmin(const InitialData& g);

/// Sup over the box of max(H(I,x,1), H(I,x,-1)) = sup (|v| - L): the constant
/// in L >= |v| - C used by the lower bound on variational solutions.
double estimate_growth_constant(const ModelSpec& model, double I_lo, double I_hi,
                                double x_lo, double x_hi);

/// min of g over |x - center| >= r, sampled out to `cap` with a geometric tail.
double far_minimum(const InitialData& g, double center, double r, double cap = 1.0e4);

/// min{ |x - o|/2, min_{|x' - o| >= |x - o|/2} g(x') } - C t with o the centre.
/// `far_min` evaluates the inner minimum.
double lower_bound_value(const std::function<double(double)>& far_min,
                         double radius, double C, double t);

struct TruncationParams {
  double margin = 1.0;     ///< required lower-bound value at the boundary
  double safety = 1.0;     ///< multiplies the 5-cell interior buffer
  int n_cells = 800;
  double I_lo = 0.0;
  double I_hi = 10.0;
  double radius_cap = 1.0e4;
  double alignment = 0.25; ///< half-width rounded up to a multiple of this
};

struct TruncationResult {
  GridSpec grid;
  double center = 0.0;
  double radius = 0.0;     ///< smallest radius meeting the margin
  double growth_constant = 0.0;
};

/// Chooses a symmetric box around argmin g on which the lower bound
/// exceeds `margin` at the boundary, then pads by safety * 5 cells.
/// Throws ConfigError if g is not coercive within the cap.
TruncationResult truncate_domain(const InitialData& g, const ModelSpec& model,
                                 double T, const TruncationParams& params);

}  // namespace chj
