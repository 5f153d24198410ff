#pragma once

// Hamiltonian/Lagrangian models for the constrained HJ problem in one space
// dimension. H(I,x,.) is convex in the momentum, L(I,x,.) is its convex
// conjugate in the velocity, and both are decreasing/increasing in I.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chj {

/// Value plus first partials. `d_pv` is d_p for H and d_v for L.
struct DerivativeBundle {
  double value = 0.0;
  double d_I = 0.0;
  double d_x = 0.0;
  double d_pv = 0.0;
};

/// A scalar function of (I, x) with its two partial derivatives.
struct RateFunction {
  std::function<double(double, double)> value;
  std::function<double(double, double)> d_I;
  std::function<double(double, double)> d_x;

  /// r0 + r1*x - r2*(x - x0)^2 - c_I*I
  static RateFunction quadratic_family(double r0, double r1, double r2,
                                       double x0, double c_I);
  /// a * exp(-b*x^2) * exp(-c*I) + floor
  static RateFunction gaussian_bump(double a, double b, double c, double floor);
  /// c0 + c_I*I
  static RateFunction affine_in_I(double c0, double c_I);
};

/// Laplace transform K(p) of a symmetric mutation kernel, with derivatives.
struct KernelTransform {
  std::function<double(double)> value;
  std::function<double(double)> d_p;
  std::function<double(double)> d_pp;
  std::string name;

  /// Centered normal kernel of standard deviation sigma: exp(sigma^2 p^2 / 2).
  static KernelTransform gaussian(double sigma);
};

/// Evaluation of the conjugate of a kernel transform at one velocity.
struct ConjugatePoint {
  double value = 0.0;     ///< conjugate value
  double momentum = 0.0;  ///< the dual momentum (= derivative of the conjugate)
  double curvature = 0.0; ///< second derivative of the conjugate
};

/// Evaluates sup_p { p*w - K(p) } by a safeguarded Newton solve of K'(p) = w.
ConjugatePoint kernel_conjugate(const KernelTransform& kernel, double w);

/// Convex momentum profile h(p) given by samples, C^1 via cubic Hermite.
class TabulatedProfile {
 public:
  TabulatedProfile(std::vector<double> p, std::vector<double> h);

  /// Two-column text: abscissa, value. Abscissae strictly increasing.
  static TabulatedProfile load(const std::string& path);

  double value(double p) const;
  double slope(double p) const;
  double curvature(double p) const;
  double p_min() const { return p_.front(); }
  double p_max() const { return p_.back(); }
  /// Momentum q with slope(q) = v; throws DomainError if v is out of range.
  double slope_inverse(double v) const;

  const std::vector<double>& abscissae() const { return p_; }
  const std::vector<double>& values() const { return h_; }

 private:
  std::size_t cell(double p) const;

  std::vector<double> p_;
  std::vector<double> h_;
  std::vector<double> m_;  // node slopes
};

/// Validity box for (I, x, p/v). Evaluations outside it throw DomainError.
struct ValidityBox {
  double I_lo = -1.0e6;
  double I_hi = 1.0e6;
  double x_lo = -1.0e6;
  double x_hi = 1.0e6;
  double p_radius = 1.0e300;
  double v_radius = 1.0e300;
};

/// Region sampled by the assumption checker.
struct AssumptionBox {
  double I_lo = 0.0;
  double I_hi = 10.0;
  double x_center = 0.0;
  double x_radius = 4.0;  ///< K
  double v_radius = 10.0;
  double p_radius = 4.0;
  int lattice = 64;       ///< points per axis
  bool nonnegative_I() const { return I_lo >= 0.0; }
};

/// Lower bound L >= theta(|v|) - c_theta.
struct ThetaBound {
  std::function<double(double)> theta;
  double c_theta = 0.0;
};

/// |d_x L| <= alpha + beta * L on a box.
struct DxBound {
  double alpha = 0.0;
  double beta = 0.0;
};

enum class ModelKind { quadratic, kernel, tabulated };

std::string to_string(ModelKind kind);

/// Immutable Hamiltonian/Lagrangian pair. Built-in kinds use closed forms:
///   quadratic:  H = R + p^2,           L = v^2/4 - R
///   kernel:     H = B K(p) - D,        L = B Lc(v/B) + D   (Lc conjugate of K)
///   tabulated:  H = R + h(p),          L = h*(v) - R
class ModelSpec {
 public:
  static ModelSpec quadratic(RateFunction R);
  static ModelSpec kernel(RateFunction B, RateFunction D, KernelTransform K);
  static ModelSpec tabulated(RateFunction R, TabulatedProfile h,
                             double theta_coeff, double c_theta);

  ModelKind kind() const { return kind_; }
  bool symmetric() const { return symmetric_; }
  const ValidityBox& validity() const { return box_; }
  ModelSpec with_validity(const ValidityBox& box) const;

  // Unchecked evaluators used by the solvers' inner loops.
  DerivativeBundle hamiltonian(double I, double x, double p) const;
  DerivativeBundle lagrangian(double I, double x, double v) const;
  double hamiltonian_value(double I, double x, double p) const;
  double lagrangian_value(double I, double x, double v) const;
  /// d_p H
  double velocity(double I, double x, double p) const;
  /// d_v L
  double momentum(double I, double x, double v) const;
  double hamiltonian_curvature(double I, double x, double p) const;
  double lagrangian_curvature(double I, double x, double v) const;
  /// argmin_p H(I,x,.)
  double hamiltonian_argmin(double I, double x) const;

  ThetaBound theta_bound(const AssumptionBox& box) const;
  DxBound dx_bound(const AssumptionBox& box) const;

  // Kind-specific accessors; throw ModelError on the wrong kind.
  const RateFunction& growth_rate() const;
  const RateFunction& birth_rate() const;
  const RateFunction& death_rate() const;
  const KernelTransform& kernel_transform() const;

 private:
  ModelSpec() = default;

  ModelKind kind_ = ModelKind::quadratic;
  bool symmetric_ = true;
  ValidityBox box_;
  std::shared_ptr<const RateFunction> R_;
  std::shared_ptr<const RateFunction> B_;
  std::shared_ptr<const RateFunction> D_;
  std::shared_ptr<const KernelTransform> K_;
  std::shared_ptr<const TabulatedProfile> h_;
  double theta_coeff_ = 0.0;
  double c_theta_ = 0.0;
};

/// Checked H evaluation: throws DomainError naming the offending coordinate.
DerivativeBundle eval_hamiltonian(const ModelSpec& model, double I, double x,
                                  double p);

/// Checked L evaluation. Kernel models with B <= 0 at the point throw ModelError.
DerivativeBundle eval_lagrangian(const ModelSpec& model, double I, double x,
                                 double v);

/// A convex function sampled on a strictly increasing 1-d grid.
struct SampledFunction {
  std::vector<double> grid;
  std::vector<double> values;
};

/// Throws ConvexityError if any consecutive slope decreases by more than tol.
void require_convex(const SampledFunction& f, double tol_convex);

/// Discrete sup transform f*(v_j) = max_i { p_i v_j - f_i }, dense O(N M).
/// Slopes of the input are validated for convexity first.
SampledFunction legendre_conjugate(const SampledFunction& f,
                                   std::span<const double> dual_grid,
                                   double tol_convex = 1e-9);

/// Max linear-interpolation error of a convex sample set: max second
/// difference / 8 (uniform spacing) or the divided-difference analogue.
double interpolation_error_bound(const SampledFunction& f);

struct AssumptionEntry {
  std::string name;
  bool applicable = true;
  bool passed = true;
  double worst = 0.0;  ///< worst sampled margin (negative = violation)
  double tolerance = 0.0;
  double witness_I = 0.0;
  double witness_x = 0.0;
  double witness_pv = 0.0;
  std::string note;
};

struct AssumptionReport {
  std::vector<AssumptionEntry> entries;
  AssumptionBox box;
  std::string I_box_kind;  ///< "[0,J]" or "[-J,J]"

  bool all_passed() const;
  /// Convexity (H1, L1) and I-monotonicity (H2, L2) failures block a run.
  bool hard_failure() const;
  const AssumptionEntry* find(const std::string& name) const;
};

/// Sampled checks named H1, H2 and L1 to L5 and, for kernel models, the
/// inequality d_v Lc(v) v <= 2 (1 + Lc(v)).
AssumptionReport check_assumptions(const ModelSpec& model,
                                   const AssumptionBox& box,
                                   double tol = 1e-9);

}  // namespace chj
