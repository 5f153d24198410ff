#include "chj/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "chj/errors.hpp"

namespace chj {

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = 0.5 * (a + b);
    return out;
  }
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  }
  return out;
}

// sup/inf of a rate over the (I, x) part of a box, sampled densely.
struct RateRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double abs_dx = 0.0;
  double abs_dx_over_value = 0.0;
};

RateRange sample_rate(const RateFunction& f, const AssumptionBox& box) {
  constexpr int n = 257;
  RateRange r;
  const auto Is = linspace(box.I_lo, box.I_hi, n);
  const auto xs = linspace(box.x_center - box.x_radius,
                           box.x_center + box.x_radius, n);
  for (double I : Is) {
    for (double x : xs) {
      const double v = f.value(I, x);
      const double dx = std::abs(f.d_x(I, x));
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
      r.abs_dx = std::max(r.abs_dx, dx);
      if (v > 0.0) r.abs_dx_over_value = std::max(r.abs_dx_over_value, dx / v);
    }
  }
  return r;
}

void check_in_box(const ValidityBox& box, double I, double x, double pv,
                  double radius, const char* pv_name) {
  if (!(I >= box.I_lo && I <= box.I_hi)) {
    throw DomainError(fmt::format("I = {} outside validity box [{}, {}]", I,
                                  box.I_lo, box.I_hi));
  }
  if (!(x >= box.x_lo && x <= box.x_hi)) {
    throw DomainError(fmt::format("x = {} outside validity box [{}, {}]", x,
                                  box.x_lo, box.x_hi));
  }
  if (!(std::abs(pv) <= radius)) {
    throw DomainError(fmt::format("{} = {} outside validity radius {}", pv_name,
                                  pv, radius));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Rate functions and kernels

RateFunction RateFunction::quadratic_family(double r0, double r1, double r2,
                                            double x0, double c_I) {
  RateFunction f;
  f.value = [=](double I, double x) {
    const double y = x - x0;
    return r0 + r1 * x - r2 * y * y - c_I * I;
  };
  f.d_I = [=](double, double) { return -c_I; };
  f.d_x = [=](double, double x) { return r1 - 2.0 * r2 * (x - x0); };
  return f;
}

RateFunction RateFunction::gaussian_bump(double a, double b, double c,
                                         double floor) {
  RateFunction f;
  f.value = [=](double I, double x) {
    return a * std::exp(-b * x * x - c * I) + floor;
  };
  f.d_I = [=](double I, double x) {
    return -c * a * std::exp(-b * x * x - c * I);
  };
  f.d_x = [=](double I, double x) {
    return -2.0 * b * x * a * std::exp(-b * x * x - c * I);
  };
  return f;
}

RateFunction RateFunction::affine_in_I(double c0, double c_I) {
  RateFunction f;
  f.value = [=](double I, double) { return c0 + c_I * I; };
  f.d_I = [=](double, double) { return c_I; };
  f.d_x = [](double, double) { return 0.0; };
  return f;
}

KernelTransform KernelTransform::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw ModelError("gaussian kernel needs sigma > 0");
  const double s2 = sigma * sigma;
  KernelTransform k;
  k.value = [=](double p) { return std::exp(0.5 * s2 * p * p); };
  k.d_p = [=](double p) { return s2 * p * std::exp(0.5 * s2 * p * p); };
  k.d_pp = [=](double p) {
    return s2 * (1.0 + s2 * p * p) * std::exp(0.5 * s2 * p * p);
  };
  k.name = fmt::format("gaussian(sigma={})", sigma);
  return k;
}

ConjugatePoint kernel_conjugate(const KernelTransform& kernel, double w) {
  // K' is odd and strictly increasing; solve K'(p) = w on a bracket.
  double lo = 0.0;
  double hi = 0.0;
  if (w > 0.0) {
    hi = 1.0;
    while (kernel.d_p(hi) < w) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e6) throw DomainError(fmt::format("kernel conjugate: v = {} too large", w));
    }
  } else if (w < 0.0) {
    lo = -1.0;
    while (kernel.d_p(lo) > w) {
      hi = lo;
      lo *= 2.0;
      if (lo < -1e6) throw DomainError(fmt::format("kernel conjugate: v = {} too large", w));
    }
  }
  double p = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double f = kernel.d_p(p) - w;
    if (f == 0.0) break;
    if (f > 0.0) {
      hi = p;
    } else {
      lo = p;
    }
    double next = p - f / kernel.d_pp(p);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - p) <= 1e-16 * (1.0 + std::abs(p))) {
      p = next;
      break;
    }
    p = next;
  }
  ConjugatePoint c;
  c.momentum = p;
  c.value = p * w - kernel.value(p);
  c.curvature = 1.0 / kernel.d_pp(p);
  return c;
}

// ---------------------------------------------------------------------------
// Tabulated profile

TabulatedProfile::TabulatedProfile(std::vector<double> p, std::vector<double> h)
    : p_(std::move(p)), h_(std::move(h)) {
  if (p_.size() != h_.size() || p_.size() < 3) {
    throw ModelError("tabulated profile needs >= 3 matching (p, h) samples");
  }
  for (std::size_t i = 1; i < p_.size(); ++i) {
    if (!(p_[i] > p_[i - 1])) {
      throw ModelError(fmt::format(
          "tabulated profile abscissae not strictly increasing at row {}", i + 1));
    }
  }
  require_convex(SampledFunction{p_, h_}, 1e-9);
  const std::size_t n = p_.size();
  m_.resize(n);
  m_[0] = (h_[1] - h_[0]) / (p_[1] - p_[0]);
  m_[n - 1] = (h_[n - 1] - h_[n - 2]) / (p_[n - 1] - p_[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    m_[i] = (h_[i + 1] - h_[i - 1]) / (p_[i + 1] - p_[i - 1]);
  }
}

TabulatedProfile TabulatedProfile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open table '{}'", path));
  std::vector<double> a;
  std::vector<double> b;
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
    if (!(ss >> y)) {
      throw ConfigError(fmt::format("{}:{}: expected two columns", path, line_no));
    }
    if (!a.empty() && !(x > a.back())) {
      throw ConfigError(fmt::format(
          "{}:{}: abscissae must be strictly increasing", path, line_no));
    }
    a.push_back(x);
    b.push_back(y);
  }
  return TabulatedProfile(std::move(a), std::move(b));
}

std::size_t TabulatedProfile::cell(double p) const {
  if (p < p_.front() || p > p_.back()) {
    throw DomainError(fmt::format("p = {} outside table range [{}, {}]", p,
                                  p_.front(), p_.back()));
  }
  auto it = std::upper_bound(p_.begin(), p_.end(), p);
  std::size_t i = static_cast<std::size_t>(it - p_.begin());
  if (i == 0) i = 1;
  if (i >= p_.size()) i = p_.size() - 1;
  return i - 1;
}

double TabulatedProfile::value(double p) const {
  const std::size_t i = cell(p);
  const double dp = p_[i + 1] - p_[i];
  const double t = (p - p_[i]) / dp;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * h_[i] + (t3 - 2 * t2 + t) * dp * m_[i] +
         (-2 * t3 + 3 * t2) * h_[i + 1] + (t3 - t2) * dp * m_[i + 1];
}

double TabulatedProfile::slope(double p) const {
  const std::size_t i = cell(p);
  const double dp = p_[i + 1] - p_[i];
  const double t = (p - p_[i]) / dp;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * h_[i] + (-6 * t2 + 6 * t) * h_[i + 1]) / dp +
         (3 * t2 - 4 * t + 1) * m_[i] + (3 * t2 - 2 * t) * m_[i + 1];
}

double TabulatedProfile::curvature(double p) const {
  const std::size_t i = cell(p);
  const double dp = p_[i + 1] - p_[i];
  const double t = (p - p_[i]) / dp;
  return ((12 * t - 6) * h_[i] + (-12 * t + 6) * h_[i + 1]) / (dp * dp) +
         ((6 * t - 4) * m_[i] + (6 * t - 2) * m_[i + 1]) / dp;
}

double TabulatedProfile::slope_inverse(double v) const {
  double lo = p_.front();
  double hi = p_.back();
  if (v < slope(lo) || v > slope(hi)) {
    throw DomainError(fmt::format("v = {} outside tabulated slope range [{}, {}]",
                                  v, slope(lo), slope(hi)));
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) < v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// ModelSpec

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::quadratic:
      return "quadratic";
    case ModelKind::kernel:
      return "kernel";
    case ModelKind::tabulated:
      return "tabulated";
  }
  return "unknown";
}

ModelSpec ModelSpec::quadratic(RateFunction R) {
  ModelSpec m;
  m.kind_ = ModelKind::quadratic;
  m.R_ = std::make_shared<const RateFunction>(std::move(R));
  m.symmetric_ = true;
  return m;
}

ModelSpec ModelSpec::kernel(RateFunction B, RateFunction D, KernelTransform K) {
  ModelSpec m;
  m.kind_ = ModelKind::kernel;
  m.B_ = std::make_shared<const RateFunction>(std::move(B));
  m.D_ = std::make_shared<const RateFunction>(std::move(D));
  m.K_ = std::make_shared<const KernelTransform>(std::move(K));
  m.symmetric_ = true;
  // exp(p^2/2)-type transforms overflow quickly; keep momenta moderate.
  m.box_.p_radius = 30.0;
  return m;
}

ModelSpec ModelSpec::tabulated(RateFunction R, TabulatedProfile h,
                               double theta_coeff, double c_theta) {
  if (!(theta_coeff > 0.0)) {
    throw ModelError("tabulated model needs an explicit theta coefficient > 0");
  }
  ModelSpec m;
  m.kind_ = ModelKind::tabulated;
  m.R_ = std::make_shared<const RateFunction>(std::move(R));
  m.box_.p_radius = std::max(std::abs(h.p_min()), std::abs(h.p_max()));
  m.box_.v_radius = std::min(std::abs(h.slope(h.p_min())), std::abs(h.slope(h.p_max())));
  const double s0 = h.slope(0.0 < h.p_min() ? h.p_min() : (0.0 > h.p_max() ? h.p_max() : 0.0));
  m.symmetric_ = std::abs(s0) <= 1e-12;
  m.h_ = std::make_shared<const TabulatedProfile>(std::move(h));
  m.theta_coeff_ = theta_coeff;
  m.c_theta_ = c_theta;
  return m;
}

ModelSpec ModelSpec::with_validity(const ValidityBox& box) const {
  ModelSpec m = *this;
  m.box_ = box;
  return m;
}

DerivativeBundle ModelSpec::hamiltonian(double I, double x, double p) const {
  DerivativeBundle b;
  switch (kind_) {
    case ModelKind::quadratic:
      b.value = R_->value(I, x) + p * p;
      b.d_I = R_->d_I(I, x);
      b.d_x = R_->d_x(I, x);
      b.d_pv = 2.0 * p;
      break;
    case ModelKind::kernel: {
      const double k = K_->value(p);
      b.value = B_->value(I, x) * k - D_->value(I, x);
      b.d_I = B_->d_I(I, x) * k - D_->d_I(I, x);
      b.d_x = B_->d_x(I, x) * k - D_->d_x(I, x);
      b.d_pv = B_->value(I, x) * K_->d_p(p);
      break;
    }
    case ModelKind::tabulated:
      b.value = R_->value(I, x) + h_->value(p);
      b.d_I = R_->d_I(I, x);
      b.d_x = R_->d_x(I, x);
      b.d_pv = h_->slope(p);
      break;
  }
  return b;
}

double ModelSpec::hamiltonian_value(double I, double x, double p) const {
  switch (kind_) {
    case ModelKind::quadratic:
      return R_->value(I, x) + p * p;
    case ModelKind::kernel:
      return B_->value(I, x) * K_->value(p) - D_->value(I, x);
    case ModelKind::tabulated:
      return R_->value(I, x) + h_->value(p);
  }
  return 0.0;
}

DerivativeBundle ModelSpec::lagrangian(double I, double x, double v) const {
  DerivativeBundle b;
  switch (kind_) {
    case ModelKind::quadratic:
      b.value = 0.25 * v * v - R_->value(I, x);
      b.d_I = -R_->d_I(I, x);
      b.d_x = -R_->d_x(I, x);
      b.d_pv = 0.5 * v;
      break;
    case ModelKind::kernel: {
      const double B = B_->value(I, x);
      const ConjugatePoint c = kernel_conjugate(*K_, v / B);
      const double k = K_->value(c.momentum);
      b.value = B * c.value + D_->value(I, x);
      // d/dB [B Lc(v/B)] = Lc - w Lc' = -K(p*)
      b.d_I = -B_->d_I(I, x) * k + D_->d_I(I, x);
      b.d_x = -B_->d_x(I, x) * k + D_->d_x(I, x);
      b.d_pv = c.momentum;
      break;
    }
    case ModelKind::tabulated: {
      const double q = h_->slope_inverse(v);
      b.value = q * v - h_->value(q) - R_->value(I, x);
      b.d_I = -R_->d_I(I, x);
      b.d_x = -R_->d_x(I, x);
      b.d_pv = q;
      break;
    }
  }
  return b;
}

double ModelSpec::lagrangian_value(double I, double x, double v) const {
  switch (kind_) {
    case ModelKind::quadratic:
      return 0.25 * v * v - R_->value(I, x);
    case ModelKind::kernel: {
      const double B = B_->value(I, x);
      return B * kernel_conjugate(*K_, v / B).value + D_->value(I, x);
    }
    case ModelKind::tabulated: {
      const double q = h_->slope_inverse(v);
      return q * v - h_->value(q) - R_->value(I, x);
    }
  }
  return 0.0;
}

double ModelSpec::velocity(double I, double x, double p) const {
  switch (kind_) {
    case ModelKind::quadratic:
      return 2.0 * p;
    case ModelKind::kernel:
      return B_->value(I, x) * K_->d_p(p);
    case ModelKind::tabulated:
      return h_->slope(p);
  }
  return 0.0;
}

double ModelSpec::momentum(double I, double x, double v) const {
  switch (kind_) {
    case ModelKind::quadratic:
      return 0.5 * v;
    case ModelKind::kernel:
      return kernel_conjugate(*K_, v / B_->value(I, x)).momentum;
    case ModelKind::tabulated:
      return h_->slope_inverse(v);
  }
  return 0.0;
}

double ModelSpec::hamiltonian_curvature(double I, double x, double p) const {
  switch (kind_) {
    case ModelKind::quadratic:
      return 2.0;
    case ModelKind::kernel:
      return B_->value(I, x) * K_->d_pp(p);
    case ModelKind::tabulated:
      return h_->curvature(p);
  }
  return 0.0;
}

double ModelSpec::lagrangian_curvature(double I, double x, double v) const {
  switch (kind_) {
    case ModelKind::quadratic:
      return 0.5;
    case ModelKind::kernel: {
      const double B = B_->value(I, x);
      return kernel_conjugate(*K_, v / B).curvature / B;
    }
    case ModelKind::tabulated:
      return 1.0 / h_->curvature(h_->slope_inverse(v));
  }
  return 0.0;
}

double ModelSpec::hamiltonian_argmin(double I, double x) const {
  if (kind_ != ModelKind::tabulated) return 0.0;
  (void)I;
  (void)x;
  if (h_->slope(h_->p_min()) >= 0.0) return h_->p_min();
  if (h_->slope(h_->p_max()) <= 0.0) return h_->p_max();
  return h_->slope_inverse(0.0);
}

ThetaBound ModelSpec::theta_bound(const AssumptionBox& box) const {
  ThetaBound t;
  switch (kind_) {
    case ModelKind::quadratic: {
      const RateRange r = sample_rate(*R_, box);
      t.theta = [](double s) { return s * s / 8.0; };
      t.c_theta = std::max(0.0, r.hi) + 1e-12;
      break;
    }
    case ModelKind::kernel: {
      const RateRange b = sample_rate(*B_, box);
      const RateRange d = sample_rate(*D_, box);
      const double b_max = b.hi;
      auto K = K_;
      t.theta = [K, b_max](double s) {
        return b_max * (1.0 + kernel_conjugate(*K, s / b_max).value);
      };
      t.c_theta = std::max(0.0, b_max - d.lo) + 1e-12;
      break;
    }
    case ModelKind::tabulated: {
      const double c = theta_coeff_;
      t.theta = [c](double s) { return c * s * s; };
      t.c_theta = c_theta_;
      break;
    }
  }
  return t;
}

DxBound ModelSpec::dx_bound(const AssumptionBox& box) const {
  DxBound d;
  switch (kind_) {
    case ModelKind::quadratic: {
      const RateRange r = sample_rate(*R_, box);
      d.beta = 1.0;
      d.alpha = r.abs_dx + std::max(0.0, r.hi) + 1e-12;
      break;
    }
    case ModelKind::kernel: {
      const RateRange b = sample_rate(*B_, box);
      const RateRange dr = sample_rate(*D_, box);
      if (!(b.lo > 0.0)) throw ModelError("kernel model requires B > 0 on the box");
      d.beta = b.abs_dx_over_value + 1e-12;
      d.alpha = b.abs_dx + d.beta * b.hi + d.beta * std::max(0.0, -dr.lo) +
                dr.abs_dx + 1e-12;
      break;
    }
    case ModelKind::tabulated: {
      const RateRange r = sample_rate(*R_, box);
      const double h0 = h_->value(std::clamp(0.0, h_->p_min(), h_->p_max()));
      d.beta = 1.0;
      d.alpha = r.abs_dx + std::max(0.0, r.hi + h0) + 1e-12;
      break;
    }
  }
  return d;
}

const RateFunction& ModelSpec::growth_rate() const {
  if (!R_) throw ModelError("model has no growth rate R (kind " + to_string(kind_) + ")");
  return *R_;
}

const RateFunction& ModelSpec::birth_rate() const {
  if (!B_) throw ModelError("model has no birth rate B");
  return *B_;
}

const RateFunction& ModelSpec::death_rate() const {
  if (!D_) throw ModelError("model has no death rate D");
  return *D_;
}

const KernelTransform& ModelSpec::kernel_transform() const {
  if (!K_) throw ModelError("model has no kernel transform");
  return *K_;
}

DerivativeBundle eval_hamiltonian(const ModelSpec& model, double I, double x,
                                  double p) {
  check_in_box(model.validity(), I, x, p, model.validity().p_radius, "p");
  return model.hamiltonian(I, x, p);
}

DerivativeBundle eval_lagrangian(const ModelSpec& model, double I, double x,
                                 double v) {
  check_in_box(model.validity(), I, x, v, model.validity().v_radius, "v");
  if (model.kind() == ModelKind::kernel) {
    const double B = model.birth_rate().value(I, x);
    if (!(B > 0.0)) {
      throw ModelError(fmt::format("kernel model invalid: B({}, {}) = {} <= 0", I, x, B));
    }
  }
  return model.lagrangian(I, x, v);
}

// ---------------------------------------------------------------------------
// Discrete conjugates

void require_convex(const SampledFunction& f, double tol_convex) {
  const auto& x = f.grid;
  const auto& y = f.values;
  if (x.size() != y.size() || x.size() < 2) {
    throw ConvexityError("sampled function needs >= 2 matching samples");
  }
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double s0 = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    const double s1 = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    const double second = (s1 - s0) * 0.5 * (x[i + 1] - x[i - 1]);
    if (second < -tol_convex) {
      throw ConvexityError(fmt::format(
          "samples not convex at triple ({}, {}, {}) = ({}, {}, {}), second "
          "difference {}",
          i - 1, i, i + 1, y[i - 1], y[i], y[i + 1], second));
    }
  }
}

SampledFunction legendre_conjugate(const SampledFunction& f,
                                   std::span<const double> dual_grid,
                                   double tol_convex) {
  require_convex(f, tol_convex);
  SampledFunction out;
  out.grid.assign(dual_grid.begin(), dual_grid.end());
  out.values.resize(dual_grid.size());
  for (std::size_t j = 0; j < dual_grid.size(); ++j) {
    const double v = dual_grid[j];
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
      best = std::max(best, f.grid[i] * v - f.values[i]);
    }
    out.values[j] = best;
  }
  return out;
}

double interpolation_error_bound(const SampledFunction& f) {
  const auto& x = f.grid;
  const auto& y = f.values;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double s0 = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    const double s1 = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    const double curvature = 2.0 * (s1 - s0) / (x[i + 1] - x[i - 1]);
    const double h = std::max(x[i] - x[i - 1], x[i + 1] - x[i]);
    worst = std::max(worst, std::abs(curvature) * h * h / 8.0);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Assumption checks

bool AssumptionReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const AssumptionEntry& e) { return !e.applicable || e.passed; });
}

bool AssumptionReport::hard_failure() const {
  static const char* hard[] = {"H1", "H2", "L1", "L2"};
  for (const auto& e : entries) {
    if (!e.applicable || e.passed) continue;
    for (const char* h : hard) {
      if (e.name == h) return true;
    }
  }
  return false;
}

const AssumptionEntry* AssumptionReport::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

namespace {

// Tracks the minimum margin over samples together with its witness.
struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  double I = 0.0;
  double x = 0.0;
  double pv = 0.0;

  void update(double m, double I_, double x_, double pv_) {
    if (m < margin || std::isnan(m)) {
      margin = m;
      I = I_;
      x = x_;
      pv = pv_;
    }
  }
};

AssumptionEntry make_entry(std::string name, const Worst& w, bool passed,
                           double tol, std::string note) {
  AssumptionEntry e;
  e.name = std::move(name);
  e.passed = passed;
  e.worst = w.margin;
  e.tolerance = tol;
  e.witness_I = w.I;
  e.witness_x = w.x;
  e.witness_pv = w.pv;
  e.note = std::move(note);
  return e;
}

}  // namespace

AssumptionReport check_assumptions(const ModelSpec& model,
                                   const AssumptionBox& box, double tol) {
  AssumptionReport report;
  report.box = box;
  report.I_box_kind = box.nonnegative_I() ? "[0,J]" : "[-J,J]";

  const int n = std::max(box.lattice, 3);
  const auto Is = linspace(box.I_lo, box.I_hi, n);
  const auto xs = linspace(box.x_center - box.x_radius,
                           box.x_center + box.x_radius, n);
  // Odd lattices contain v = 0 and p = 0 exactly.
  const int nv = (n % 2 == 0) ? n + 1 : n;
  const auto vs = linspace(-box.v_radius, box.v_radius, nv);
  const auto ps = linspace(-box.p_radius, box.p_radius, nv);

  const ThetaBound theta = model.theta_bound(box);
  const DxBound dxb = model.dx_bound(box);

  Worst h1;
  Worst h1_growth;
  Worst h2;
  Worst l1;
  Worst l2;
  Worst l3;
  Worst l4;
  Worst l5;

  for (double I : Is) {
    for (double x : xs) {
      for (double p : ps) {
        const DerivativeBundle hb = model.hamiltonian(I, x, p);
        h1.update(model.hamiltonian_curvature(I, x, p), I, x, p);
        h2.update(-hb.d_I, I, x, p);
      }
      // super-linearity: H(p)/|p| increases across the two largest radii
      const double r1 = ps[ps.size() - 2];
      const double r2 = ps.back();
      for (double sgn : {-1.0, 1.0}) {
        const double q1 = model.hamiltonian_value(I, x, sgn * r1) / r1;
        const double q2 = model.hamiltonian_value(I, x, sgn * r2) / r2;
        h1_growth.update(q2 - q1, I, x, sgn * r2);
      }
      const double L0 = model.lagrangian_value(I, x, 0.0);
      for (double v : vs) {
        const DerivativeBundle lb = model.lagrangian(I, x, v);
        l1.update(model.lagrangian_curvature(I, x, v), I, x, v);
        l2.update(lb.d_I, I, x, v);
        l3.update(lb.value - theta.theta(std::abs(v)) + theta.c_theta, I, x, v);
        l4.update(dxb.alpha + dxb.beta * lb.value - std::abs(lb.d_x), I, x, v);
        l5.update(lb.value - L0, I, x, v);
      }
    }
  }

  // Theta(r)/r increasing at the largest radii.
  const double ra = vs[vs.size() - 2];
  const double rb = vs.back();
  const double growth = theta.theta(rb) / rb - theta.theta(ra) / ra;

  const bool h1_ok = h1.margin > 0.0 && h1_growth.margin > 0.0;
  {
    Worst w = h1.margin <= 0.0 ? h1 : h1_growth;
    report.entries.push_back(make_entry(
        "H1", w, h1_ok, 0.0,
        fmt::format("min d_pp H = {}; min growth of H/|p| at radius {} = {}",
                    h1.margin, box.p_radius, h1_growth.margin)));
  }
  report.entries.push_back(make_entry("H2", h2, h2.margin > 0.0, 0.0,
                                      "margin = -max d_I H"));
  report.entries.push_back(make_entry("L1", l1, l1.margin > 0.0, 0.0,
                                      "margin = min d_vv L"));
  report.entries.push_back(make_entry("L2", l2, l2.margin > 0.0, 0.0,
                                      "margin = min d_I L"));
  report.entries.push_back(make_entry(
      "L3", l3, l3.margin >= -tol && growth > 0.0, tol,
      fmt::format("margin = min(L - theta(|v|) + C_theta), C_theta = {}; "
                  "theta(r)/r growth at r = {}: {}",
                  theta.c_theta, rb, growth)));
  report.entries.push_back(make_entry(
      "L4", l4, l4.margin >= -tol, tol,
      fmt::format("margin = min(alpha + beta L - |d_x L|), alpha = {}, beta = {}",
                  dxb.alpha, dxb.beta)));
  report.entries.push_back(make_entry("L5", l5, l5.margin >= -tol, tol,
                                      "margin = min(L(v) - L(0))"));

  if (model.kind() == ModelKind::kernel) {
    const KernelTransform& K = model.kernel_transform();
    Worst dl;
    constexpr double dl_tol = 1e-8;
    for (double v : vs) {
      const ConjugatePoint c = kernel_conjugate(K, v);
      dl.update(2.0 * (1.0 + c.value) - c.momentum * v, 0.0, 0.0, v);
    }
    report.entries.push_back(make_entry(
        "DL", dl, dl.margin >= -dl_tol, dl_tol,
        "margin = min(2 (1 + Lc(v)) - d_v Lc(v) v) for the kernel conjugate"));
  } else {
    AssumptionEntry e;
    e.name = "DL";
    e.applicable = false;
    e.note = "kernel models only";
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace chj
