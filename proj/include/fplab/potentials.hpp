#pragma once

// Potential functions: d-dimensional smooth strongly convex targets for the
// sampler and the optimizer, and 1-D potentials used by the quadrature
// experiments (the non-log-concave counterexample and the periodic spike).

#include "fplab/gaussian_core.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fplab {

/// g : R^d -> R with declared constants alpha I <= Hessian <= smoothness I.
/// The constants are declared, not certified; see check_declared_constants.
class SmoothPotential {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  SmoothPotential(Eigen::Index dim, ValueFn value, GradientFn gradient, double alpha,
                  double smoothness, std::string description = {});

  Eigen::Index dim() const { return dim_; }
  double alpha() const { return alpha_; }
  double smoothness() const { return smoothness_; }
  const std::string& description() const { return description_; }

  double value(const Vector& x) const { return value_(x); }
  Vector gradient(const Vector& x) const { return gradient_(x); }

  /// Set when value(x) = alpha |x - c|^2 / 2; enables closed-form shortcuts.
  const std::optional<Vector>& quadratic_center() const { return quadratic_center_; }
  SmoothPotential& mark_quadratic(Vector center);

 private:
  Eigen::Index dim_;
  ValueFn value_;
  GradientFn gradient_;
  double alpha_;
  double smoothness_;
  std::string description_;
  std::optional<Vector> quadratic_center_;
};

/// 1-D potential with first and second derivatives. At a breakpoint the
/// derivative functions return the left limit.
struct ScalarPotential {
  std::function<double(double)> value;
  std::function<double(double)> deriv1;
  std::function<double(double)> deriv2;
  double convexity_floor = 0.0;
  std::string description;
  /// Points where deriv1 or deriv2 is discontinuous, sorted.
  std::vector<double> breakpoints;
};

/// Spike construction parameters (see spike_spec).
struct SpikeSpec {
  double eps = 0.0;       // R_inf budget
  double fi_floor = 0.0;  // requested lower bound on FI
  double a = 0.0;         // N(0,1)([-a, a]) == eps
  double m_big = 0.0;     // max(1/a, sqrt(e fi_floor / eps))
  std::int64_t k_count = 0;
  double width = 0.0;     // a / (2K + 1)
};

SmoothPotential quadratic_potential(Eigen::Index dim, double alpha, const Vector& center);

/// sum_i x_i^4/4 + x_i^2/2. Globally 1-strongly convex; the smoothness
/// 1 + 3 r^2 is valid on the box |x_i| <= r.
SmoothPotential quartic_potential(Eigen::Index dim, double box_radius);

/// Piecewise potential: -M x^2/2 on |x| <= L, continued by unit-curvature
/// quadratics with matching value and slope outside. Requires M, L >= 2.
ScalarPotential counterexample_potential(double m_big, double halfwidth);

/// g(x) = x^2 / (2 variance).
ScalarPotential gaussian_scalar_potential(double variance);

SpikeSpec spike_spec(double eps, double fi_floor);

/// Triangle wave of height 1 and period 2*width on [-a, a], zero outside.
ScalarPotential spike_potential(const SpikeSpec& spec);

struct MinimizeResult {
  Vector x;
  std::int64_t iterations = 0;
};

/// Gradient descent with step 1/smoothness until |grad| <= tol. Throws
/// NumericalError when the iteration cap
/// ceil((smoothness/alpha) log(|grad(x0)|/tol)) + 10 is exceeded.
MinimizeResult minimize(const SmoothPotential& p, const Vector& x0, double tol);

struct ConstantsReport {
  double max_gradient_rel_error = 0.0;
  double min_curvature_ratio = 0.0;  // min <grad(x)-grad(y), x-y> / |x-y|^2
  double max_curvature_ratio = 0.0;
  bool ok = false;
};

/// Randomized spot check of the gradient (central differences) and of the
/// declared alpha/smoothness on pairs drawn from N(center, scale^2 I).
ConstantsReport check_declared_constants(const SmoothPotential& p, std::mt19937_64& rng,
                                         int samples, double scale = 1.0,
                                         const Vector* center = nullptr);

}  // namespace fplab
