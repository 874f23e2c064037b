#include "fplab/potentials.hpp"

#include "fplab/error.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fplab {

SmoothPotential::SmoothPotential(Eigen::Index dim, ValueFn value, GradientFn gradient,
                                 double alpha, double smoothness, std::string description)
    : dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      alpha_(alpha),
      smoothness_(smoothness),
      description_(std::move(description)) {
  if (dim_ < 1) throw DomainError("potential dimension must be >= 1");
  if (!(alpha_ > 0.0)) throw DomainError("potential alpha must be > 0");
  if (!(alpha_ <= smoothness_) || !std::isfinite(smoothness_)) {
    throw DomainError("potential needs alpha <= smoothness < inf");
  }
  if (!value_ || !gradient_) throw DomainError("potential maps must be callable");
}

SmoothPotential& SmoothPotential::mark_quadratic(Vector center) {
  if (center.size() != dim_) throw DomainError("quadratic center has wrong dimension");
  quadratic_center_ = std::move(center);
  return *this;
}

SmoothPotential quadratic_potential(Eigen::Index dim, double alpha, const Vector& center) {
  if (!(alpha > 0.0)) throw DomainError("quadratic_potential: alpha must be > 0");
  if (center.size() != dim) throw DomainError("quadratic_potential: center dimension");
  SmoothPotential p(
      dim,
      [alpha, center](const Vector& x) { return 0.5 * alpha * (x - center).squaredNorm(); },
      [alpha, center](const Vector& x) -> Vector { return alpha * (x - center); }, alpha,
      alpha, "quadratic");
  p.mark_quadratic(center);
  return p;
}

SmoothPotential quartic_potential(Eigen::Index dim, double box_radius) {
  if (!(box_radius > 0.0)) throw DomainError("quartic_potential: box radius must be > 0");
  return SmoothPotential(
      dim,
      [](const Vector& x) {
        return (x.array().pow(4) / 4.0 + x.array().square() / 2.0).sum();
      },
      [](const Vector& x) -> Vector { return x.array().cube() + x.array(); }, 1.0,
      1.0 + 3.0 * box_radius * box_radius, "quartic");
}

ScalarPotential counterexample_potential(double m_big, double halfwidth) {
  if (!(m_big >= 2.0) || !(halfwidth >= 2.0) || !std::isfinite(m_big) ||
      !std::isfinite(halfwidth)) {
    throw DomainError("counterexample_potential needs M >= 2 and L >= 2");
  }
  const double M = m_big;
  const double L = halfwidth;
  ScalarPotential g;
  g.value = [M, L](double x) {
    if (x > L) return 0.5 * (x - L) * (x - L) - M * L * (x - L) - 0.5 * M * L * L;
    if (x < -L) return 0.5 * (x + L) * (x + L) + M * L * (x + L) - 0.5 * M * L * L;
    return -0.5 * M * x * x;
  };
  g.deriv1 = [M, L](double x) {
    if (x > L) return x - (M + 1.0) * L;
    if (x < -L) return x + (M + 1.0) * L;
    return -M * x;
  };
  g.deriv2 = [M, L](double x) {
    if (x > L || x <= -L) return 1.0;
    return -M;
  };
  g.convexity_floor = -M;
  g.description = "counterexample(M=" + std::to_string(M) + ", L=" + std::to_string(L) + ")";
  g.breakpoints = {-L, L};
  return g;
}

ScalarPotential gaussian_scalar_potential(double variance) {
  if (!(variance > 0.0)) throw DomainError("gaussian_scalar_potential: variance must be > 0");
  ScalarPotential g;
  g.value = [variance](double x) { return 0.5 * x * x / variance; };
  g.deriv1 = [variance](double x) { return x / variance; };
  g.deriv2 = [variance](double) { return 1.0 / variance; };
  g.convexity_floor = 1.0 / variance;
  g.description = "gaussian(var=" + std::to_string(variance) + ")";
  return g;
}

SpikeSpec spike_spec(double eps, double fi_floor) {
  if (!(eps > 0.0 && eps < 1.0) || !(fi_floor > 1.0) || !std::isfinite(fi_floor)) {
    throw DomainError("spike_spec needs 0 < eps < 1 < fi_floor");
  }
  SpikeSpec s;
  s.eps = eps;
  s.fi_floor = fi_floor;
  // 2 Phi(a) - 1 = erf(a / sqrt 2) = eps
  s.a = std::numbers::sqrt2 * boost::math::erf_inv(eps);
  s.m_big = std::max(1.0 / s.a, std::sqrt(std::numbers::e * fi_floor / eps));
  auto k = static_cast<std::int64_t>(std::ceil((s.a * s.m_big - 1.0) / 2.0));
  k = std::max<std::int64_t>(k, 0);
  while (k > 0 && static_cast<double>(2 * (k - 1) + 1) / s.m_big >= s.a) --k;
  while (static_cast<double>(2 * k + 1) / s.m_big < s.a) ++k;
  s.k_count = k;
  s.width = s.a / static_cast<double>(2 * k + 1);
  return s;
}

ScalarPotential spike_potential(const SpikeSpec& spec) {
  if (!(spec.width > 0.0) || !(spec.a > 0.0)) throw DomainError("spike_potential: bad spec");
  const double eta = spec.width;
  const auto n_half = 2 * spec.k_count + 1;  // a == n_half * eta
  const double a = spec.a;
  // Interval index j with x in ((j-1) eta, j eta]; intervals inside (-a, a]
  // have -2K <= j <= 2K+1. Even j ends at a peak, odd j at a trough.
  auto interval = [eta, n_half](double x) -> std::optional<std::int64_t> {
    const auto j = static_cast<std::int64_t>(std::ceil(x / eta));
    if (j < 1 - n_half || j > n_half) return std::nullopt;
    return j;
  };
  ScalarPotential g;
  g.value = [=](double x) {
    if (std::abs(x) >= a) return 0.0;
    const auto j = interval(x);
    if (!j) return 0.0;
    const double to_end = (static_cast<double>(*j) * eta - x) / eta;
    const double v = (*j % 2 == 0) ? 1.0 - to_end : to_end;
    return std::clamp(v, 0.0, 1.0);
  };
  g.deriv1 = [=](double x) {
    const auto j = interval(x);
    if (!j) return 0.0;
    return (*j % 2 == 0) ? 1.0 / eta : -1.0 / eta;
  };
  g.deriv2 = [](double) { return 0.0; };
  g.convexity_floor = 0.0;
  g.description = "spike(eps=" + std::to_string(spec.eps) +
                  ", fi_floor=" + std::to_string(spec.fi_floor) + ")";
  for (std::int64_t j = -n_half; j <= n_half; ++j) {
    g.breakpoints.push_back(static_cast<double>(j) * eta);
  }
  g.breakpoints.front() = -a;
  g.breakpoints.back() = a;
  return g;
}

MinimizeResult minimize(const SmoothPotential& p, const Vector& x0, double tol) {
  if (!(tol > 0.0)) throw DomainError("minimize: tol must be > 0");
  if (x0.size() != p.dim()) throw DomainError("minimize: start point has wrong dimension");
  MinimizeResult result{x0, 0};
  Vector grad = p.gradient(result.x);
  const double g0 = grad.norm();
  if (g0 <= tol) return result;
  const double step = 1.0 / p.smoothness();
  const auto cap = static_cast<std::int64_t>(
                       std::ceil(p.smoothness() / p.alpha() * std::log(g0 / tol))) +
                   10;
  while (result.iterations < cap) {
    result.x -= step * grad;
    ++result.iterations;
    grad = p.gradient(result.x);
    if (grad.norm() <= tol) return result;
  }
  throw NumericalError("minimize: iteration cap " + std::to_string(cap) +
                       " exceeded; declared alpha/smoothness are inconsistent");
}

ConstantsReport check_declared_constants(const SmoothPotential& p, std::mt19937_64& rng,
                                         int samples, double scale, const Vector* center) {
  std::normal_distribution<double> normal;
  const Vector origin = center ? *center : Vector::Zero(p.dim());
  auto draw = [&] {
    Vector x(p.dim());
    for (auto& v : x) v = normal(rng);
    return Vector(origin + scale * x);
  };
  ConstantsReport report;
  report.min_curvature_ratio = std::numeric_limits<double>::infinity();
  report.max_curvature_ratio = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = draw();
    const Vector y = draw();
    const Vector gx = p.gradient(x);
    Vector fd(p.dim());
    for (Eigen::Index i = 0; i < p.dim(); ++i) {
      const double h = 1e-5 * (1.0 + std::abs(x[i]));
      Vector xp = x;
      Vector xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (p.value(xp) - p.value(xm)) / (2.0 * h);
    }
    report.max_gradient_rel_error = std::max(report.max_gradient_rel_error,
                                             (fd - gx).norm() / std::max(gx.norm(), 1.0));
    const Vector dx = x - y;
    const double dist2 = dx.squaredNorm();
    if (dist2 == 0.0) continue;
    const double ratio = (gx - p.gradient(y)).dot(dx) / dist2;
    report.min_curvature_ratio = std::min(report.min_curvature_ratio, ratio);
    report.max_curvature_ratio = std::max(report.max_curvature_ratio, ratio);
  }
  report.ok = report.max_gradient_rel_error <= 1e-5 &&
              report.min_curvature_ratio >= p.alpha() * (1.0 - 1e-9) &&
              report.max_curvature_ratio <= p.smoothness() * (1.0 + 1e-9);
  return report;
}

}  // namespace fplab
