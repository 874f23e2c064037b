#pragma once

// Reference computations used only by the tests. Everything here is built
// on boost adaptive Gauss-Kronrod quadrature and direct formulas, never on
// the library's own quadrature engine.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

inline double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

// Integral over the real line split at the given sorted breakpoints.
inline double integrate_pieces(const std::function<double(double)>& f,
                               const std::vector<double>& cuts) {
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  double lo = -inf;
  for (double c : cuts) {
    total += integrate(f, lo, c);
    lo = c;
  }
  return total + integrate(f, lo, inf);
}

inline double normal_pdf(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// 1-D KL(N(mp, vp) || N(mq, vq)) by quadrature of p log(p/q).
inline double kl_1d(double mp, double vp, double mq, double vq) {
  auto f = [&](double x) {
    const double lp = -0.5 * (x - mp) * (x - mp) / vp - 0.5 * std::log(2 * std::numbers::pi * vp);
    const double lq = -0.5 * (x - mq) * (x - mq) / vq - 0.5 * std::log(2 * std::numbers::pi * vq);
    return std::exp(lp) * (lp - lq);
  };
  const double w = 12.0 * std::sqrt(vp);
  return integrate(f, mp - w, mp + w);
}

// 1-D relative Fisher information by quadrature of p (d/dx log(p/q))^2.
inline double fi_1d(double mp, double vp, double mq, double vq) {
  auto f = [&](double x) {
    const double s = -(x - mp) / vp + (x - mq) / vq;
    return normal_pdf(x, mp, vp) * s * s;
  };
  const double w = 12.0 * std::sqrt(vp);
  return integrate(f, mp - w, mp + w);
}

// Piecewise potential -M x^2/2 on |x| <= L with unit-curvature quadratic
// continuation, written out independently of the library.
struct Counterexample {
  double m;
  double l;

  double center() const { return (m + 1.0) * l; }
  double value(double x) const {
    const double ax = std::abs(x);
    if (ax <= l) return -0.5 * m * x * x;
    const double c = center();
    return 0.5 * (ax - c) * (ax - c) - 0.5 * m * l * l - 0.5 * (l - c) * (l - c);
  }
  double slope(double x) const {
    const double ax = std::abs(x);
    if (ax <= l) return -m * x;
    return (x > 0 ? 1.0 : -1.0) * (ax - center());
  }
  double curvature(double x) const { return std::abs(x) <= l ? -m : 1.0; }
  std::vector<double> cuts() const { return {-center(), -l, l, center()}; }

  // mass and flux of exp(-g) * N(0, t) at x, unnormalized
  std::pair<double, double> smoothed(double x, double t) const {
    std::vector<double> cuts = this->cuts();
    cuts.push_back(x);
    std::sort(cuts.begin(), cuts.end());
    auto kernel = [&](double y) { return std::exp(-value(y)) * normal_pdf(x - y, 0.0, t); };
    const double mass = integrate_pieces(kernel, cuts);
    const double flux = integrate_pieces([&](double y) { return kernel(y) * -slope(y); }, cuts);
    return {mass, flux};
  }
  double total_mass() const {
    return integrate_pieces([&](double y) { return std::exp(-value(y)); }, cuts());
  }

  // FI and KL of N(0, 1 + t) against the smoothed exp(-g), by nested quadrature.
  std::pair<double, double> fi_kl(double t) const {
    const double var = 1.0 + t;
    const double log_z = std::log(total_mass());
    auto log_nu = [&](double x) {
      if (t == 0.0) return -value(x) - log_z;
      return std::log(smoothed(x, t).first) - log_z;
    };
    auto score_nu = [&](double x) {
      if (t == 0.0) return -slope(x);
      const auto [mass, flux] = smoothed(x, t);
      return flux / mass;
    };
    const double w = 11.0 * std::sqrt(var);
    std::vector<double> cuts{-w};
    if (t == 0.0) {
      cuts.push_back(-l);
      cuts.push_back(l);
    }
    cuts.push_back(w);
    double fi = 0.0;
    double kl = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      fi += integrate(
          [&](double x) {
            const double d = -x / var - score_nu(x);
            return normal_pdf(x, 0.0, var) * d * d;
          },
          cuts[i], cuts[i + 1]);
      kl += integrate(
          [&](double x) {
            const double lr = -0.5 * x * x / var - 0.5 * std::log(2 * std::numbers::pi * var);
            return std::exp(lr) * (lr - log_nu(x));
          },
          cuts[i], cuts[i + 1]);
    }
    return {fi, kl};
  }

  // d/dt FI at t = 0 via E_{N(0,1)}[-(g'' - 1)^2 - 2 g'' (g' - x)^2].
  double initial_slope() const {
    auto f = [&](double x) {
      const double h = curvature(x);
      const double r = slope(x) - x;
      return normal_pdf(x, 0.0, 1.0) * (-(h - 1.0) * (h - 1.0) - 2.0 * h * r * r);
    };
    return integrate(f, -12.0, -l) + integrate(f, -l, l) + integrate(f, l, 12.0);
  }
};

// Central finite difference with step h.
inline double derivative(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
