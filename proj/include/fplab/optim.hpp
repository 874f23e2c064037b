#pragma once

// Gradient flow and the proximal gradient (implicit Euler) iteration on
// strongly convex potentials, with squared-gradient-norm traces.

#include "fplab/potentials.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fplab {

/// argmin_z f(z) + |z - x|^2 / (2 eta). Quadratics are solved in closed
/// form; otherwise gradient descent on the composite until the implicit
/// residual |z - (x - eta grad f(z))| <= 1e-9 (1 + |x|).
Vector prox_grad_step(const SmoothPotential& f, const Vector& x, double eta);

struct ProxGradTrace {
  std::vector<Vector> iterates;
  std::vector<double> grad_sq_norms;
  double eta = 0.0;
  double alpha = 0.0;

  /// max_k grad_sq_norms[k] - grad_sq_norms[0] (1 + alpha eta)^(-2k).
  double envelope_excess() const;
  void write_csv(std::ostream& out, const std::string& comment = {}) const;
};

ProxGradTrace prox_grad_run(const SmoothPotential& f, const Vector& x0, double eta,
                            std::int64_t k_max);

struct FlowTrace {
  std::vector<double> times;
  std::vector<double> grad_sq_norms;
  Vector x_final;
  double alpha = 0.0;

  /// max_t grad_sq_norms(t) / (e^(-2 alpha t) grad_sq_norms(0)) - 1, or 0
  /// when the start is stationary.
  double envelope_excess() const;
  void write_csv(std::ostream& out, const std::string& comment = {}) const;
};

/// Classical RK4 for x' = -grad f(x) with steps of at most dt; the exact
/// exponential map when f is marked quadratic. Requires dt <= 0.1 / L.
FlowTrace gradient_flow(const SmoothPotential& f, const Vector& x0, double t_end, double dt);

}  // namespace fplab
