#include "fplab/optim.hpp"

#include "fplab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace fplab {

Vector prox_grad_step(const SmoothPotential& f, const Vector& x, double eta) {
  if (!(eta > 0.0)) throw DomainError("prox_grad_step: eta must be > 0");
  if (x.size() != f.dim()) throw DomainError("prox_grad_step: dimension mismatch");
  if (const auto& c = f.quadratic_center()) {
    const double ae = f.alpha() * eta;
    return (x + ae * *c) / (1.0 + ae);
  }
  const SmoothPotential composite(
      f.dim(), [&](const Vector& z) { return f.value(z) + (z - x).squaredNorm() / (2.0 * eta); },
      [&](const Vector& z) { return Vector(f.gradient(z) + (z - x) / eta); },
      f.alpha() + 1.0 / eta, f.smoothness() + 1.0 / eta, "prox composite");
  return minimize(composite, x, 1e-9 * (1.0 + x.norm()) / eta).x;
}

ProxGradTrace prox_grad_run(const SmoothPotential& f, const Vector& x0, double eta,
                            std::int64_t k_max) {
  if (!(eta > 0.0)) throw DomainError("prox_grad_run: eta must be > 0");
  if (k_max < 0) throw DomainError("prox_grad_run: k_max must be >= 0");
  ProxGradTrace trace;
  trace.eta = eta;
  trace.alpha = f.alpha();
  Vector x = x0;
  trace.iterates.push_back(x);
  trace.grad_sq_norms.push_back(f.gradient(x).squaredNorm());
  for (std::int64_t k = 0; k < k_max; ++k) {
    x = prox_grad_step(f, x, eta);
    trace.iterates.push_back(x);
    trace.grad_sq_norms.push_back(f.gradient(x).squaredNorm());
  }
  return trace;
}

double ProxGradTrace::envelope_excess() const {
  const double ratio = 1.0 / ((1.0 + alpha * eta) * (1.0 + alpha * eta));
  double factor = 1.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < grad_sq_norms.size(); ++k) {
    worst = std::max(worst, grad_sq_norms[k] - grad_sq_norms.front() * factor);
    factor *= ratio;
  }
  return worst;
}

void ProxGradTrace::write_csv(std::ostream& out, const std::string& comment) const {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "k,grad_sq_norm\n";
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < grad_sq_norms.size(); ++k) out << k << ',' << grad_sq_norms[k] << '\n';
  out.precision(old);
}

FlowTrace gradient_flow(const SmoothPotential& f, const Vector& x0, double t_end, double dt) {
  if (!(t_end >= 0.0) || !(dt > 0.0)) throw DomainError("gradient_flow: need t_end >= 0, dt > 0");
  if (dt > 0.1 / f.smoothness() * (1.0 + 1e-12)) {
    throw DomainError("gradient_flow: dt must be <= 0.1 / L");
  }
  if (x0.size() != f.dim()) throw DomainError("gradient_flow: dimension mismatch");
  FlowTrace trace;
  trace.alpha = f.alpha();
  const auto steps = static_cast<std::int64_t>(std::ceil(t_end / dt - 1e-9));
  const double h = steps > 0 ? t_end / static_cast<double>(steps) : 0.0;
  Vector x = x0;
  trace.times.push_back(0.0);
  trace.grad_sq_norms.push_back(f.gradient(x).squaredNorm());
  const auto& center = f.quadratic_center();
  for (std::int64_t n = 1; n <= steps; ++n) {
    const double t = static_cast<double>(n) * h;
    if (center) {
      x = *center + std::exp(-f.alpha() * t) * (x0 - *center);
    } else {
      const Vector k1 = -f.gradient(x);
      const Vector k2 = -f.gradient(x + 0.5 * h * k1);
      const Vector k3 = -f.gradient(x + 0.5 * h * k2);
      const Vector k4 = -f.gradient(x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    trace.times.push_back(t);
    trace.grad_sq_norms.push_back(f.gradient(x).squaredNorm());
  }
  trace.x_final = x;
  return trace;
}

double FlowTrace::envelope_excess() const {
  const double g0 = grad_sq_norms.front();
  if (g0 == 0.0) {
    return *std::max_element(grad_sq_norms.begin(), grad_sq_norms.end()) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    worst = std::max(worst, grad_sq_norms[i] / (g0 * std::exp(-2.0 * alpha * times[i])) - 1.0);
  }
  return worst;
}

void FlowTrace::write_csv(std::ostream& out, const std::string& comment) const {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "t,grad_sq_norm\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < times.size(); ++i) out << times[i] << ',' << grad_sq_norms[i] << '\n';
  out.precision(old);
}

}  // namespace fplab
