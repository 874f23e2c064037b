#include "fplab/gaussian_core.hpp"

#include "fplab/error.hpp"

#include <cmath>
#include <string>

namespace fplab {

namespace {

void require_same_dim(const IsoGaussian& p, const IsoGaussian& q) {
  if (p.dim() != q.dim()) {
    throw DomainError("dimension mismatch: " + std::to_string(p.dim()) + " vs " +
                      std::to_string(q.dim()));
  }
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(name) + " must be positive and finite");
  }
}

// x - log(1 + x) without cancellation near x = 0.
double x_minus_log1p(double x) {
  if (std::abs(x) < 1e-4) {
    return x * x * (0.5 - x * (1.0 / 3.0 - x * 0.25));
  }
  return x - std::log1p(x);
}

}  // namespace

IsoGaussian::IsoGaussian(Vector mean, double variance)
    : mean_(std::move(mean)), variance_(variance) {
  if (mean_.size() < 1) throw DomainError("IsoGaussian needs dimension >= 1");
  if (!mean_.allFinite()) throw DomainError("IsoGaussian mean must be finite");
  require_positive(variance_, "IsoGaussian variance");
}

IsoGaussian IsoGaussian::centered(Eigen::Index dim, double variance) {
  return IsoGaussian(Vector::Zero(dim), variance);
}

Channel Channel::ornstein_uhlenbeck(double gamma) {
  require_positive(gamma, "OU rate gamma");
  return Channel(Kind::kOrnsteinUhlenbeck, gamma);
}

Channel Channel::proximal_forward(double eta) {
  require_positive(eta, "proximal step eta");
  return Channel(Kind::kProximalForward, eta);
}

double Channel::diffusion() const {
  return kind_ == Kind::kOrnsteinUhlenbeck ? 2.0 : 1.0;
}

BoundEnvelope BoundEnvelope::heat_slc(double alpha) {
  require_positive(alpha, "alpha");
  BoundEnvelope b(Kind::kHeatSlc);
  b.alpha_ = alpha;
  return b;
}

BoundEnvelope BoundEnvelope::heat_slc_poincare(double alpha, double beta) {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  BoundEnvelope b(Kind::kHeatSlcPoincare);
  b.alpha_ = alpha;
  b.beta_ = beta;
  return b;
}

BoundEnvelope BoundEnvelope::heat_perturbed(double alpha, double lipschitz) {
  require_positive(alpha, "alpha");
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) {
    throw DomainError("Lipschitz constant must be finite and >= 0");
  }
  BoundEnvelope b(Kind::kHeatPerturbed);
  b.alpha_ = alpha;
  b.lipschitz_ = lipschitz;
  return b;
}

BoundEnvelope BoundEnvelope::ou_slc(double alpha, double gamma) {
  require_positive(alpha, "alpha");
  require_positive(gamma, "gamma");
  BoundEnvelope b(Kind::kOuSlc);
  b.alpha_ = alpha;
  b.gamma_ = gamma;
  return b;
}

BoundEnvelope BoundEnvelope::ou_slc_poincare(double alpha, double beta, double gamma) {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  require_positive(gamma, "gamma");
  BoundEnvelope b(Kind::kOuSlcPoincare);
  b.alpha_ = alpha;
  b.beta_ = beta;
  b.gamma_ = gamma;
  return b;
}

BoundEnvelope BoundEnvelope::proximal_rate(double alpha, double eta) {
  require_positive(alpha, "alpha");
  require_positive(eta, "eta");
  BoundEnvelope b(Kind::kProximalRate);
  b.alpha_ = alpha;
  b.eta_ = eta;
  return b;
}

double kl_iso_gaussian(const IsoGaussian& p, const IsoGaussian& q) {
  require_same_dim(p, q);
  const double d = static_cast<double>(p.dim());
  const double ratio = p.variance() / q.variance();
  const double mean_term = (p.mean() - q.mean()).squaredNorm() / (2.0 * q.variance());
  return 0.5 * d * x_minus_log1p(ratio - 1.0) + mean_term;
}

double fi_iso_gaussian(const IsoGaussian& p, const IsoGaussian& q) {
  require_same_dim(p, q);
  const double d = static_cast<double>(p.dim());
  const double sq = q.variance();
  const double gap = p.variance() - sq;
  return (p.mean() - q.mean()).squaredNorm() / (sq * sq) +
         d * gap * gap / (p.variance() * sq * sq);
}

IsoGaussian channel_map(const IsoGaussian& p, const Channel& channel, double t) {
  if (!(t >= 0.0)) throw DomainError("channel time must be >= 0");
  switch (channel.kind()) {
    case Channel::Kind::kHeat:
      return IsoGaussian(p.mean(), p.variance() + t);
    case Channel::Kind::kOrnsteinUhlenbeck: {
      const double gamma = channel.parameter();
      const double decay = std::exp(-gamma * t);
      const double spread = -std::expm1(-2.0 * gamma * t) / gamma;
      return IsoGaussian(decay * p.mean(), decay * decay * p.variance() + spread);
    }
    case Channel::Kind::kProximalForward:
      return IsoGaussian(p.mean(), p.variance() + channel.parameter());
  }
  throw DomainError("unknown channel kind");
}

IsoGaussian proximal_step_gaussian(const IsoGaussian& p, double alpha, double eta) {
  require_positive(alpha, "alpha");
  require_positive(eta, "eta");
  const double shrink = 1.0 / (1.0 + alpha * eta);
  const double target_var = 1.0 / alpha;
  return IsoGaussian(shrink * p.mean(),
                     (p.variance() - target_var) * shrink * shrink + target_var);
}

double bound_envelope_eval(const BoundEnvelope& b, double t) {
  if (!(t >= 0.0)) throw DomainError("envelope argument must be >= 0");
  switch (b.kind()) {
    case BoundEnvelope::Kind::kHeatSlc: {
      const double s = 1.0 + b.alpha() * t;
      return 1.0 / (s * s);
    }
    case BoundEnvelope::Kind::kHeatSlcPoincare: {
      const double s = 1.0 + b.alpha() * t;
      return 1.0 / ((1.0 + b.beta() * t) * s * s);
    }
    case BoundEnvelope::Kind::kHeatPerturbed: {
      const double a = b.alpha();
      const double lip = b.lipschitz();
      const double growth = 2.0 * t * lip * lip / (a * t + 1.0) +
                            8.0 * lip * std::sqrt(t) / std::sqrt(a * t + 1.0);
      return std::exp(growth - 2.0 * std::log1p(a * t));
    }
    case BoundEnvelope::Kind::kOuSlc: {
      const double g = b.gamma();
      const double e = std::exp(-2.0 * g * t);
      const double den = b.alpha() + e * (g - b.alpha());
      return g * g * e / (den * den);
    }
    case BoundEnvelope::Kind::kOuSlcPoincare: {
      const double g = b.gamma();
      const double e = std::exp(-2.0 * g * t);
      const double den_a = b.alpha() + e * (g - b.alpha());
      const double den_b = b.beta() + e * (g - b.beta());
      return g * g * g * e * e / (den_b * den_a * den_a);
    }
    case BoundEnvelope::Kind::kProximalRate:
      return std::exp(-2.0 * t * std::log1p(b.alpha() * b.eta()));
  }
  throw DomainError("unknown envelope kind");
}

double fi_time_derivative_gaussian(const IsoGaussian& p, const IsoGaussian& q,
                                   const Channel& channel) {
  require_same_dim(p, q);
  const double d = static_cast<double>(p.dim());
  // Hessian of log(p/q) is (1/s_q - 1/s_p) I.
  const double hess = q.precision() - p.precision();
  const double fi = fi_iso_gaussian(p, q);
  switch (channel.kind()) {
    case Channel::Kind::kHeat:
      return -d * hess * hess - 2.0 * q.precision() * fi;
    case Channel::Kind::kOrnsteinUhlenbeck:
      return -2.0 * d * hess * hess - 2.0 * (2.0 * q.precision() - channel.parameter()) * fi;
    case Channel::Kind::kProximalForward:
      break;
  }
  throw DomainError("time derivative is defined for heat and OU channels only");
}

double kl_time_derivative_gaussian(const IsoGaussian& p, const IsoGaussian& q,
                                   const Channel& channel) {
  if (channel.kind() == Channel::Kind::kProximalForward) {
    throw DomainError("time derivative is defined for heat and OU channels only");
  }
  return -0.5 * channel.diffusion() * fi_iso_gaussian(p, q);
}

std::int64_t iteration_count(std::int64_t dim, double smoothness, double alpha, double eps) {
  if (dim < 1) throw DomainError("dimension must be >= 1");
  require_positive(alpha, "alpha");
  require_positive(eps, "eps");
  if (!(alpha <= smoothness) || !std::isfinite(smoothness)) {
    throw DomainError("need 0 < alpha <= L");
  }
  const double dl = static_cast<double>(dim) * smoothness;
  if (dl <= eps) return 0;
  return static_cast<std::int64_t>(std::ceil(dl / alpha * std::log(dl / eps)));
}

}  // namespace fplab
