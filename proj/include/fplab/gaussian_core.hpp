#pragma once

// Closed-form arithmetic for isotropic Gaussians N(m, s I): divergences,
// exact channel maps (heat, Ornstein-Uhlenbeck, proximal forward step),
// contraction envelopes for relative Fisher information, and time-derivative
// identities along Fokker-Planck channels.

#include <Eigen/Core>

#include <cstdint>

namespace fplab {

using Vector = Eigen::VectorXd;

class IsoGaussian {
 public:
  /// Throws DomainError unless variance > 0, mean is finite and non-empty.
  IsoGaussian(Vector mean, double variance);

  /// N(0, variance I) in `dim` dimensions.
  static IsoGaussian centered(Eigen::Index dim, double variance);

  const Vector& mean() const { return mean_; }
  double variance() const { return variance_; }
  double precision() const { return 1.0 / variance_; }
  Eigen::Index dim() const { return mean_.size(); }

  friend bool operator==(const IsoGaussian& a, const IsoGaussian& b) {
    return a.variance_ == b.variance_ && a.mean_ == b.mean_;
  }

 private:
  Vector mean_;
  double variance_;
};

/// Fokker-Planck channel acting on Gaussians.
class Channel {
 public:
  enum class Kind { kHeat, kOrnsteinUhlenbeck, kProximalForward };

  static Channel heat() { return Channel(Kind::kHeat, 0.0); }
  /// dX = -gamma X dt + sqrt(2) dW, stationary law N(0, I/gamma).
  static Channel ornstein_uhlenbeck(double gamma);
  /// Forward step of the Proximal Sampler: convolution with N(0, eta I).
  static Channel proximal_forward(double eta);

  Kind kind() const { return kind_; }
  /// gamma for OU, eta for the proximal forward step, 0 for heat.
  double parameter() const { return parameter_; }

  /// Diffusion coefficient c in d_t rho = -div(rho b) + (c/2) Laplacian rho.
  double diffusion() const;

 private:
  Channel(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}

  Kind kind_;
  double parameter_;
};

/// Multiplicative factor f(t) with FI(t) <= f(t) FI(0) along a channel.
class BoundEnvelope {
 public:
  enum class Kind {
    kHeatSlc,              // (1 + alpha t)^-2
    kHeatSlcPoincare,      // (1 + beta t)^-1 (1 + alpha t)^-2
    kHeatPerturbed,        // log-Lipschitz perturbation of an alpha-SLC target
    kOuSlc,                // OU, alpha-SLC second input
    kOuSlcPoincare,        // OU, symmetric inputs with beta-Poincare first input
    kProximalRate,         // (1 + alpha eta)^-2k, argument is k
  };

  static BoundEnvelope heat_slc(double alpha);
  static BoundEnvelope heat_slc_poincare(double alpha, double beta);
  static BoundEnvelope heat_perturbed(double alpha, double lipschitz);
  static BoundEnvelope ou_slc(double alpha, double gamma);
  static BoundEnvelope ou_slc_poincare(double alpha, double beta, double gamma);
  static BoundEnvelope proximal_rate(double alpha, double eta);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  double eta() const { return eta_; }
  double lipschitz() const { return lipschitz_; }

 private:
  explicit BoundEnvelope(Kind kind) : kind_(kind) {}

  Kind kind_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double gamma_ = 0.0;
  double eta_ = 0.0;
  double lipschitz_ = 0.0;
};

/// KL(p || q). Throws DomainError on dimension mismatch.
double kl_iso_gaussian(const IsoGaussian& p, const IsoGaussian& q);

/// Relative Fisher information E_p |grad log(p/q)|^2
///   = |m_p - m_q|^2 / s_q^2 + d (s_p - s_q)^2 / (s_p s_q^2).
double fi_iso_gaussian(const IsoGaussian& p, const IsoGaussian& q);

/// Law after running the channel for time t >= 0. ProximalForward ignores t.
IsoGaussian channel_map(const IsoGaussian& p, const Channel& channel, double t);

/// One Proximal Sampler iteration (forward + exact RGO backward step) for the
/// target N(0, I/alpha).
IsoGaussian proximal_step_gaussian(const IsoGaussian& p, double alpha, double eta);

/// Envelope factor at time t (or iteration count k for kProximalRate).
double bound_envelope_eval(const BoundEnvelope& envelope, double t_or_k);

/// d/dt FI(p_t || q_t) at the current state for heat or OU channels.
/// Throws DomainError for the proximal forward channel.
double fi_time_derivative_gaussian(const IsoGaussian& p, const IsoGaussian& q,
                                   const Channel& channel);

/// d/dt KL(p_t || q_t) = -(c/2) FI(p_t || q_t).
double kl_time_derivative_gaussian(const IsoGaussian& p, const IsoGaussian& q,
                                   const Channel& channel);

/// Smallest integer k >= (dL/alpha) log(dL/eps); 0 when dL <= eps.
std::int64_t iteration_count(std::int64_t dim, double smoothness, double alpha, double eps);

}  // namespace fplab
