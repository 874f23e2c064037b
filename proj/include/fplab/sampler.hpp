#pragma once

// Proximal Sampler for targets exp(-g): Gaussian forward step, rejection
// sampling restricted Gaussian oracle for the backward step, a seeded chain
// driver and moment statistics with batch-means standard errors.

#include "fplab/gaussian_core.hpp"
#include "fplab/potentials.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace fplab {

/// mt19937_64 seeded from (seed, stream) through SplitMix64, so distinct
/// streams of one seed give unrelated sequences.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }
  Vector normal_vector(Eigen::Index dim);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

struct SamplerConfig {
  double eta = 0.0;
  std::int64_t iters = 0;
  std::uint64_t seed = 0;
  double rgo_tol_scale = 1e-10;     // inner tolerance = scale * (1 + |y|)
  std::int64_t rgo_max_trials = 0;  // 0: 100 * ceil(kappa^(d/2))
  std::int64_t burn_in = -1;        // -1: iters / 4
  std::int64_t block_size = 0;      // 0: (iters - burn_in) / 50, at least 1
  bool record_samples = false;
};

/// (1 + eta L) / (1 - eta L).
double rgo_kappa(double eta, double smoothness);

/// kappa^(d/2), the expected number of proposals per RGO call on a
/// quadratic of curvature `smoothness`.
double rgo_expected_trials(Eigen::Index dim, double eta, double smoothness);

/// Fills in defaults and checks eta L < 1, the trial cap, burn-in and
/// block size against the target. Throws DomainError.
SamplerConfig resolve_config(const SamplerConfig& cfg, const SmoothPotential& g);

/// x + sqrt(eta) z.
Vector forward_step(const Vector& x, double eta, Rng& rng);

struct RgoDraw {
  Vector x;
  std::int64_t trials = 0;
};

/// Exact draw from the density proportional to exp(-g(x) - |x - y|^2/(2 eta))
/// by rejection from N(x*, eta/(1 - eta L) I). Throws NumericalError when the
/// trial cap is hit and CertificateError when an acceptance exponent is
/// positive (declared constants are wrong).
RgoDraw rgo_sample(const SmoothPotential& g, const Vector& y, double eta,
                   const SamplerConfig& cfg, Rng& rng);

/// Per-coordinate first and second moments with Neumaier-compensated sums
/// taken about a fixed shift.
class MomentAccumulator {
 public:
  void add(const Vector& x);
  void merge(const MomentAccumulator& other);

  std::int64_t count() const { return count_; }
  Eigen::Index dim() const { return shift_.size(); }
  Vector mean() const;
  /// Population variance (divides by count).
  Vector variance() const;
  /// Mean of (x - center)^2 per coordinate.
  Vector centered_second_moment(const Vector& center) const;

 private:
  Vector sum() const { return sum_ + sum_c_; }
  Vector sum_sq() const { return sum_sq_ + sum_sq_c_; }
  void rebase(const Vector& new_shift);

  std::int64_t count_ = 0;
  Vector shift_;
  Vector sum_, sum_c_;
  Vector sum_sq_, sum_sq_c_;
};

struct SamplerBlock {
  std::int64_t last_iteration = 0;
  std::int64_t trials = 0;
  MomentAccumulator moments;
};

struct SamplerRun {
  std::vector<std::int64_t> trial_counts;  // one per iteration, burn-in included
  Vector x_final;
  MomentAccumulator moments;               // post burn-in
  std::vector<SamplerBlock> blocks;        // consecutive post burn-in batches
  std::vector<Vector> samples;             // post burn-in, when recorded

  double mean_trials() const;
  /// Standard error of mean_trials (iid proposals per iteration).
  double trials_stderr() const;

  Vector mean() const { return moments.mean(); }
  Vector variance() const { return moments.variance(); }
  /// Batch-means standard errors; need at least two blocks.
  Vector mean_stderr() const;
  Vector variance_stderr() const;

  /// Concatenates disjoint chains; associative.
  static SamplerRun merge(const SamplerRun& a, const SamplerRun& b);
};

/// cfg.iters alternations of forward_step and rgo_sample from x0, using
/// stream `stream` of cfg.seed.
SamplerRun run_chain(const SmoothPotential& g, const Vector& x0, const SamplerConfig& cfg,
                     std::uint64_t stream = 0);

/// Independent chains on streams 0..chains-1, run on the worker pool and
/// merged in stream order.
SamplerRun run_chains(const SmoothPotential& g, const Vector& x0, const SamplerConfig& cfg,
                      int chains);

struct FiCertificate {
  double fi = 0.0;
  double bound = 0.0;  // fi_0 / (1 + alpha eta)^(2k)
};

/// Closed-form FI of the Gaussian chain after k steps against N(0, I/alpha)
/// together with the contraction envelope.
FiCertificate fi_certificate_gaussian(const SamplerConfig& cfg, double alpha,
                                      const IsoGaussian& p0, std::int64_t k);

}  // namespace fplab
