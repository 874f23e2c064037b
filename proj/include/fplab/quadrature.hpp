#pragma once

// 1-D numerical engine: Gauss-Hermite expectations, heat-flow smoothing of
// exp(-g) densities, relative Fisher information and KL functionals on a
// uniform grid, and the counterexample / gap / perturbed-envelope checks.

#include "fplab/gaussian_core.hpp"
#include "fplab/potentials.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fplab {

/// Probabilists' Gauss-Hermite rule: sum_i w_i f(z_i) ~ E f(Z), Z ~ N(0,1).
class GaussHermiteRule {
 public:
  explicit GaussHermiteRule(int order);

  int order() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  template <typename F>
  double expectation(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(nodes_[i]);
    return sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Uniform grid lo, lo + step, ..., hi with an even number of intervals
/// (composite Simpson). The requested step is shrunk to make that exact.
class EvalGrid {
 public:
  EvalGrid(double lo, double hi, double step);

  /// Symmetric grid [-halfwidth, halfwidth] whose nodes include 0 and every
  /// integer multiple of `step`.
  static EvalGrid symmetric(double halfwidth, double step);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double step() const { return step_; }
  std::size_t size() const { return intervals_ + 1; }
  std::size_t intervals() const { return intervals_; }
  double point(std::size_t i) const { return lo_ + static_cast<double>(i) * step_; }

  /// True when [center - n_sd*scale, center + n_sd*scale] lies inside the grid.
  bool covers(double center, double scale, double n_sd = 8.0) const;

 private:
  double lo_;
  double hi_;
  double step_;
  std::size_t intervals_;
};

struct Integral {
  double value = 0.0;
  double error_estimate = 0.0;  // |S(h) - S(2h)| / 15
};

/// Composite Simpson of samples on the grid.
Integral simpson(std::span<const double> samples, const EvalGrid& grid);

/// log density (possibly unnormalized) and score d/dx log density.
struct DensityHandle {
  std::function<double(double)> log_density;
  std::function<double(double)> score;
  bool normalized = false;
  std::string name;
};

DensityHandle gaussian_handle(double mean, double variance);

/// Density sampled on a grid, normalized to unit mass. Entries with
/// reliable == false carry no usable value (underflowed tails).
struct GridDensity {
  EvalGrid grid;
  std::vector<double> log_density;
  std::vector<double> score;
  std::vector<char> reliable;
};

/// Samples and normalizes a handle. Throws NumericalError when a normalized
/// handle does not integrate to 1 +- 1e-6 or the grid edges carry more than
/// 1e-6 of the mass.
GridDensity discretize(const DensityHandle& handle, const EvalGrid& grid);

struct ConvolvedValue {
  double log_value = 0.0;  // log E_Z exp(-g(x - sqrt(t) Z)), unnormalized
  double score = 0.0;
};

/// Pointwise Gauss-Hermite evaluation of nu_t = exp(-g) * N(0, t) at x.
/// Requires rule order >= 64. Throws NumericalError on overflow.
ConvolvedValue convolved_logdensity(const ScalarPotential& pot, double t, double x,
                                    const GaussHermiteRule& rule);

/// nu_t = exp(-g) * N(0, t) on the whole grid: trapezoid convolution on the
/// grid evaluated by FFT, score as the ratio of smoothed exp(-g) (-g') and
/// smoothed exp(-g). Falls back to the Gauss-Hermite rule for
/// 0 < t < (4 step)^2, where the sampled kernel is under-resolved.
GridDensity heat_smoothed_density(const ScalarPotential& pot, double t, const EvalGrid& grid,
                                  const GaussHermiteRule& rule);

/// int rho (score_rho - score_nu)^2 on the common grid.
Integral fi_functional(const GridDensity& rho, const GridDensity& nu);
Integral fi_functional(const DensityHandle& rho, const DensityHandle& nu, const EvalGrid& grid);

/// int rho log(rho / nu) on the common grid.
Integral kl_functional(const GridDensity& rho, const GridDensity& nu);
Integral kl_functional(const DensityHandle& rho, const DensityHandle& nu, const EvalGrid& grid);

struct TraceRow {
  double t = 0.0;
  double fi = 0.0;
  double kl = 0.0;
  std::optional<double> bound;  // envelope factor: fi(t) <= bound * fi(0)
};

class ChannelTrace {
 public:
  /// Throws DomainError unless t increases strictly and fi, kl >= -1e-9.
  void add_row(TraceRow row);

  const std::vector<TraceRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }

  /// CSV with header `t,fi,kl,bound`, 17 significant digits; an absent bound
  /// is written as an empty field. `comment`, when non-empty, goes first as
  /// a `# ...` line.
  void write_csv(std::ostream& out, const std::string& comment = {}) const;

 private:
  std::vector<TraceRow> rows_;
};

struct QuadratureSettings {
  int gh_order = 128;
  double step = 1e-3;
  double min_halfwidth = 20.0;
  double tail_sd = 8.5;  // grid half-width >= tail_sd * sqrt(1 + t)
};

/// 0 followed by `count` geometric points from t_min to t_max.
std::vector<double> geometric_times(double t_min, double t_max, int count);
std::vector<double> default_counterexample_times();

/// Evaluation grid for rho_t = N(0, 1 + t) and nu_t at time t.
EvalGrid counterexample_grid(double t, const QuadratureSettings& settings = {});

/// FI and KL of rho_t = N(0, 1+t) against nu_t = nu_0 * N(0, t) where
/// nu_0 is proportional to exp(-g) for the counterexample potential.
ChannelTrace counterexample_trace(double m_big, double halfwidth, std::span<const double> times,
                                  const QuadratureSettings& settings = {});

/// Same trace for arbitrary rho_0 = N(mean, var) and nu_0 = exp(-pot).
ChannelTrace heat_trace(const ScalarPotential& pot, double rho_mean, double rho_var,
                        std::span<const double> times, const QuadratureSettings& settings = {});

/// d/dt FI(rho_t || nu_t) at t = 0 for rho_0 = N(0,1) and the counterexample
/// nu_0, from exact truncated-Gaussian moments.
double counterexample_initial_slope(double m_big, double halfwidth);

/// Counterexample trace with bound = perturbed heat-flow envelope (alpha = 1,
/// lip = (M+1) L). Throws CertificateError when fi(t) > bound fi(0) + 1e-6.
ChannelTrace perturbed_bound_check(double m_big, double halfwidth,
                                   std::span<const double> times,
                                   const QuadratureSettings& settings = {});

struct GapResult {
  double r_inf = 0.0;   // sup log(rho / nu)
  double fi = 0.0;      // FI(rho || nu) = E_rho (g')^2
  double log_mass = 0.0;  // log E_nu exp(-g)
};

/// rho proportional to N(0,1) exp(-g): R_inf and FI by piecewise Simpson
/// between the breakpoints of g (which must lie inside the grid).
GapResult perturbation_gap(const ScalarPotential& g, const EvalGrid& grid);

/// perturbation_gap for the spike construction; throws CertificateError when
/// r_inf > eps + 1e-6 or fi < fi_floor - 1e-6, DomainError when the grid
/// does not cover [-a-8, a+8].
GapResult gap_check(const SpikeSpec& spec, const EvalGrid& grid);

/// Closed-form FI/KL along OU for Gaussian inputs. When `alpha` is given
/// (q0 declared alpha-SLC) the bound column carries the OU envelope factor.
ChannelTrace ou_trace_gaussian(const IsoGaussian& p0, const IsoGaussian& q0, double gamma,
                               std::span<const double> times,
                               std::optional<double> alpha = std::nullopt);

}  // namespace fplab
