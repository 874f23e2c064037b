#include "fplab/quadrature.hpp"

#include "fft_convolver.hpp"
#include "fplab/error.hpp"
#include "fplab/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fplab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

void require_same_grid(const GridDensity& a, const GridDensity& b) {
  if (a.grid.lo() != b.grid.lo() || a.grid.step() != b.grid.step() ||
      a.grid.size() != b.grid.size()) {
    throw DomainError("densities live on different grids");
  }
}

// Normalizes log_density in place over the reliable entries and checks that
// the grid edges carry no appreciable mass.
void normalize(GridDensity& d, const std::string& name) {
  double top = kNegInf;
  for (std::size_t i = 0; i < d.log_density.size(); ++i) {
    if (d.reliable[i]) top = std::max(top, d.log_density[i]);
  }
  if (!std::isfinite(top)) throw NumericalError(name + ": density has no finite values");
  std::vector<double> shifted(d.log_density.size(), 0.0);
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    if (d.reliable[i]) shifted[i] = std::exp(d.log_density[i] - top);
  }
  const double mass = simpson(shifted, d.grid).value;
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw NumericalError(name + ": normalization failed");
  }
  const double log_norm = top + std::log(mass);
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    if (d.reliable[i]) {
      d.log_density[i] -= log_norm;
    } else {
      d.log_density[i] = kNegInf;
    }
  }
  const double edge = std::max(std::exp(d.log_density.front()), std::exp(d.log_density.back()));
  if (edge > 1e-6) {
    throw NumericalError(name + ": grid [" + std::to_string(d.grid.lo()) + ", " +
                         std::to_string(d.grid.hi()) + "] truncates the density (edge value " +
                         std::to_string(edge) + ")");
  }
}

// rho mass sitting where nu is unusable must be negligible.
void check_support(const GridDensity& rho, const GridDensity& nu) {
  double lost = 0.0;
  for (std::size_t i = 0; i < rho.grid.size(); ++i) {
    if (rho.reliable[i] && !nu.reliable[i]) lost += std::exp(rho.log_density[i]);
  }
  lost *= rho.grid.step();
  if (lost > 1e-12) {
    throw NumericalError("nu underflows on a region carrying rho mass " + std::to_string(lost));
  }
}

GridDensity empty_density(const EvalGrid& grid) {
  return GridDensity{grid, std::vector<double>(grid.size(), kNegInf),
                     std::vector<double>(grid.size(), 0.0), std::vector<char>(grid.size(), 0)};
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

EvalGrid trace_grid(double t, double reach, double variance, const QuadratureSettings& s) {
  const double halfwidth =
      std::max(s.min_halfwidth, reach + s.tail_sd * std::sqrt(variance + t));
  return EvalGrid::symmetric(halfwidth, s.step);
}

ChannelTrace trace_against(const ScalarPotential& pot, double rho_mean, double rho_var,
                           std::span<const double> times, const QuadratureSettings& settings,
                           double nu_reach) {
  const GaussHermiteRule rule(settings.gh_order);
  std::vector<TraceRow> rows(times.size());
  parallel_for(times.size(), [&](std::size_t k) {
    const double t = times[k];
    const EvalGrid grid =
        trace_grid(t, std::max(std::abs(rho_mean), nu_reach), std::max(rho_var, 1.0), settings);
    const GridDensity rho = discretize(gaussian_handle(rho_mean, rho_var + t), grid);
    const GridDensity nu = heat_smoothed_density(pot, t, grid, rule);
    rows[k] = TraceRow{t, fi_functional(rho, nu).value, kl_functional(rho, nu).value, {}};
  });
  ChannelTrace trace;
  for (const auto& r : rows) trace.add_row(r);
  return trace;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gauss-Hermite rule: Golub-Welsch eigenvalues, one Newton polish on the
// orthonormal recurrence, Christoffel weights 1 / sum_k p_k(x)^2.

GaussHermiteRule::GaussHermiteRule(int order) {
  if (order < 1 || order > 600) throw DomainError("Gauss-Hermite order must be in [1, 600]");
  const auto n = static_cast<Eigen::Index>(order);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index k = 0; k + 1 < n; ++k) sub[k] = std::sqrt(static_cast<double>(k + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Gauss-Hermite eigen solve failed");

  nodes_.resize(static_cast<std::size_t>(order));
  weights_.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    double x = solver.eigenvalues()[i];
    double inv_weight = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      double p_prev = 0.0;
      double p = 1.0;
      inv_weight = 1.0;
      for (int k = 0; k < order; ++k) {
        const double p_next = (x * p - std::sqrt(static_cast<double>(k)) * p_prev) /
                              std::sqrt(static_cast<double>(k + 1));
        p_prev = p;
        p = p_next;
        if (k + 1 < order) inv_weight += p * p;
      }
      // p = p_n, p_prev = p_{n-1}; p_n' = sqrt(n) p_{n-1}
      if (pass == 0 && p_prev != 0.0) x -= p / (std::sqrt(static_cast<double>(order)) * p_prev);
    }
    nodes_[static_cast<std::size_t>(i)] = x;
    weights_[static_cast<std::size_t>(i)] = 1.0 / inv_weight;
  }
  // exact symmetry
  for (int i = 0; i < order / 2; ++i) {
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(order - 1 - i);
    const double node = 0.5 * (nodes_[hi] - nodes_[lo]);
    const double w = 0.5 * (weights_[hi] + weights_[lo]);
    nodes_[lo] = -node;
    nodes_[hi] = node;
    weights_[lo] = weights_[hi] = w;
  }
  if (order % 2 == 1) nodes_[static_cast<std::size_t>(order / 2)] = 0.0;
}

// ---------------------------------------------------------------------------

EvalGrid::EvalGrid(double lo, double hi, double step) : lo_(lo), hi_(hi), step_(step) {
  if (!(hi > lo) || !(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("EvalGrid needs lo < hi and step > 0");
  }
  auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step - 1e-9));
  n = (n + 3) / 4 * 4;
  if (n < 200) throw DomainError("EvalGrid needs at least 200 intervals");
  intervals_ = n;
  step_ = (hi - lo) / static_cast<double>(n);
}

EvalGrid EvalGrid::symmetric(double halfwidth, double step) {
  if (!(halfwidth > 0.0) || !(step > 0.0)) throw DomainError("EvalGrid::symmetric: bad input");
  auto n = static_cast<std::size_t>(std::ceil(halfwidth / step - 1e-9));
  n += n % 2;
  const double edge = static_cast<double>(n) * step;
  EvalGrid g(-edge, edge, step);
  g.step_ = step;
  g.intervals_ = 2 * n;
  return g;
}

bool EvalGrid::covers(double center, double scale, double n_sd) const {
  return center - n_sd * scale >= lo_ && center + n_sd * scale <= hi_;
}

Integral simpson(std::span<const double> f, const EvalGrid& grid) {
  if (f.size() != grid.size()) throw DomainError("simpson: sample count != grid size");
  const std::size_t n = grid.intervals();
  const double h = grid.step();
  double fine = f[0] + f[n];
  for (std::size_t i = 1; i < n; ++i) fine += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
  fine *= h / 3.0;
  double coarse = f[0] + f[n];
  for (std::size_t i = 2; i < n; i += 2) coarse += ((i / 2) % 2 == 1 ? 4.0 : 2.0) * f[i];
  coarse *= 2.0 * h / 3.0;
  return Integral{fine, std::abs(fine - coarse) / 15.0};
}

DensityHandle gaussian_handle(double mean, double variance) {
  if (!(variance > 0.0)) throw DomainError("gaussian_handle: variance must be > 0");
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * variance);
  DensityHandle h;
  h.log_density = [=](double x) { return log_norm - 0.5 * (x - mean) * (x - mean) / variance; };
  h.score = [=](double x) { return -(x - mean) / variance; };
  h.normalized = true;
  h.name = "N(" + std::to_string(mean) + ", " + std::to_string(variance) + ")";
  return h;
}

GridDensity discretize(const DensityHandle& handle, const EvalGrid& grid) {
  GridDensity d = empty_density(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.point(i);
    const double lv = handle.log_density(x);
    if (std::isfinite(lv)) {
      d.log_density[i] = lv;
      d.score[i] = handle.score(x);
      d.reliable[i] = 1;
    }
  }
  const std::string name = handle.name.empty() ? std::string("density") : handle.name;
  if (handle.normalized) {
    std::vector<double> p(grid.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (d.reliable[i]) p[i] = std::exp(d.log_density[i]);
    }
    const double mass = simpson(p, grid).value;
    if (std::abs(mass - 1.0) > 1e-6) {
      throw NumericalError(name + " integrates to " + std::to_string(mass) + " on the grid");
    }
  }
  normalize(d, name);
  return d;
}

ConvolvedValue convolved_logdensity(const ScalarPotential& pot, double t, double x,
                                    const GaussHermiteRule& rule) {
  if (!(t >= 0.0)) throw DomainError("convolved_logdensity: t must be >= 0");
  if (t == 0.0) return {-pot.value(x), -pot.deriv1(x)};
  if (rule.order() < 64) throw DomainError("convolved_logdensity: rule order must be >= 64");
  const double root_t = std::sqrt(t);
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  std::vector<double> expo(nodes.size());
  double shift = kNegInf;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    expo[i] = std::log(weights[i]) - pot.value(x - root_t * nodes[i]);
    shift = std::max(shift, expo[i]);
  }
  if (!std::isfinite(shift)) throw NumericalError("convolved_logdensity: non-finite exponent");
  double den = 0.0;
  double num = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double e = std::exp(expo[i] - shift);
    den += e;
    num += e * -pot.deriv1(x - root_t * nodes[i]);
  }
  if (!(den > 0.0) || !std::isfinite(den) || !std::isfinite(num)) {
    throw NumericalError("convolved_logdensity: overflow after shift");
  }
  return {shift + std::log(den), num / den};
}

GridDensity heat_smoothed_density(const ScalarPotential& pot, double t, const EvalGrid& grid,
                                  const GaussHermiteRule& rule) {
  if (!(t >= 0.0)) throw DomainError("heat_smoothed_density: t must be >= 0");
  GridDensity d = empty_density(grid);
  const std::size_t n = grid.size();
  const double h = grid.step();

  if (t == 0.0 || t < 16.0 * h * h) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = convolved_logdensity(pot, t, grid.point(i), rule);
      if (std::isfinite(v.log_value)) {
        d.log_density[i] = v.log_value;
        d.score[i] = v.score;
        d.reliable[i] = 1;
      }
    }
    normalize(d, pot.description + " at t=" + std::to_string(t));
    return d;
  }

  std::vector<double> neg_g(n);
  double shift = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    neg_g[i] = -pot.value(grid.point(i));
    shift = std::max(shift, neg_g[i]);
  }
  std::vector<double> neg_slope(n);
  std::vector<double> mass(n);
  std::vector<double> flux(n);
  for (std::size_t i = 0; i < n; ++i) {
    neg_slope[i] = -pot.deriv1(grid.point(i));
    mass[i] = std::exp(neg_g[i] - shift);
    flux[i] = mass[i] * neg_slope[i];
  }
  if (std::max(mass.front(), mass.back()) > 1e-14) {
    throw NumericalError("heat_smoothed_density: exp(-g) is not negligible at the grid edge");
  }

  const std::size_t size = next_pow2(2 * n);
  std::vector<double> kernel(size, 0.0);
  const double root_t = std::sqrt(t);
  const double reach = 40.0 * root_t;
  for (std::size_t m = 0; m < n; ++m) {
    const double lag = static_cast<double>(m) * h;
    if (lag > reach) break;
    const double k = h * std::exp(-0.5 * lag * lag / t) / (root_t * std::sqrt(2.0 * std::numbers::pi));
    kernel[m] = k;
    if (m > 0) kernel[size - m] = k;
  }
  detail::FftConvolver conv(size);
  conv.set_kernel(kernel);
  std::vector<double> smooth_mass(n);
  std::vector<double> smooth_flux(n);
  conv.convolve(mass, smooth_mass);
  conv.convolve(flux, smooth_flux);

  const double peak = *std::max_element(smooth_mass.begin(), smooth_mass.end());
  // FFT round-off is ~1e-16 of the peak; values far below it carry no digits.
  const double floor = 1e-13 * peak;
  for (std::size_t i = 0; i < n; ++i) {
    if (smooth_mass[i] > floor) {
      d.log_density[i] = std::log(smooth_mass[i]) + shift;
      d.score[i] = smooth_flux[i] / smooth_mass[i];
      d.reliable[i] = 1;
    }
  }
  // Interior valleys can fall below the FFT round-off; sum those points
  // directly in log space. Tails stay unreliable.
  std::size_t first = n;
  std::size_t last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d.reliable[i]) {
      first = std::min(first, i);
      last = i;
    }
  }
  const double log_kernel_norm = std::log(h / (root_t * std::sqrt(2.0 * std::numbers::pi)));
  const double inv_two_t = h * h / (2.0 * t);
  parallel_for(n, [&](std::size_t i) {
    if (d.reliable[i] || i < first || i > last) return;
    // terms with neg_g[j] - lag^2/(2t) < neg_g[i] - 40 are below double precision
    const auto window = static_cast<std::ptrdiff_t>(
        std::ceil(std::sqrt(2.0 * t * (shift - neg_g[i] + 40.0)) / h));
    const auto c = static_cast<std::ptrdiff_t>(i);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, c - window);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, c + window);
    double top = kNegInf;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      const auto lag = static_cast<double>(c - j);
      top = std::max(top, neg_g[static_cast<std::size_t>(j)] - lag * lag * inv_two_t);
    }
    double m = 0.0;
    double f = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      const auto lag = static_cast<double>(c - j);
      const auto k = static_cast<std::size_t>(j);
      const double w = std::exp(neg_g[k] - lag * lag * inv_two_t - top);
      m += w;
      f += w * neg_slope[k];
    }
    if (m > 0.0 && std::isfinite(top)) {
      d.log_density[i] = top + std::log(m) + log_kernel_norm;
      d.score[i] = f / m;
      d.reliable[i] = 1;
    }
  });
  normalize(d, pot.description + " at t=" + std::to_string(t));
  return d;
}

Integral fi_functional(const GridDensity& rho, const GridDensity& nu) {
  require_same_grid(rho, nu);
  check_support(rho, nu);
  std::vector<double> f(rho.grid.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!rho.reliable[i] || !nu.reliable[i]) continue;
    const double w = std::exp(rho.log_density[i]);
    const double diff = rho.score[i] - nu.score[i];
    f[i] = w * diff * diff;
  }
  return simpson(f, rho.grid);
}

Integral fi_functional(const DensityHandle& rho, const DensityHandle& nu, const EvalGrid& grid) {
  return fi_functional(discretize(rho, grid), discretize(nu, grid));
}

Integral kl_functional(const GridDensity& rho, const GridDensity& nu) {
  require_same_grid(rho, nu);
  check_support(rho, nu);
  std::vector<double> f(rho.grid.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!rho.reliable[i] || !nu.reliable[i]) continue;
    const double w = std::exp(rho.log_density[i]);
    f[i] = w * (rho.log_density[i] - nu.log_density[i]);
  }
  return simpson(f, rho.grid);
}

Integral kl_functional(const DensityHandle& rho, const DensityHandle& nu, const EvalGrid& grid) {
  return kl_functional(discretize(rho, grid), discretize(nu, grid));
}

// ---------------------------------------------------------------------------

void ChannelTrace::add_row(TraceRow row) {
  if (!rows_.empty() && !(row.t > rows_.back().t)) {
    throw DomainError("ChannelTrace: t must increase strictly");
  }
  if (!(row.t >= 0.0)) throw DomainError("ChannelTrace: t must be >= 0");
  if (!(row.fi >= -1e-9) || !(row.kl >= -1e-9)) {
    std::ostringstream msg;
    msg << "ChannelTrace: negative divergence at t=" << row.t << " (fi=" << row.fi
        << ", kl=" << row.kl << ")";
    throw DomainError(msg.str());
  }
  rows_.push_back(row);
}

void ChannelTrace::write_csv(std::ostream& out, const std::string& comment) const {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "t,fi,kl,bound\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : rows_) {
    out << r.t << ',' << r.fi << ',' << r.kl << ',';
    if (r.bound) out << *r.bound;
    out << '\n';
  }
  out.precision(old_precision);
}

std::vector<double> geometric_times(double t_min, double t_max, int count) {
  if (!(t_min > 0.0) || !(t_max > t_min) || count < 2) {
    throw DomainError("geometric_times needs 0 < t_min < t_max and count >= 2");
  }
  std::vector<double> times{0.0};
  const double ratio = std::log(t_max / t_min) / (count - 1);
  for (int i = 0; i < count; ++i) times.push_back(t_min * std::exp(ratio * i));
  times.back() = t_max;
  return times;
}

std::vector<double> default_counterexample_times() { return geometric_times(1e-3, 50.0, 60); }

EvalGrid counterexample_grid(double t, const QuadratureSettings& settings) {
  return trace_grid(t, 0.0, 1.0, settings);
}

ChannelTrace heat_trace(const ScalarPotential& pot, double rho_mean, double rho_var,
                        std::span<const double> times, const QuadratureSettings& settings) {
  return trace_against(pot, rho_mean, rho_var, times, settings, 0.0);
}

ChannelTrace counterexample_trace(double m_big, double halfwidth, std::span<const double> times,
                                  const QuadratureSettings& settings) {
  if (times.empty() || times.front() != 0.0) {
    throw DomainError("counterexample_trace: time grid must start at 0");
  }
  const ScalarPotential pot = counterexample_potential(m_big, halfwidth);
  // exp(-g) concentrates around +-(M+1)L with unit variance.
  return trace_against(pot, 0.0, 1.0, times, settings, (m_big + 1.0) * halfwidth);
}

double counterexample_initial_slope(double m_big, double halfwidth) {
  if (!(m_big >= 2.0) || !(halfwidth >= 2.0)) {
    throw DomainError("counterexample_initial_slope needs M >= 2 and L >= 2");
  }
  const double M = m_big;
  const double L = halfwidth;
  const double inside = 2.0 * normal_cdf(L) - 1.0;                 // P(|X| <= L)
  const double second_inside = inside - 2.0 * L * normal_pdf(L);   // E[X^2 1{|X| <= L}]
  const double upper_tail = normal_cdf(-L);                        // P(X > L)
  const double c = (M + 1.0) * (M + 1.0);
  // -E[(g'' - 1)^2] - 2 E[g'' (g' - X)^2] under N(0,1)
  return c * (-inside + 2.0 * M * second_inside - 4.0 * L * L * upper_tail);
}

ChannelTrace perturbed_bound_check(double m_big, double halfwidth,
                                   std::span<const double> times,
                                   const QuadratureSettings& settings) {
  const ChannelTrace raw = counterexample_trace(m_big, halfwidth, times, settings);
  const auto envelope = BoundEnvelope::heat_perturbed(1.0, (m_big + 1.0) * halfwidth);
  const double fi0 = raw.rows().front().fi;
  ChannelTrace out;
  for (TraceRow row : raw.rows()) {
    const double factor = bound_envelope_eval(envelope, row.t);
    row.bound = factor;
    if (row.fi > factor * fi0 + 1e-6) {
      std::ostringstream msg;
      msg << std::setprecision(17) << "perturbed envelope violated at t=" << row.t
          << ": fi=" << row.fi << " > " << factor << " * " << fi0;
      throw CertificateError(msg.str());
    }
    out.add_row(row);
  }
  return out;
}

GapResult perturbation_gap(const ScalarPotential& g, const EvalGrid& grid) {
  std::vector<double> cuts{grid.lo()};
  for (double b : g.breakpoints) {
    if (b > grid.lo() && b < grid.hi()) cuts.push_back(b);
  }
  cuts.push_back(grid.hi());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // log rho/nu = -g - log Z with Z = E_nu exp(-g).
  double z = 0.0;
  double slope_mass = 0.0;
  double sup_neg_g = kNegInf;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double u = cuts[p];
    const double v = cuts[p + 1];
    auto n = static_cast<std::size_t>(std::ceil((v - u) / grid.step()));
    n = std::max<std::size_t>(n + n % 2, 4);
    const double h = (v - u) / static_cast<double>(n);
    double sz = 0.0;
    double sf = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      double x = u + static_cast<double>(i) * h;
      // one-sided limits from inside the piece
      double xd = x;
      if (i == 0) xd = std::nextafter(u, v);
      if (i == n) xd = std::nextafter(v, u);
      if (i == n) x = v;
      const double neg_g = -g.value(x);
      sup_neg_g = std::max(sup_neg_g, neg_g);
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      const double base = normal_pdf(x) * std::exp(neg_g);
      const double slope = g.deriv1(xd);
      sz += w * base;
      sf += w * base * slope * slope;
    }
    z += sz * h / 3.0;
    slope_mass += sf * h / 3.0;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) sup_neg_g = std::max(sup_neg_g, -g.value(grid.point(i)));
  if (!(z > 0.0)) throw NumericalError("perturbation_gap: zero mass");
  GapResult r;
  r.log_mass = std::log(z);
  r.r_inf = sup_neg_g - r.log_mass;
  r.fi = slope_mass / z;
  return r;
}

GapResult gap_check(const SpikeSpec& spec, const EvalGrid& grid) {
  if (grid.lo() > -spec.a - 8.0 || grid.hi() < spec.a + 8.0) {
    throw DomainError("gap_check: grid must cover [-a-8, a+8]");
  }
  const GapResult r = perturbation_gap(spike_potential(spec), grid);
  if (r.r_inf > spec.eps + 1e-6) {
    throw CertificateError("gap_check: R_inf=" + std::to_string(r.r_inf) + " exceeds eps=" +
                           std::to_string(spec.eps));
  }
  if (r.fi < spec.fi_floor - 1e-6) {
    throw CertificateError("gap_check: FI=" + std::to_string(r.fi) + " below floor " +
                           std::to_string(spec.fi_floor));
  }
  return r;
}

ChannelTrace ou_trace_gaussian(const IsoGaussian& p0, const IsoGaussian& q0, double gamma,
                               std::span<const double> times, std::optional<double> alpha) {
  const Channel ou = Channel::ornstein_uhlenbeck(gamma);
  std::optional<BoundEnvelope> envelope;
  if (alpha) {
    if (q0.variance() > 1.0 / *alpha * (1.0 + 1e-12)) {
      throw DomainError("ou_trace_gaussian: q0 is not alpha-SLC for the declared alpha");
    }
    envelope = BoundEnvelope::ou_slc(*alpha, gamma);
  }
  if (p0.dim() != q0.dim()) throw DomainError("ou_trace_gaussian: dimension mismatch");
  const double d = static_cast<double>(p0.dim());
  const double mean_gap_sq = (p0.mean() - q0.mean()).squaredNorm();
  const double var_gap0 = p0.variance() - q0.variance();
  ChannelTrace trace;
  for (double t : times) {
    // differences decay as e^{-gamma t}, e^{-2 gamma t}; form them directly
    const double sp = channel_map(p0, ou, t).variance();
    const double sq = channel_map(q0, ou, t).variance();
    const double decay = std::exp(-2.0 * gamma * t);
    const double gap = decay * var_gap0;
    const double mean_sq = decay * mean_gap_sq;
    const double r = gap / sq;
    const double x_minus_log1p =
        std::abs(r) < 1e-4 ? r * r * (0.5 - r * (1.0 / 3.0 - r * 0.25)) : r - std::log1p(r);
    TraceRow row{t, mean_sq / (sq * sq) + d * gap * gap / (sp * sq * sq),
                 0.5 * d * x_minus_log1p + mean_sq / (2.0 * sq), {}};
    if (envelope) row.bound = bound_envelope_eval(*envelope, t);
    trace.add_row(row);
  }
  return trace;
}

}  // namespace fplab
