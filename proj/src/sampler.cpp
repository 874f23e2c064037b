#include "fplab/sampler.hpp"

#include "fplab/error.hpp"
#include "fplab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fplab {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Neumaier step on vectors.
void compensated_add(Vector& sum, Vector& comp, const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double t = sum[i] + x[i];
    if (std::abs(sum[i]) >= std::abs(x[i])) {
      comp[i] += (sum[i] - t) + x[i];
    } else {
      comp[i] += (x[i] - t) + sum[i];
    }
    sum[i] = t;
  }
}

Vector block_spread(const std::vector<Vector>& values) {
  const auto n = static_cast<double>(values.size());
  Vector avg = Vector::Zero(values.front().size());
  for (const auto& v : values) avg += v;
  avg /= n;
  Vector ss = Vector::Zero(avg.size());
  for (const auto& v : values) ss += (v - avg).cwiseAbs2();
  return (ss / (n - 1.0) / n).cwiseSqrt();
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state))};
  engine_.seed(seq);
}

Vector Rng::normal_vector(Eigen::Index dim) {
  Vector z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z[i] = normal();
  return z;
}

double rgo_kappa(double eta, double smoothness) {
  if (!(eta > 0.0) || !(smoothness > 0.0) || !(eta * smoothness < 1.0)) {
    throw DomainError("rgo_kappa needs eta > 0 and 0 < eta L < 1");
  }
  return (1.0 + eta * smoothness) / (1.0 - eta * smoothness);
}

double rgo_expected_trials(Eigen::Index dim, double eta, double smoothness) {
  return std::pow(rgo_kappa(eta, smoothness), 0.5 * static_cast<double>(dim));
}

SamplerConfig resolve_config(const SamplerConfig& cfg, const SmoothPotential& g) {
  if (!(cfg.eta > 0.0)) throw DomainError("sampler: eta must be > 0");
  if (!(cfg.eta * g.smoothness() < 1.0)) {
    throw DomainError("sampler: eta * L = " + std::to_string(cfg.eta * g.smoothness()) +
                      " must be < 1");
  }
  if (cfg.iters <= 0) throw DomainError("sampler: iters must be positive");
  if (!(cfg.rgo_tol_scale > 0.0)) throw DomainError("sampler: rgo_tol_scale must be > 0");
  SamplerConfig out = cfg;
  const double trials = rgo_expected_trials(g.dim(), cfg.eta, g.smoothness());
  const auto floor_cap = static_cast<std::int64_t>(10.0 * std::ceil(trials));
  if (out.rgo_max_trials == 0) out.rgo_max_trials = 10 * floor_cap;
  if (out.rgo_max_trials < floor_cap) {
    throw DomainError("sampler: rgo_max_trials must be >= " + std::to_string(floor_cap));
  }
  if (out.burn_in < 0) out.burn_in = cfg.iters / 4;
  if (out.burn_in >= cfg.iters) throw DomainError("sampler: burn_in must be < iters");
  if (out.block_size == 0) out.block_size = std::max<std::int64_t>(1, (cfg.iters - out.burn_in) / 50);
  if (out.block_size < 0) throw DomainError("sampler: block_size must be positive");
  return out;
}

Vector forward_step(const Vector& x, double eta, Rng& rng) {
  if (!(eta > 0.0)) throw DomainError("forward_step: eta must be > 0");
  return x + std::sqrt(eta) * rng.normal_vector(x.size());
}

RgoDraw rgo_sample(const SmoothPotential& g, const Vector& y, double eta,
                   const SamplerConfig& cfg, Rng& rng) {
  const double lip = g.smoothness();
  if (!(eta > 0.0) || !(eta * lip < 1.0)) throw DomainError("rgo_sample: need 0 < eta L < 1");
  if (y.size() != g.dim()) throw DomainError("rgo_sample: dimension mismatch");

  const SmoothPotential composite(
      g.dim(),
      [&](const Vector& x) { return g.value(x) + (x - y).squaredNorm() / (2.0 * eta); },
      [&](const Vector& x) { return Vector(g.gradient(x) + (x - y) / eta); },
      g.alpha() + 1.0 / eta, lip + 1.0 / eta, "rgo composite");
  const double tol = cfg.rgo_tol_scale * (1.0 + y.norm());
  const Vector x_star = minimize(composite, y, tol).x;
  const double f_star = composite.value(x_star);
  const double spread = std::sqrt(eta / (1.0 - eta * lip));
  const double coeff = (1.0 - eta * lip) / (2.0 * eta);

  const std::int64_t cap = cfg.rgo_max_trials > 0 ? cfg.rgo_max_trials
                                                  : static_cast<std::int64_t>(1) << 40;
  for (std::int64_t trial = 1; trial <= cap; ++trial) {
    Vector z = x_star + spread * rng.normal_vector(y.size());
    const double exponent = -composite.value(z) + f_star + coeff * (z - x_star).squaredNorm();
    if (exponent > 1e-9) {
      throw CertificateError("rgo_sample: acceptance exponent " + std::to_string(exponent) +
                             " > 0; declared constants do not hold");
    }
    if (rng.uniform() < std::exp(exponent)) return RgoDraw{std::move(z), trial};
  }
  throw NumericalError("rgo_sample: no acceptance after " + std::to_string(cap) + " proposals");
}

// ---------------------------------------------------------------------------

void MomentAccumulator::add(const Vector& x) {
  if (count_ == 0) {
    shift_ = x;
    sum_ = sum_c_ = sum_sq_ = sum_sq_c_ = Vector::Zero(x.size());
  } else if (x.size() != shift_.size()) {
    throw DomainError("MomentAccumulator: dimension mismatch");
  }
  const Vector d = x - shift_;
  compensated_add(sum_, sum_c_, d);
  compensated_add(sum_sq_, sum_sq_c_, d.cwiseAbs2());
  ++count_;
}

void MomentAccumulator::rebase(const Vector& new_shift) {
  const Vector delta = shift_ - new_shift;
  const auto n = static_cast<double>(count_);
  const Vector s = sum();
  const Vector q = sum_sq();
  sum_ = s + n * delta;
  sum_sq_ = q + 2.0 * delta.cwiseProduct(s) + n * delta.cwiseAbs2();
  sum_c_ = sum_sq_c_ = Vector::Zero(delta.size());
  shift_ = new_shift;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.dim() != dim()) throw DomainError("MomentAccumulator: dimension mismatch");
  MomentAccumulator rhs = other;
  rhs.rebase(shift_);
  compensated_add(sum_, sum_c_, rhs.sum_);
  compensated_add(sum_sq_, sum_sq_c_, rhs.sum_sq_);
  count_ += rhs.count_;
}

Vector MomentAccumulator::mean() const {
  if (count_ == 0) throw DomainError("MomentAccumulator: empty");
  return shift_ + sum() / static_cast<double>(count_);
}

Vector MomentAccumulator::variance() const {
  if (count_ == 0) throw DomainError("MomentAccumulator: empty");
  const auto n = static_cast<double>(count_);
  const Vector m = sum() / n;
  return (sum_sq() / n - m.cwiseAbs2()).cwiseMax(0.0);
}

Vector MomentAccumulator::centered_second_moment(const Vector& center) const {
  if (count_ == 0) throw DomainError("MomentAccumulator: empty");
  const auto n = static_cast<double>(count_);
  const Vector delta = shift_ - center;
  return (sum_sq() + 2.0 * delta.cwiseProduct(sum()) + n * delta.cwiseAbs2()) / n;
}

// ---------------------------------------------------------------------------

double SamplerRun::mean_trials() const {
  if (trial_counts.empty()) return 0.0;
  double total = 0.0;
  for (auto t : trial_counts) total += static_cast<double>(t);
  return total / static_cast<double>(trial_counts.size());
}

double SamplerRun::trials_stderr() const {
  const auto n = static_cast<double>(trial_counts.size());
  if (n < 2) return 0.0;
  const double m = mean_trials();
  double ss = 0.0;
  for (auto t : trial_counts) ss += (static_cast<double>(t) - m) * (static_cast<double>(t) - m);
  return std::sqrt(ss / (n - 1.0) / n);
}

Vector SamplerRun::mean_stderr() const {
  if (blocks.size() < 2) throw DomainError("SamplerRun: batch means need two blocks");
  std::vector<Vector> values;
  for (const auto& b : blocks) values.push_back(b.moments.mean());
  return block_spread(values);
}

Vector SamplerRun::variance_stderr() const {
  if (blocks.size() < 2) throw DomainError("SamplerRun: batch means need two blocks");
  const Vector center = moments.mean();
  std::vector<Vector> values;
  for (const auto& b : blocks) values.push_back(b.moments.centered_second_moment(center));
  return block_spread(values);
}

SamplerRun SamplerRun::merge(const SamplerRun& a, const SamplerRun& b) {
  SamplerRun out = a;
  out.trial_counts.insert(out.trial_counts.end(), b.trial_counts.begin(), b.trial_counts.end());
  out.moments.merge(b.moments);
  out.blocks.insert(out.blocks.end(), b.blocks.begin(), b.blocks.end());
  out.samples.insert(out.samples.end(), b.samples.begin(), b.samples.end());
  out.x_final = b.x_final;
  return out;
}

SamplerRun run_chain(const SmoothPotential& g, const Vector& x0, const SamplerConfig& cfg,
                     std::uint64_t stream) {
  if (x0.size() != g.dim()) throw DomainError("run_chain: x0 has the wrong dimension");
  const SamplerConfig c = resolve_config(cfg, g);
  Rng rng(c.seed, stream);
  SamplerRun run;
  run.trial_counts.reserve(static_cast<std::size_t>(c.iters));
  Vector x = x0;
  SamplerBlock block;
  for (std::int64_t k = 0; k < c.iters; ++k) {
    const Vector y = forward_step(x, c.eta, rng);
    RgoDraw draw = rgo_sample(g, y, c.eta, c, rng);
    x = std::move(draw.x);
    run.trial_counts.push_back(draw.trials);
    if (k < c.burn_in) continue;
    run.moments.add(x);
    if (c.record_samples) run.samples.push_back(x);
    block.moments.add(x);
    block.trials += draw.trials;
    block.last_iteration = k;
    if (block.moments.count() == c.block_size) {
      run.blocks.push_back(block);
      block = SamplerBlock{};
    }
  }
  run.x_final = x;
  return run;
}

SamplerRun run_chains(const SmoothPotential& g, const Vector& x0, const SamplerConfig& cfg,
                      int chains) {
  if (chains < 1) throw DomainError("run_chains: need at least one chain");
  std::vector<SamplerRun> runs(static_cast<std::size_t>(chains));
  parallel_for(runs.size(), [&](std::size_t i) {
    runs[i] = run_chain(g, x0, cfg, static_cast<std::uint64_t>(i));
  });
  SamplerRun out = runs.front();
  for (std::size_t i = 1; i < runs.size(); ++i) out = SamplerRun::merge(out, runs[i]);
  return out;
}

FiCertificate fi_certificate_gaussian(const SamplerConfig& cfg, double alpha,
                                      const IsoGaussian& p0, std::int64_t k) {
  if (!(alpha > 0.0) || !(cfg.eta > 0.0) || k < 0) {
    throw DomainError("fi_certificate_gaussian: need alpha, eta > 0 and k >= 0");
  }
  const IsoGaussian target = IsoGaussian::centered(p0.dim(), 1.0 / alpha);
  IsoGaussian p = p0;
  for (std::int64_t i = 0; i < k; ++i) p = proximal_step_gaussian(p, alpha, cfg.eta);
  const double fi0 = fi_iso_gaussian(p0, target);
  const double factor = bound_envelope_eval(BoundEnvelope::proximal_rate(alpha, cfg.eta),
                                            static_cast<double>(k));
  return FiCertificate{fi_iso_gaussian(p, target), fi0 * factor};
}

}  // namespace fplab
