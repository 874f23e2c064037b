// One PASS/FAIL line per acceptance criterion. `--only N` runs a single one.

#include "fplab/error.hpp"
#include "fplab/gaussian_core.hpp"
#include "fplab/optim.hpp"
#include "fplab/quadrature.hpp"
#include "fplab/sampler.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fplab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<void(Outcome&)> body;
};

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// 1: closed-form chain on N(0, 1/alpha)
void proximal_rate(Outcome& o) {
  const IsoGaussian p0(Vector::Constant(1, 1.0), 1.0);
  double worst = 0.0;
  for (std::int64_t k = 0; k <= 30; ++k) {
    SamplerConfig cfg;
    cfg.eta = 1.0;
    const auto cert = fi_certificate_gaussian(cfg, 1.0, p0, k);
    worst = std::max(worst, rel_err(cert.fi, std::pow(4.0, -double(k))));
  }
  o.detail << "max rel err vs 4^-k " << worst;
  o.require(worst <= 1e-12, "4^-k within 1e-12");

  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int draw = 0; draw < 50; ++draw) {
    const double alpha = std::exp(4 * u(rng) - 2), eta = std::exp(4 * u(rng) - 2);
    const int d = 1 + static_cast<int>(5 * u(rng));
    Vector m(d);
    for (int i = 0; i < d; ++i) m[i] = 6 * u(rng) - 3;
    const IsoGaussian p(m, std::exp(4 * u(rng) - 2));
    SamplerConfig cfg;
    cfg.eta = eta;
    for (std::int64_t k = 0; k <= 30; ++k) {
      const auto cert = fi_certificate_gaussian(cfg, alpha, p, k);
      if (cert.fi > cert.bound * (1 + 1e-12)) ++violations;
    }
  }
  o.detail << ", envelope violations over 50 draws " << violations;
  o.require(violations == 0, "FI_k <= FI_0 (1+alpha eta)^-2k");
}

// 2: iteration count guarantee
void iteration_guarantee(Outcome& o) {
  double worst_ratio = 0.0;
  auto check = [&](int d, double lip, double alpha, double eps) {
    const double eta = 1.0 / (d * lip);
    const auto k = iteration_count(d, lip, alpha, eps);
    // x* = 0, rho_0 = N(x*, I/L)
    const IsoGaussian p0(Vector::Zero(d), 1.0 / lip);
    SamplerConfig cfg;
    cfg.eta = eta;
    const auto cert = fi_certificate_gaussian(cfg, alpha, p0, k);
    worst_ratio = std::max(worst_ratio, cert.fi / eps);
    o.require(cert.fi <= eps, "d=" + std::to_string(d) + " L=" + std::to_string(lip) +
                                  " eps=" + std::to_string(eps));
  };
  for (int d : {1, 2, 5}) {
    for (double eps : {1e-2, 1e-6}) {
      check(d, 1.0, 1.0, eps);
      // rho_0 != target when the declared L exceeds alpha
      check(d, 4.0, 1.0, eps);
    }
  }
  o.detail << "max FI_k / eps " << worst_ratio << " (L = alpha = 1, plus L = 4)";
}

// 3: sampler on a 5-d quadratic
void rgo_quality(Outcome& o) {
  const int d = 5;
  const double alpha = 1.0, lip = 1.0;
  const auto g = quadratic_potential(d, alpha, Vector::Zero(d));
  SamplerConfig cfg;
  cfg.eta = 1.0 / (d * lip);
  cfg.iters = 20000;
  cfg.seed = 7;
  cfg = resolve_config(cfg, g);
  const auto run = run_chain(g, Vector::Zero(d), cfg);
  const double kappa_bound = std::pow((1 + 1.0 / d) / (1 - 1.0 / d), d / 2.0);
  const double limit = kappa_bound + 3 * run.trials_stderr();
  o.detail << "mean trials " << run.mean_trials() << " <= " << limit;
  o.require(run.mean_trials() <= limit, "mean trials");
  const Vector m = run.mean(), v = run.variance(), ms = run.mean_stderr(), vs = run.variance_stderr();
  double worst = 0.0;
  for (int i = 0; i < d; ++i) {
    worst = std::max({worst, std::abs(m[i]) / ms[i], std::abs(v[i] - 1 / alpha) / vs[i]});
  }
  o.detail << ", worst moment deviation " << worst << " s.e.";
  o.require(worst <= 3.0, "moments within 3 s.e.");
}

// 4: non-monotone FI along the heat flow
void counterexample(Outcome& o) {
  const double m = 2.0, l = 2.0;
  auto times = default_counterexample_times();
  times.push_back(0.05);
  times.push_back(0.1);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  ChannelTrace tr;
  try {
    tr = perturbed_bound_check(m, l, times);
  } catch (const CertificateError& e) {
    o.require(false, std::string("envelope: ") + e.what());
    return;
  }
  auto fi_at = [&](double t) {
    for (const auto& r : tr.rows()) {
      if (r.t == t) return r.fi;
    }
    return std::nan("");
  };
  const double fi0 = fi_at(0.0);
  o.detail << "FI(0) " << fi0 << ", FI(0.05) " << fi_at(0.05) << ", FI(0.1) " << fi_at(0.1);
  o.require(fi_at(0.05) > fi0, "FI(0.05) > FI(0)");
  o.require(fi_at(0.1) > fi0, "FI(0.1) > FI(0)");

  const double slope = counterexample_initial_slope(m, l);
  const double ref = oracle::Counterexample{m, l}.initial_slope();
  o.detail << ", slope " << slope << " (oracle " << ref << ")";
  o.require(rel_err(slope, ref) <= 1e-3, "slope vs oracle");
  o.require(slope > std::max(0.0, (m - 2) * (m + 1) * (m + 1)), "slope above floor");

  double worst_rise = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    worst_rise = std::max(worst_rise, tr.rows()[i].kl - tr.rows()[i - 1].kl);
  }
  o.detail << ", max KL rise " << worst_rise;
  o.require(worst_rise <= 1e-8, "KL non-increasing");
  bool dominated = true;
  for (const auto& r : tr.rows()) dominated = dominated && r.fi <= *r.bound * fi0 + 1e-6;
  o.require(dominated, "perturbed envelope");
}

// 5: OU example with m = 0
void ou_nonmonotone(Outcome& o) {
  const double gamma = 1.0, beta = 100.0, alpha = 0.1;
  const IsoGaussian p0(Vector::Zero(1), 1 / beta), q0(Vector::Zero(1), 1 / alpha);
  std::vector<double> times;
  for (int i = 0; i <= 1000; ++i) times.push_back(10.0 * i / 1000);
  const auto tr = ou_trace_gaussian(p0, q0, gamma, times, alpha);
  bool rises = false;
  for (std::size_t i = 1; i < tr.size() && tr.rows()[i].t <= 1.0; ++i) {
    rises = rises || tr.rows()[i].fi > tr.rows()[0].fi;
  }
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : tr.rows()) {
    if (r.t < 2.0) continue;
    const double scaled = r.fi * std::exp(4 * gamma * r.t);
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  const double variation = (hi - lo) / hi;
  o.detail << "FI(0) " << tr.rows()[0].fi << ", FI(0.01) " << tr.rows()[1].fi
           << ", FI e^{4t} on [2,10] in [" << lo << ", " << hi << "], variation " << variation;
  o.require(rises, "initial increase");
  o.require(variation <= 0.05, "variation <= 5%");
}

// 6: contraction envelopes over random Gaussian pairs
void envelopes(Outcome& o) {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto times = geometric_times(1e-3, 20.0, 60);
  int pairs = 0, violations = 0;
  double worst = 0.0;
  auto random_mean = [&](int d) {
    Vector m(d);
    for (int i = 0; i < d; ++i) m[i] = 4 * u(rng) - 2;
    return m;
  };
  for (int kind = 0; kind < 4; ++kind) {
    for (int n = 0; n < 100; ++n) {
      const int d = 1 + static_cast<int>(4 * u(rng));
      const double alpha = std::exp(4 * u(rng) - 2);
      const double beta = std::exp(4 * u(rng) - 2);
      const double gamma = std::exp(4 * u(rng) - 2);
      const bool symmetric = kind % 2 == 1;
      // nu_0 alpha-SLC; rho_0 beta-Poincare and both centered in the symmetric cases
      const IsoGaussian q0(symmetric ? Vector::Zero(d) : random_mean(d), u(rng) / alpha + 1e-3 / alpha);
      const IsoGaussian p0(symmetric ? Vector::Zero(d) : random_mean(d),
                           symmetric ? (u(rng) + 1e-3) / beta : std::exp(4 * u(rng) - 2));
      const bool heat = kind < 2;
      const Channel ch = heat ? Channel::heat() : Channel::ornstein_uhlenbeck(gamma);
      const BoundEnvelope env = kind == 0   ? BoundEnvelope::heat_slc(alpha)
                                : kind == 1 ? BoundEnvelope::heat_slc_poincare(alpha, beta)
                                : kind == 2 ? BoundEnvelope::ou_slc(alpha, gamma)
                                            : BoundEnvelope::ou_slc_poincare(alpha, beta, gamma);
      const double fi0 = fi_iso_gaussian(p0, q0);
      for (double t : times) {
        const double fi = fi_iso_gaussian(channel_map(p0, ch, t), channel_map(q0, ch, t));
        const double cap = bound_envelope_eval(env, t) * fi0;
        if (fi0 > 0) worst = std::max(worst, (fi - cap) / fi0);
        if (fi > cap + 1e-9 * fi0) ++violations;
      }
      ++pairs;
    }
  }
  o.detail << pairs << " pairs over 4 envelopes, max (FI - bound) / FI(0) " << worst;
  o.require(violations == 0, std::to_string(violations) + " envelope violations");
}

// 7: time derivatives by central differences
void derivatives(Outcome& o) {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    const int d = 1 + c % 3;
    Vector mp(d), mq(d);
    for (int i = 0; i < d; ++i) {
      mp[i] = 4 * u(rng) - 2;
      mq[i] = 4 * u(rng) - 2;
    }
    const IsoGaussian p(mp, std::exp(2 * u(rng) - 1)), q(mq, std::exp(2 * u(rng) - 1));
    const double gamma = std::exp(2 * u(rng) - 1);
    const Channel ch = c < 10 ? Channel::heat() : Channel::ornstein_uhlenbeck(gamma);
    const double t0 = u(rng);
    const auto pt = channel_map(p, ch, t0), qt = channel_map(q, ch, t0);
    const double h = 1e-4 * std::min({pt.variance(), qt.variance(), 1.0 / gamma});
    auto fi = [&](double t) { return fi_iso_gaussian(channel_map(p, ch, t), channel_map(q, ch, t)); };
    auto kl = [&](double t) { return kl_iso_gaussian(channel_map(p, ch, t), channel_map(q, ch, t)); };
    const double dfi = (fi(t0 + h) - fi(t0 - h)) / (2 * h);
    const double dkl = (kl(t0 + h) - kl(t0 - h)) / (2 * h);
    worst = std::max({worst, rel_err(dfi, fi_time_derivative_gaussian(pt, qt, ch)),
                      rel_err(dkl, kl_time_derivative_gaussian(pt, qt, ch))});
  }
  o.detail << "20 cases, max rel err " << worst;
  o.require(worst <= 1e-4, "derivative identities");
}

// 8: small R_inf with large FI
void gap(Outcome& o) {
  for (auto [eps, floor] : {std::pair{0.5, 10.0}, std::pair{0.1, 100.0}}) {
    const auto spec = spike_spec(eps, floor);
    const auto r = perturbation_gap(spike_potential(spec), EvalGrid::symmetric(spec.a + 9.0, 1e-4));
    o.detail << "(eps " << eps << ", L " << floor << "): R_inf " << r.r_inf << ", FI " << r.fi << "; ";
    o.require(r.r_inf <= eps + 1e-6, "R_inf bound");
    o.require(r.fi >= floor - 1e-6, "FI floor");
  }
}

// 9: optimization analogue
void optimization(Outcome& o) {
  const double alpha = 1.0, eta = 0.5;
  const auto quad = quadratic_potential(3, alpha, Vector::Zero(3));
  const auto pq = prox_grad_run(quad, Vector::Constant(3, 2.0), eta, 50);
  double worst = 0.0;
  for (std::size_t k = 1; k < pq.grad_sq_norms.size(); ++k) {
    const double ratio = pq.grad_sq_norms[k] / pq.grad_sq_norms[k - 1];
    worst = std::max(worst, rel_err(ratio, std::pow(1 + alpha * eta, -2.0)));
  }
  o.detail << "quadratic ratio rel err " << worst;
  o.require(worst <= 1e-12, "exact quadratic ratio");

  const Vector x0 = Vector::Constant(3, 1.5);
  const auto quartic = quartic_potential(3, 1.5);
  const auto pg = prox_grad_run(quartic, x0, eta, 50);
  const auto flow = gradient_flow(quartic, x0, 5.0, 1e-3);
  const double prox_slack = pg.envelope_excess() / std::max(pg.grad_sq_norms[0], 1.0);
  o.detail << ", quartic prox excess " << prox_slack << ", flow excess " << flow.envelope_excess();
  o.require(prox_slack <= 1e-6, "proximal gradient envelope");
  o.require(flow.envelope_excess() <= 1e-6, "gradient flow envelope");
}

// 10: quadrature functionals vs closed forms and under refinement
void quadrature(Outcome& o) {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto grid = EvalGrid::symmetric(30.0, 1e-3);
  const auto fine = EvalGrid::symmetric(40.0, 5e-4);
  double worst = 0.0, worst_ref = 0.0;
  for (int i = 0; i < 25; ++i) {
    const double vq = std::exp(2 * u(rng) - 1), vp = vq * std::exp(3 * u(rng) - 1.5);
    const double m = 3 * u(rng) - 1.5;
    const IsoGaussian gp(Vector::Constant(1, m), vp), gq(Vector::Zero(1), vq);
    const auto p = gaussian_handle(m, vp), q = gaussian_handle(0.0, vq);
    const double fi = fi_functional(p, q, grid).value, kl = kl_functional(p, q, grid).value;
    worst = std::max({worst, rel_err(fi, fi_iso_gaussian(gp, gq)), rel_err(kl, kl_iso_gaussian(gp, gq))});
    worst_ref = std::max({worst_ref, rel_err(fi_functional(p, q, fine).value, fi),
                          rel_err(kl_functional(p, q, fine).value, kl)});
  }
  // the convolution engine under grid and Gauss-Hermite refinement
  const std::vector<double> times{0.0, 1e-4, 0.05, 1.0, 20.0};
  QuadratureSettings refined;
  refined.step = 5e-4;
  refined.gh_order = 256;
  refined.min_halfwidth = 25.0;
  const auto base = counterexample_trace(2.0, 2.0, times);
  const auto ref = counterexample_trace(2.0, 2.0, times, refined);
  for (std::size_t i = 0; i < times.size(); ++i) {
    worst_ref = std::max({worst_ref, rel_err(base.rows()[i].fi, ref.rows()[i].fi),
                          rel_err(base.rows()[i].kl, ref.rows()[i].kl)});
  }
  o.detail << "25 pairs max rel err " << worst << ", refinement change " << worst_ref;
  o.require(worst <= 1e-6, "closed-form agreement");
  o.require(worst_ref <= 1e-6, "refinement stability");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "proximal sampler rate", 1.0, proximal_rate},
      {2, "iteration count guarantee", 1.0, iteration_guarantee},
      {3, "rejection oracle quality", 30.0, rgo_quality},
      {4, "heat-flow counterexample", 120.0, counterexample},
      {5, "OU non-monotonicity", 1.0, ou_nonmonotone},
      {6, "contraction envelopes", 5.0, envelopes},
      {7, "derivative identities", 1.0, derivatives},
      {8, "small R_inf with large FI", 10.0, gap},
      {9, "optimization analogue", 5.0, optimization},
      {10, "quadrature vs closed form", 30.0, quadrature},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::stoi(argv[++i]);
    } else {
      std::cerr << "usage: fplab_acceptance [--only N]\n";
      return 64;
    }
  }
  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.limit_s, "runtime");
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): "
              << o.detail.str() << " [" << secs << " s, limit " << c.limit_s << " s]" << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
