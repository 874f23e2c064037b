#include "fplab/cli.hpp"

#include "fplab/error.hpp"
#include "fplab/gaussian_core.hpp"
#include "fplab/io.hpp"
#include "fplab/optim.hpp"
#include "fplab/potentials.hpp"
#include "fplab/quadrature.hpp"
#include "fplab/sampler.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#ifndef FPLAB_GIT_DESCRIBE
#define FPLAB_GIT_DESCRIBE "unknown"
#endif

namespace fplab {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Reads {"option": value, "subcommand": {"option": value}} documents.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool /*write_description*/,
                        std::string /*prefix*/) const override {
    return dump(app, default_also).dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static ojson dump(const CLI::App* app, bool default_also) {
    ojson j = ojson::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
      const std::string& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& r = opt->results();
        j[name] = r.size() == 1 ? ojson(r.front()) : ojson(r);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      ojson s = dump(sub, default_also);
      if (!s.empty()) j[sub->get_name()] = s;
    }
    return j;
  }

  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return format_double(v.get<double>());
    return v.dump();
  }

  static void flatten(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        flatten(value, next, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct GlobalOptions {
  std::string out_dir = "out";
  bool no_plot = false;
};

// Owns the run directory, CSV comment line and manifest for one invocation.
class Run {
 public:
  Run(std::string subcommand, const GlobalOptions& global, ojson params, std::uint64_t seed,
      std::ostream& out)
      : subcommand_(std::move(subcommand)),
        global_(global),
        params_(std::move(params)),
        seed_(seed),
        out_(out),
        start_(std::chrono::steady_clock::now()) {
    params_["seed"] = seed_;
    dir_ = make_run_dir(global_.out_dir, subcommand_);
  }

  std::string comment() const { return subcommand_ + " " + params_.dump(); }

  fs::path file(const std::string& name) {
    outputs_.push_back(dir_ / name);
    return dir_ / name;
  }

  void plot(const fs::path& csv, const std::string& svg_name, PlotOptions options) {
    if (global_.no_plot) return;
    plot_csv_file(csv, file(svg_name), options);
  }

  void finish() {
    RunManifest manifest;
    manifest.subcommand = subcommand_;
    manifest.parameters = params_;
    manifest.git_describe = FPLAB_GIT_DESCRIBE;
    manifest.seed = seed_;
    for (const auto& p : outputs_) {
      if (!fs::exists(p) || fs::file_size(p) == 0) {
        throw NumericalError("output " + p.string() + " is missing or empty");
      }
      manifest.output_paths.push_back(p.string());
    }
    const fs::path manifest_path = dir_ / "manifest.json";
    manifest.output_paths.push_back(manifest_path.string());
    manifest.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - start_)
                                .count();
    manifest.write(manifest_path);
    out_ << "outputs: " << dir_.string() << '\n';
  }

 private:
  std::string subcommand_;
  GlobalOptions global_;
  ojson params_;
  std::uint64_t seed_;
  std::ostream& out_;
  std::chrono::steady_clock::time_point start_;
  fs::path dir_;
  std::vector<fs::path> outputs_;
};

std::ofstream open_csv(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw NumericalError("cannot write " + path.string());
  f.precision(17);
  return f;
}

Vector offset_mean(Eigen::Index dim, double m) {
  Vector v = Vector::Zero(dim);
  v[0] = m;
  return v;
}

// ---------------------------------------------------------------------------

struct RatesArgs {
  std::string channel;
  int dim = 1;
  double alpha = 1.0;
  double beta = 100.0;
  double gamma = 1.0;
  double s = 2.0;
  double m = 0.0;
  double eta = 1.0;
  double m0 = 1.0;
  double var0 = 1.0;
  int k = 50;
  double t_min = 1e-3;
  double t_max = 0.0;
  int points = 100;
};

int cmd_gaussian_rates(const RatesArgs& a, const GlobalOptions& g, std::ostream& out) {
  if (a.dim < 1) throw DomainError("--d must be >= 1");
  if (!(a.alpha > 0.0)) throw DomainError("--alpha must be > 0");
  ojson params{{"channel", a.channel}, {"d", a.dim}, {"alpha", a.alpha}};
  ChannelTrace trace;
  if (a.channel == "heat" || a.channel == "ou") {
    const double t_max = a.t_max > 0.0 ? a.t_max : (a.channel == "heat" ? 100.0 : 10.0);
    const auto times = geometric_times(a.t_min, t_max, a.points);
    params["t_min"] = a.t_min;
    params["t_max"] = t_max;
    params["points"] = a.points;
    const IsoGaussian q0(Vector::Zero(a.dim), 1.0 / a.alpha);
    if (a.channel == "heat") {
      params["s"] = a.s;
      params["m"] = a.m;
      const IsoGaussian p0(offset_mean(a.dim, a.m), a.s);
      const auto envelope = BoundEnvelope::heat_slc(a.alpha);
      for (double t : times) {
        const IsoGaussian p = channel_map(p0, Channel::heat(), t);
        const IsoGaussian q = channel_map(q0, Channel::heat(), t);
        trace.add_row({t, fi_iso_gaussian(p, q), kl_iso_gaussian(p, q),
                       bound_envelope_eval(envelope, t)});
      }
    } else {
      params["beta"] = a.beta;
      params["gamma"] = a.gamma;
      params["m"] = a.m;
      if (!(a.beta > 0.0)) throw DomainError("--beta must be > 0");
      const IsoGaussian p0(offset_mean(a.dim, a.m), 1.0 / a.beta);
      trace = ou_trace_gaussian(p0, q0, a.gamma, times, a.alpha);
    }
  } else if (a.channel == "prox") {
    if (a.k < 0) throw DomainError("--k must be >= 0");
    params["eta"] = a.eta;
    params["m0"] = a.m0;
    params["var0"] = a.var0;
    params["k"] = a.k;
    const IsoGaussian target(Vector::Zero(a.dim), 1.0 / a.alpha);
    IsoGaussian p(offset_mean(a.dim, a.m0), a.var0);
    const auto envelope = BoundEnvelope::proximal_rate(a.alpha, a.eta);
    for (int k = 0; k <= a.k; ++k) {
      if (k > 0) p = proximal_step_gaussian(p, a.alpha, a.eta);
      trace.add_row({static_cast<double>(k), fi_iso_gaussian(p, target),
                     kl_iso_gaussian(p, target), bound_envelope_eval(envelope, k)});
    }
  } else {
    throw DomainError("--channel must be heat, ou or prox");
  }

  Run run("gaussian-rates", g, params, 0, out);
  const fs::path csv = run.file("trace.csv");
  {
    auto f = open_csv(csv);
    trace.write_csv(f, run.comment());
  }
  run.plot(csv, "plot.svg",
           {"gaussian-rates: " + a.channel, "t", {"fi", "kl"}, false, true});
  run.finish();

  const double fi0 = trace.rows().front().fi;
  int status = kExitOk;
  for (const auto& r : trace.rows()) {
    if (r.fi > *r.bound * fi0 * (1.0 + 1e-9) + 1e-300) {
      out << std::setprecision(17) << "envelope violated: t=" << r.t << " fi=" << r.fi
          << " bound=" << *r.bound * fi0 << '\n';
      status = kExitCertificate;
      break;
    }
  }
  out << std::setprecision(10) << "channel " << a.channel << ": " << trace.size()
      << " rows, fi(0)=" << fi0 << ", fi(end)=" << trace.rows().back().fi << '\n';
  out << (status == kExitOk ? "PASS" : "FAIL") << " envelope dominates fi\n";
  return status;
}

// ---------------------------------------------------------------------------

struct CounterArgs {
  double m_big = 2.0;
  double halfwidth = 2.0;
  double t_min = 1e-3;
  double t_max = 50.0;
  int points = 60;
  double step = 1e-3;
  int gh_order = 128;
};

int cmd_counterexample(const CounterArgs& a, const GlobalOptions& g, std::ostream& out) {
  if (!(a.m_big >= 2.0) || !(a.halfwidth >= 2.0)) throw DomainError("--M and --L must be >= 2");
  QuadratureSettings settings;
  settings.step = a.step;
  settings.gh_order = a.gh_order;
  const auto times = geometric_times(a.t_min, a.t_max, a.points);
  const ChannelTrace raw = counterexample_trace(a.m_big, a.halfwidth, times, settings);
  const double slope = counterexample_initial_slope(a.m_big, a.halfwidth);
  const double floor = (a.m_big - 2.0) * (a.m_big + 1.0) * (a.m_big + 1.0);

  const auto envelope = BoundEnvelope::heat_perturbed(1.0, (a.m_big + 1.0) * a.halfwidth);
  const double fi0 = raw.rows().front().fi;
  ChannelTrace trace;
  const TraceRow* violation = nullptr;
  for (TraceRow r : raw.rows()) {
    r.bound = bound_envelope_eval(envelope, r.t);
    if (!violation && r.fi > *r.bound * fi0 + 1e-6) violation = &raw.rows()[trace.size()];
    trace.add_row(r);
  }
  bool kl_monotone = true;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace.rows()[i].kl > trace.rows()[i - 1].kl + 1e-8) kl_monotone = false;
  }

  ojson params{{"M", a.m_big},         {"L", a.halfwidth}, {"t_min", a.t_min},
               {"t_max", a.t_max},     {"points", a.points}, {"step", a.step},
               {"gh_order", a.gh_order}};
  Run run("counterexample", g, params, 0, out);
  const fs::path csv = run.file("trace.csv");
  {
    auto f = open_csv(csv);
    trace.write_csv(f, run.comment());
  }
  const fs::path slope_csv = run.file("slope.csv");
  {
    auto f = open_csv(slope_csv);
    f << "# " << run.comment() << "\nM,L,fi0,slope,slope_floor\n"
      << a.m_big << ',' << a.halfwidth << ',' << fi0 << ',' << slope << ',' << floor << '\n';
  }
  const fs::path density_csv = run.file("density.csv");
  {
    const ScalarPotential pot = counterexample_potential(a.m_big, a.halfwidth);
    const EvalGrid grid = counterexample_grid(0.0, settings);
    const GaussHermiteRule rule(settings.gh_order);
    const GridDensity nu = heat_smoothed_density(pot, 0.0, grid, rule);
    const GridDensity rho = discretize(gaussian_handle(0.0, 1.0), grid);
    const double reach = (a.m_big + 1.0) * a.halfwidth + 6.0;
    auto f = open_csv(density_csv);
    f << "# " << run.comment() << "\nx,g,nu0,rho0\n";
    for (std::size_t i = 0; i < grid.size(); i += 20) {
      const double x = grid.point(i);
      if (std::abs(x) > reach) continue;
      f << x << ',' << pot.value(x) << ',' << std::exp(nu.log_density[i]) << ','
        << std::exp(rho.log_density[i]) << '\n';
    }
  }
  run.plot(csv, "plot.svg", {"relative Fisher information along heat flow", "t", {"fi"}, true, false});
  run.plot(csv, "kl.svg", {"KL along heat flow", "t", {"kl"}, true, false});
  run.plot(density_csv, "density.svg", {"initial densities", "x", {"nu0", "rho0"}, false, false});
  run.finish();

  std::string pattern;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const char c = trace.rows()[i].fi > trace.rows()[i - 1].fi ? '+' : '-';
    if (pattern.empty() || pattern.back() != c) pattern += c;
  }
  out << std::setprecision(10) << "fi(0) = " << fi0 << "\nslope at t=0 = " << slope
      << "  (floor (M-2)(M+1)^2 = " << floor << ")\nfi first-difference signs: " << pattern
      << '\n';
  int status = kExitOk;
  const bool slope_ok = slope > 0.0 && slope > floor;
  out << (slope_ok ? "PASS" : "FAIL") << " slope positive and above floor\n";
  out << (kl_monotone ? "PASS" : "FAIL") << " kl non-increasing\n";
  out << (violation ? "FAIL" : "PASS") << " perturbed envelope dominates fi\n";
  if (violation) {
    out << std::setprecision(17) << "offending row: t=" << violation->t
        << " fi=" << violation->fi << " bound=" << bound_envelope_eval(envelope, violation->t) * fi0
        << '\n';
  }
  if (!slope_ok || !kl_monotone || violation) status = kExitCertificate;
  return status;
}

// ---------------------------------------------------------------------------

struct SamplerArgs {
  int dim = 5;
  double alpha = 1.0;
  double smoothness = 1.0;
  std::string eta = "auto";
  std::int64_t iters = 20000;
  std::uint64_t seed = 7;
  int chains = 1;
  std::int64_t burn_in = -1;
  std::int64_t block_size = 0;
  std::int64_t max_trials = 0;
};

int cmd_sampler(const SamplerArgs& a, const GlobalOptions& g, std::ostream& out) {
  if (a.dim < 1) throw DomainError("--d must be >= 1");
  if (!(a.alpha > 0.0) || !(a.smoothness >= a.alpha)) {
    throw DomainError("need 0 < alpha <= L");
  }
  double eta = 0.0;
  if (a.eta == "auto") {
    eta = 1.0 / (a.dim * a.smoothness);
  } else {
    try {
      eta = std::stod(a.eta);
    } catch (const std::exception&) {
      throw DomainError("--eta must be a number or 'auto'");
    }
  }
  const double alpha = a.alpha;
  SmoothPotential target(
      a.dim, [alpha](const Vector& x) { return 0.5 * alpha * x.squaredNorm(); },
      [alpha](const Vector& x) { return Vector(alpha * x); }, alpha, a.smoothness,
      "quadratic target");
  target.mark_quadratic(Vector::Zero(a.dim));

  SamplerConfig cfg;
  cfg.eta = eta;
  cfg.iters = a.iters;
  cfg.seed = a.seed;
  cfg.burn_in = a.burn_in;
  cfg.block_size = a.block_size;
  cfg.rgo_max_trials = a.max_trials;
  cfg = resolve_config(cfg, target);

  const Vector x0 = Vector::Zero(a.dim);
  const SamplerRun result = a.chains > 1 ? run_chains(target, x0, cfg, a.chains)
                                         : run_chain(target, x0, cfg);

  ojson params{{"d", a.dim},         {"alpha", a.alpha},     {"L", a.smoothness},
               {"eta", eta},         {"iters", cfg.iters},   {"chains", a.chains},
               {"burn_in", cfg.burn_in}, {"block_size", cfg.block_size},
               {"rgo_max_trials", cfg.rgo_max_trials}, {"rgo_tol_scale", cfg.rgo_tol_scale}};
  Run run("sampler", g, params, a.seed, out);
  const fs::path csv = run.file("trace.csv");
  {
    auto f = open_csv(csv);
    f << "# " << run.comment() << "\nk,trials";
    for (int i = 1; i <= a.dim; ++i) f << ",mean_" << i;
    for (int i = 1; i <= a.dim; ++i) f << ",var_" << i;
    f << '\n';
    for (const auto& b : result.blocks) {
      f << b.last_iteration << ','
        << static_cast<double>(b.trials) / static_cast<double>(b.moments.count());
      const Vector m = b.moments.mean();
      const Vector v = b.moments.variance();
      for (double x : m) f << ',' << x;
      for (double x : v) f << ',' << x;
      f << '\n';
    }
  }
  run.plot(csv, "plot.svg", {"sampler block statistics", "k", {"mean_1", "var_1", "trials"}, false, false});
  run.finish();

  const Vector mean = result.mean();
  const Vector var = result.variance();
  const Vector se_mean = result.mean_stderr();
  const Vector se_var = result.variance_stderr();
  const double expected = rgo_expected_trials(a.dim, eta, a.smoothness);
  const double trials_limit = expected + 3.0 * result.trials_stderr();
  bool moments_ok = true;
  out << std::setprecision(6) << "eta = " << eta << ", iterations = " << cfg.iters
      << ", chains = " << a.chains << '\n';
  for (int i = 0; i < a.dim; ++i) {
    const bool ok_m = std::abs(mean[i]) <= 3.0 * se_mean[i];
    const bool ok_v = std::abs(var[i] - 1.0 / alpha) <= 3.0 * se_var[i];
    moments_ok = moments_ok && ok_m && ok_v;
    out << "coord " << i + 1 << ": mean " << mean[i] << " (se " << se_mean[i] << "), var "
        << var[i] << " (se " << se_var[i] << ", target " << 1.0 / alpha << ")\n";
  }
  const bool trials_ok = result.mean_trials() <= trials_limit;
  out << "mean trials " << result.mean_trials() << " (kappa^(d/2) = " << expected
      << ", limit " << trials_limit << ")\n";
  out << (moments_ok ? "PASS" : "FAIL") << " stationary moments within 3 s.e.\n";
  out << (trials_ok ? "PASS" : "FAIL") << " mean trials within bound\n";
  return moments_ok && trials_ok ? kExitOk : kExitCertificate;
}

// ---------------------------------------------------------------------------

struct GapArgs {
  double eps = 0.5;
  double fi_floor = 10.0;
  double step = 1e-4;
};

int cmd_gap(const GapArgs& a, const GlobalOptions& g, std::ostream& out) {
  if (!(a.eps > 0.0 && a.eps < 1.0)) throw DomainError("--eps must lie in (0, 1)");
  if (!(a.fi_floor > 1.0)) throw DomainError("--fi-floor must be > 1");
  const SpikeSpec spec = spike_spec(a.eps, a.fi_floor);
  const EvalGrid grid = EvalGrid::symmetric(spec.a + 9.0, a.step);
  const ScalarPotential pot = spike_potential(spec);
  const GapResult r = perturbation_gap(pot, grid);

  ojson params{{"eps", a.eps}, {"fi_floor", a.fi_floor}, {"step", a.step}};
  Run run("gap", g, params, 0, out);
  const fs::path csv = run.file("trace.csv");
  {
    auto f = open_csv(csv);
    f << "# " << run.comment() << "\nx,g,log_ratio\n";
    const double reach = spec.a + 1.0;
    const double h = std::min(spec.width / 8.0, 1e-2);
    for (double x = -reach; x <= reach; x += h) {
      f << x << ',' << pot.value(x) << ',' << -pot.value(x) - r.log_mass << '\n';
    }
  }
  run.plot(csv, "plot.svg", {"spike perturbation", "x", {"g", "log_ratio"}, false, false});
  run.finish();

  const bool r_ok = r.r_inf <= spec.eps + 1e-6;
  const bool fi_ok = r.fi >= spec.fi_floor - 1e-6;
  out << std::setprecision(10) << "r_inf = " << r.r_inf << "\nfi = " << r.fi << "\na = " << spec.a
      << "\nM = " << spec.m_big << "\nK = " << spec.k_count << "\neta = " << spec.width << '\n';
  out << (r_ok ? "PASS" : "FAIL") << " r_inf <= eps\n";
  out << (fi_ok ? "PASS" : "FAIL") << " fi >= fi_floor\n";
  return r_ok && fi_ok ? kExitOk : kExitCertificate;
}

// ---------------------------------------------------------------------------

struct ProxArgs {
  std::string preset = "quadratic";
  int dim = 1;
  double alpha = 1.0;
  double eta = 1.0;
  int k = 30;
  double x0 = 1.0;
  double t_end = 5.0;
  double dt = 0.0;
};

int cmd_proxgrad(const ProxArgs& a, const GlobalOptions& g, std::ostream& out) {
  if (!(a.eta > 0.0)) throw DomainError("--eta must be > 0");
  if (a.dim < 1 || a.k < 0) throw DomainError("--d must be >= 1 and --k >= 0");
  const Vector x0 = Vector::Constant(a.dim, a.x0);
  std::optional<SmoothPotential> f;
  if (a.preset == "quadratic") {
    f = quadratic_potential(a.dim, a.alpha, Vector::Zero(a.dim));
  } else if (a.preset == "quartic") {
    f = quartic_potential(a.dim, std::max(std::abs(a.x0), 1e-3));
  } else {
    throw DomainError("--preset must be quadratic or quartic");
  }
  const double dt = a.dt > 0.0 ? a.dt : 0.1 / f->smoothness();
  const ProxGradTrace prox = prox_grad_run(*f, x0, a.eta, a.k);
  const FlowTrace flow = gradient_flow(*f, x0, a.t_end, dt);

  ojson params{{"preset", a.preset}, {"d", a.dim},         {"alpha", f->alpha()},
               {"L", f->smoothness()}, {"eta", a.eta},     {"k", a.k},
               {"x0", a.x0},         {"t_end", a.t_end}, {"dt", dt}};
  Run run("proxgrad", g, params, 0, out);
  const fs::path csv = run.file("trace.csv");
  {
    auto file = open_csv(csv);
    prox.write_csv(file, run.comment());
  }
  const fs::path flow_csv = run.file("flow.csv");
  {
    auto file = open_csv(flow_csv);
    flow.write_csv(file, run.comment());
  }
  run.plot(csv, "plot.svg", {"proximal gradient", "k", {"grad_sq_norm"}, false, true});
  run.plot(flow_csv, "flow.svg", {"gradient flow", "t", {"grad_sq_norm"}, false, true});
  run.finish();

  const double g0 = prox.grad_sq_norms.front();
  const bool prox_ok = prox.envelope_excess() <= 1e-6 * std::max(g0, 1.0);
  const bool flow_ok = flow.envelope_excess() <= 1e-6;
  bool exact_ok = true;
  if (a.preset == "quadratic") {
    const double ratio = 1.0 / std::pow(1.0 + f->alpha() * a.eta, 2);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < prox.grad_sq_norms.size(); ++k) {
      if (prox.grad_sq_norms[k] < 1e-280) break;
      const double r = prox.grad_sq_norms[k + 1] / prox.grad_sq_norms[k];
      worst = std::max(worst, std::abs(r / ratio - 1.0));
    }
    exact_ok = worst <= 1e-12;
    out << std::setprecision(6) << "per-step ratio deviation " << worst << '\n';
  }
  out << std::setprecision(6) << "prox envelope excess " << prox.envelope_excess()
      << ", flow envelope excess " << flow.envelope_excess() << '\n';
  out << (prox_ok ? "PASS" : "FAIL") << " proximal gradient envelope\n";
  out << (flow_ok ? "PASS" : "FAIL") << " gradient flow envelope\n";
  if (a.preset == "quadratic") out << (exact_ok ? "PASS" : "FAIL") << " exact quadratic ratio\n";
  return prox_ok && flow_ok && exact_ok ? kExitOk : kExitCertificate;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fisher information rates along Fokker-Planck channels", "fplab"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON configuration file (flags override it)");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--out-dir", global.out_dir, "Directory for run outputs")->capture_default_str();
  app.add_flag("--no-plot", global.no_plot, "Skip SVG output");

  RatesArgs rates;
  auto* rates_cmd = app.add_subcommand("gaussian-rates", "Closed-form Gaussian FI/KL traces");
  rates_cmd->add_option("--channel", rates.channel, "heat, ou or prox")
      ->required()
      ->check(CLI::IsMember({"heat", "ou", "prox"}));
  rates_cmd->add_option("--d", rates.dim, "Dimension")->capture_default_str();
  rates_cmd->add_option("--alpha", rates.alpha, "Precision of the reference Gaussian")->capture_default_str();
  rates_cmd->add_option("--beta", rates.beta, "Precision of the initial law (ou)")->capture_default_str();
  rates_cmd->add_option("--gamma", rates.gamma, "OU rate")->capture_default_str();
  rates_cmd->add_option("--s", rates.s, "Initial variance (heat)")->capture_default_str();
  rates_cmd->add_option("--m", rates.m, "Initial mean offset (heat, ou)")->capture_default_str();
  rates_cmd->add_option("--eta", rates.eta, "Step size (prox)")->capture_default_str();
  rates_cmd->add_option("--m0", rates.m0, "Initial mean offset (prox)")->capture_default_str();
  rates_cmd->add_option("--var0", rates.var0, "Initial variance (prox)")->capture_default_str();
  rates_cmd->add_option("--k", rates.k, "Iterations (prox)")->capture_default_str();
  rates_cmd->add_option("--t-min", rates.t_min, "First positive time")->capture_default_str();
  rates_cmd->add_option("--t-max", rates.t_max, "Last time (0: 100 heat, 10 ou)")->capture_default_str();
  rates_cmd->add_option("--points", rates.points, "Geometric time points")->capture_default_str();

  CounterArgs counter;
  auto* counter_cmd = app.add_subcommand("counterexample", "Non-log-concave heat-flow trace");
  counter_cmd->add_option("--M", counter.m_big, "Inner concavity")->capture_default_str();
  counter_cmd->add_option("--L", counter.halfwidth, "Inner half-width")->capture_default_str();
  counter_cmd->add_option("--t-min", counter.t_min)->capture_default_str();
  counter_cmd->add_option("--t-max", counter.t_max)->capture_default_str();
  counter_cmd->add_option("--points", counter.points)->capture_default_str();
  counter_cmd->add_option("--step", counter.step, "Grid step")->capture_default_str();
  counter_cmd->add_option("--gh-order", counter.gh_order)->capture_default_str();

  SamplerArgs sampler;
  auto* sampler_cmd = app.add_subcommand("sampler", "Proximal Sampler on a quadratic target");
  sampler_cmd->add_option("--d", sampler.dim)->capture_default_str();
  sampler_cmd->add_option("--alpha", sampler.alpha)->capture_default_str();
  sampler_cmd->add_option("--L", sampler.smoothness)->capture_default_str();
  sampler_cmd->add_option("--eta", sampler.eta, "Step size or 'auto' for 1/(dL)")->capture_default_str();
  sampler_cmd->add_option("--iters", sampler.iters)->capture_default_str();
  sampler_cmd->add_option("--seed", sampler.seed)->capture_default_str();
  sampler_cmd->add_option("--chains", sampler.chains)->capture_default_str();
  sampler_cmd->add_option("--burn-in", sampler.burn_in, "-1: iters/4")->capture_default_str();
  sampler_cmd->add_option("--block-size", sampler.block_size, "0: auto")->capture_default_str();
  sampler_cmd->add_option("--max-trials", sampler.max_trials, "0: auto")->capture_default_str();

  GapArgs gap;
  auto* gap_cmd = app.add_subcommand("gap", "Spike perturbation with small R_inf and large FI");
  gap_cmd->add_option("--eps", gap.eps)->capture_default_str();
  gap_cmd->add_option("--fi-floor", gap.fi_floor)->capture_default_str();
  gap_cmd->add_option("--step", gap.step)->capture_default_str();

  ProxArgs prox;
  auto* prox_cmd = app.add_subcommand("proxgrad", "Gradient flow and proximal gradient decay");
  prox_cmd->add_option("--preset", prox.preset)
      ->check(CLI::IsMember({"quadratic", "quartic"}))
      ->capture_default_str();
  prox_cmd->add_option("--d", prox.dim)->capture_default_str();
  prox_cmd->add_option("--alpha", prox.alpha, "Curvature (quadratic)")->capture_default_str();
  prox_cmd->add_option("--eta", prox.eta)->capture_default_str();
  prox_cmd->add_option("--k", prox.k)->capture_default_str();
  prox_cmd->add_option("--x0", prox.x0, "Start value for every coordinate")->capture_default_str();
  prox_cmd->add_option("--t-end", prox.t_end)->capture_default_str();
  prox_cmd->add_option("--dt", prox.dt, "0: 0.1/L")->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (rates_cmd->parsed()) return cmd_gaussian_rates(rates, global, out);
    if (counter_cmd->parsed()) return cmd_counterexample(counter, global, out);
    if (sampler_cmd->parsed()) return cmd_sampler(sampler, global, out);
    if (gap_cmd->parsed()) return cmd_gap(gap, global, out);
    if (prox_cmd->parsed()) return cmd_proxgrad(prox, global, out);
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CertificateError& e) {
    err << "certificate failure: " << e.what() << '\n';
    return kExitCertificate;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fplab
