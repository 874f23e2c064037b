#include "fplab/gaussian_core.hpp"
#include "fplab/error.hpp"
#include "fplab/optim.hpp"
#include "fplab/potentials.hpp"
#include "fplab/quadrature.hpp"
#include "fplab/sampler.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>

namespace py = pybind11;
using namespace fplab;

namespace {

py::dict trace_dict(const ChannelTrace& trace) {
  std::vector<double> t, fi, kl, bound;
  for (const auto& r : trace.rows()) {
    t.push_back(r.t);
    fi.push_back(r.fi);
    kl.push_back(r.kl);
    bound.push_back(r.bound ? *r.bound : std::numeric_limits<double>::quiet_NaN());
  }
  py::dict d;
  d["t"] = t;
  d["fi"] = fi;
  d["kl"] = kl;
  d["bound"] = bound;
  return d;
}

Channel make_channel(const std::string& kind, double parameter) {
  if (kind == "heat") return Channel::heat();
  if (kind == "ou") return Channel::ornstein_uhlenbeck(parameter);
  if (kind == "prox") return Channel::proximal_forward(parameter);
  throw DomainError("channel must be 'heat', 'ou' or 'prox'");
}

SmoothPotential make_potential(const std::string& preset, Eigen::Index dim, double alpha,
                               double box_radius) {
  if (preset == "quadratic") return quadratic_potential(dim, alpha, Vector::Zero(dim));
  if (preset == "quartic") return quartic_potential(dim, box_radius);
  throw DomainError("preset must be 'quadratic' or 'quartic'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fisher information rates along Fokker-Planck channels";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<CertificateError>(m, "CertificateError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<IsoGaussian>(m, "IsoGaussian")
      .def(py::init<Vector, double>(), py::arg("mean"), py::arg("variance"))
      .def_property_readonly("mean", &IsoGaussian::mean)
      .def_property_readonly("variance", &IsoGaussian::variance)
      .def_property_readonly("dim", &IsoGaussian::dim)
      .def("__repr__", [](const IsoGaussian& g) {
        return "IsoGaussian(dim=" + std::to_string(g.dim()) +
               ", variance=" + std::to_string(g.variance()) + ")";
      });

  m.def("kl", &kl_iso_gaussian, py::arg("p"), py::arg("q"));
  m.def("fi", &fi_iso_gaussian, py::arg("p"), py::arg("q"));
  m.def(
      "channel_map",
      [](const IsoGaussian& p, const std::string& kind, double t, double parameter) {
        return channel_map(p, make_channel(kind, parameter), t);
      },
      py::arg("p"), py::arg("channel"), py::arg("t"), py::arg("parameter") = 1.0);
  m.def("proximal_step", &proximal_step_gaussian, py::arg("p"), py::arg("alpha"), py::arg("eta"));
  m.def(
      "fi_time_derivative",
      [](const IsoGaussian& p, const IsoGaussian& q, const std::string& kind, double parameter) {
        return fi_time_derivative_gaussian(p, q, make_channel(kind, parameter));
      },
      py::arg("p"), py::arg("q"), py::arg("channel"), py::arg("parameter") = 1.0);
  m.def("iteration_count", &iteration_count, py::arg("dim"), py::arg("smoothness"),
        py::arg("alpha"), py::arg("eps"));

  m.def("heat_slc_factor",
        [](double alpha, double t) { return bound_envelope_eval(BoundEnvelope::heat_slc(alpha), t); },
        py::arg("alpha"), py::arg("t"));
  m.def("ou_slc_factor",
        [](double alpha, double gamma, double t) {
          return bound_envelope_eval(BoundEnvelope::ou_slc(alpha, gamma), t);
        },
        py::arg("alpha"), py::arg("gamma"), py::arg("t"));
  m.def("proximal_rate_factor",
        [](double alpha, double eta, double k) {
          return bound_envelope_eval(BoundEnvelope::proximal_rate(alpha, eta), k);
        },
        py::arg("alpha"), py::arg("eta"), py::arg("k"));

  m.def(
      "counterexample_trace",
      [](double m_big, double halfwidth, std::vector<double> times, double step) {
        QuadratureSettings s;
        s.step = step;
        py::gil_scoped_release release;
        ChannelTrace trace = counterexample_trace(m_big, halfwidth, times, s);
        py::gil_scoped_acquire acquire;
        return trace_dict(trace);
      },
      py::arg("m_big") = 2.0, py::arg("halfwidth") = 2.0,
      py::arg("times") = default_counterexample_times(), py::arg("step") = 1e-3);
  m.def("counterexample_initial_slope", &counterexample_initial_slope, py::arg("m_big"),
        py::arg("halfwidth"));
  m.def(
      "ou_trace",
      [](const IsoGaussian& p0, const IsoGaussian& q0, double gamma, std::vector<double> times,
         std::optional<double> alpha) {
        return trace_dict(ou_trace_gaussian(p0, q0, gamma, times, alpha));
      },
      py::arg("p0"), py::arg("q0"), py::arg("gamma"), py::arg("times"),
      py::arg("alpha") = py::none());

  m.def(
      "gap",
      [](double eps, double fi_floor, double step) {
        const SpikeSpec spec = spike_spec(eps, fi_floor);
        const GapResult r = gap_check(spec, EvalGrid::symmetric(spec.a + 9.0, step));
        py::dict d;
        d["r_inf"] = r.r_inf;
        d["fi"] = r.fi;
        d["a"] = spec.a;
        d["M"] = spec.m_big;
        d["K"] = spec.k_count;
        d["eta"] = spec.width;
        return d;
      },
      py::arg("eps"), py::arg("fi_floor"), py::arg("step") = 1e-4);

  m.def(
      "run_sampler",
      [](Eigen::Index dim, double alpha, double eta, std::int64_t iters, std::uint64_t seed) {
        const SmoothPotential target = quadratic_potential(dim, alpha, Vector::Zero(dim));
        SamplerConfig cfg;
        cfg.eta = eta;
        cfg.iters = iters;
        cfg.seed = seed;
        SamplerRun run;
        {
          py::gil_scoped_release release;
          run = run_chain(target, Vector::Zero(dim), cfg);
        }
        py::dict d;
        d["mean"] = run.mean();
        d["variance"] = run.variance();
        d["mean_stderr"] = run.mean_stderr();
        d["variance_stderr"] = run.variance_stderr();
        d["mean_trials"] = run.mean_trials();
        d["trials_stderr"] = run.trials_stderr();
        d["x_final"] = run.x_final;
        return d;
      },
      py::arg("dim"), py::arg("alpha"), py::arg("eta"), py::arg("iters"), py::arg("seed") = 0);
  m.def("rgo_expected_trials", &rgo_expected_trials, py::arg("dim"), py::arg("eta"),
        py::arg("smoothness"));

  m.def(
      "prox_grad",
      [](const std::string& preset, Vector x0, double eta, std::int64_t k_max, double alpha) {
        const auto f = make_potential(preset, x0.size(), alpha, std::max(x0.cwiseAbs().maxCoeff(), 1e-3));
        return prox_grad_run(f, x0, eta, k_max).grad_sq_norms;
      },
      py::arg("preset"), py::arg("x0"), py::arg("eta"), py::arg("k_max"), py::arg("alpha") = 1.0);
  m.def(
      "gradient_flow",
      [](const std::string& preset, Vector x0, double t_end, double dt, double alpha) {
        const auto f = make_potential(preset, x0.size(), alpha, std::max(x0.cwiseAbs().maxCoeff(), 1e-3));
        const FlowTrace tr = gradient_flow(f, x0, t_end, dt);
        return std::make_tuple(tr.times, tr.grad_sq_norms);
      },
      py::arg("preset"), py::arg("x0"), py::arg("t_end"), py::arg("dt"), py::arg("alpha") = 1.0);
}
