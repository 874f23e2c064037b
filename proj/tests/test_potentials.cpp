#include "fplab/error.hpp"
#include "fplab/potentials.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <random>

using namespace fplab;

TEST_CASE("quadratic potential") {
  const auto p = quadratic_potential(1, 1.0, Vector::Zero(1));
  CHECK(p.value(Vector::Constant(1, 2.0)) == 2.0);
  CHECK(p.gradient(Vector::Zero(1)).norm() == 0.0);
  const auto q = quadratic_potential(3, 2.0, Vector::Zero(3));
  CHECK(q.value(Vector::Ones(3)) == doctest::Approx(3.0));
  CHECK(q.alpha() == q.smoothness());
  REQUIRE(q.quadratic_center().has_value());
  CHECK_THROWS_AS(quadratic_potential(1, 0.0, Vector::Zero(1)), DomainError);
  CHECK_THROWS_AS(quadratic_potential(2, 1.0, Vector::Zero(1)), DomainError);
}

TEST_CASE("declared constants spot check") {
  std::mt19937_64 rng(3);
  const Vector c = Vector::LinSpaced(4, -1, 1);
  auto report = check_declared_constants(quadratic_potential(4, 0.7, c), rng, 50);
  CHECK(report.ok);
  CHECK(report.max_gradient_rel_error < 1e-6);
  report = check_declared_constants(quartic_potential(2, 1.0), rng, 50, 0.5);
  CHECK(report.ok);

  // curvature 2 declared as smoothness 1
  const SmoothPotential wrong(
      1, [](const Vector& x) { return x.squaredNorm(); },
      [](const Vector& x) { return Vector(2.0 * x); }, 0.5, 1.0);
  CHECK_FALSE(check_declared_constants(wrong, rng, 20).ok);

  const SmoothPotential bad_grad(
      1, [](const Vector& x) { return x.squaredNorm(); },
      [](const Vector& x) { return Vector(3.0 * x); }, 2.0, 2.0);
  CHECK_FALSE(check_declared_constants(bad_grad, rng, 20).ok);
}

TEST_CASE("counterexample potential") {
  const auto g = counterexample_potential(2, 2);
  CHECK(g.value(0.0) == 0.0);
  CHECK(g.value(2.0) == doctest::Approx(-4.0));
  CHECK(g.deriv1(3.0) == doctest::Approx(-3.0));
  CHECK(g.deriv1(2.0) == doctest::Approx(-4.0));
  CHECK(g.convexity_floor == -2.0);
  CHECK_THROWS_AS(counterexample_potential(1.9, 2), DomainError);
  CHECK_THROWS_AS(counterexample_potential(2, 1.5), DomainError);

  for (double m : {2.0, 3.0, 4.5}) {
    for (double l : {2.0, 3.0}) {
      const auto p = counterexample_potential(m, l);
      const oracle::Counterexample ref{m, l};
      for (double x = -20; x <= 20; x += 0.0137) {
        CHECK(p.value(x) == doctest::Approx(ref.value(x)).epsilon(1e-13));
        CHECK(p.deriv1(x) == doctest::Approx(ref.slope(x)).epsilon(1e-13));
        CHECK(p.deriv2(x) == ref.curvature(x));
        // x^2/2 + psi with |psi'| <= (M+1)L
        CHECK(std::abs(p.deriv1(x) - x) <= (m + 1) * l + 1e-12);
      }
      // branch continuity at the kinks
      for (double s : {-1.0, 1.0}) {
        const double k = s * l;
        CHECK(p.value(std::nextafter(k, 0.0)) == doctest::Approx(p.value(std::nextafter(k, 2 * k))));
        CHECK(p.deriv1(std::nextafter(k, 0.0)) == doctest::Approx(p.deriv1(std::nextafter(k, 2 * k))));
      }
      CHECK(oracle::derivative([&](double x) { return p.value(x); }, 0.7, 1e-5) ==
            doctest::Approx(p.deriv1(0.7)).epsilon(1e-8));
      CHECK(oracle::derivative([&](double x) { return p.value(x); }, 7.1, 1e-5) ==
            doctest::Approx(p.deriv1(7.1)).epsilon(1e-8));
    }
  }
}

TEST_CASE("spike spec") {
  const auto s = spike_spec(0.5, 10.0);
  CHECK(s.a == doctest::Approx(0.674489750196).epsilon(1e-10));
  CHECK(s.m_big == doctest::Approx(std::sqrt(std::exp(1.0) * 20.0)).epsilon(1e-12));
  CHECK(s.m_big == doctest::Approx(7.37331).epsilon(1e-5));
  CHECK(s.width * (2 * s.k_count + 1) == doctest::Approx(s.a).epsilon(1e-15));

  boost::math::normal_distribution<double> n01;
  for (double eps : {0.05, 0.1, 0.5, 0.9}) {
    for (double floor : {1.5, 10.0, 100.0}) {
      const auto sp = spike_spec(eps, floor);
      // N(0,1)([-a, a]) == eps, checked with std::erf
      CHECK(std::erf(sp.a / std::sqrt(2.0)) == doctest::Approx(eps).epsilon(1e-12));
      CHECK(sp.a == doctest::Approx(boost::math::quantile(n01, (1 + eps) / 2)).epsilon(1e-12));
      CHECK(sp.m_big == doctest::Approx(std::max(1 / sp.a, std::sqrt(std::exp(1.0) * floor / eps))));
      CHECK((2.0 * sp.k_count + 1) / sp.m_big >= sp.a);
      if (sp.k_count > 0) CHECK((2.0 * sp.k_count - 1) / sp.m_big < sp.a);
      CHECK(sp.width <= 1 / sp.m_big + 1e-15);
      CHECK(1 / sp.m_big <= sp.a + 1e-15);
    }
  }
  CHECK_THROWS_AS(spike_spec(0.0, 10), DomainError);
  CHECK_THROWS_AS(spike_spec(1.0, 10), DomainError);
  CHECK_THROWS_AS(spike_spec(0.5, 1.0), DomainError);
}

TEST_CASE("spike potential") {
  const auto spec = spike_spec(0.5, 10.0);
  const auto g = spike_potential(spec);
  CHECK(g.value(0.0) == doctest::Approx(1.0));
  CHECK(g.value(spec.width) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g.value(2 * spec.a) == 0.0);
  CHECK(g.value(-2 * spec.a) == 0.0);
  for (std::int64_t k = -spec.k_count; k <= spec.k_count; ++k) {
    CHECK(g.value(2.0 * k * spec.width) == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (double x = -1.5 * spec.a; x <= 1.5 * spec.a; x += 1e-3) {
    const double v = g.value(x);
    CHECK(v >= -1e-15);
    CHECK(v <= 1 + 1e-15);
    const double slope = std::abs(g.deriv1(x));
    if (std::abs(x) < spec.a) {
      CHECK(slope == doctest::Approx(1 / spec.width));
    } else if (std::abs(x) > spec.a) {
      CHECK(slope == 0.0);
    }
  }
  // int exp(-x^2/2 - g) in (0, sqrt(2 pi)]
  const double z = oracle::integrate([&](double x) { return std::exp(-0.5 * x * x - g.value(x)); },
                                     -12.0, 12.0);
  CHECK(z > 0.0);
  CHECK(z <= std::sqrt(2 * std::numbers::pi));
}

TEST_CASE("minimize") {
  const Vector c = Vector::Constant(1, 0.3);
  const auto q = quadratic_potential(1, 1.0, c);
  auto r = minimize(q, Vector::Constant(1, 5.0), 1e-12);
  CHECK(std::abs(r.x[0] - 0.3) <= 1e-12);
  CHECK(r.iterations == 1);

  const auto quartic = quartic_potential(1, 1.0);
  CHECK(quartic.smoothness() == 4.0);
  r = minimize(quartic, Vector::Constant(1, 1.0), 1e-10);
  CHECK(std::abs(r.x[0]) <= 1e-10);

  r = minimize(q, c, 1e-8);
  CHECK(r.iterations == 0);
  CHECK(r.x == c);

  // alpha declared far too large: cap is hit
  const SmoothPotential lying(
      1, [](const Vector& x) { return 0.005 * x.squaredNorm(); },
      [](const Vector& x) { return Vector(0.01 * x); }, 1.0, 1.0);
  CHECK_THROWS_AS(minimize(lying, Vector::Constant(1, 1.0), 1e-10), NumericalError);
  CHECK_THROWS_AS(minimize(q, c, 0.0), DomainError);
}
