#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lastdd/errors.hpp"
#include "lastdd/quadrature.hpp"

using lastdd::quad::integrate;

TEST_CASE("polynomials up to degree 31 are integrated exactly") {
  const auto r = integrate([](double x) { return std::pow(x, 31); }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(1.0 / 32.0).epsilon(1e-14));
}

TEST_CASE("smooth integrands") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value ==
        doctest::Approx(2.0).epsilon(1e-13));
  CHECK(integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0).value ==
        doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("reversed limits flip the sign") {
  const auto a = integrate([](double x) { return x * x; }, 0.0, 2.0).value;
  const auto b = integrate([](double x) { return x * x; }, 2.0, 0.0).value;
  CHECK(a == doctest::Approx(8.0 / 3.0));
  CHECK(b == doctest::Approx(-a));
  CHECK(integrate([](double) { return 1.0; }, 1.0, 1.0).value == 0.0);
}

TEST_CASE("inverse square-root singularity: slow raw, smooth after sin^2 map") {
  // int_0^1 dx / sqrt(x) = 2; with x = sin^2 t it becomes int 2 cos t dt.
  const auto raw =
      integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  const auto mapped = integrate([](double t) { return 2.0 * std::cos(t); },
                                0.0, std::numbers::pi / 2.0);
  CHECK(raw.value == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(mapped.value == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(raw.subdivisions > mapped.subdivisions);
}

TEST_CASE("sharp peak is resolved adaptively") {
  const double w = 1e-2;
  const auto r = integrate(
      [w](double x) { return std::exp(-0.5 * (x - 0.3) * (x - 0.3) / (w * w)); },
      0.0, 1.0);
  CHECK(r.value == doctest::Approx(w * std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-9));
}

TEST_CASE("subdivision budget exhaustion is an error, not a result") {
  lastdd::quad::Options opts;
  opts.max_subdivisions = 3;
  CHECK_THROWS_AS(integrate([](double x) { return std::sin(1.0 / x); }, 1e-6,
                            1.0, opts),
                  lastdd::ConvergenceError);
}

TEST_CASE("non-finite integrand values are reported") {
  CHECK_THROWS_AS(integrate([](double) { return std::nan(""); }, 0.0, 1.0),
                  lastdd::ConvergenceError);
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 0.0, INFINITY),
                  lastdd::DomainError);
}
