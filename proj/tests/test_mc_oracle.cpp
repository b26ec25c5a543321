#include <cmath>
#include <vector>

#include "doctest.h"
#include "lastdd/densities.hpp"
#include "lastdd/inference.hpp"
#include "lastdd/montecarlo.hpp"
#include "oracles.hpp"

using lastdd::ProcessSpec;
namespace dens = lastdd::densities;
namespace inf = lastdd::inference;
namespace mc = lastdd::mc;

namespace {

const mc::EmpiricalSample& sample_for(double sharpe) {
  static const mc::EmpiricalSample one = mc::simulate(
      mc::SimConfig{ProcessSpec{1.0, 10.0}, 257, 1'000'000, 20240101, true});
  static const mc::EmpiricalSample zero = mc::simulate(
      mc::SimConfig{ProcessSpec{0.0, 10.0}, 257, 100'000, 777, true});
  return sharpe == 0.0 ? zero : one;
}

double bin_fraction(const mc::EmpiricalSample& s, mc::TailMode mode, double lo,
                    double hi) {
  std::int64_t hits = 0;
  for (const auto& p : s.pairs) {
    const double v = mode == mc::TailMode::length ? p.length : p.depth;
    if (v >= lo && v < hi) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(s.pairs.size());
}

double tolerance(double p, std::size_t n, double allowance) {
  return 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)) + allowance;
}

}  // namespace

TEST_CASE("length histogram matches rho") {
  const ProcessSpec spec{1.0, 10.0};
  const auto& s = sample_for(1.0);
  for (double lo = 0.25; lo < 3.0; lo += 0.25) {
    const double hi = lo + 0.25;
    const double analytic =
        oracle::gauss_legendre([&](double l) { return dens::rho_length(spec, l); },
                               lo, hi, 8);
    const double freq = bin_fraction(s, mc::TailMode::length, lo, hi);
    CAPTURE(lo);
    CHECK(std::fabs(freq - analytic) < tolerance(analytic, s.pairs.size(), 0.003));
  }
}

TEST_CASE("depth histogram matches psi") {
  const ProcessSpec spec{1.0, 10.0};
  const auto& s = sample_for(1.0);
  for (double lo = 0.1; lo < 2.0; lo += 0.1) {
    const double hi = lo + 0.1;
    // Sampling once per step lowers the observed maximum by about
    // 0.5826 sqrt(dt), so the discrete bin [lo, hi) maps to a shifted one.
    const double shift = 0.5826 / std::sqrt(257.0);
    const double analytic = dens::depth_tail_prob(spec, lo + shift) -
                            dens::depth_tail_prob(spec, hi + shift);
    const double freq = bin_fraction(s, mc::TailMode::depth, lo, hi);
    CAPTURE(lo);
    CHECK(std::fabs(freq - analytic) < tolerance(analytic, s.pairs.size(), 0.005));
  }
}

TEST_CASE("length tails and the length quantile threshold") {
  const ProcessSpec spec{1.0, 10.0};
  const auto& s = sample_for(1.0);
  for (double l : {0.5, 1.0, 2.0, 4.0}) {
    const auto est = mc::empirical_tail(s, mc::TailMode::length, l);
    const double p = dens::length_tail_prob(spec, l);
    CAPTURE(l);
    CHECK(std::fabs(est.frequency - p) <= 4.0 * est.std_error + 0.005);
  }
  const double q = inf::length_quantile(spec, 0.05);
  CHECK(std::fabs(q - 2.14) < 0.05);
  const auto est = mc::empirical_tail(s, mc::TailMode::length, q);
  CHECK(std::fabs(est.frequency - 0.05) <= 4.0 * est.std_error + 0.005);
}

TEST_CASE("zero drift: arcsine lengths and half-normal depths") {
  const ProcessSpec spec{0.0, 10.0};
  const auto& s = sample_for(0.0);
  std::vector<double> lengths;
  lengths.reserve(s.pairs.size());
  for (const auto& p : s.pairs) lengths.push_back(p.length);
  const double ks = mc::ks_distance(lengths, [](double l) {
    return 2.0 / M_PI * std::asin(std::sqrt(std::clamp(l / 10.0, 0.0, 1.0)));
  });
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(lengths.size())) + 2.0 / 257.0);
  for (double d : {0.5, 1.0, 2.0, 4.0, 6.0}) {
    const auto est = mc::empirical_tail(s, mc::TailMode::depth, d);
    CAPTURE(d);
    CHECK(std::fabs(est.frequency - oracle::half_normal_tail(10.0, d)) <=
          4.0 * est.std_error + 0.005);
  }
}

TEST_CASE("conditional slice agrees with the corridor") {
  const ProcessSpec spec{1.0, 10.0};
  const auto& s = sample_for(1.0);
  const auto corridor = inf::conditional_corridor(spec, 1.0);
  const auto slice = mc::conditional_slice(s, 1.0, 0.05);
  REQUIRE(slice.size() > 1000);
  CHECK(std::fabs(mc::empirical_quantile(slice, 0.05) / corridor.lower - 1.0) < 0.1);
  CHECK(std::fabs(mc::empirical_quantile(slice, 0.95) / corridor.upper - 1.0) < 0.1);
  std::size_t inside = 0;
  for (double l : slice) {
    if (l >= corridor.lower && l <= corridor.upper) ++inside;
  }
  const double coverage = static_cast<double>(inside) / slice.size();
  CHECK(std::fabs(coverage - 0.90) < 0.03);
}

TEST_CASE("conditional slice at SR 1.6 lower quantile") {
  const mc::EmpiricalSample s = mc::simulate(
      mc::SimConfig{ProcessSpec{1.6, 10.0}, 257, 400'000, 31337, true});
  const auto slice = mc::conditional_slice(s, 0.95, 0.05);
  REQUIRE(slice.size() > 500);
  CHECK(std::fabs(mc::empirical_quantile(slice, 0.05) - 0.167) < 0.25 * 0.167);
}
