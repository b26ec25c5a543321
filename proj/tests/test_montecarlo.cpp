#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "lastdd/densities.hpp"
#include "lastdd/montecarlo.hpp"
#include "lastdd/numkernel.hpp"
#include "lastdd/philox.hpp"

using namespace lastdd;
using namespace lastdd::mc;

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu}) ==
        PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u}) ==
        PhiloxBlock{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniform mapping stays inside the open interval") {
  CHECK(to_open_unit(0) > 0.0);
  CHECK(to_open_unit(0xffffffffu) < 1.0);
}

TEST_CASE("inverse normal cdf inverts the cdf") {
  CHECK(inverse_normal_cdf(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-15));
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  for (double p : {1e-300, 1e-100, 1e-20, 1e-10, 1e-4, 0.02, 0.3, 0.49, 0.51,
                   0.8, 0.99, 1.0 - 1e-10}) {
    const double x = inverse_normal_cdf(p);
    CHECK(num::std_normal_cdf(x) == doctest::Approx(p).epsilon(1e-13));
  }
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), DomainError);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), DomainError);
}

TEST_CASE("config validation") {
  SimConfig cfg{{1.0, 10.0}, 257, 10, 1, true};
  CHECK(cfg.total_steps() == 2570);
  CHECK_NOTHROW(cfg.validate());
  cfg.steps_per_year = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.steps_per_year = 1;
  cfg.spec.horizon = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = SimConfig{{1.0, 10.0}, 257, 0, 1, true};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("sample invariants") {
  for (bool anti : {true, false}) {
    const auto s = simulate(SimConfig{{0.7, 3.0}, 52, 2001, 9, anti});
    REQUIRE(s.pairs.size() == 2001);
    REQUIRE(s.terminal.size() == 2001);
    for (std::size_t i = 0; i < s.pairs.size(); ++i) {
      const auto& p = s.pairs[i];
      CHECK(p.length >= 0.0);
      CHECK(p.length <= 3.0);
      CHECK(p.depth >= 0.0);
      if (p.length == 0.0) CHECK(p.depth == 0.0);
    }
  }
}

TEST_CASE("antithetic partners mirror each other's shocks") {
  const auto s = simulate(SimConfig{{0.4, 2.0}, 100, 6, 3, true});
  for (std::size_t i = 0; i < 6; i += 2) {
    CHECK(s.terminal[i] + s.terminal[i + 1] == doctest::Approx(2.0 * 0.4 * 2.0));
  }
  // A single path or an odd tail path is simply unpaired.
  CHECK(simulate(SimConfig{{0.4, 2.0}, 100, 1, 3, true}).pairs.size() == 1);
}

TEST_CASE("results do not depend on the worker count") {
  const SimConfig cfg{{1.0, 10.0}, 257, 1000, 42, true};
  const auto a = simulate(cfg, 1);
  const auto b = simulate(cfg, 3);
  const auto c = simulate(cfg, 8);
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].length == b.pairs[i].length);
    CHECK(a.pairs[i].depth == b.pairs[i].depth);
    CHECK(a.pairs[i].depth == c.pairs[i].depth);
    CHECK(a.terminal[i] == c.terminal[i]);
  }
  const auto other_seed = simulate(SimConfig{{1.0, 10.0}, 257, 1000, 43, true}, 1);
  CHECK(other_seed.terminal[0] != a.terminal[0]);
}

TEST_CASE("terminal values have the drifted Brownian mean and variance") {
  const std::int64_t n = 100000;
  const double mu = 1.0;
  const double T = 10.0;
  const auto s = simulate(SimConfig{{mu, T}, 257, n, 11, false});
  const double mean =
      std::accumulate(s.terminal.begin(), s.terminal.end(), 0.0) / n;
  double var = 0.0;
  for (double x : s.terminal) var += (x - mean) * (x - mean);
  var /= (n - 1);
  CHECK(std::fabs(mean - mu * T) < 4.0 * std::sqrt(T / n));
  CHECK(std::fabs(var - T) < 4.0 * T * std::sqrt(2.0 / n));
}

TEST_CASE("zero drift: mean depth is close to E|N(0,1)| and biased low") {
  const std::int64_t n = 100000;
  const auto s = simulate(SimConfig{{0.0, 1.0}, 257, n, 5, true});
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& p : s.pairs) {
    sum += p.depth;
    sq += p.depth * p.depth;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  const double exact = std::sqrt(2.0 / std::numbers::pi);
  // Sampling the path daily can only miss the true maximum: the bias is
  // negative, of order 0.58 sqrt(dt).
  CHECK(mean < exact + 4.0 * se);
  CHECK(mean > exact - 4.0 * se - 0.6 / std::sqrt(257.0));
}

TEST_CASE("zero drift: lengths follow the arcsine law") {
  const std::int64_t n = 100000;
  const double T = 10.0;
  const auto s = simulate(SimConfig{{0.0, T}, 257, n, 17, true});
  std::vector<double> lengths;
  for (const auto& p : s.pairs) lengths.push_back(p.length);
  const double ks = ks_distance(lengths, [&](double l) {
    return 2.0 / std::numbers::pi * std::asin(std::sqrt(std::min(1.0, l / T)));
  });
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)) + 2.0 / 257.0);
}

TEST_CASE("high drift pins the maximum near the end") {
  const auto s = simulate(SimConfig{{10.0, 10.0}, 257, 2000, 3, true});
  std::size_t short_ones = 0;
  for (const auto& p : s.pairs) short_ones += p.length < 0.5 ? 1 : 0;
  CHECK(static_cast<double>(short_ones) / 2000.0 > 0.99);
  CHECK(densities::length_tail_prob({10.0, 10.0}, 0.5) < 0.01);
}

TEST_CASE("empirical tail edge cases") {
  const auto s = simulate(SimConfig{{1.0, 2.0}, 100, 500, 1, true});
  const auto all = empirical_tail(s, TailMode::length, 0.0);
  CHECK(all.frequency == 1.0);
  CHECK(all.std_error == 0.0);
  CHECK(empirical_tail(s, TailMode::length, 2.5).frequency == 0.0);
  CHECK(empirical_tail(s, TailMode::depth, 0.0).frequency == 1.0);
  const auto mid = empirical_tail(s, TailMode::depth, 0.3);
  CHECK(mid.std_error ==
        doctest::Approx(std::sqrt(mid.frequency * (1 - mid.frequency) / 500)));
  EmpiricalSample empty;
  CHECK_THROWS_AS(empirical_tail(empty, TailMode::depth, 1.0), DomainError);
}

TEST_CASE("conditional slices") {
  EmpiricalSample s;
  s.pairs = {{0.1, 1.0}, {0.2, 1.04}, {0.3, 0.5}, {0.4, 0.97}, {0.0, 0.0}};
  auto slice = conditional_slice(s, 1.0, 0.05);
  CHECK(slice == std::vector<double>{0.1, 0.2, 0.4});
  // Band 0.5 around 0.7 covers [0.35, 1.05]: every positive depth.
  CHECK(conditional_slice(s, 0.7, 0.5).size() == 4);
  CHECK_THROWS_AS(conditional_slice(s, 3.0, 0.05), InsufficientSample);
  CHECK_THROWS_AS(conditional_slice(s, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(conditional_slice(s, 1.0, 0.6), DomainError);
  try {
    conditional_slice(s, 3.0, 0.05);
  } catch (const InsufficientSample& e) {
    CHECK(std::string(e.what()).find("0 of 5") != std::string::npos);
  }
}

TEST_CASE("empirical quantile and KS distance") {
  CHECK(empirical_quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == doctest::Approx(2.5));
  CHECK(empirical_quantile({3.0, 1.0, 2.0, 4.0}, 0.0) == 1.0);
  CHECK(empirical_quantile({3.0, 1.0, 2.0, 4.0}, 1.0) == 4.0);
  CHECK_THROWS_AS(empirical_quantile({}, 0.5), DomainError);
  // Two atoms at 0 and 1 against the uniform CDF: the jump at 1 is 1/2 high.
  CHECK(ks_distance({0.0, 1.0}, [](double x) { return x; }) == doctest::Approx(0.5));
  CHECK(ks_distance({0.25, 0.75}, [](double x) { return x; }) == doctest::Approx(0.25));
}

TEST_CASE("sample CSV dump") {
  EmpiricalSample s;
  s.pairs = {{0.5, 1.25}, {0.0, 0.0}};
  std::ostringstream out;
  write_sample_csv(out, s);
  CHECK(out.str() == "path_index,length_years,depth_sigma\n0,0.5,1.25\n1,0,0\n");
}
