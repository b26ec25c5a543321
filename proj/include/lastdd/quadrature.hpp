#pragma once

// Globally adaptive Gauss-Kronrod (10/21 point) integration on a finite
// interval. Integrands with endpoint singularities are expected to be mapped
// to smooth ones by the caller before they get here.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "lastdd/errors.hpp"

namespace lastdd::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 10000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
  int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 11> kNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};

inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208814005403, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for kNodes[1], kNodes[3], ..., kNodes[9].
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;

  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment gauss_kronrod21(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);

  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[10];
  double gauss = 0.0;
  double abs_sum = std::fabs(kronrod);
  std::array<double, 10> f_lo{};
  std::array<double, 10> f_hi{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kNodes[j];
    f_lo[j] = f(center - dx);
    f_hi[j] = f(center + dx);
    const double pair = f_lo[j] + f_hi[j];
    kronrod += kKronrodWeights[j] * pair;
    abs_sum += kKronrodWeights[j] * (std::fabs(f_lo[j]) + std::fabs(f_hi[j]));
    if (j % 2 == 1) {
      gauss += kGaussWeights[j / 2] * pair;
    }
  }
  if (!std::isfinite(kronrod)) {
    throw ConvergenceError("quadrature: integrand is not finite on [" +
                           std::to_string(lo) + ", " + std::to_string(hi) +
                           "]");
  }

  // QUADPACK-style error scaling.
  const double mean = 0.5 * kronrod;
  double asc = std::fabs(fc - mean) * kKronrodWeights[10];
  for (std::size_t j = 0; j < 10; ++j) {
    asc += kKronrodWeights[j] *
           (std::fabs(f_lo[j] - mean) + std::fabs(f_hi[j] - mean));
  }
  asc *= std::fabs(half);
  abs_sum *= std::fabs(half);

  double err = std::fabs((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0) {
    err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * abs_sum, err);
  }
  return Segment{lo, hi, kronrod * half, err};
}

}  // namespace detail

/// Integrate f over [lo, hi]. Bisects the segment with the largest error
/// estimate until the total error is within max(abs_tol, rel_tol * |I|).
/// Throws ConvergenceError when the subdivision budget runs out.
template <class F>
Result integrate(F&& f, double lo, double hi, const Options& opts = {}) {
  if (!(std::isfinite(lo) && std::isfinite(hi))) {
    throw DomainError("quadrature: integration limits must be finite");
  }
  if (lo == hi) {
    return Result{};
  }
  double sign = 1.0;
  if (hi < lo) {
    std::swap(lo, hi);
    sign = -1.0;
  }

  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gauss_kronrod21(f, lo, hi));
  double total = heap.top().value;
  double total_err = heap.top().error;
  int subdivisions = 0;

  while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::fabs(total))) {
    if (subdivisions >= opts.max_subdivisions) {
      throw ConvergenceError(
          "quadrature: no convergence after " + std::to_string(subdivisions) +
          " subdivisions (estimate " + std::to_string(total) + ", error " +
          std::to_string(total_err) + ")");
    }
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const auto left = detail::gauss_kronrod21(f, worst.lo, mid);
    const auto right = detail::gauss_kronrod21(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }

  // Re-sum to shed the drift of the running updates.
  double value = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return Result{sign * value, err, subdivisions, 21 * (2 * subdivisions + 1)};
}

}  // namespace lastdd::quad
