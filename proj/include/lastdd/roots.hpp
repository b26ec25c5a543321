#pragma once

#include <functional>

namespace lastdd::roots {

struct Options {
  double x_tol = 1e-12;
  double f_tol = 0.0;
  int max_iterations = 300;
};

/// Brent's method: bisection safeguarding inverse-quadratic / secant steps.
/// f(lo) and f(hi) must have opposite signs (or one of them be zero).
/// Stops when |f| <= f_tol or the bracket is narrower than x_tol.
double brent(const std::function<double(double)>& f, double lo, double hi,
             const Options& opts = {});

}  // namespace lastdd::roots
