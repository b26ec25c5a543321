#pragma once

#include <span>

namespace lastdd::num {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2Pi = 2.5066282746310005024;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double std_normal_pdf(double x);

/// Phi(x) via erfc, so both tails keep full relative precision.
double std_normal_cdf(double x);

/// log Phi(x), finite down to the far left tail.
double std_normal_log_cdf(double x);

/// exp(x^2/2) * Phi(-x). Stays finite and accurate for large positive x,
/// where it behaves like 1/(x sqrt(2 pi)).
double scaled_mills(double x);

/// E[(Z + y)^+] = phi(y) + y Phi(y) for standard normal Z. Strictly positive.
/// For y << 0 this is the small difference phi(|y|) - |y| Phi(-|y|); it is
/// evaluated without cancellation.
double normal_positive_part(double y);

/// log of normal_positive_part, usable where the value itself underflows.
double log_normal_positive_part(double y);

struct StdNormalEval {
  double x;
  double phi;
  double cdf;
  double log_cdf;
  double scaled_tail;
};

StdNormalEval evaluate_std_normal(double x);

/// A real number stored as sign * exp(log_magnitude). sign is 0 for an exact
/// zero, in which case log_magnitude is -inf.
struct SignedLog {
  int sign = 0;
  double log_magnitude = 0.0;

  double value() const;
};

SignedLog signed_log(double v);

/// Sum of signed exponentials, computed relative to the largest magnitude.
SignedLog log_sum_exp_combine(std::span<const SignedLog> terms);

}  // namespace lastdd::num
