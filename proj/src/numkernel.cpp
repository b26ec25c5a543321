#include "lastdd/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lastdd/errors.hpp"

namespace lastdd::num {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_finite(double x, const char* where) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(where) + ": argument must be finite");
  }
}

// Tail of the Laplace continued fraction for the Mills ratio,
//   R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))),
// returning c = 1/(x + 2/(x + 3/(x + ...))) so that R = 1/(x + c) and
// 1 - x R = c R. Valid for x > 2.5; the term count covers 1e-16 there.
double mills_cf_tail(double x) {
  const int terms = x < 4.0 ? 100 : (x < 8.0 ? 50 : 25);
  double t = 0.0;
  for (int k = terms; k >= 1; --k) {
    t = k / (x + t);
  }
  return t;
}

constexpr double kCfThreshold = 2.5;

}  // namespace

double std_normal_pdf(double x) {
  require_finite(x, "std_normal_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
  require_finite(x, "std_normal_cdf");
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_log_cdf(double x) {
  require_finite(x, "std_normal_log_cdf");
  if (x > 0.0) {
    return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  }
  if (x > -kCfThreshold) {
    return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  }
  // Phi(x) = phi(x) R(-x).
  const double z = -x;
  const double r = 1.0 / (z + mills_cf_tail(z));
  return -0.5 * z * z - kLogSqrt2Pi + std::log(r);
}

double scaled_mills(double x) {
  require_finite(x, "scaled_mills");
  if (x <= kCfThreshold) {
    return std::exp(0.5 * x * x) * 0.5 * std::erfc(x * kInvSqrt2);
  }
  return kInvSqrt2Pi / (x + mills_cf_tail(x));
}

double normal_positive_part(double y) {
  require_finite(y, "normal_positive_part");
  if (y >= -kCfThreshold) {
    return std_normal_pdf(y) + y * std_normal_cdf(y);
  }
  return std::exp(log_normal_positive_part(y));
}

double log_normal_positive_part(double y) {
  require_finite(y, "log_normal_positive_part");
  if (y >= -kCfThreshold) {
    return std::log(std_normal_pdf(y) + y * std_normal_cdf(y));
  }
  const double x = -y;
  const double c = mills_cf_tail(x);
  const double r = 1.0 / (x + c);
  return -0.5 * x * x - kLogSqrt2Pi + std::log(c * r);
}

StdNormalEval evaluate_std_normal(double x) {
  return StdNormalEval{x, std_normal_pdf(x), std_normal_cdf(x),
                       std_normal_log_cdf(x), scaled_mills(x)};
}

double SignedLog::value() const {
  return sign == 0 ? 0.0 : sign * std::exp(log_magnitude);
}

SignedLog signed_log(double v) {
  if (v == 0.0) {
    return SignedLog{0, -std::numeric_limits<double>::infinity()};
  }
  return SignedLog{v > 0.0 ? 1 : -1, std::log(std::fabs(v))};
}

SignedLog log_sum_exp_combine(std::span<const SignedLog> terms) {
  if (terms.empty()) {
    throw DomainError("log_sum_exp_combine: empty term list");
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) {
    if (t.sign != 0) {
      peak = std::max(peak, t.log_magnitude);
    }
  }
  if (!std::isfinite(peak)) {
    return SignedLog{0, -std::numeric_limits<double>::infinity()};
  }
  if (terms.size() == 1) {
    return terms.front();
  }
  double sum = 0.0;
  for (const auto& t : terms) {
    if (t.sign != 0) {
      sum += t.sign * std::exp(t.log_magnitude - peak);
    }
  }
  if (sum == 0.0) {
    return SignedLog{0, -std::numeric_limits<double>::infinity()};
  }
  return SignedLog{sum > 0.0 ? 1 : -1, peak + std::log(std::fabs(sum))};
}

}  // namespace lastdd::num
