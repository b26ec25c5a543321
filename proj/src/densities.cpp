#include "lastdd/densities.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "lastdd/errors.hpp"
#include "lastdd/numkernel.hpp"

namespace lastdd {

void ProcessSpec::validate() const {
  if (!std::isfinite(sharpe)) {
    throw DomainError("process: sharpe ratio must be finite");
  }
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw DomainError("process: horizon must be positive, got " +
                      std::to_string(horizon));
  }
}

namespace densities {
namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kLog2 = std::numbers::ln2;
constexpr double kLog4 = 2.0 * std::numbers::ln2;

void require_interior_length(const ProcessSpec& spec, double length,
                             const char* where) {
  if (!(length > 0.0 && length < spec.horizon)) {
    throw DomainError(std::string(where) + ": length must lie in (0, " +
                      std::to_string(spec.horizon) + "), got " +
                      std::to_string(length));
  }
}

void require_positive_depth(double depth, const char* where) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw DomainError(std::string(where) + ": depth must be positive, got " +
                      std::to_string(depth));
  }
}

// log of 4 (d/l) phi(z) h(mu sqrt(t)) with z = d/sqrt(l) + mu sqrt(l):
// the joint density times dl/dtheta = 2 sqrt(l) sqrt(t).
double log_joint_angle(double mu, double depth, double sqrt_l, double sqrt_t) {
  const double z = depth / sqrt_l + mu * sqrt_l;
  return kLog4 + std::log(depth) - 2.0 * std::log(sqrt_l) - 0.5 * z * z -
         num::kLogSqrt2Pi + num::log_normal_positive_part(mu * sqrt_t);
}

double integrate_angle(const auto& f, double lo, double hi) {
  return quad::integrate(f, lo, hi, quadrature_options()).value;
}

double clamp_probability(double p) {
  return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

}  // namespace

quad::Options quadrature_options() { return quad::Options{1e-10, 1e-8, 10000}; }

double length_to_angle(double horizon, double length) {
  return std::asin(std::sqrt(length / horizon));
}

double angle_to_length(double horizon, double theta) {
  const double s = std::sin(theta);
  return horizon * s * s;
}

double rho_length(const ProcessSpec& spec, double length) {
  spec.validate();
  require_interior_length(spec, length, "rho_length");
  const double mu = spec.sharpe;
  const double t = spec.horizon - length;
  // rho = 2 * [h(mu sqrt t) / sqrt t] * [h(-mu sqrt l) / sqrt l]
  const double log_rho = kLog2 + num::log_normal_positive_part(mu * std::sqrt(t)) +
                         num::log_normal_positive_part(-mu * std::sqrt(length)) -
                         0.5 * std::log(t) - 0.5 * std::log(length);
  return std::exp(log_rho);
}

double rho_length_angle(const ProcessSpec& spec, double theta) {
  const double root_t = std::sqrt(spec.horizon);
  const double mu = spec.sharpe;
  return std::exp(kLog4 +
                  num::log_normal_positive_part(mu * root_t * std::cos(theta)) +
                  num::log_normal_positive_part(-mu * root_t * std::sin(theta)));
}

double joint_dl_density(const ProcessSpec& spec, double depth, double length) {
  spec.validate();
  require_positive_depth(depth, "joint_dl_density");
  require_interior_length(spec, length, "joint_dl_density");
  const double sqrt_l = std::sqrt(length);
  const double sqrt_t = std::sqrt(spec.horizon - length);
  // Undo dl/dtheta = 2 sqrt(l) sqrt(t).
  return std::exp(log_joint_angle(spec.sharpe, depth, sqrt_l, sqrt_t) - kLog2 -
                  std::log(sqrt_l) - std::log(sqrt_t));
}

double joint_dl_density_angle(const ProcessSpec& spec, double depth,
                              double theta) {
  const double root_t = std::sqrt(spec.horizon);
  const double sqrt_l = root_t * std::sin(theta);
  if (sqrt_l <= 0.0) {
    return 0.0;
  }
  const double z = depth / sqrt_l;
  if (z > 1e150) {
    return 0.0;
  }
  return std::exp(
      log_joint_angle(spec.sharpe, depth, sqrt_l, root_t * std::cos(theta)));
}

double depth_tail_angle(const ProcessSpec& spec, double depth, double theta) {
  // Inner depth integral in closed form:
  //   int_d^inf 2 u / l^{3/2} phi((u + mu l)/sqrt l) du
  //     = [h(-z) + (d / sqrt l) Phi(-z)] * 2 / sqrt l,   z = d/sqrt l + mu sqrt l,
  // a sum of two non-negative terms. Times 2 h(mu sqrt t)/sqrt t and
  // dl/dtheta this gives 4 h(mu sqrt t) [h(-z) + (d/sqrt l) Phi(-z)].
  const double root_t = std::sqrt(spec.horizon);
  const double mu = spec.sharpe;
  const double sqrt_l = root_t * std::sin(theta);
  const double sqrt_t = root_t * std::cos(theta);
  if (sqrt_l <= 0.0) {
    return 0.0;
  }
  const double ratio = depth / sqrt_l;
  if (ratio > 1e150) {
    return 0.0;
  }
  const double z = ratio + mu * sqrt_l;
  std::array<num::SignedLog, 2> terms = {
      num::SignedLog{1, num::log_normal_positive_part(-z)},
      depth > 0.0
          ? num::SignedLog{1, std::log(ratio) + num::std_normal_log_cdf(-z)}
          : num::SignedLog{0, -HUGE_VAL}};
  const auto inner = num::log_sum_exp_combine(terms);
  return std::exp(kLog4 + num::log_normal_positive_part(mu * sqrt_t) +
                  inner.log_magnitude);
}

double psi_depth(const ProcessSpec& spec, double depth) {
  spec.validate();
  require_positive_depth(depth, "psi_depth");
  return integrate_angle(
      [&](double th) { return joint_dl_density_angle(spec, depth, th); }, 0.0,
      kHalfPi);
}

double joint_length_mass(const ProcessSpec& spec, double depth, double l_lo,
                         double l_hi) {
  spec.validate();
  require_positive_depth(depth, "joint_length_mass");
  if (!(l_lo >= 0.0 && l_lo <= l_hi && l_hi <= spec.horizon)) {
    throw DomainError("joint_length_mass: need 0 <= l_lo <= l_hi <= horizon");
  }
  return integrate_angle(
      [&](double th) { return joint_dl_density_angle(spec, depth, th); },
      length_to_angle(spec.horizon, l_lo),
      length_to_angle(spec.horizon, l_hi));
}

double length_tail_prob(const ProcessSpec& spec, double length) {
  spec.validate();
  if (!(length >= 0.0 && length <= spec.horizon)) {
    throw DomainError("length_tail_prob: length must lie in [0, " +
                      std::to_string(spec.horizon) + "], got " +
                      std::to_string(length));
  }
  if (length == 0.0) return 1.0;
  if (length == spec.horizon) return 0.0;
  return clamp_probability(integrate_angle(
      [&](double th) { return rho_length_angle(spec, th); },
      length_to_angle(spec.horizon, length), kHalfPi));
}

double depth_tail_prob(const ProcessSpec& spec, double depth) {
  spec.validate();
  if (!(depth >= 0.0) || !std::isfinite(depth)) {
    throw DomainError("depth_tail_prob: depth must be non-negative, got " +
                      std::to_string(depth));
  }
  if (depth == 0.0) return 1.0;
  return clamp_probability(integrate_angle(
      [&](double th) { return depth_tail_angle(spec, depth, th); }, 0.0,
      kHalfPi));
}

}  // namespace densities
}  // namespace lastdd
