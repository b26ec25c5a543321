#pragma once

#include <optional>
#include <span>
#include <string>

#include "lastdd/densities.hpp"

namespace lastdd {

enum class ObservationSource { manual, extracted };

/// A drawdown as seen at the end of the observation window.
struct DrawdownObservation {
  double length = 0.0;  // years since the last running maximum
  double depth = 0.0;   // running maximum minus final value, annual sigma units
  ObservationSource source = ObservationSource::manual;

  /// Throws DomainError if negative, longer than the horizon, or if exactly
  /// one of length and depth is zero.
  void validate(double horizon) const;
};

namespace inference {

/// Largest Sharpe ratio the update searches; results are capped here.
inline constexpr double kSharpeCap = 20.0;

enum class DriftPolicy { require_positive, allow_any };

/// l_p with P(length >= l_p) = tail_prob.
double length_quantile(const ProcessSpec& spec, double tail_prob,
                       DriftPolicy policy = DriftPolicy::require_positive);

/// d_p with P(depth >= d_p) = tail_prob.
double depth_quantile(const ProcessSpec& spec, double tail_prob,
                      DriftPolicy policy = DriftPolicy::require_positive);

enum class UpdateStatus {
  solved,            // tail(sharpe) == tail_prob
  zero_drift_floor,  // observation is extreme even at zero drift; sharpe = 0
  above_cap,         // observation unremarkable even at kSharpeCap
};

struct SharpeUpdate {
  double sharpe = 0.0;
  UpdateStatus status = UpdateStatus::solved;
};

/// Sharpe ratio at which the observed depth sits exactly at tail_prob.
SharpeUpdate update_sharpe_from_depth(double depth_obs, double horizon,
                                      double tail_prob);

/// Sharpe ratio at which the observed length sits exactly at tail_prob.
SharpeUpdate update_sharpe_from_length(double length_obs, double horizon,
                                       double tail_prob);

struct CorridorResult {
  double depth_star = 0.0;
  double lower = 0.0;  // P(length <= lower | depth_star) = lower_tail
  double upper = 0.0;  // P(length >= upper | depth_star) = upper_tail
  double coverage = 0.0;
};

/// Bounds of the conditional law of the length given the depth.
CorridorResult conditional_corridor(const ProcessSpec& spec, double depth_star,
                                    double lower_tail = 0.05,
                                    double upper_tail = 0.05);

/// P(length <= l | depth) from the joint density.
double conditional_length_cdf(const ProcessSpec& spec, double depth,
                              double length);

struct TestReport {
  ProcessSpec spec;
  DrawdownObservation observation;
  double significance = 0.05;
  double length_p_value = 1.0;
  double depth_p_value = 1.0;
  bool length_flagged = false;
  bool depth_flagged = false;
  std::optional<SharpeUpdate> sharpe_from_length;
  std::optional<SharpeUpdate> sharpe_from_depth;
  std::string verdict_text;
};

/// Tail p-values of the observation under spec, flags at significance and a
/// Sharpe update for every flagged dimension.
TestReport run_test(const ProcessSpec& spec, const DrawdownObservation& obs,
                    double significance = 0.05);

enum class QuantileMode { length, depth };

struct PowerLawFit {
  double coefficient = 0.0;
  double exponent = 0.0;
  double max_rel_residual = 0.0;
};

/// Least-squares fit of log q(SR) = log c + k log SR with k fixed at -2 for
/// lengths and -1 for depths.
PowerLawFit fit_quantile_power_law(double horizon, double tail_prob,
                                   std::span<const double> sr_grid,
                                   QuantileMode mode);

std::string to_string(UpdateStatus status);

}  // namespace inference
}  // namespace lastdd
