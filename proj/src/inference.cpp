#include "lastdd/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "lastdd/errors.hpp"
#include "lastdd/roots.hpp"

namespace lastdd {

void DrawdownObservation::validate(double horizon) const {
  if (!(length >= 0.0) || !(depth >= 0.0) || !std::isfinite(length) ||
      !std::isfinite(depth)) {
    throw DomainError("observation: length and depth must be non-negative");
  }
  if (length > horizon) {
    std::ostringstream msg;
    msg << "observation: length " << length << " exceeds horizon " << horizon;
    throw DomainError(msg.str());
  }
  if ((length == 0.0) != (depth == 0.0)) {
    throw DomainError(
        "observation: length and depth must both be zero (at the running "
        "maximum) or both be positive");
  }
}

namespace inference {
namespace {

constexpr double kProbTol = 1e-10;

void require_tail(double p, const char* where) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << where << ": tail probability must lie in (0, 1), got " << p;
    throw DomainError(msg.str());
  }
}

void require_drift(const ProcessSpec& spec, DriftPolicy policy,
                   const char* where) {
  spec.validate();
  if (policy == DriftPolicy::require_positive && !(spec.sharpe > 0.0)) {
    std::ostringstream msg;
    msg << where << ": the drawdown test assumes a profitable strategy; "
        << "sharpe must be positive, got " << spec.sharpe;
    throw DomainError(msg.str());
  }
}

// Solve tail(sharpe) = p for a tail that decreases in sharpe.
SharpeUpdate invert_in_sharpe(const std::function<double(double)>& tail,
                              double p) {
  const double at_zero = tail(0.0);
  if (at_zero <= p) {
    return SharpeUpdate{0.0, UpdateStatus::zero_drift_floor};
  }
  const double at_cap = tail(kSharpeCap);
  if (at_cap >= p) {
    return SharpeUpdate{kSharpeCap, UpdateStatus::above_cap};
  }
  const double sr = roots::brent([&](double s) { return tail(s) - p; }, 0.0,
                                 kSharpeCap, roots::Options{1e-10, kProbTol});
  return SharpeUpdate{sr, UpdateStatus::solved};
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

std::string verdict(const TestReport& r) {
  std::ostringstream out;
  const std::string level = format_number(100.0 * r.significance) + "%";
  if (!r.length_flagged && !r.depth_flagged) {
    out << "Within the " << level << " bounds on both length and depth: "
        << "the drawdown is consistent with a Brownian strategy of Sharpe "
        << format_number(r.spec.sharpe) << " (Scenario 1, business as usual).";
    return out.str();
  }
  out << "Flagged on " << (r.length_flagged ? "length" : "")
      << (r.length_flagged && r.depth_flagged ? " and " : "")
      << (r.depth_flagged ? "depth" : "") << " at the " << level
      << " level. Possible explanations:\n"
      << "  Scenario 1: model and assumed Sharpe ratio are both right; this is "
         "a "
      << level << " tail event.\n"
      << "  Scenario 2: the Brownian model holds but the Sharpe ratio "
      << format_number(r.spec.sharpe) << " is overestimated";
  double conservative = r.spec.sharpe;
  for (const auto& u : {r.sharpe_from_length, r.sharpe_from_depth}) {
    if (u) conservative = std::min(conservative, u->sharpe);
  }
  out << "; a Sharpe ratio of " << format_number(conservative)
      << " would make the observation a borderline " << level << " event.\n"
      << "  Scenario 3: the Brownian model understates drawdown risk "
         "(non-Gaussian returns, changing volatility, positively "
         "autocorrelated returns).\n"
      << "The test cannot tell Scenario 1 from Scenario 2; treat the flag as a "
         "precautionary signal.";
  return out.str();
}

}  // namespace

double length_quantile(const ProcessSpec& spec, double tail_prob,
                       DriftPolicy policy) {
  require_drift(spec, policy, "length_quantile");
  require_tail(tail_prob, "length_quantile");
  const double horizon = spec.horizon;
  return roots::brent(
      [&](double l) { return densities::length_tail_prob(spec, l) - tail_prob; },
      0.0, horizon, roots::Options{1e-10 * horizon, kProbTol});
}

double depth_quantile(const ProcessSpec& spec, double tail_prob,
                      DriftPolicy policy) {
  require_drift(spec, policy, "depth_quantile");
  require_tail(tail_prob, "depth_quantile");
  double lo = 0.0;
  double hi = std::sqrt(spec.horizon);
  while (densities::depth_tail_prob(spec, hi) >= tail_prob) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) {
      throw ConvergenceError("depth_quantile: could not bracket the quantile");
    }
  }
  return roots::brent(
      [&](double d) { return densities::depth_tail_prob(spec, d) - tail_prob; },
      lo, hi, roots::Options{1e-10 * std::sqrt(spec.horizon), kProbTol});
}

SharpeUpdate update_sharpe_from_depth(double depth_obs, double horizon,
                                      double tail_prob) {
  require_tail(tail_prob, "update_sharpe_from_depth");
  ProcessSpec{0.0, horizon}.validate();
  if (!(depth_obs > 0.0) || !std::isfinite(depth_obs)) {
    throw DomainError("update_sharpe_from_depth: observed depth must be positive");
  }
  return invert_in_sharpe(
      [&](double sr) {
        return densities::depth_tail_prob(ProcessSpec{sr, horizon}, depth_obs);
      },
      tail_prob);
}

SharpeUpdate update_sharpe_from_length(double length_obs, double horizon,
                                       double tail_prob) {
  require_tail(tail_prob, "update_sharpe_from_length");
  ProcessSpec{0.0, horizon}.validate();
  if (!(length_obs > 0.0 && length_obs < horizon)) {
    std::ostringstream msg;
    msg << "update_sharpe_from_length: observed length must lie in (0, "
        << horizon << "), got " << length_obs;
    throw DomainError(msg.str());
  }
  return invert_in_sharpe(
      [&](double sr) {
        return densities::length_tail_prob(ProcessSpec{sr, horizon},
                                           length_obs);
      },
      tail_prob);
}

double conditional_length_cdf(const ProcessSpec& spec, double depth,
                              double length) {
  const double total = densities::psi_depth(spec, depth);
  return densities::joint_length_mass(spec, depth, 0.0, length) / total;
}

CorridorResult conditional_corridor(const ProcessSpec& spec, double depth_star,
                                    double lower_tail, double upper_tail) {
  spec.validate();
  if (!(depth_star > 0.0) || !std::isfinite(depth_star)) {
    throw DomainError("conditional_corridor: depth must be positive");
  }
  for (double p : {lower_tail, upper_tail}) {
    if (!(p > 0.0 && p < 0.5)) {
      throw DomainError("conditional_corridor: tails must lie in (0, 0.5)");
    }
  }
  const double horizon = spec.horizon;
  const double total = densities::psi_depth(spec, depth_star);
  const roots::Options opts{1e-10 * horizon, kProbTol};

  const double lower = roots::brent(
      [&](double l) {
        return densities::joint_length_mass(spec, depth_star, 0.0, l) / total -
               lower_tail;
      },
      0.0, horizon, opts);
  const double upper = roots::brent(
      [&](double l) {
        return densities::joint_length_mass(spec, depth_star, l, horizon) /
                   total -
               upper_tail;
      },
      0.0, horizon, opts);
  if (!(lower < upper)) {
    throw ConvergenceError("conditional_corridor: quantiles out of order");
  }
  return CorridorResult{depth_star, lower, upper,
                        1.0 - lower_tail - upper_tail};
}

TestReport run_test(const ProcessSpec& spec, const DrawdownObservation& obs,
                    double significance) {
  require_drift(spec, DriftPolicy::require_positive, "run_test");
  if (!(significance > 0.0 && significance < 1.0)) {
    throw DomainError("run_test: significance must lie in (0, 1)");
  }
  obs.validate(spec.horizon);

  TestReport r;
  r.spec = spec;
  r.observation = obs;
  r.significance = significance;
  r.length_p_value = densities::length_tail_prob(spec, obs.length);
  r.depth_p_value = densities::depth_tail_prob(spec, obs.depth);
  r.length_flagged = r.length_p_value < significance;
  r.depth_flagged = r.depth_p_value < significance;
  if (r.length_flagged) {
    r.sharpe_from_length =
        update_sharpe_from_length(obs.length, spec.horizon, significance);
  }
  if (r.depth_flagged) {
    r.sharpe_from_depth =
        update_sharpe_from_depth(obs.depth, spec.horizon, significance);
  }
  r.verdict_text = verdict(r);
  return r;
}

PowerLawFit fit_quantile_power_law(double horizon, double tail_prob,
                                   std::span<const double> sr_grid,
                                   QuantileMode mode) {
  if (sr_grid.size() < 4) {
    throw DomainError("fit_quantile_power_law: need at least 4 grid points");
  }
  if (std::any_of(sr_grid.begin(), sr_grid.end(),
                  [](double s) { return !(s > 0.0) || !std::isfinite(s); })) {
    throw DomainError("fit_quantile_power_law: grid values must be positive");
  }
  const auto [lo, hi] = std::minmax_element(sr_grid.begin(), sr_grid.end());
  if (*lo == *hi) {
    throw DomainError("fit_quantile_power_law: grid has a single distinct value");
  }

  const double exponent = mode == QuantileMode::length ? -2.0 : -1.0;
  std::vector<double> quantiles;
  quantiles.reserve(sr_grid.size());
  double log_c = 0.0;
  for (double sr : sr_grid) {
    const ProcessSpec spec{sr, horizon};
    const double q = mode == QuantileMode::length
                         ? length_quantile(spec, tail_prob)
                         : depth_quantile(spec, tail_prob);
    quantiles.push_back(q);
    log_c += std::log(q) - exponent * std::log(sr);
  }
  log_c /= static_cast<double>(sr_grid.size());
  const double c = std::exp(log_c);

  double worst = 0.0;
  for (std::size_t i = 0; i < sr_grid.size(); ++i) {
    const double fitted = c * std::pow(sr_grid[i], exponent);
    worst = std::max(worst, std::fabs(fitted - quantiles[i]) / quantiles[i]);
  }
  return PowerLawFit{c, exponent, worst};
}

std::string to_string(UpdateStatus status) {
  switch (status) {
    case UpdateStatus::solved:
      return "solved";
    case UpdateStatus::zero_drift_floor:
      return "below-zero-drift";
    case UpdateStatus::above_cap:
      return "above-cap";
  }
  return "unknown";
}

}  // namespace inference
}  // namespace lastdd
