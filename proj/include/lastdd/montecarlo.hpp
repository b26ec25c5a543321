#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "lastdd/densities.hpp"
#include "lastdd/errors.hpp"

namespace lastdd::mc {

struct SimConfig {
  ProcessSpec spec;
  int steps_per_year = 257;
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
  bool antithetic = true;

  /// round(steps_per_year * horizon).
  std::int64_t total_steps() const;
  void validate() const;
};

struct DrawdownPair {
  double length = 0.0;  // years
  double depth = 0.0;   // sigma units
};

struct EmpiricalSample {
  std::vector<DrawdownPair> pairs;
  std::vector<double> terminal;  // final value of each path
  SimConfig config;
};

/// Paths of dX = mu dt + dW sampled every 1/steps_per_year years from X_0 = 0.
/// Path i draws its normals from Philox with counter (block, pair index), so
/// the result depends only on the config, never on the worker count.
/// workers == 0 uses the hardware concurrency.
EmpiricalSample simulate(const SimConfig& config, unsigned workers = 0);

/// Inverse standard normal CDF (Wichura AS241), p in (0, 1).
double inverse_normal_cdf(double p);

enum class TailMode { length, depth };

struct TailEstimate {
  double frequency = 0.0;
  double std_error = 0.0;
};

/// Fraction of pairs with value >= threshold and its binomial standard error.
TailEstimate empirical_tail(const EmpiricalSample& sample, TailMode mode,
                            double threshold);

/// Raised when a conditional slice selects no paths.
class InsufficientSample : public DataError {
 public:
  using DataError::DataError;
};

/// Lengths of the pairs with depth in [d*(1-band), d*(1+band)].
std::vector<double> conditional_slice(const EmpiricalSample& sample,
                                      double depth_star, double band);

/// Sample quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double q);

/// sup |F_n - F| for the given continuous reference CDF.
double ks_distance(std::vector<double> values,
                   const std::function<double(double)>& cdf);

/// CSV dump: header path_index,length_years,depth_sigma.
void write_sample_csv(std::ostream& out, const EmpiricalSample& sample);

}  // namespace lastdd::mc
