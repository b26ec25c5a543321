#include "lastdd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <new>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lastdd/philox.hpp"

namespace lastdd::mc {

std::int64_t SimConfig::total_steps() const {
  return std::llround(static_cast<double>(steps_per_year) * spec.horizon);
}

void SimConfig::validate() const {
  spec.validate();
  if (steps_per_year < 1) {
    throw DomainError("simulation: steps_per_year must be >= 1");
  }
  if (n_paths < 1) {
    throw DomainError("simulation: n_paths must be >= 1");
  }
  if (total_steps() < 2) {
    throw DomainError("simulation: fewer than 2 steps over the horizon");
  }
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("inverse_normal_cdf: p must lie in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

namespace {

struct PathTracker {
  double x = 0.0;
  double max = 0.0;
  std::int64_t argmax = 0;

  void step(double dx, std::int64_t i) {
    x += dx;
    // >= keeps the last index among ties.
    if (x >= max) {
      max = x;
      argmax = i;
    }
  }
};

// Simulates path group `group`: one path, or an antithetic pair.
void simulate_group(const SimConfig& cfg, std::int64_t group, PathTracker& a,
                    PathTracker* b) {
  const std::int64_t steps = cfg.total_steps();
  const double dt = 1.0 / cfg.steps_per_year;
  const double drift = cfg.spec.sharpe * dt;
  const double scale = std::sqrt(dt);
  const PhiloxKey key = {static_cast<std::uint32_t>(cfg.seed),
                         static_cast<std::uint32_t>(cfg.seed >> 32)};
  const auto g = static_cast<std::uint64_t>(group);

  std::int64_t i = 1;
  for (std::uint64_t block = 0; i <= steps; ++block) {
    const PhiloxBlock words = philox4x32_10(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(g), static_cast<std::uint32_t>(g >> 32)},
        key);
    for (int k = 0; k < 4 && i <= steps; ++k, ++i) {
      const double shock = scale * inverse_normal_cdf(to_open_unit(words[k]));
      a.step(drift + shock, i);
      if (b != nullptr) {
        b->step(drift - shock, i);
      }
    }
  }
}

DrawdownPair to_pair(const PathTracker& p, std::int64_t steps, double dt) {
  return DrawdownPair{static_cast<double>(steps - p.argmax) * dt, p.max - p.x};
}

}  // namespace

EmpiricalSample simulate(const SimConfig& config, unsigned workers) {
  config.validate();
  EmpiricalSample sample;
  sample.config = config;
  try {
    sample.pairs.resize(static_cast<std::size_t>(config.n_paths));
    sample.terminal.resize(static_cast<std::size_t>(config.n_paths));
  } catch (const std::bad_alloc&) {
    std::ostringstream msg;
    msg << "simulation: cannot allocate storage for " << config.n_paths
        << " paths";
    throw std::runtime_error(msg.str());
  }

  const std::int64_t paths_per_group = config.antithetic ? 2 : 1;
  const std::int64_t groups =
      (config.n_paths + paths_per_group - 1) / paths_per_group;
  const std::int64_t steps = config.total_steps();
  const double dt = 1.0 / config.steps_per_year;

  auto run_range = [&](std::int64_t first, std::int64_t last) {
    for (std::int64_t g = first; g < last; ++g) {
      const std::int64_t idx = g * paths_per_group;
      PathTracker a;
      PathTracker b;
      const bool paired = config.antithetic && idx + 1 < config.n_paths;
      simulate_group(config, g, a, paired ? &b : nullptr);
      sample.pairs[idx] = to_pair(a, steps, dt);
      sample.terminal[idx] = a.x;
      if (paired) {
        sample.pairs[idx + 1] = to_pair(b, steps, dt);
        sample.terminal[idx + 1] = b.x;
      }
    }
  };

  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  workers = static_cast<unsigned>(
      std::min<std::int64_t>(workers, std::max<std::int64_t>(groups, 1)));
  if (workers <= 1) {
    run_range(0, groups);
    return sample;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::int64_t chunk = (groups + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::int64_t first = w * chunk;
    const std::int64_t last = std::min(groups, first + chunk);
    if (first >= last) break;
    pool.emplace_back(run_range, first, last);
  }
  return sample;
}

TailEstimate empirical_tail(const EmpiricalSample& sample, TailMode mode,
                            double threshold) {
  if (sample.pairs.empty()) {
    throw DomainError("empirical_tail: empty sample");
  }
  std::size_t hits = 0;
  for (const auto& p : sample.pairs) {
    const double v = mode == TailMode::length ? p.length : p.depth;
    if (v >= threshold) ++hits;
  }
  const double n = static_cast<double>(sample.pairs.size());
  const double freq = static_cast<double>(hits) / n;
  return TailEstimate{freq, std::sqrt(freq * (1.0 - freq) / n)};
}

std::vector<double> conditional_slice(const EmpiricalSample& sample,
                                      double depth_star, double band) {
  if (!(band > 0.0 && band <= 0.5)) {
    throw DomainError("conditional_slice: band must lie in (0, 0.5]");
  }
  if (!(depth_star > 0.0)) {
    throw DomainError("conditional_slice: depth must be positive");
  }
  const double lo = depth_star * (1.0 - band);
  const double hi = depth_star * (1.0 + band);
  std::vector<double> lengths;
  for (const auto& p : sample.pairs) {
    if (p.depth >= lo && p.depth <= hi) lengths.push_back(p.length);
  }
  if (lengths.empty()) {
    std::ostringstream msg;
    msg << "insufficient sample: 0 of " << sample.pairs.size()
        << " paths have depth in [" << lo << ", " << hi << "]";
    throw InsufficientSample(msg.str());
  }
  return lengths;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw DomainError("empirical_quantile: empty input");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw DomainError("empirical_quantile: q must lie in [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto k = static_cast<std::size_t>(pos);
  if (k + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(k);
  return values[k] + frac * (values[k + 1] - values[k]);
}

double ks_distance(std::vector<double> values,
                   const std::function<double(double)>& cdf) {
  if (values.empty()) {
    throw DomainError("ks_distance: empty input");
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double worst = 0.0;
  std::size_t i = 0;
  while (i < values.size()) {
    // Step over ties so the empirical CDF is taken at both sides of a jump.
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double f = cdf(values[i]);
    worst = std::max({worst, std::fabs(f - static_cast<double>(i) / n),
                      std::fabs(static_cast<double>(j) / n - f)});
    i = j;
  }
  return worst;
}

void write_sample_csv(std::ostream& out, const EmpiricalSample& sample) {
  out << "path_index,length_years,depth_sigma\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < sample.pairs.size(); ++i) {
    out << i << ',' << sample.pairs[i].length << ',' << sample.pairs[i].depth
        << '\n';
  }
}

}  // namespace lastdd::mc
