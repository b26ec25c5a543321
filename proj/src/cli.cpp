#include "lastdd/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lastdd/densities.hpp"
#include "lastdd/errors.hpp"
#include "lastdd/inference.hpp"
#include "lastdd/montecarlo.hpp"
#include "lastdd/pnl_io.hpp"

namespace lastdd::cli {
namespace {

using nlohmann::json;

enum class Format { text, csv, jsonl };

std::string num(double v, int digits) {
  std::ostringstream out;
  out << std::setprecision(digits) << v;
  return out.str();
}
std::string txt(double v) { return num(v, 4); }
std::string csv(double v) { return num(v, 10); }

std::string opt_csv(const std::optional<inference::SharpeUpdate>& u) {
  return u ? csv(u->sharpe) : "";
}

json opt_json(const std::optional<inference::SharpeUpdate>& u) {
  if (!u) return nullptr;
  return json{{"sharpe", u->sharpe}, {"status", inference::to_string(u->status)}};
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "jsonl") return Format::jsonl;
  return Format::text;
}

std::string update_note(const inference::SharpeUpdate& u) {
  switch (u.status) {
    case inference::UpdateStatus::solved:
      return "";
    case inference::UpdateStatus::zero_drift_floor:
      return " (below-zero-drift: extreme even at zero drift)";
    case inference::UpdateStatus::above_cap:
      return " (above-cap)";
  }
  return "";
}

void require_significance(double s) {
  if (!(s > 0.0 && s < 0.5)) {
    throw DomainError("significance must lie in (0, 0.5), got " + txt(s));
  }
}

void require_sharpe(double sharpe) {
  if (!std::isfinite(sharpe)) {
    throw DomainError("--sharpe is required");
  }
  if (sharpe <= 0.0) {
    throw DomainError(
        "sharpe " + txt(sharpe) +
        " is not positive; the drawdown test is defined for a strategy "
        "believed to be profitable");
  }
}

// Everything parsed from the command line lives here.
struct Params {
  double sharpe = std::numeric_limits<double>::quiet_NaN();
  double horizon = std::numeric_limits<double>::quiet_NaN();
  double significance = 0.05;
  std::string output = "text";
  int frequency = pnl::kDefaultFrequency;

  std::optional<double> length;
  std::optional<double> length_days;
  std::optional<double> depth;
  std::string file;
  std::size_t min_rows = pnl::kDefaultMinRows;
  std::size_t vol_window = 0;

  double lower_tail = 0.05;
  double upper_tail = 0.05;

  std::string mode;
  double sr_min = 1.0;
  double sr_max = 3.0;
  double sr_step = 0.25;
  std::vector<double> depths;

  std::int64_t paths = 100000;
  std::uint64_t seed = 20240101;
  int steps_per_year = pnl::kDefaultFrequency;
  bool no_antithetic = false;
  unsigned workers = 0;
  double sigmas = 4.0;
  double allowance = 0.005;
  std::string dump;
};

std::optional<double> manual_length(const Params& p) {
  if (p.length && p.length_days) {
    throw DomainError("give either --length or --length-days, not both");
  }
  if (p.length_days) return *p.length_days / p.frequency;
  return p.length;
}

double require_horizon(const Params& p) {
  if (!std::isfinite(p.horizon)) throw DomainError("--horizon is required");
  if (p.horizon <= 0.0) throw DomainError("--horizon must be positive");
  return p.horizon;
}

// ---------------------------------------------------------------- test

int cmd_test(const Params& p, std::ostream& out) {
  require_sharpe(p.sharpe);
  require_significance(p.significance);
  const auto len = manual_length(p);
  const bool manual = len.has_value() || p.depth.has_value();
  if (manual == !p.file.empty()) {
    throw DomainError(
        "test needs exactly one of --file or a manual observation "
        "(--length/--length-days with --depth)");
  }

  DrawdownObservation obs;
  double horizon = 0.0;
  std::optional<pnl::ExtractedDrawdown> extracted;
  std::optional<pnl::PnlSeries> normalized;
  if (manual) {
    if (!len || !p.depth) {
      throw DomainError("a manual observation needs both length and depth");
    }
    horizon = require_horizon(p);
    obs = DrawdownObservation{*len, *p.depth, ObservationSource::manual};
  } else {
    const auto raw = pnl::read_csv_file(p.file, p.frequency);
    normalized = pnl::normalize(raw, {p.min_rows, p.vol_window});
    extracted = pnl::extract_drawdown(*normalized);
    obs = extracted->observation;
    horizon = std::isfinite(p.horizon) ? p.horizon : extracted->horizon;
    if (horizon <= 0.0) throw DomainError("--horizon must be positive");
  }

  const auto r = inference::run_test(ProcessSpec{p.sharpe, horizon}, obs,
                                     p.significance);
  const bool flagged = r.length_flagged || r.depth_flagged;

  switch (parse_format(p.output)) {
    case Format::csv:
      out << "sharpe,horizon,significance,length,depth,source,length_p_value,"
             "depth_p_value,length_flagged,depth_flagged,sharpe_from_length,"
             "sharpe_from_depth\n"
          << csv(r.spec.sharpe) << ',' << csv(r.spec.horizon) << ','
          << csv(r.significance) << ',' << csv(obs.length) << ','
          << csv(obs.depth) << ',' << (manual ? "manual" : "extracted") << ','
          << csv(r.length_p_value) << ',' << csv(r.depth_p_value) << ','
          << (r.length_flagged ? "true" : "false") << ','
          << (r.depth_flagged ? "true" : "false") << ','
          << opt_csv(r.sharpe_from_length) << ','
          << opt_csv(r.sharpe_from_depth) << '\n';
      break;
    case Format::jsonl: {
      json j{{"command", "test"},
             {"sharpe", r.spec.sharpe},
             {"horizon", r.spec.horizon},
             {"significance", r.significance},
             {"length", obs.length},
             {"depth", obs.depth},
             {"source", manual ? "manual" : "extracted"},
             {"length_p_value", r.length_p_value},
             {"depth_p_value", r.depth_p_value},
             {"length_flagged", r.length_flagged},
             {"depth_flagged", r.depth_flagged},
             {"sharpe_from_length", opt_json(r.sharpe_from_length)},
             {"sharpe_from_depth", opt_json(r.sharpe_from_depth)},
             {"verdict", r.verdict_text}};
      if (extracted) {
        j["file"] = p.file;
        j["rows"] = normalized->size();
        j["daily_vol"] = *normalized->vol_estimate;
      }
      out << j.dump() << '\n';
      break;
    }
    case Format::text: {
      out << "Drawdown test: sharpe " << txt(r.spec.sharpe) << ", horizon "
          << txt(r.spec.horizon) << " y, significance "
          << txt(100.0 * r.significance) << "%\n";
      if (extracted) {
        out << "  input        " << p.file << " (" << normalized->size()
            << " rows, daily vol " << txt(*normalized->vol_estimate)
            << ", peak on "
            << pnl::format_date(normalized->dates[extracted->max_row])
            << "; the series is tested as given, net or gross of costs)\n";
      }
      out << "  observation  length " << txt(obs.length) << " y, depth "
          << txt(obs.depth) << " sigma (" << (manual ? "manual" : "extracted")
          << ")\n";
      auto line = [&](const char* name, double pv, bool flag,
                      const std::optional<inference::SharpeUpdate>& u) {
        out << "  " << name << "p-value " << txt(pv)
            << (flag ? "  FLAGGED" : "  ok");
        if (u) {
          out << "  updated sharpe " << txt(u->sharpe) << update_note(*u);
        }
        out << '\n';
      };
      line("length       ", r.length_p_value, r.length_flagged,
           r.sharpe_from_length);
      line("depth        ", r.depth_p_value, r.depth_flagged,
           r.sharpe_from_depth);
      out << r.verdict_text << '\n';
      break;
    }
  }
  return flagged ? kExitFlagged : kExitOk;
}

// ---------------------------------------------------------------- quantile

int cmd_quantile(const Params& p, std::ostream& out) {
  require_sharpe(p.sharpe);
  require_significance(p.significance);
  const ProcessSpec spec{p.sharpe, require_horizon(p)};
  const double lq = inference::length_quantile(spec, p.significance);
  const double dq = inference::depth_quantile(spec, p.significance);
  switch (parse_format(p.output)) {
    case Format::csv:
      out << "sharpe,horizon,tail_prob,length_quantile,depth_quantile\n"
          << csv(spec.sharpe) << ',' << csv(spec.horizon) << ','
          << csv(p.significance) << ',' << csv(lq) << ',' << csv(dq) << '\n';
      break;
    case Format::jsonl:
      out << json{{"command", "quantile"},
                  {"sharpe", spec.sharpe},
                  {"horizon", spec.horizon},
                  {"tail_prob", p.significance},
                  {"length_quantile", lq},
                  {"depth_quantile", dq}}
                 .dump()
          << '\n';
      break;
    case Format::text:
      out << "Sharpe " << txt(spec.sharpe) << ", horizon " << txt(spec.horizon)
          << " y, tail " << txt(100.0 * p.significance) << "%\n"
          << "  length quantile  " << txt(lq) << " y\n"
          << "  depth quantile   " << txt(dq) << " sigma\n";
      break;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- update

int cmd_update(const Params& p, std::ostream& out) {
  require_significance(p.significance);
  const double horizon = require_horizon(p);
  const auto len = manual_length(p);
  if (!len && !p.depth) {
    throw DomainError("update needs --length/--length-days and/or --depth");
  }
  std::optional<inference::SharpeUpdate> from_length;
  std::optional<inference::SharpeUpdate> from_depth;
  if (len) {
    from_length = inference::update_sharpe_from_length(*len, horizon,
                                                       p.significance);
  }
  if (p.depth) {
    from_depth =
        inference::update_sharpe_from_depth(*p.depth, horizon, p.significance);
  }
  std::string conservative;
  if (from_length && from_depth) {
    conservative =
        from_length->sharpe <= from_depth->sharpe ? "length" : "depth";
  }

  switch (parse_format(p.output)) {
    case Format::csv:
      out << "horizon,significance,length,depth,sharpe_from_length,"
             "sharpe_from_depth,conservative\n"
          << csv(horizon) << ',' << csv(p.significance) << ','
          << (len ? csv(*len) : "") << ',' << (p.depth ? csv(*p.depth) : "")
          << ',' << opt_csv(from_length) << ',' << opt_csv(from_depth) << ','
          << conservative << '\n';
      break;
    case Format::jsonl:
      out << json{{"command", "update"},
                  {"horizon", horizon},
                  {"significance", p.significance},
                  {"length", len ? json(*len) : json(nullptr)},
                  {"depth", p.depth ? json(*p.depth) : json(nullptr)},
                  {"sharpe_from_length", opt_json(from_length)},
                  {"sharpe_from_depth", opt_json(from_depth)},
                  {"conservative",
                   conservative.empty() ? json(nullptr) : json(conservative)}}
                 .dump()
          << '\n';
      break;
    case Format::text:
      out << "Sharpe ratio making the observation a "
          << txt(100.0 * p.significance) << "% tail event (horizon "
          << txt(horizon) << " y)\n";
      if (from_length) {
        out << "  from length " << txt(*len) << " y: " << txt(from_length->sharpe)
            << update_note(*from_length)
            << (conservative == "length" ? "  <- more conservative" : "")
            << '\n';
      }
      if (from_depth) {
        out << "  from depth " << txt(*p.depth)
            << " sigma: " << txt(from_depth->sharpe) << update_note(*from_depth)
            << (conservative == "depth" ? "  <- more conservative" : "")
            << '\n';
      }
      break;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- corridor

int cmd_corridor(const Params& p, std::ostream& out) {
  require_sharpe(p.sharpe);
  if (!p.depth) throw DomainError("corridor needs --depth");
  const ProcessSpec spec{p.sharpe, require_horizon(p)};
  const auto c =
      inference::conditional_corridor(spec, *p.depth, p.lower_tail, p.upper_tail);
  switch (parse_format(p.output)) {
    case Format::csv:
      out << "sharpe,horizon,depth,lower,upper,coverage\n"
          << csv(spec.sharpe) << ',' << csv(spec.horizon) << ','
          << csv(c.depth_star) << ',' << csv(c.lower) << ',' << csv(c.upper)
          << ',' << csv(c.coverage) << '\n';
      break;
    case Format::jsonl:
      out << json{{"command", "corridor"},   {"sharpe", spec.sharpe},
                  {"horizon", spec.horizon}, {"depth", c.depth_star},
                  {"lower", c.lower},        {"upper", c.upper},
                  {"coverage", c.coverage}}
                 .dump()
          << '\n';
      break;
    case Format::text:
      out << "Given depth " << txt(c.depth_star) << " sigma (sharpe "
          << txt(spec.sharpe) << ", horizon " << txt(spec.horizon) << " y):\n"
          << "  length lies in [" << txt(c.lower) << ", " << txt(c.upper)
          << "] y with probability " << txt(c.coverage) << '\n';
      break;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- curves

int cmd_curves(const Params& p, std::ostream& out) {
  const double horizon = require_horizon(p);
  require_significance(p.significance);
  if (!(p.sr_min > 0.0) || !(p.sr_step > 0.0) || p.sr_max < p.sr_min) {
    throw DomainError(
        "invalid sharpe grid: need 0 < --sr-min <= --sr-max and --sr-step > 0");
  }
  const auto count =
      static_cast<std::int64_t>(std::floor((p.sr_max - p.sr_min) / p.sr_step +
                                           1e-9)) + 1;
  if (count > 100000) throw DomainError("sharpe grid too large");

  const bool corridor = p.mode == "corridor-upper" || p.mode == "corridor-lower";
  if (corridor && p.depths.empty()) {
    throw DomainError("corridor curves need --depths");
  }
  out << (corridor ? "sharpe,depth,value\n" : "sharpe,value\n");
  for (std::int64_t i = 0; i < count; ++i) {
    const double sr = p.sr_min + static_cast<double>(i) * p.sr_step;
    const ProcessSpec spec{sr, horizon};
    if (p.mode == "length-quantile") {
      out << csv(sr) << ',' << csv(inference::length_quantile(spec, p.significance))
          << '\n';
    } else if (p.mode == "depth-quantile") {
      out << csv(sr) << ',' << csv(inference::depth_quantile(spec, p.significance))
          << '\n';
    } else {
      for (double d : p.depths) {
        const auto c = inference::conditional_corridor(spec, d, p.significance,
                                                       p.significance);
        out << csv(sr) << ',' << csv(d) << ','
            << csv(p.mode == "corridor-upper" ? c.upper : c.lower) << '\n';
      }
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct Comparison {
  std::string mode;
  double threshold;
  double analytic;
  double empirical;
  double std_error;
  double tolerance;
  bool pass;
};

int cmd_simulate(const Params& p, std::ostream& out) {
  const double requested = require_horizon(p);
  if (!std::isfinite(p.sharpe)) throw DomainError("--sharpe is required");
  if (p.sigmas < 0.0 || p.allowance < 0.0) {
    throw DomainError("--sigmas and --allowance must be non-negative");
  }
  mc::SimConfig cfg{ProcessSpec{p.sharpe, requested}, p.steps_per_year, p.paths,
                    p.seed, !p.no_antithetic};
  cfg.validate();
  // Analytic values use the horizon actually simulated.
  const double horizon =
      static_cast<double>(cfg.total_steps()) / cfg.steps_per_year;
  const ProcessSpec spec{p.sharpe, horizon};
  const auto sample = mc::simulate(cfg, p.workers);

  if (!p.dump.empty()) {
    std::ofstream f(p.dump);
    if (!f) throw DataError("cannot write sample dump '" + p.dump + "'");
    mc::write_sample_csv(f, sample);
  }

  std::vector<Comparison> rows;
  for (double tail : {0.05, 0.025, 0.01}) {
    for (auto mode : {mc::TailMode::length, mc::TailMode::depth}) {
      const bool is_len = mode == mc::TailMode::length;
      const double thr =
          is_len ? inference::length_quantile(spec, tail,
                                              inference::DriftPolicy::allow_any)
                 : inference::depth_quantile(spec, tail,
                                             inference::DriftPolicy::allow_any);
      const auto e = mc::empirical_tail(sample, mode, thr);
      const double tol = p.sigmas * e.std_error + p.allowance;
      rows.push_back(Comparison{is_len ? "length" : "depth", thr, tail,
                                e.frequency, e.std_error, tol,
                                std::fabs(e.frequency - tail) <= tol});
    }
  }

  std::optional<std::pair<double, double>> ks;  // distance, critical value
  if (p.sharpe == 0.0) {
    std::vector<double> lengths;
    lengths.reserve(sample.pairs.size());
    for (const auto& pr : sample.pairs) lengths.push_back(pr.length);
    const double d = mc::ks_distance(lengths, [&](double l) {
      return 2.0 / std::numbers::pi * std::asin(std::sqrt(std::min(1.0, l / horizon)));
    });
    const double crit = 1.63 / std::sqrt(static_cast<double>(lengths.size())) +
                        2.0 / cfg.steps_per_year;
    ks = std::make_pair(d, crit);
  }

  bool all_pass = true;
  for (const auto& r : rows) all_pass = all_pass && r.pass;
  if (ks) all_pass = all_pass && ks->first < ks->second;

  switch (parse_format(p.output)) {
    case Format::csv:
      out << "mode,threshold,analytic_tail,empirical_tail,std_error,tolerance,"
             "pass\n";
      for (const auto& r : rows) {
        out << r.mode << ',' << csv(r.threshold) << ',' << csv(r.analytic)
            << ',' << csv(r.empirical) << ',' << csv(r.std_error) << ','
            << csv(r.tolerance) << ',' << (r.pass ? "true" : "false") << '\n';
      }
      if (ks) {
        out << "ks-arcsine,," << csv(ks->second) << ',' << csv(ks->first)
            << ",," << csv(ks->second) << ','
            << (ks->first < ks->second ? "true" : "false") << '\n';
      }
      break;
    case Format::jsonl:
      for (const auto& r : rows) {
        out << json{{"command", "simulate"},   {"mode", r.mode},
                    {"threshold", r.threshold}, {"analytic_tail", r.analytic},
                    {"empirical_tail", r.empirical},
                    {"std_error", r.std_error}, {"tolerance", r.tolerance},
                    {"pass", r.pass}}
                   .dump()
            << '\n';
      }
      if (ks) {
        out << json{{"command", "simulate"},
                    {"mode", "ks-arcsine"},
                    {"distance", ks->first},
                    {"critical", ks->second},
                    {"pass", ks->first < ks->second}}
                   .dump()
            << '\n';
      }
      break;
    case Format::text:
      out << "Simulation: " << cfg.n_paths << " paths, " << cfg.steps_per_year
          << " steps/y, horizon " << txt(horizon) << " y, sharpe "
          << txt(p.sharpe) << ", seed " << cfg.seed
          << (cfg.antithetic ? ", antithetic" : "") << '\n';
      out << "  mode    threshold  analytic  empirical  std.err   tolerance\n";
      for (const auto& r : rows) {
        out << "  " << std::left << std::setw(8) << r.mode << std::setw(11)
            << txt(r.threshold) << std::setw(10) << txt(r.analytic)
            << std::setw(11) << txt(r.empirical) << std::setw(10)
            << txt(r.std_error) << std::setw(10) << txt(r.tolerance)
            << (r.pass ? "ok" : "FAIL") << std::right << '\n';
      }
      if (ks) {
        out << "  arcsine KS distance " << txt(ks->first) << " (critical "
            << txt(ks->second) << ") "
            << (ks->first < ks->second ? "ok" : "FAIL") << '\n';
      }
      break;
  }
  return all_pass ? kExitOk : kExitFlagged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Last-drawdown statistics of drifted Brownian motion", "lastdd"};
  app.require_subcommand(1);
  Params p;

  auto add_spec = [&](CLI::App* sub, bool with_sharpe) {
    if (with_sharpe) {
      sub->add_option("--sharpe", p.sharpe, "Assumed annualized Sharpe ratio");
    }
    sub->add_option("--horizon", p.horizon, "Horizon T in years");
    sub->add_option("--output", p.output, "Output format")
        ->check(CLI::IsMember({"text", "csv", "jsonl"}));
  };
  auto add_observation = [&](CLI::App* sub) {
    sub->add_option("--length", p.length, "Drawdown length in years");
    sub->add_option("--length-days", p.length_days,
                    "Drawdown length in trading days");
    sub->add_option("--depth", p.depth, "Drawdown depth in annual sigma units");
    sub->add_option("--frequency", p.frequency, "Trading days per year")
        ->check(CLI::PositiveNumber);
  };

  auto* test = app.add_subcommand("test", "Test an assumed Sharpe ratio");
  add_spec(test, true);
  add_observation(test);
  test->add_option("--significance", p.significance, "Test level");
  test->add_option("--file", p.file, "CSV with header date,pnl");
  test->add_option("--min-rows", p.min_rows,
                   "Minimum rows for volatility normalization");
  test->add_option("--vol-window", p.vol_window,
                   "Trailing differences for the volatility estimate (0 = all)");

  auto* quantile = app.add_subcommand("quantile", "Length and depth quantiles");
  add_spec(quantile, true);
  quantile->add_option("--significance,--tail", p.significance,
                       "Tail probability");

  auto* update = app.add_subcommand("update", "Sharpe ratio consistent with an "
                                              "observed drawdown");
  add_spec(update, false);
  add_observation(update);
  update->add_option("--significance,--tail", p.significance,
                     "Tail probability");

  auto* corridor =
      app.add_subcommand("corridor", "Conditional length corridor given depth");
  add_spec(corridor, true);
  corridor->add_option("--depth", p.depth, "Observed depth in sigma units");
  corridor->add_option("--lower-tail", p.lower_tail, "P(length <= lower)");
  corridor->add_option("--upper-tail", p.upper_tail, "P(length >= upper)");

  auto* curves = app.add_subcommand("curves", "Quantile / corridor curves as CSV");
  curves->add_option("--horizon", p.horizon, "Horizon T in years");
  curves->add_option("--mode", p.mode, "Curve type")
      ->required()
      ->check(CLI::IsMember(
          {"length-quantile", "depth-quantile", "corridor-upper", "corridor-lower"}));
  curves->add_option("--sr-min", p.sr_min, "First Sharpe ratio");
  curves->add_option("--sr-max", p.sr_max, "Last Sharpe ratio");
  curves->add_option("--sr-step", p.sr_step, "Sharpe ratio step");
  curves->add_option("--depths", p.depths, "Depths for corridor modes")
      ->delimiter(',');
  curves->add_option("--significance,--tail", p.significance,
                     "Tail probability");

  auto* simulate =
      app.add_subcommand("simulate", "Monte Carlo check of the analytic tails");
  add_spec(simulate, true);
  simulate->add_option("--paths", p.paths, "Number of paths");
  simulate->add_option("--seed", p.seed, "Master seed");
  simulate->add_option("--steps-per-year", p.steps_per_year, "Time steps per year");
  simulate->add_flag("--no-antithetic", p.no_antithetic, "Disable antithetic pairs");
  simulate->add_option("--workers", p.workers, "Worker threads (0 = all cores)");
  simulate->add_option("--sigmas", p.sigmas, "Standard errors allowed");
  simulate->add_option("--allowance", p.allowance,
                       "Absolute discretization allowance");
  simulate->add_option("--dump", p.dump, "Write the sample as CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  // Buffered so a failing command never leaves a partial table on stdout.
  std::ostringstream buf;
  int code = kExitError;
  try {
    if (test->parsed()) code = cmd_test(p, buf);
    if (quantile->parsed()) code = cmd_quantile(p, buf);
    if (update->parsed()) code = cmd_update(p, buf);
    if (corridor->parsed()) code = cmd_corridor(p, buf);
    if (curves->parsed()) code = cmd_curves(p, buf);
    if (simulate->parsed()) code = cmd_simulate(p, buf);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  out << buf.str();
  return code;
}

}  // namespace lastdd::cli
