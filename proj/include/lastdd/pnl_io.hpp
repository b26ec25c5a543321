#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lastdd/inference.hpp"

namespace lastdd::pnl {

inline constexpr int kDefaultFrequency = 257;
inline constexpr std::size_t kDefaultMinRows = 30;

/// Daily cumulative PnL, one row per trading day.
struct PnlSeries {
  std::vector<std::chrono::year_month_day> dates;
  std::vector<double> values;
  int frequency = kDefaultFrequency;  // trading days per year
  // Daily standard deviation of PnL differences, in the units of the raw
  // series. Set by normalize(); absent on raw series.
  std::optional<double> vol_estimate;
  bool normalized = false;

  std::size_t size() const { return values.size(); }
};

/// Parses a `date,pnl` CSV with ISO-8601 dates. Throws DataError with the
/// offending line number on malformed rows, and names both dates when the
/// order is broken.
PnlSeries parse_csv(std::string_view text, int frequency = kDefaultFrequency);

/// Reads and parses a file; errors name the path.
PnlSeries read_csv_file(const std::string& path,
                        int frequency = kDefaultFrequency);

struct NormalizeOptions {
  std::size_t min_rows = kDefaultMinRows;
  // Number of trailing daily differences used for the volatility estimate;
  // 0 uses the whole history.
  std::size_t vol_window = 0;
};

/// Rescales daily differences by their sample standard deviation (n - 1
/// denominator) and rebuilds the cumulative series from zero.
PnlSeries normalize(const PnlSeries& series, const NormalizeOptions& opts = {});

struct ExtractedDrawdown {
  DrawdownObservation observation;
  double horizon = 0.0;          // (rows - 1) / frequency, years
  std::size_t max_row = 0;       // last row attaining the running maximum
};

/// The drawdown in progress at the last row of a normalized series.
ExtractedDrawdown extract_drawdown(const PnlSeries& series);

std::string format_date(const std::chrono::year_month_day& date);

}  // namespace lastdd::pnl
