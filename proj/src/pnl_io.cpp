#include "lastdd/pnl_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lastdd/errors.hpp"

namespace lastdd::pnl {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto num = [](std::string_view part, auto& out) {
    const auto* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, out);
    return ec == std::errc() && ptr == end;
  };
  if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) ||
      !num(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

std::optional<double> parse_value(std::string_view s) {
  // from_chars for double is not in libstdc++ 11 for every target; strtod on
  // a bounded copy instead.
  const std::string copy(s);
  if (copy.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (end != copy.c_str() + copy.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

std::string format_date(const std::chrono::year_month_day& date) {
  std::ostringstream out;
  out << std::setfill('0') << std::setw(4) << static_cast<int>(date.year())
      << '-' << std::setw(2) << static_cast<unsigned>(date.month()) << '-'
      << std::setw(2) << static_cast<unsigned>(date.day());
  return out.str();
}

PnlSeries parse_csv(std::string_view text, int frequency) {
  if (frequency < 1) {
    throw DataError("frequency must be at least 1 trading day per year");
  }
  PnlSeries series;
  series.frequency = frequency;

  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) {
      line.remove_prefix(3);
    }
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!header_seen) {
      if (line != "date,pnl") {
        fail_line(line_no, "expected header 'date,pnl', got '" +
                               std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos ||
        line.find(',', comma + 1) != std::string_view::npos) {
      fail_line(line_no, "expected two fields 'date,pnl'");
    }
    const auto date = parse_date(trim(line.substr(0, comma)));
    if (!date) {
      fail_line(line_no, "invalid ISO-8601 date '" +
                             std::string(trim(line.substr(0, comma))) + "'");
    }
    const auto value = parse_value(trim(line.substr(comma + 1)));
    if (!value) {
      fail_line(line_no, "invalid PnL value '" +
                             std::string(trim(line.substr(comma + 1))) + "'");
    }
    if (!series.dates.empty()) {
      const auto& prev = series.dates.back();
      if (*date == prev) {
        fail_line(line_no, "duplicate date " + format_date(*date));
      }
      if (*date < prev) {
        fail_line(line_no, "dates out of order: " + format_date(*date) +
                               " follows " + format_date(prev));
      }
    }
    series.dates.push_back(*date);
    series.values.push_back(*value);
    if (end == text.size()) break;
  }
  if (!header_seen) {
    throw DataError("empty input: missing header 'date,pnl'");
  }
  if (series.values.empty()) {
    throw DataError("empty series");
  }
  if (series.values.size() < 2) {
    throw DataError("series needs at least 2 rows, got 1");
  }
  return series;
}

PnlSeries read_csv_file(const std::string& path, int frequency) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open PnL file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str(), frequency);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

PnlSeries normalize(const PnlSeries& series, const NormalizeOptions& opts) {
  const std::size_t n = series.size();
  if (n < opts.min_rows || n < 3) {
    throw DataError("insufficient history for volatility normalization: " +
                    std::to_string(n) + " rows, need " +
                    std::to_string(std::max<std::size_t>(opts.min_rows, 3)));
  }
  std::vector<double> diffs(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    diffs[i - 1] = series.values[i] - series.values[i - 1];
  }

  std::size_t first = 0;
  if (opts.vol_window != 0) {
    if (opts.vol_window < 2) {
      throw DataError("volatility window must cover at least 2 differences");
    }
    first = diffs.size() > opts.vol_window ? diffs.size() - opts.vol_window : 0;
  }
  const auto count = static_cast<double>(diffs.size() - first);
  double mean = 0.0;
  for (std::size_t i = first; i < diffs.size(); ++i) mean += diffs[i];
  mean /= count;
  double ss = 0.0;
  for (std::size_t i = first; i < diffs.size(); ++i) {
    ss += (diffs[i] - mean) * (diffs[i] - mean);
  }
  const double sd = std::sqrt(ss / (count - 1.0));
  const double scale = std::max(std::fabs(mean), 1.0);
  if (!(sd > 1e-14 * scale)) {
    throw DataError("zero volatility: PnL differences are constant");
  }

  PnlSeries out;
  out.dates = series.dates;
  out.frequency = series.frequency;
  out.values.resize(n);
  out.values[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    out.values[i] = out.values[i - 1] + diffs[i - 1] / sd;
  }
  out.vol_estimate = series.normalized ? series.vol_estimate.value_or(1.0) * sd
                                       : sd;
  out.normalized = true;
  return out;
}

ExtractedDrawdown extract_drawdown(const PnlSeries& series) {
  if (!series.normalized) {
    throw DataError("extract_drawdown: series must be normalized first");
  }
  if (series.size() < 2) {
    throw DataError("extract_drawdown: series needs at least 2 rows");
  }
  double peak = series.values[0];
  std::size_t peak_row = 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series.values[i] >= peak) {
      peak = series.values[i];
      peak_row = i;
    }
  }
  const std::size_t last = series.size() - 1;
  const double freq = series.frequency;
  ExtractedDrawdown out;
  out.max_row = peak_row;
  out.horizon = static_cast<double>(last) / freq;
  out.observation.source = ObservationSource::extracted;
  out.observation.depth = (peak - series.values[last]) / std::sqrt(freq);
  // >= above makes peak_row == last whenever the final value ties the peak,
  // so length and depth vanish together.
  out.observation.length = static_cast<double>(last - peak_row) / freq;
  return out;
}

}  // namespace lastdd::pnl
