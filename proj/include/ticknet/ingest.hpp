#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ticknet/decimal.hpp"
#include "ticknet/timeutil.hpp"

namespace ticknet {

/// One trade.
struct TickRecord {
    Timestamp ts;
    std::string symbol;
    Decimal price;    // > 0
    uint64_t volume;  // >= 1
};

struct PeriodRange {
    std::string name;
    Date begin;  // inclusive
    Date end;    // inclusive
};

/// Trading-session layout and analysis-period calendar.
struct SessionConfig {
    TimeOfDay session_open{9 * 3600 + 30 * 60};
    TimeOfDay session_close{15 * 3600 + 30 * 60};
    int bar_seconds = 30;
    std::vector<Date> trading_days;    // empty: derive from the data
    std::vector<PeriodRange> periods;  // empty: single period "all"
    double max_empty_fraction = 0.2;
    bool strict = false;

    [[nodiscard]] int windows_per_day() const {
        return (session_close.seconds - session_open.seconds) / bar_seconds;
    }
    void validate() const;  // throws std::invalid_argument
};

/// parse_ticks output: per-symbol, time-ordered trades plus the calendar and
/// row accounting for the drop report.
struct ParsedTicks {
    std::vector<std::string> symbols;  // sorted
    std::vector<std::vector<TickRecord>> by_symbol;
    std::vector<Date> trading_days;  // sorted
    uint64_t rows_read = 0;
    uint64_t rows_dropped_session = 0;  // outside [open, close)
    uint64_t rows_dropped_offday = 0;   // date not in trading_days
    uint64_t rows_skipped = 0;          // malformed / invalid, non-strict mode
    std::vector<std::string> warnings;  // first few skip reasons, with line numbers
};

/// Parse the tick CSV (header `timestamp,symbol,price,volume`). In strict
/// mode any malformed or invariant-violating row aborts with the offending
/// line number; otherwise the row is skipped and recorded.
ParsedTicks parse_ticks(std::istream& source, const SessionConfig& config);

/// One VWAP bar. The value is kept as the exact rational
/// sum(volume*price) / sum(volume) in 1e-9 price units.
struct Bar {
    __int128 value_num = 0;  // sum of volume * price.units
    uint64_t value_den = 0;  // sum of volume
    bool filled = false;     // window had no trades; value carried over

    [[nodiscard]] double vwap() const {
        return static_cast<double>(value_num) / (static_cast<double>(value_den) * Decimal::kScale);
    }
    [[nodiscard]] double log_vwap() const {
        return std::log(static_cast<double>(value_num)) -
               std::log(static_cast<double>(value_den) * Decimal::kScale);
    }
};

struct BarSeries {
    std::string symbol;
    int windows_per_day = 0;
    std::vector<Date> days;
    std::vector<Bar> bars;                  // days.size() * windows_per_day
    std::vector<uint8_t> day_had_no_ticks;  // per day, flagged for the drop report
};

/// Aggregate one symbol's trades into fixed-width VWAP bars on the session
/// grid. Empty windows carry the previous bar's value forward (filled=true);
/// a day's leading empty windows take the day's first trade; a day with no
/// trades at all carries the previous day's close and is flagged.
BarSeries build_vwap_bars(std::span<const TickRecord> ticks, const SessionConfig& config,
                          std::span<const Date> trading_days);

/// Per-window log returns for k symbols over a common grid. Rows never span
/// a day boundary: each day of W windows contributes W-1 rows.
struct ReturnsPanel {
    std::string period = "all";
    std::vector<std::string> symbols;
    std::vector<std::string> sectors;  // aligned with symbols
    std::vector<Date> dates;
    int windows_per_day = 0;
    TimeOfDay session_open{};
    int bar_seconds = 0;
    Eigen::MatrixXd returns;        // m x k, m = dates.size() * (W-1)
    Eigen::MatrixXi filled_counts;  // dates.size() x k, forward-filled bars per day

    [[nodiscard]] Eigen::Index rows() const { return returns.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return returns.cols(); }
    /// Timestamp of the earlier window of the pair behind return row r.
    [[nodiscard]] Timestamp row_time(Eigen::Index r) const;
    /// Fraction of forward-filled bars for one symbol over the whole panel.
    [[nodiscard]] double filled_fraction(Eigen::Index symbol) const;
};

ReturnsPanel compute_log_returns(const std::vector<BarSeries>& bars, const SessionConfig& config,
                                 const std::map<std::string, std::string>& sectors);

/// Convenience: parse -> bars (parallel per symbol) -> panel.
ReturnsPanel ingest_panel(std::istream& ticks, const SessionConfig& config,
                          const std::map<std::string, std::string>& sectors,
                          ParsedTicks* parse_info = nullptr);

/// Slice a panel into the configured named periods. Every trading day must
/// fall in exactly one period.
std::vector<ReturnsPanel> split_periods(const ReturnsPanel& panel, const SessionConfig& config);

struct FilterReport {
    std::vector<std::string> dropped;                 // sorted symbol names
    std::map<std::string, double> worst_fraction;     // per symbol, max over periods
};

/// Drop every symbol whose forward-filled fraction exceeds the threshold in
/// any period; survivors are identical across periods.
std::vector<ReturnsPanel> filter_symbols(const std::vector<ReturnsPanel>& panels,
                                         double max_empty_fraction,
                                         FilterReport* report = nullptr);

/// Symbol metadata CSV (`symbol,sector`).
std::map<std::string, std::string> parse_sector_map(std::istream& source);

}  // namespace ticknet
