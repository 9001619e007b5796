#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ticknet/decimal.hpp"
#include "ticknet/ingest.hpp"
#include "ticknet/rng.hpp"

using namespace ticknet;

namespace {

SessionConfig short_session(int windows = 10) {
    SessionConfig cfg;
    cfg.session_open = TimeOfDay::parse("09:30");
    cfg.session_close = TimeOfDay{cfg.session_open.seconds + windows * 30};
    cfg.bar_seconds = 30;
    return cfg;
}

TickRecord tick(const std::string& iso, const std::string& sym, const std::string& price,
                uint64_t vol) {
    return TickRecord{Timestamp::parse(iso), sym, Decimal::parse(price), vol};
}

BarSeries constant_bars(const std::string& symbol, const std::vector<Date>& days, int W,
                        int64_t price_units = 100 * Decimal::kScale) {
    BarSeries b;
    b.symbol = symbol;
    b.windows_per_day = W;
    b.days = days;
    b.bars.assign(days.size() * static_cast<size_t>(W), Bar{price_units, 1, false});
    b.day_had_no_ticks.assign(days.size(), 0);
    return b;
}

std::vector<Date> consecutive_days(const Date& start, int count) {
    std::vector<Date> days;
    for (int i = 0; i < count; ++i) days.push_back(Date::from_serial(start.serial() + i));
    return days;
}

}  // namespace

TEST_CASE("decimal parse and format") {
    CHECK(Decimal::parse("3501.50").units == 3501'500000000LL);
    CHECK(Decimal::parse("12").units == 12 * Decimal::kScale);
    CHECK(Decimal::parse("0.000000001").units == 1);
    CHECK(Decimal::parse("3501.50").to_string() == "3501.5");
    CHECK(Decimal::parse("7").to_string() == "7");
    CHECK_THROWS(Decimal::parse("1.2.3"));
    CHECK_THROWS(Decimal::parse("abc"));
    CHECK_THROWS(Decimal::parse("1.0000000001"));  // 10 fractional digits
    CHECK_THROWS(Decimal::parse(""));
}

TEST_CASE("timestamp parsing") {
    const Timestamp ts = Timestamp::parse("2014-01-02T09:31:04");
    CHECK(ts.date == Date{2014, 1, 2});
    CHECK(ts.seconds == 9 * 3600 + 31 * 60 + 4);
    CHECK(ts.to_string() == "2014-01-02T09:31:04");
    CHECK_THROWS(Timestamp::parse("2014-01-02 09:31:04"));
    CHECK_THROWS(Date::parse("2014-02-30"));
}

TEST_CASE("parse_ticks maps fields and applies the session filter") {
    SessionConfig cfg = short_session(720);
    cfg.session_close = TimeOfDay::parse("15:30");
    std::istringstream in(
        "timestamp,symbol,price,volume\n"
        "2014-01-02T09:31:04,INFY,3501.50,120\n"
        "2014-01-02T09:15:00,INFY,3500.00,10\n"   // before the open: dropped
        "2014-01-02T15:30:00,INFY,3500.00,10\n"   // close is exclusive: dropped
        "2014-01-02T10:00:00,TCS,2210.05,5\n");
    const ParsedTicks parsed = parse_ticks(in, cfg);
    REQUIRE(parsed.symbols == std::vector<std::string>{"INFY", "TCS"});
    REQUIRE(parsed.by_symbol[0].size() == 1);
    CHECK(parsed.by_symbol[0][0].price.units == 3501'500000000LL);
    CHECK(parsed.by_symbol[0][0].volume == 120);
    CHECK(parsed.rows_dropped_session == 2);
    CHECK(parsed.trading_days == std::vector<Date>{Date{2014, 1, 2}});
}

TEST_CASE("parse_ticks strict mode rejects bad rows, lax mode skips them") {
    const std::string data =
        "timestamp,symbol,price,volume\n"
        "2014-01-02T09:31:04,INFY,-3.0,120\n"
        "2014-01-02T09:31:05,INFY,3501.50,120\n";
    SessionConfig cfg = short_session(720);
    cfg.session_close = TimeOfDay::parse("15:30");

    cfg.strict = true;
    std::istringstream strict_in(data);
    CHECK_THROWS_WITH_AS(parse_ticks(strict_in, cfg),
                         doctest::Contains("line 2"), std::runtime_error);

    cfg.strict = false;
    std::istringstream lax_in(data);
    const ParsedTicks parsed = parse_ticks(lax_in, cfg);
    CHECK(parsed.rows_skipped == 1);
    CHECK(parsed.by_symbol[0].size() == 1);
    CHECK(parsed.warnings.size() == 1);
}

TEST_CASE("parse_ticks rejects empty input and wrong header") {
    SessionConfig cfg = short_session();
    std::istringstream empty("");
    CHECK_THROWS(parse_ticks(empty, cfg));
    std::istringstream bad_header("time,sym,px,qty\n");
    CHECK_THROWS(parse_ticks(bad_header, cfg));
}

TEST_CASE("vwap bars: weighted average, identity, forward fill") {
    SessionConfig cfg = short_session(4);
    const std::vector<Date> days{Date{2014, 1, 2}};

    SUBCASE("equal-weight mean") {
        std::vector<TickRecord> ticks{tick("2014-01-02T09:30:01", "A", "10", 2),
                                      tick("2014-01-02T09:30:12", "A", "20", 2),
                                      tick("2014-01-02T09:30:31", "A", "12.5", 7),
                                      tick("2014-01-02T09:31:05", "A", "101.0", 1),
                                      tick("2014-01-02T09:31:40", "A", "99.0", 1)};
        const BarSeries b = build_vwap_bars(ticks, cfg, days);
        REQUIRE(b.bars.size() == 4);
        CHECK(b.bars[0].vwap() == doctest::Approx(15.0).epsilon(1e-12));
        CHECK(b.bars[1].vwap() == doctest::Approx(12.5).epsilon(1e-12));
        CHECK_FALSE(b.bars[0].filled);
    }

    SUBCASE("empty window carries the previous vwap and sets the flag") {
        std::vector<TickRecord> ticks{tick("2014-01-02T09:30:01", "A", "101.0", 3),
                                      tick("2014-01-02T09:31:40", "A", "99.0", 1)};
        const BarSeries b = build_vwap_bars(ticks, cfg, days);
        // windows: [0] trade, [1] empty -> 101.0 filled, [2] empty -> carried
        CHECK(b.bars[1].vwap() == doctest::Approx(101.0));
        CHECK(b.bars[1].filled);
        CHECK(b.bars[2].filled);
        CHECK(b.bars[3].vwap() == doctest::Approx(99.0));
        CHECK_FALSE(b.bars[3].filled);
        CHECK(b.bars.size() == 4);  // fill never changes the window count
    }

    SUBCASE("leading empty windows take the day's first trade") {
        std::vector<TickRecord> ticks{tick("2014-01-02T09:31:10", "A", "55.5", 2),
                                      tick("2014-01-02T09:31:15", "A", "56.5", 2)};
        const BarSeries b = build_vwap_bars(ticks, cfg, days);
        CHECK(b.bars[0].vwap() == doctest::Approx(55.5));  // first trade, not window vwap 56.0
        CHECK(b.bars[0].filled);
        CHECK(b.bars[2].vwap() == doctest::Approx(56.0));
    }

    SUBCASE("day with no trades is flagged and carries the previous close") {
        const std::vector<Date> two_days{Date{2014, 1, 2}, Date{2014, 1, 3}};
        std::vector<TickRecord> ticks{tick("2014-01-02T09:30:01", "A", "42", 1)};
        const BarSeries b = build_vwap_bars(ticks, cfg, two_days);
        CHECK(b.day_had_no_ticks == std::vector<uint8_t>{0, 1});
        for (int w = 0; w < 4; ++w) {
            CHECK(b.bars[4 + static_cast<size_t>(w)].vwap() == doctest::Approx(42.0));
            CHECK(b.bars[4 + static_cast<size_t>(w)].filled);
        }
    }

    SUBCASE("no ticks at all is an error") {
        std::vector<TickRecord> none;
        CHECK_THROWS(build_vwap_bars(none, cfg, days));
    }
}

TEST_CASE("vwap properties over random windows") {
    SessionConfig cfg = short_session(8);
    const std::vector<Date> days{Date{2014, 1, 2}};
    Rng rng(20140102);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<TickRecord> ticks;
        int64_t lo = INT64_MAX, hi = 0;
        const int n = 1 + static_cast<int>(rng.uniform_below(20));
        for (int i = 0; i < n; ++i) {
            const int64_t units = (1 + static_cast<int64_t>(rng.uniform_below(100000))) * 1000000;
            lo = std::min(lo, units);
            hi = std::max(hi, units);
            Decimal price{units};
            const int sec = static_cast<int>(rng.uniform_below(30));
            ticks.push_back(TickRecord{
                Timestamp{Date{2014, 1, 2}, TimeOfDay::parse("09:30").seconds + sec}, "A", price,
                1 + rng.uniform_below(500)});
        }
        std::stable_sort(ticks.begin(), ticks.end(),
                         [](const TickRecord& a, const TickRecord& b) { return a.ts < b.ts; });
        const BarSeries b = build_vwap_bars(ticks, cfg, days);
        const double vwap = b.bars[0].vwap();
        CHECK(vwap >= Decimal{lo}.to_double() - 1e-12);
        CHECK(vwap <= Decimal{hi}.to_double() + 1e-12);

        // Permuting the ticks leaves the exact rational untouched.
        std::vector<TickRecord> shuffled = ticks;
        rng.shuffle(shuffled);
        std::stable_sort(shuffled.begin(), shuffled.end(),
                         [](const TickRecord& a, const TickRecord& b) { return a.ts < b.ts; });
        const BarSeries b2 = build_vwap_bars(shuffled, cfg, days);
        CHECK(b2.bars[0].value_num == b.bars[0].value_num);
        CHECK(b2.bars[0].value_den == b.bars[0].value_den);
    }
}

TEST_CASE("log returns: flat, growth, and the day-boundary row count") {
    SessionConfig cfg = short_session(3);
    const std::vector<Date> days{Date{2014, 1, 2}, Date{2014, 1, 3}};
    BarSeries b = constant_bars("A", days, 3);
    // day 1: 100 -> 100 -> 105 ; day 2: all 100
    b.bars[2] = Bar{105 * Decimal::kScale, 1, false};
    const ReturnsPanel panel = compute_log_returns({b}, cfg, {});
    REQUIRE(panel.rows() == 4);  // 2 days x (3 - 1)
    CHECK(panel.returns(0, 0) == 0.0);
    CHECK(panel.returns(1, 0) == doctest::Approx(std::log(1.05)).epsilon(1e-12));
    // No return spans the boundary: day 2 rows see only day-2 bars.
    CHECK(panel.returns(2, 0) == 0.0);
    CHECK(panel.returns(3, 0) == 0.0);
    CHECK(panel.row_time(2).date == Date{2014, 1, 3});
}

TEST_CASE("mismatched bar grids across symbols are rejected") {
    SessionConfig cfg = short_session(3);
    const auto days = consecutive_days(Date{2014, 1, 2}, 2);
    const auto fewer = consecutive_days(Date{2014, 1, 2}, 1);
    CHECK_THROWS(compute_log_returns({constant_bars("A", days, 3), constant_bars("B", fewer, 3)},
                                     cfg, {}));
}

TEST_CASE("constant-price series gives identically zero returns") {
    SessionConfig cfg = short_session(6);
    const auto days = consecutive_days(Date{2014, 1, 2}, 3);
    const ReturnsPanel panel = compute_log_returns({constant_bars("A", days, 6)}, cfg, {});
    CHECK(panel.returns.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("row-count identity matches the three period shapes") {
    // days x (windows-1) with W = 720: 42 -> 30198, 46 -> 33074, 141 -> 101379.
    SessionConfig cfg;
    cfg.session_open = TimeOfDay::parse("09:30");
    cfg.session_close = TimeOfDay::parse("15:30");
    cfg.bar_seconds = 30;
    REQUIRE(cfg.windows_per_day() == 720);
    const std::vector<std::pair<int, Eigen::Index>> shapes{{42, 30198}, {46, 33074}, {141, 101379}};
    for (const auto& [n_days, rows] : shapes) {
        const auto days = consecutive_days(Date{2014, 1, 1}, n_days);
        const ReturnsPanel panel = compute_log_returns({constant_bars("A", days, 720)}, cfg, {});
        CHECK(panel.rows() == rows);
    }
}

TEST_CASE("split_periods dispatches days and preserves columns") {
    SessionConfig cfg = short_session(3);
    cfg.periods = {{"pre", Date{2014, 1, 1}, Date{2014, 2, 28}},
                   {"mid", Date{2014, 3, 1}, Date{2014, 5, 31}},
                   {"post", Date{2014, 6, 1}, Date{2014, 12, 31}}};
    // 42 trading days in Jan-Feb, 46 in Mar-May, 141 in Jun-Dec.
    std::vector<Date> days = consecutive_days(Date{2014, 1, 1}, 42);
    for (const Date& d : consecutive_days(Date{2014, 3, 1}, 46)) days.push_back(d);
    for (const Date& d : consecutive_days(Date{2014, 6, 1}, 141)) days.push_back(d);
    const ReturnsPanel panel = compute_log_returns({constant_bars("A", days, 3)}, cfg, {});
    const auto parts = split_periods(panel, cfg);
    REQUIRE(parts.size() == 3);
    CHECK(parts[0].period == "pre");
    CHECK(parts[0].dates.size() == 42);
    CHECK(parts[1].dates.size() == 46);
    CHECK(parts[2].dates.size() == 141);
    CHECK(parts[0].rows() == 84);
    CHECK(parts[0].symbols == panel.symbols);

    SUBCASE("uncovered trading day is an error") {
        SessionConfig partial = cfg;
        partial.periods = {{"pre", Date{2014, 1, 1}, Date{2014, 2, 28}}};
        CHECK_THROWS(split_periods(panel, partial));
    }
}

TEST_CASE("split_periods with a single covering period is the identity") {
    SessionConfig cfg = short_session(3);
    cfg.periods = {{"everything", Date{2014, 1, 1}, Date{2014, 12, 31}}};
    const auto days = consecutive_days(Date{2014, 1, 2}, 4);
    const ReturnsPanel panel = compute_log_returns({constant_bars("A", days, 3)}, cfg, {});
    const auto parts = split_periods(panel, cfg);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].returns == panel.returns);
    CHECK(parts[0].dates == panel.dates);
}

TEST_CASE("split_periods allows a period with no trading days") {
    SessionConfig cfg = short_session(3);
    cfg.periods = {{"jan", Date{2014, 1, 1}, Date{2014, 1, 31}},
                   {"feb", Date{2014, 2, 1}, Date{2014, 2, 28}}};
    const auto days = consecutive_days(Date{2014, 1, 2}, 3);
    const ReturnsPanel panel = compute_log_returns({constant_bars("A", days, 3)}, cfg, {});
    const auto parts = split_periods(panel, cfg);
    REQUIRE(parts.size() == 2);
    CHECK(parts[1].dates.empty());
    CHECK(parts[1].rows() == 0);
}

TEST_CASE("filter_symbols drops a symbol exceeding the threshold in any period") {
    SessionConfig cfg = short_session(10);
    cfg.periods = {{"p1", Date{2014, 1, 1}, Date{2014, 1, 10}},
                   {"p2", Date{2014, 2, 1}, Date{2014, 2, 10}}};
    std::vector<Date> days = consecutive_days(Date{2014, 1, 2}, 2);
    for (const Date& d : consecutive_days(Date{2014, 2, 3}, 2)) days.push_back(d);

    BarSeries clean = constant_bars("CLEAN", days, 10);
    BarSeries gappy = constant_bars("GAPPY", days, 10);
    // 30% of windows forward-filled, but only in the second period.
    for (int w = 0; w < 3; ++w) {
        gappy.bars[2 * 10 + static_cast<size_t>(w)].filled = true;
        gappy.bars[3 * 10 + static_cast<size_t>(w)].filled = true;
    }
    const ReturnsPanel panel = compute_log_returns({clean, gappy}, cfg, {});
    const auto parts = split_periods(panel, cfg);

    FilterReport report;
    const auto kept = filter_symbols(parts, 0.2, &report);
    REQUIRE(report.dropped == std::vector<std::string>{"GAPPY"});
    for (const ReturnsPanel& p : kept) {
        CHECK(p.symbols == std::vector<std::string>{"CLEAN"});
        CHECK(p.cols() == 1);
    }
    CHECK(report.worst_fraction.at("GAPPY") == doctest::Approx(0.3));

    SUBCASE("threshold 1 keeps everything") {
        const auto all = filter_symbols(parts, 1.0, nullptr);
        CHECK(all[0].cols() == 2);
    }
    SUBCASE("dropping every symbol is an error") {
        BarSeries only = constant_bars("ONLY", days, 10);
        for (auto& bar : only.bars) bar.filled = true;
        const ReturnsPanel p2 = compute_log_returns({only}, cfg, {});
        CHECK_THROWS(filter_symbols(split_periods(p2, cfg), 0.2, nullptr));
    }
}

TEST_CASE("filtering 11 of 100 symbols leaves 89 survivors") {
    SessionConfig cfg = short_session(10);
    const auto days = consecutive_days(Date{2014, 1, 2}, 2);
    std::vector<BarSeries> bars;
    char name[8];
    for (int s = 0; s < 100; ++s) {
        std::snprintf(name, sizeof name, "S%03d", s);
        BarSeries b = constant_bars(name, days, 10);
        if (s < 11)  // the first 11 symbols have 60% of windows forward-filled
            for (size_t w = 0; w < b.bars.size(); w += 2) {
                b.bars[w].filled = true;
                b.bars[w + 1].filled = w % 4 == 0;
            }
        bars.push_back(std::move(b));
    }
    const ReturnsPanel panel = compute_log_returns(bars, cfg, {});
    const auto kept = filter_symbols({panel}, 0.2, nullptr);
    CHECK(kept[0].cols() == 89);
}

TEST_CASE("sector metadata parsing") {
    std::istringstream in("symbol,sector\nINFY,IT\nYESBANK,FINANCIAL SERVICES\n");
    const auto sectors = parse_sector_map(in);
    CHECK(sectors.at("INFY") == "IT");
    CHECK(sectors.at("YESBANK") == "FINANCIAL SERVICES");
    std::istringstream bad("sym,sec\n");
    CHECK_THROWS(parse_sector_map(bad));
}

TEST_CASE("session config validation") {
    SessionConfig cfg = short_session();
    CHECK_NOTHROW(cfg.validate());
    cfg.session_close = cfg.session_open;
    CHECK_THROWS(cfg.validate());
    cfg = short_session();
    cfg.bar_seconds = 7;  // session length not a multiple
    CHECK_THROWS(cfg.validate());
    cfg = short_session();
    cfg.periods = {{"b", Date{2014, 2, 1}, Date{2014, 2, 10}},
                   {"a", Date{2014, 1, 1}, Date{2014, 3, 10}}};  // overlapping/misordered
    CHECK_THROWS(cfg.validate());
}
