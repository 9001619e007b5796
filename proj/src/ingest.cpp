#include "ticknet/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>
#include <stdexcept>

#include "ticknet/csv.hpp"
#include "ticknet/parallel.hpp"

namespace ticknet {

void SessionConfig::validate() const {
    if (session_close.seconds <= session_open.seconds)
        throw std::invalid_argument("session_close must be after session_open");
    if (bar_seconds <= 0) throw std::invalid_argument("bar_seconds must be positive");
    if ((session_close.seconds - session_open.seconds) % bar_seconds != 0)
        throw std::invalid_argument("session length must be a multiple of bar_seconds");
    if (max_empty_fraction < 0.0 || max_empty_fraction > 1.0)
        throw std::invalid_argument("max_empty_fraction must be in [0, 1]");
    for (size_t i = 0; i < periods.size(); ++i) {
        if (periods[i].end < periods[i].begin)
            throw std::invalid_argument("period '" + periods[i].name + "' has end before begin");
        if (i > 0 && !(periods[i - 1].end < periods[i].begin))
            throw std::invalid_argument("periods must be disjoint and ordered");
    }
    for (size_t i = 1; i < trading_days.size(); ++i)
        if (!(trading_days[i - 1] < trading_days[i]))
            throw std::invalid_argument("trading_days must be strictly increasing");
}

ParsedTicks parse_ticks(std::istream& source, const SessionConfig& config) {
    config.validate();
    ParsedTicks out;
    std::string line;
    uint64_t header_line = 0;
    // Provenance comments may precede the header.
    do {
        if (!std::getline(source, line)) throw std::runtime_error("tick input is empty");
        ++header_line;
    } while (!trim(line).empty() && trim(line).front() == '#');
    if (trim(line) != "timestamp,symbol,price,volume")
        throw std::runtime_error("tick CSV must start with header 'timestamp,symbol,price,volume'");

    std::set<Date> day_filter(config.trading_days.begin(), config.trading_days.end());
    std::set<Date> seen_days;
    std::map<std::string, size_t> symbol_index;

    auto fail_or_skip = [&](uint64_t line_no, const std::string& why) {
        std::string msg = "line " + std::to_string(line_no) + ": " + why;
        if (config.strict) throw std::runtime_error("tick parse error, " + msg);
        ++out.rows_skipped;
        if (out.warnings.size() < 20) out.warnings.push_back(msg);
    };

    uint64_t line_no = header_line;
    while (std::getline(source, line)) {
        ++line_no;
        std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        ++out.rows_read;
        auto fields = split_csv(body);
        if (fields.size() != 4) {
            fail_or_skip(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
            continue;
        }
        TickRecord rec;
        try {
            rec.ts = Timestamp::parse(trim(fields[0]));
            rec.symbol = std::string(trim(fields[1]));
            rec.price = Decimal::parse(trim(fields[2]));
            std::string vol(trim(fields[3]));
            size_t used = 0;
            long long v = std::stoll(vol, &used);
            if (used != vol.size() || v < 0) throw std::invalid_argument("bad volume");
            rec.volume = static_cast<uint64_t>(v);
        } catch (const std::exception& e) {
            fail_or_skip(line_no, e.what());
            continue;
        }
        if (rec.symbol.empty()) {
            fail_or_skip(line_no, "empty symbol");
            continue;
        }
        if (rec.price.units <= 0) {
            fail_or_skip(line_no, "non-positive price");
            continue;
        }
        if (rec.volume < 1) {
            fail_or_skip(line_no, "zero volume");
            continue;
        }
        if (rec.ts.seconds < config.session_open.seconds ||
            rec.ts.seconds >= config.session_close.seconds) {
            ++out.rows_dropped_session;
            continue;
        }
        if (!day_filter.empty() && !day_filter.count(rec.ts.date)) {
            ++out.rows_dropped_offday;
            continue;
        }
        seen_days.insert(rec.ts.date);
        auto [it, inserted] = symbol_index.try_emplace(rec.symbol, out.by_symbol.size());
        if (inserted) out.by_symbol.emplace_back();
        out.by_symbol[it->second].push_back(std::move(rec));
    }

    // Re-order symbol groups alphabetically for a stable downstream layout.
    std::vector<std::vector<TickRecord>> ordered;
    ordered.reserve(symbol_index.size());
    for (auto& [sym, idx] : symbol_index) {
        out.symbols.push_back(sym);
        ordered.push_back(std::move(out.by_symbol[idx]));
    }
    out.by_symbol = std::move(ordered);
    for (auto& group : out.by_symbol)
        std::stable_sort(group.begin(), group.end(),
                         [](const TickRecord& a, const TickRecord& b) { return a.ts < b.ts; });

    out.trading_days = config.trading_days.empty()
                           ? std::vector<Date>(seen_days.begin(), seen_days.end())
                           : config.trading_days;
    return out;
}

BarSeries build_vwap_bars(std::span<const TickRecord> ticks, const SessionConfig& config,
                          std::span<const Date> trading_days) {
    config.validate();
    if (ticks.empty()) throw std::invalid_argument("build_vwap_bars: no ticks for symbol");
    const int W = config.windows_per_day();

    BarSeries series;
    series.symbol = ticks.front().symbol;
    series.windows_per_day = W;
    series.days.assign(trading_days.begin(), trading_days.end());
    series.bars.assign(series.days.size() * static_cast<size_t>(W), Bar{});
    series.day_had_no_ticks.assign(series.days.size(), 0);

    std::map<Date, size_t> day_index;
    for (size_t d = 0; d < series.days.size(); ++d) day_index[series.days[d]] = d;

    std::vector<int64_t> day_first_price(series.days.size(), 0);  // day's opening trade
    for (const TickRecord& t : ticks) {
        if (t.symbol != series.symbol)
            throw std::invalid_argument("build_vwap_bars: mixed symbols in input");
        auto it = day_index.find(t.ts.date);
        if (it == day_index.end())
            throw std::invalid_argument("build_vwap_bars: tick on unknown trading day " +
                                        t.ts.date.to_string());
        int w = (t.ts.seconds - config.session_open.seconds) / config.bar_seconds;
        if (w < 0 || w >= W)
            throw std::invalid_argument("build_vwap_bars: tick outside session");
        Bar& bar = series.bars[it->second * W + w];
        bar.value_num += static_cast<__int128>(t.volume) * t.price.units;
        bar.value_den += t.volume;
        if (day_first_price[it->second] == 0) day_first_price[it->second] = t.price.units;
    }

    // Fill pass. Within a day: leading empty windows take the day's first
    // trade value; later empties carry the previous window. A day with no
    // trades carries the previous day's close (flagged); fully empty leading
    // days are back-filled from the first traded value once known.
    bool have_prev = false;
    Bar prev{};
    size_t first_unfillable = series.bars.size();
    for (size_t d = 0; d < series.days.size(); ++d) {
        Bar* day = &series.bars[d * W];
        int first_trade = -1;
        for (int w = 0; w < W; ++w)
            if (day[w].value_den > 0) {
                first_trade = w;
                break;
            }
        if (first_trade < 0) {
            series.day_had_no_ticks[d] = 1;
            for (int w = 0; w < W; ++w) {
                if (have_prev) {
                    day[w] = prev;
                    day[w].filled = true;
                } else {
                    first_unfillable = std::min(first_unfillable, d * W + w);
                }
            }
            continue;
        }
        for (int w = 0; w < first_trade; ++w) {
            day[w].value_num = day_first_price[d];  // the day's opening trade price
            day[w].value_den = 1;
            day[w].filled = true;
        }
        for (int w = first_trade + 1; w < W; ++w) {
            if (day[w].value_den == 0) {
                day[w].value_num = day[w - 1].value_num;
                day[w].value_den = day[w - 1].value_den;
                day[w].filled = true;
            }
        }
        prev = day[W - 1];
        prev.filled = false;
        have_prev = true;
    }
    if (first_unfillable < series.bars.size()) {
        // Leading all-empty days: back-fill from the first real value.
        Bar seed{};
        for (size_t b = first_unfillable; b < series.bars.size(); ++b)
            if (series.bars[b].value_den > 0) {
                seed = series.bars[b];
                break;
            }
        if (seed.value_den == 0)
            throw std::invalid_argument("build_vwap_bars: symbol has no usable trades");
        for (size_t b = 0; b < series.bars.size() && series.bars[b].value_den == 0; ++b) {
            series.bars[b] = seed;
            series.bars[b].filled = true;
        }
    }
    return series;
}

Timestamp ReturnsPanel::row_time(Eigen::Index r) const {
    const int per_day = windows_per_day - 1;
    const auto day = static_cast<size_t>(r / per_day);
    const int slot = static_cast<int>(r % per_day);
    return Timestamp{dates[day], session_open.seconds + slot * bar_seconds};
}

double ReturnsPanel::filled_fraction(Eigen::Index symbol) const {
    const double total =
        static_cast<double>(dates.size()) * static_cast<double>(windows_per_day);
    if (total == 0) return 0.0;
    return filled_counts.col(symbol).cast<double>().sum() / total;
}

ReturnsPanel compute_log_returns(const std::vector<BarSeries>& bars, const SessionConfig& config,
                                 const std::map<std::string, std::string>& sectors) {
    if (bars.empty()) throw std::invalid_argument("compute_log_returns: no symbols");
    const int W = config.windows_per_day();
    const size_t n_days = bars.front().days.size();
    for (const BarSeries& b : bars) {
        if (b.windows_per_day != W || b.days.size() != n_days || b.days != bars.front().days)
            throw std::invalid_argument("compute_log_returns: mismatched bar grids across symbols");
    }

    ReturnsPanel panel;
    panel.windows_per_day = W;
    panel.session_open = config.session_open;
    panel.bar_seconds = config.bar_seconds;
    panel.dates = bars.front().days;
    const auto k = static_cast<Eigen::Index>(bars.size());
    const auto m = static_cast<Eigen::Index>(n_days * static_cast<size_t>(W - 1));
    panel.returns.resize(m, k);
    panel.filled_counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n_days), k);

    for (Eigen::Index c = 0; c < k; ++c) {
        const BarSeries& b = bars[static_cast<size_t>(c)];
        panel.symbols.push_back(b.symbol);
        auto sec = sectors.find(b.symbol);
        panel.sectors.push_back(sec == sectors.end() ? std::string("UNKNOWN") : sec->second);
        Eigen::Index row = 0;
        for (size_t d = 0; d < n_days; ++d) {
            const Bar* day = &b.bars[d * static_cast<size_t>(W)];
            int filled = 0;
            for (int w = 0; w < W; ++w) filled += day[w].filled ? 1 : 0;
            panel.filled_counts(static_cast<Eigen::Index>(d), c) = filled;
            for (int w = 0; w + 1 < W; ++w) {
                // Identical carried-over rationals difference to exactly 0.
                const Bar &a = day[w], &nb = day[w + 1];
                double r = (a.value_num == nb.value_num && a.value_den == nb.value_den)
                               ? 0.0
                               : nb.log_vwap() - a.log_vwap();
                panel.returns(row++, c) = r;
            }
        }
    }
    return panel;
}

ReturnsPanel ingest_panel(std::istream& ticks, const SessionConfig& config,
                          const std::map<std::string, std::string>& sectors,
                          ParsedTicks* parse_info) {
    ParsedTicks parsed = parse_ticks(ticks, config);
    if (parsed.symbols.empty()) throw std::runtime_error("no usable ticks in input");
    std::vector<BarSeries> bars(parsed.symbols.size());
    parallel_for(parsed.symbols.size(), [&](size_t i) {
        bars[i] = build_vwap_bars(parsed.by_symbol[i], config, parsed.trading_days);
    });
    if (parse_info) *parse_info = std::move(parsed);
    return compute_log_returns(bars, config, sectors);
}

std::vector<ReturnsPanel> split_periods(const ReturnsPanel& panel, const SessionConfig& config) {
    std::vector<PeriodRange> periods = config.periods;
    if (periods.empty() && !panel.dates.empty())
        periods.push_back({"all", panel.dates.front(), panel.dates.back()});

    std::vector<ReturnsPanel> out;
    std::vector<std::vector<size_t>> day_sets(periods.size());
    for (size_t d = 0; d < panel.dates.size(); ++d) {
        const Date& date = panel.dates[d];
        bool covered = false;
        for (size_t p = 0; p < periods.size(); ++p) {
            if (!(date < periods[p].begin) && !(periods[p].end < date)) {
                day_sets[p].push_back(d);
                covered = true;
                break;
            }
        }
        if (!covered)
            throw std::runtime_error("trading day " + date.to_string() +
                                     " is not covered by any period");
    }

    const int per_day = panel.windows_per_day - 1;
    for (size_t p = 0; p < periods.size(); ++p) {
        ReturnsPanel sub;
        sub.period = periods[p].name;
        sub.symbols = panel.symbols;
        sub.sectors = panel.sectors;
        sub.windows_per_day = panel.windows_per_day;
        sub.session_open = panel.session_open;
        sub.bar_seconds = panel.bar_seconds;
        const auto n_days = static_cast<Eigen::Index>(day_sets[p].size());
        sub.returns.resize(n_days * per_day, panel.cols());
        sub.filled_counts.resize(n_days, panel.cols());
        for (Eigen::Index d = 0; d < n_days; ++d) {
            const size_t src = day_sets[p][static_cast<size_t>(d)];
            sub.dates.push_back(panel.dates[src]);
            sub.returns.middleRows(d * per_day, per_day) =
                panel.returns.middleRows(static_cast<Eigen::Index>(src) * per_day, per_day);
            sub.filled_counts.row(d) = panel.filled_counts.row(static_cast<Eigen::Index>(src));
        }
        out.push_back(std::move(sub));
    }
    return out;
}

std::vector<ReturnsPanel> filter_symbols(const std::vector<ReturnsPanel>& panels,
                                         double max_empty_fraction, FilterReport* report) {
    if (max_empty_fraction < 0.0 || max_empty_fraction > 1.0)
        throw std::invalid_argument("max_empty_fraction must be in [0, 1]");
    if (panels.empty()) return {};
    const Eigen::Index k = panels.front().cols();

    FilterReport local;
    std::vector<bool> keep(static_cast<size_t>(k), true);
    for (Eigen::Index c = 0; c < k; ++c) {
        double worst = 0.0;
        for (const ReturnsPanel& p : panels) worst = std::max(worst, p.filled_fraction(c));
        local.worst_fraction[panels.front().symbols[static_cast<size_t>(c)]] = worst;
        if (worst > max_empty_fraction) {
            keep[static_cast<size_t>(c)] = false;
            local.dropped.push_back(panels.front().symbols[static_cast<size_t>(c)]);
        }
    }
    Eigen::Index kept = 0;
    for (bool b : keep) kept += b ? 1 : 0;
    if (kept == 0) throw std::runtime_error("filter_symbols: every symbol exceeded the threshold");

    std::vector<ReturnsPanel> out;
    for (const ReturnsPanel& p : panels) {
        ReturnsPanel sub = p;
        sub.symbols.clear();
        sub.sectors.clear();
        sub.returns.resize(p.rows(), kept);
        sub.filled_counts.resize(p.filled_counts.rows(), kept);
        Eigen::Index dst = 0;
        for (Eigen::Index c = 0; c < k; ++c) {
            if (!keep[static_cast<size_t>(c)]) continue;
            sub.symbols.push_back(p.symbols[static_cast<size_t>(c)]);
            sub.sectors.push_back(p.sectors[static_cast<size_t>(c)]);
            sub.returns.col(dst) = p.returns.col(c);
            sub.filled_counts.col(dst) = p.filled_counts.col(c);
            ++dst;
        }
        out.push_back(std::move(sub));
    }
    if (report) *report = std::move(local);
    return out;
}

std::map<std::string, std::string> parse_sector_map(std::istream& source) {
    std::map<std::string, std::string> out;
    std::string line;
    uint64_t line_no = 0;
    do {
        if (!std::getline(source, line))
            throw std::runtime_error("sector CSV must start with header 'symbol,sector'");
        ++line_no;
    } while (!trim(line).empty() && trim(line).front() == '#');
    if (trim(line) != "symbol,sector")
        throw std::runtime_error("sector CSV must start with header 'symbol,sector'");
    while (std::getline(source, line)) {
        ++line_no;
        std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto fields = split_csv(body);
        if (fields.size() != 2)
            throw std::runtime_error("sector CSV line " + std::to_string(line_no) +
                                     ": expected 2 fields");
        out[std::string(trim(fields[0]))] = std::string(trim(fields[1]));
    }
    return out;
}

}  // namespace ticknet
