#include "ticknet/synth.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "ticknet/rng.hpp"

namespace ticknet {

int MarketSpec::symbol_count() const {
    int k = 0;
    for (const SectorSpec& s : sectors) k += s.size;
    return k;
}

std::vector<Date> MarketSpec::trading_dates() const {
    if (!dates.empty()) return dates;
    std::vector<Date> out;
    out.reserve(static_cast<size_t>(days));
    const int64_t base = start_date.serial();
    for (int d = 0; d < days; ++d) out.push_back(Date::from_serial(base + d));
    return out;
}

SessionConfig MarketSpec::session() const {
    SessionConfig cfg;
    cfg.session_open = session_open;
    cfg.session_close = TimeOfDay{session_open.seconds + windows_per_day * bar_seconds};
    cfg.bar_seconds = bar_seconds;
    cfg.trading_days = trading_dates();
    return cfg;
}

void MarketSpec::validate() const {
    if (sectors.empty()) throw std::invalid_argument("market spec: no sectors");
    if (market_beta < 0.0 || market_beta >= 1.0)
        throw std::invalid_argument("market spec: market_beta must be in [0, 1)");
    const double beta2 = market_beta * market_beta;
    for (const SectorSpec& s : sectors) {
        if (s.size < 1) throw std::invalid_argument("market spec: sector size must be >= 1");
        if (s.intra_correlation < 0.0 || s.intra_correlation >= 1.0)
            throw std::invalid_argument("market spec: intra_correlation must be in [0, 1)");
        if (s.intra_correlation < beta2)
            throw std::invalid_argument(
                "market spec: intra_correlation below market_beta^2 makes the implied "
                "correlation matrix non-positive-definite");
    }
    if (days < 1 && dates.empty()) throw std::invalid_argument("market spec: days must be >= 1");
    if (windows_per_day < 2)
        throw std::invalid_argument("market spec: windows_per_day must be >= 2");
    if (return_scale <= 0.0) throw std::invalid_argument("market spec: return_scale must be > 0");
    if (price_scale <= 0.0) throw std::invalid_argument("market spec: price_scale must be > 0");
    const int k = symbol_count();
    std::vector<bool> overwritten(static_cast<size_t>(k), false);
    for (const NonlinearPair& p : nonlinear_pairs) {
        if (p.x < 0 || p.x >= k || p.y < 0 || p.y >= k || p.x == p.y)
            throw std::invalid_argument("market spec: bad nonlinear pair indices");
        if (overwritten[static_cast<size_t>(p.y)] || overwritten[static_cast<size_t>(p.x)])
            throw std::invalid_argument("market spec: nonlinear pairs must not chain");
        overwritten[static_cast<size_t>(p.y)] = true;
    }
}

std::vector<std::pair<std::string, std::string>> market_symbols(const MarketSpec& spec) {
    std::vector<std::pair<std::string, std::string>> out;
    char buf[32];
    for (const SectorSpec& s : spec.sectors) {
        for (int i = 0; i < s.size; ++i) {
            std::snprintf(buf, sizeof buf, "%s%02d", s.name.c_str(), i);
            out.emplace_back(buf, s.name);
        }
    }
    return out;
}

ReturnsPanel generate_returns(const MarketSpec& spec) {
    spec.validate();
    const int k = spec.symbol_count();
    const std::vector<Date> dates = spec.trading_dates();
    const auto n_days = static_cast<Eigen::Index>(dates.size());
    const Eigen::Index m = n_days * (spec.windows_per_day - 1);

    ReturnsPanel panel;
    panel.period = "synthetic";
    panel.dates = dates;
    panel.windows_per_day = spec.windows_per_day;
    panel.session_open = spec.session_open;
    panel.bar_seconds = spec.bar_seconds;
    panel.returns.resize(m, k);
    panel.filled_counts = Eigen::MatrixXi::Zero(n_days, k);

    std::vector<int> sector_of(static_cast<size_t>(k));
    std::vector<double> sector_loading(spec.sectors.size());
    std::vector<double> idio_loading(static_cast<size_t>(k));
    const double beta2 = spec.market_beta * spec.market_beta;
    for (const auto& [symbol, sector] : market_symbols(spec)) {
        panel.symbols.push_back(symbol);
        panel.sectors.push_back(sector);
    }
    {
        int c = 0;
        for (size_t s = 0; s < spec.sectors.size(); ++s) {
            sector_loading[s] = std::sqrt(spec.sectors[s].intra_correlation - beta2);
            for (int i = 0; i < spec.sectors[s].size; ++i, ++c) {
                sector_of[static_cast<size_t>(c)] = static_cast<int>(s);
                idio_loading[static_cast<size_t>(c)] =
                    std::sqrt(1.0 - spec.sectors[s].intra_correlation);
            }
        }
    }

    Rng rng(derive_seed(spec.seed, "returns"));
    std::vector<Rng> pair_rng;
    pair_rng.reserve(spec.nonlinear_pairs.size());
    for (const NonlinearPair& p : spec.nonlinear_pairs)
        pair_rng.emplace_back(derive_seed(spec.seed, "nonlinear", static_cast<uint64_t>(p.y)));

    // Var(sin(4X)) for standard normal X.
    const double sine_var = 0.5 * (1.0 - std::exp(-32.0));
    std::vector<double> factors(spec.sectors.size());
    for (Eigen::Index t = 0; t < m; ++t) {
        const double g = rng.normal();
        for (double& f : factors) f = rng.normal();
        for (int c = 0; c < k; ++c) {
            const double eps = rng.normal();
            const double x = spec.market_beta * g +
                             sector_loading[static_cast<size_t>(sector_of[static_cast<size_t>(c)])] *
                                 factors[static_cast<size_t>(sector_of[static_cast<size_t>(c)])] +
                             idio_loading[static_cast<size_t>(c)] * eps;
            panel.returns(t, c) = x;
        }
        for (size_t p = 0; p < spec.nonlinear_pairs.size(); ++p) {
            const NonlinearPair& np = spec.nonlinear_pairs[p];
            const double x = panel.returns(t, np.x);
            double y;
            if (np.form == CouplingForm::square) {
                y = (x * x - 1.0) / std::sqrt(2.0);  // standardized for standard normal x
            } else {
                y = (std::sin(4.0 * x) + 0.1 * pair_rng[p].normal()) /
                    std::sqrt(sine_var + 0.01);
            }
            panel.returns(t, np.y) = y;
        }
    }
    panel.returns *= spec.return_scale;
    return panel;
}

void generate_ticks(const MarketSpec& spec, std::ostream& out) {
    const ReturnsPanel panel = generate_returns(spec);
    const int k = spec.symbol_count();
    const int W = spec.windows_per_day;
    const auto n_days = static_cast<Eigen::Index>(panel.dates.size());

    out << "timestamp,symbol,price,volume\n";
    std::vector<double> log_price(static_cast<size_t>(k));
    for (Eigen::Index d = 0; d < n_days; ++d) {
        for (int c = 0; c < k; ++c)
            log_price[static_cast<size_t>(c)] =
                std::log(spec.price_scale * (1.0 + 0.01 * c));  // per-day base price
        for (int w = 0; w < W; ++w) {
            const Timestamp ts{panel.dates[static_cast<size_t>(d)],
                               spec.session_open.seconds + w * spec.bar_seconds};
            const std::string prefix = ts.to_string();
            for (int c = 0; c < k; ++c) {
                if (w > 0)
                    log_price[static_cast<size_t>(c)] +=
                        panel.returns(d * (W - 1) + (w - 1), c);
                const Decimal price = Decimal::from_double(std::exp(log_price[static_cast<size_t>(c)]));
                out << prefix << ',' << panel.symbols[static_cast<size_t>(c)] << ','
                    << price.to_string() << ",100\n";
            }
        }
    }
}

std::string truth_sidecar(const MarketSpec& spec) {
    spec.validate();
    nlohmann::json j;
    j["seed"] = spec.seed;
    j["market_beta"] = spec.market_beta;
    j["cross_sector_correlation"] = spec.market_beta * spec.market_beta;
    j["return_scale"] = spec.return_scale;
    j["price_scale"] = spec.price_scale;
    j["days"] = static_cast<int>(spec.trading_dates().size());
    j["windows_per_day"] = spec.windows_per_day;
    j["sectors"] = nlohmann::json::array();
    const auto table = market_symbols(spec);
    size_t offset = 0;
    for (const SectorSpec& s : spec.sectors) {
        nlohmann::json js;
        js["name"] = s.name;
        js["size"] = s.size;
        js["intra_correlation"] = s.intra_correlation;
        auto members = nlohmann::json::array();
        for (int i = 0; i < s.size; ++i) members.push_back(table[offset++].first);
        js["symbols"] = members;
        j["sectors"].push_back(js);
    }
    j["nonlinear_pairs"] = nlohmann::json::array();
    for (const NonlinearPair& p : spec.nonlinear_pairs) {
        j["nonlinear_pairs"].push_back(
            {{"x", p.x}, {"y", p.y},
             {"form", p.form == CouplingForm::square ? "square" : "sine"}});
    }
    return j.dump(2) + "\n";
}

}  // namespace ticknet
