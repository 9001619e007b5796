#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ticknet/ingest.hpp"

namespace ticknet {

struct SectorSpec {
    std::string name;
    int size = 0;
    double intra_correlation = 0;  // total pairwise correlation inside the sector
};

enum class CouplingForm { square, sine };

/// Overwrite symbol y with a nonlinear function of symbol x's returns.
struct NonlinearPair {
    int x = 0;
    int y = 0;
    CouplingForm form = CouplingForm::square;
};

/// Synthetic market with known ground truth: one global factor, one factor
/// per sector, idiosyncratic noise, and optional nonlinear couplings.
/// Correlations implied by construction: market_beta^2 across sectors,
/// intra_correlation inside a sector.
struct MarketSpec {
    std::vector<SectorSpec> sectors;
    double market_beta = 0.0;  // global-factor loading, in [0, 1)
    std::vector<NonlinearPair> nonlinear_pairs;
    int days = 1;
    int windows_per_day = 720;
    uint64_t seed = 1;
    double return_scale = 1e-3;  // per-window return standard deviation
    double price_scale = 100.0;  // base price for tick generation
    std::vector<Date> dates;     // optional; default is consecutive days from start_date
    Date start_date{2014, 1, 1};
    TimeOfDay session_open{9 * 3600 + 30 * 60};
    int bar_seconds = 30;

    [[nodiscard]] int symbol_count() const;
    [[nodiscard]] std::vector<Date> trading_dates() const;
    /// Session matching this spec's grid, for feeding ingest.
    [[nodiscard]] SessionConfig session() const;
    void validate() const;
};

/// (symbol, sector) pairs in column order, e.g. FIN00, FIN01, ...
std::vector<std::pair<std::string, std::string>> market_symbols(const MarketSpec& spec);

/// Sample the factor model; returns a panel shaped exactly like ingest
/// output (m = days * (windows_per_day - 1) rows). Deterministic in seed.
ReturnsPanel generate_returns(const MarketSpec& spec);

/// Emit a tick CSV whose ingest round-trip reproduces generate_returns
/// within quantization error (one trade per window at the implied price).
void generate_ticks(const MarketSpec& spec, std::ostream& out);

/// Ground-truth sidecar content (JSON text) describing the planted
/// structure: sector membership, implied correlations, couplings, seed.
std::string truth_sidecar(const MarketSpec& spec);

}  // namespace ticknet
